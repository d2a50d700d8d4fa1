"""Build script for the optional compiled kernel extension.

The package works without the extension (a NumPy reference backend is
selected at import time), so the build is best-effort: if Cython or a C
compiler is missing we fall back to a pure-Python install.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "cornerflow._kernels_fast",
                ["src/cornerflow/_kernels_fast.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
