"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; the NumPy
reference implementation is the fallback and the ground truth in tests.
Set CORNERFLOW_BACKEND=ref|fast to force a choice (useful for benchmarks
and for reproducing results on machines without a compiler).
"""

import os

from . import _kernels_ref

try:
    from . import _kernels_fast
except ImportError:  # extension not built on this install
    _kernels_fast = None


def available_backends() -> dict:
    """Name -> module map of importable kernel backends."""
    found = {"ref": _kernels_ref}
    if _kernels_fast is not None:
        found["fast"] = _kernels_fast
    return found


def _select():
    choice = os.environ.get("CORNERFLOW_BACKEND", "").strip().lower()
    found = available_backends()
    if choice:
        if choice not in found:
            raise ImportError(
                f"CORNERFLOW_BACKEND={choice!r} requested but only "
                f"{sorted(found)} are available"
            )
        return choice, found[choice]
    if "fast" in found:
        return "fast", found["fast"]
    return "ref", found["ref"]


BACKEND_NAME, _impl = _select()

momentum_sum = _impl.momentum_sum
stream_sum = _impl.stream_sum
freespace_sum = _impl.freespace_sum
