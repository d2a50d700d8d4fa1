"""Reference and compiled kernels must agree to machine precision."""

import numpy as np
import pytest

from cornerflow import _backend
from cornerflow import _kernels_ref as ref


def random_case(rng, nt, ns, interior=False):
    lo, hi = (0.1, 0.9) if interior else (1.1, 3.5)
    def points(n):
        r = rng.uniform(lo, hi, n)
        th = rng.uniform(0.0, 2.0 * np.pi, n)
        return np.ascontiguousarray(r * np.exp(1j * th))
    zt = points(nt)
    zp = points(ns)
    gam = np.ascontiguousarray(rng.uniform(-1.0, 1.0, ns))
    dl2 = np.ascontiguousarray(rng.uniform(0.0, 0.01, ns))
    return zt, zp, gam, dl2


def has_fast():
    return "fast" in _backend.available_backends()


def test_ref_backend_always_available():
    assert "ref" in _backend.available_backends()
    assert _backend.BACKEND_NAME in _backend.available_backends()


@pytest.mark.skipif(not has_fast(), reason="compiled backend not built")
def test_backends_agree_exterior():
    fast = _backend.available_backends()["fast"]
    rng = np.random.default_rng(51)
    zt, zp, gam, dl2 = random_case(rng, 37, 61)
    for alpha in (0.0, 0.7):
        for excl in (False, True):
            if excl:
                a = ref.momentum_sum(zp, zp, gam, dl2, alpha, True)
                b = fast.momentum_sum(zp, zp, gam, dl2, alpha, True)
            else:
                a = ref.momentum_sum(zt, zp, gam, dl2, alpha, False)
                b = fast.momentum_sum(zt, zp, gam, dl2, alpha, False)
            np.testing.assert_allclose(a, b, rtol=0, atol=1e-13)
    a = ref.stream_sum(zt, zp, gam, dl2, 0.7)
    b = fast.stream_sum(zt, zp, gam, dl2, 0.7)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-13)
    a = ref.freespace_sum(zt, zp, gam, dl2)
    b = fast.freespace_sum(zt, zp, gam, dl2)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-13)


@pytest.mark.skipif(not has_fast(), reason="compiled backend not built")
def test_backends_agree_interior():
    fast = _backend.available_backends()["fast"]
    rng = np.random.default_rng(52)
    zt, zp, gam, dl2 = random_case(rng, 23, 40, interior=True)
    # include the mapped origin, the most degenerate image configuration
    zp[0] = 0.0
    a = ref.momentum_sum(zt, zp, gam, dl2, 0.0, False)
    b = fast.momentum_sum(zt, zp, gam, dl2, 0.0, False)
    assert np.all(np.isfinite(a.view(np.float64)))
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-13)
    a = ref.stream_sum(zt, zp, gam, dl2, 0.0)
    b = fast.stream_sum(zt, zp, gam, dl2, 0.0)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-13)


def test_ref_chunking_is_seamless(monkeypatch):
    rng = np.random.default_rng(53)
    zt, zp, gam, dl2 = random_case(rng, 101, 57)
    whole_m = ref.momentum_sum(zt, zp, gam, dl2, 0.3, False)
    whole_s = ref.stream_sum(zt, zp, gam, dl2, 0.3)
    whole_f = ref.freespace_sum(zt, zp, gam, dl2)
    monkeypatch.setattr(ref, "_CHUNK_ENTRIES", 64)  # forces many row blocks
    np.testing.assert_array_equal(ref.momentum_sum(zt, zp, gam, dl2, 0.3, False), whole_m)
    np.testing.assert_array_equal(ref.stream_sum(zt, zp, gam, dl2, 0.3), whole_s)
    np.testing.assert_array_equal(ref.freespace_sum(zt, zp, gam, dl2), whole_f)


def test_exclude_self_drops_free_diagonal_keeps_image():
    # a particle never advects itself through the blob kernel, but its own
    # boundary image still does: the diagonal image term survives
    rng = np.random.default_rng(54)
    _, zp, gam, dl2 = random_case(rng, 1, 20)
    full = ref.momentum_sum(zp, zp, gam, dl2, 0.0, True)
    for j in (0, 7, 19):
        others = np.delete(np.arange(20), j)
        rest = ref.momentum_sum(
            zp[j : j + 1],
            np.ascontiguousarray(zp[others]),
            np.ascontiguousarray(gam[others]),
            np.ascontiguousarray(dl2[others]),
            0.0,
            False,
        )[0]
        self_image = -gam[j] * zp[j] / (abs(zp[j]) ** 2 - 1.0)
        assert abs(full[j] - (rest + self_image)) < 1e-13


def test_deterministic_reruns():
    rng = np.random.default_rng(55)
    zt, zp, gam, dl2 = random_case(rng, 64, 64)
    a = _backend.momentum_sum(zt, zp, gam, dl2, 0.2, False)
    b = _backend.momentum_sum(zt.copy(), zp.copy(), gam.copy(), dl2.copy(), 0.2, False)
    np.testing.assert_array_equal(a, b)


def test_env_override_rejects_unknown(monkeypatch):
    monkeypatch.setenv("CORNERFLOW_BACKEND", "gpu")
    with pytest.raises(ImportError):
        _backend._select()
    monkeypatch.setenv("CORNERFLOW_BACKEND", "ref")
    name, mod = _backend._select()
    assert name == "ref" and mod is ref
