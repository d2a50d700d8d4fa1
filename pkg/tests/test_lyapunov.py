"""Boundary functional: identities, sign conditions, pinch and envelope."""

import math

import numpy as np
import pytest

from cornerflow import (
    CirculationSpec,
    CoincidesWithParticle,
    EmptyTrace,
    LyapunovTrace,
    PatchSpec,
    SignConditionViolated,
    ValidationError,
    VortexEnsemble,
    check_L1_lower,
    check_L1_upper,
    dt_L1_formula,
    green_function,
    gronwall_monitor,
    make_map,
    orthogonality_residual,
    patch_init,
    sign_conditions,
    simulate,
    stream_L1,
    technic_bound_check,
)

TWO_PI = 2.0 * math.pi


def plate_setup(h=0.06):
    plate = make_map("exterior_segment")
    ens = patch_init(plate, PatchSpec("disk", 0.0 + 1.5j, 0.3, -1.0, h))
    circ = CirculationSpec.for_domain("exterior", 1.0, ens)
    return plate, ens, circ


# ---- values ------------------------------------------------------------------


def test_stream_frozen_value():
    ident = make_map("unit_disk_identity")
    got = stream_L1(ident, VortexEnsemble.empty(), CirculationSpec(1.0, 1.0), 2.0 + 0j)
    assert got == pytest.approx(math.log(2.0) / TWO_PI, abs=1e-15)


def test_stream_reduces_to_green_sum_when_unregularised():
    plate = make_map("exterior_segment")
    src = np.array([0.2 + 1.2j, -0.5 + 2.0j, 1.5 + 0.8j])
    gam = np.array([0.4, -0.3, 0.9])
    ens = VortexEnsemble(src, gam, np.zeros(3))
    circ = CirculationSpec(0.0, 0.0)
    x = 0.8 + 1.9j
    want = sum(g * green_function(plate, x, s) for g, s in zip(gam, src))
    assert stream_L1(plate, ens, circ, x) == pytest.approx(want, abs=1e-14)


def test_stream_finite_on_particles_when_regularised():
    plate, ens, circ = plate_setup()
    vals = []
    from cornerflow.lyapunov import stream_values

    vals = stream_values(plate, ens, circ, ens.z)
    assert np.all(np.isfinite(vals))


def test_stream_coincident_point_raises():
    plate, ens, circ = plate_setup()
    with pytest.raises(CoincidesWithParticle):
        stream_L1(plate, ens, circ, complex(ens.z[0]))


# ---- the two exact identities ---------------------------------------------------


def test_velocity_is_perp_gradient_everywhere():
    rng = np.random.default_rng(31)
    plate, ens, circ = plate_setup()
    # gap-region ring plus points nearer the patch
    zs = list(plate.inverse_values(1.35 * np.exp(1j * rng.uniform(0.3, 2.8, 6))))
    zs += [0.4 + 0.9j, -0.3 + 2.2j]
    for z in zs:
        assert orthogonality_residual(plate, ens, circ, z) < 1e-7


def test_orthogonality_on_interior_domain():
    wedge = make_map("interior_wedge_lens", {"alpha": 1.5 * math.pi})
    ens = patch_init(wedge, PatchSpec("disk", 0.85 + 0j, 0.12, 1.0, 0.03))
    circ = CirculationSpec.for_domain("interior", 0.0, ens)
    for z in (0.5 + 0.1j, 1.1 + 0.3j, 0.9 - 0.35j):
        assert orthogonality_residual(wedge, ens, circ, z) < 1e-7


def test_dt_formula_matches_run_differences():
    plate, ens, circ = plate_setup(h=0.08)
    res = simulate(plate, ens, circ, 0.4, dt=0.02, tracked=(0,))
    tr = res.traces[0]
    t_mid, fd = tr.fd_dt()
    _, _, dl1, _ = tr.as_arrays()
    scale = float(np.max(np.abs(dl1)))
    err = float(np.max(np.abs(dl1[1:-1] - fd))) / scale
    assert err < 2e-4


def test_dt_formula_fixed_probe_against_fd():
    # derivative at a fixed physical point, compared over a tiny step
    plate, ens, circ = plate_setup(h=0.08)
    x = 0.5 + 0.9j
    got = dt_L1_formula(plate, ens, circ, x)
    dt = 1e-5
    res = simulate(plate, ens, circ, dt, dt=dt)
    before = stream_L1(plate, ens, circ, x)
    after = stream_L1(plate, res.final_state.ensemble, circ, x)
    fd = (after - before) / dt
    assert got == pytest.approx(fd, rel=5e-4)


# ---- sign conditions ---------------------------------------------------------------


def test_sign_conditions_exterior():
    neg = VortexEnsemble([2 + 0j], [-1.0], [0.1])
    pos = VortexEnsemble([2 + 0j], [1.0], [0.1])
    mixed = VortexEnsemble([2 + 0j, 3 + 0j], [1.0, -1.0], [0.1, 0.1])
    assert sign_conditions("exterior", neg, CirculationSpec(2.0, 1.0)) == (True, 1.0)
    assert sign_conditions("exterior", pos, CirculationSpec(-2.0, -1.0)) == (True, -1.0)
    armed, _ = sign_conditions("exterior", neg, CirculationSpec(0.5, -0.5))
    assert not armed  # circulation does not cancel the vorticity
    armed, _ = sign_conditions("exterior", mixed, CirculationSpec(2.0, 2.0))
    assert not armed


def test_sign_conditions_interior():
    pos = VortexEnsemble([0.2 + 0j], [1.0], [0.1])
    assert sign_conditions("interior", pos, CirculationSpec(0.0, 0.0)) == (True, -1.0)


# ---- pinch bounds -------------------------------------------------------------------


def pinch_points(plate, gaps):
    pts = []
    for k, g in enumerate(gaps):
        th = (k + 0.37) * TWO_PI / len(gaps)
        pts.append(complex(plate.inverse_values(np.array([(1.0 + g) * np.exp(1j * th)]))[0]))
    return np.array(pts)


def test_pinch_upper_and_lower():
    plate, ens, circ = plate_setup()
    gaps = np.geomspace(1e-3, 1e-1, 7)
    pts = pinch_points(plate, gaps)
    up = check_L1_upper(plate, ens, circ, pts)
    lo = check_L1_lower(plate, ens, circ, pts)
    assert math.isfinite(up.constant) and up.constant > 0.0
    assert lo.constant > 0.0
    assert lo.gap_min == pytest.approx(1e-3, rel=1e-6)
    # the two bounds sandwich the sampled values
    from cornerflow.lyapunov import stream_values

    vals = stream_values(plate, ens, circ, pts)
    assert np.all(vals <= up.constant * np.sqrt(gaps) + 1e-15)
    assert np.all(vals >= lo.constant * gaps - 1e-15)


def test_pinch_lower_needs_sign_conditions():
    plate = make_map("exterior_segment")
    ens = VortexEnsemble([0 + 1.5j, 0 + 2.5j], [0.5, -0.5], [0.1, 0.1])
    circ = CirculationSpec(0.0, 0.0)
    pts = pinch_points(plate, np.geomspace(1e-3, 1e-1, 5))
    with pytest.raises(SignConditionViolated):
        check_L1_lower(plate, ens, circ, pts)


def test_pinch_rejects_outside_samples():
    plate, ens, circ = plate_setup()
    from cornerflow import PointOutsideDomain

    with pytest.raises(PointOutsideDomain):
        check_L1_upper(plate, ens, circ, np.array([0.5 + 0.0j]))


# ---- traces and the envelope ----------------------------------------------------------


def test_trace_sentinel_and_arrays():
    tr = LyapunovTrace(0)
    tr.append(0.0, 0.5, 0.1)
    tr.append(0.1, 0.0, 0.0)  # exact zero level
    tr.append(0.2, -0.25, -0.1)
    t, l1, dl1, L = tr.as_arrays()
    assert L[0] == pytest.approx(math.log(2.0))
    assert math.isinf(L[1])
    assert L[2] == pytest.approx(math.log(4.0))
    assert len(tr) == 3


def test_fd_dt_needs_three_samples():
    tr = LyapunovTrace(0)
    tr.append(0.0, 1.0, 0.0)
    tr.append(0.1, 1.0, 0.0)
    with pytest.raises(EmptyTrace):
        tr.fd_dt()


def test_gronwall_recovers_exponential():
    t = np.linspace(0.0, 2.0, 41)
    kappa, c = 0.7, 0.3
    L = (1.0 + c / kappa) * np.exp(kappa * t) - c / kappa
    fit = gronwall_monitor(t, L)
    assert fit.c6 == pytest.approx(kappa, rel=1e-2)
    # discrete chord slopes bias the fit by O(dt^2), nothing worse
    assert fit.max_excess <= 1e-2 * float(np.max(L))


def test_gronwall_linear_trace():
    t = np.linspace(0.0, 1.0, 21)
    fit = gronwall_monitor(t, 2.0 + 0.5 * t)
    assert abs(fit.c6) < 1e-12  # takes the linear-envelope branch
    assert fit.c5 == pytest.approx(0.5, abs=1e-12)
    assert fit.max_excess <= 1e-12


def test_gronwall_needs_samples():
    with pytest.raises(EmptyTrace):
        gronwall_monitor([0.0, 1.0], [1.0, 2.0])
    with pytest.raises(EmptyTrace):
        gronwall_monitor([0.0, 1.0, 2.0], [1.0, math.inf, math.inf])
    with pytest.raises(ValidationError):
        gronwall_monitor([0.0, 0.0, 1.0], [1.0, 2.0, 3.0])


def test_run_respects_gronwall_envelope():
    plate, ens, circ = plate_setup(h=0.08)
    res = simulate(plate, ens, circ, 0.5, dt=0.05, tracked=(0, 5))
    for tr in res.traces.values():
        t, _, _, L = tr.as_arrays()
        fit = gronwall_monitor(t, L)
        span = max(1.0, float(np.max(np.abs(L))))
        assert fit.max_excess <= 0.1 * span


# ---- the quadrature bound check ----------------------------------------------------------


def test_technic_bound_ratios_stay_bounded():
    # I(g)/(1 + |ln g|) must stay bounded as g -> 0; it actually decays
    # toward the asymptotic constant, so no blow-up at the small end
    chk = technic_bound_check(np.geomspace(1e-8, 1e-2, 13))
    assert np.all(np.isfinite(chk.integrals))
    assert float(np.max(chk.ratios)) < 2.0
    assert chk.ratios[0] < chk.ratios[-1]


def test_technic_bound_guards():
    with pytest.raises(ValidationError):
        technic_bound_check([0.8], support=(1.5, 3.0))  # probe enters support
    with pytest.raises(ValidationError):
        technic_bound_check([-0.1])
    with pytest.raises(ValidationError):
        technic_bound_check([1e-3], support=(0.9, 3.0))
