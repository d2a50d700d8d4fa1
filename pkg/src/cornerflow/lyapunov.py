"""Boundary-avoidance functional and its certificates.

The functional is built from the regularised interaction stream sum

    L1(x) = (1/4pi) sum_j Gamma_j [ ln(|zeta_x - zeta_j|^2 + delta_j^2)
                                    - ln(|zeta_x - zeta_j|^2 + P_j) ]
            + (alpha/2pi) ln|zeta_x|,

the same blob regularisation as the velocity, so the exactness of the pair
of identities below survives discretisation:

  * grad L1 is (minus) the perp of the velocity, hence u . grad L1 = 0;
  * along trajectories of the particle system,

        d/dt L1(x, t) = (1/4pi^2) sum_j Gamma_j |T'(x_j)|^2
                        Im( k_j conj(S_j) ),

    where S_j is the self-excluded interaction sum moving particle j and
    k_j is the gradient factor of ln-term j with respect to zeta_j. The
    identity also holds when x rides on a tracked particle, because the
    probe's own motion is orthogonal to grad L1.

Under one-signed circulation (and, outside a body, a point circulation at
least cancelling it) L1 has a sign and is pinched between powers of the
mapped boundary gap, which turns L = -ln|L1| into a barrier: bounded L
keeps every particle away from the wall. The pinch constants and a
Gronwall-type envelope for L are estimated here from samples.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable, Optional, Sequence

import numpy as np

from . import _backend
from .biot_savart import CirculationSpec, VortexEnsemble
from .conformal import ConformalMap, as_complex
from .errors import (
    CoincidesWithParticle,
    EmptyTrace,
    PointOutsideDomain,
    SignConditionViolated,
    ValidationError,
)

__all__ = [
    "LyapunovTrace",
    "PinchBound",
    "GronwallFit",
    "TechnicCheck",
    "stream_L1",
    "stream_values",
    "dt_L1_formula",
    "orthogonality_residual",
    "sign_conditions",
    "check_L1_upper",
    "check_L1_lower",
    "gronwall_monitor",
    "technic_bound_check",
]

# |L1| below this is treated as an exact hit of the zero level
_L1_FLOOR = 1e-300


def stream_values(cmap: ConformalMap, ensemble: VortexEnsemble, circ: CirculationSpec,
                  points, mapped=None):
    """Vectorised L1 at arbitrary physical points (no domain checks).

    Finite even at particle positions thanks to the blob regularisation.
    mapped optionally carries precomputed T(particle positions).
    """
    pts = np.ascontiguousarray(points, dtype=np.complex128)
    zeta_t = np.ascontiguousarray(cmap.map_values(pts), dtype=np.complex128)
    zeta_p = (
        np.ascontiguousarray(mapped, dtype=np.complex128)
        if mapped is not None
        else np.ascontiguousarray(cmap.map_values(ensemble.z), dtype=np.complex128)
    )
    return _backend.stream_sum(
        zeta_t, zeta_p, ensemble.gamma, ensemble.delta2(), circ.alpha
    )


def stream_L1(cmap: ConformalMap, ensemble: VortexEnsemble, circ: CirculationSpec, x) -> float:
    """L1 at a single checked point away from the particles."""
    z = as_complex(x)
    if not bool(cmap.contains(z)):
        raise PointOutsideDomain(f"point {z} is outside the flow domain")
    if len(ensemble) and float(np.min(np.abs(ensemble.z - z))) == 0.0:
        raise CoincidesWithParticle(
            "probe coincides with a particle; use a trace for on-particle values"
        )
    return float(stream_values(cmap, ensemble, circ, np.array([z]))[0])


def dt_L1_formula(cmap: ConformalMap, ensemble: VortexEnsemble, circ: CirculationSpec,
                  x, s_all=None, mapped=None) -> float:
    """Exact time derivative of L1 at probe x under the particle motion.

    s_all optionally carries the self-excluded interaction sums at the
    particles (the quantity the integrator already computes); mapped the
    particle images T(x_j).
    """
    z = as_complex(x)
    zeta_p = (
        np.ascontiguousarray(mapped, dtype=np.complex128)
        if mapped is not None
        else np.ascontiguousarray(cmap.map_values(ensemble.z), dtype=np.complex128)
    )
    if s_all is None:
        s_all = _backend.momentum_sum(
            zeta_p, zeta_p, ensemble.gamma, ensemble.delta2(), circ.alpha, True
        )
    zx = complex(cmap.map_values(z))
    d = zeta_p - zx
    r2 = d.real * d.real + d.imag * d.imag
    p = (np.abs(zeta_p) ** 2 - 1.0) * (abs(zx) ** 2 - 1.0)
    k = d / (r2 + ensemble.delta2()) - (zeta_p * abs(zx) ** 2 - zx) / (r2 + p)
    jac = np.abs(cmap.derivative_values(ensemble.z)) ** 2
    terms = ensemble.gamma * jac * (k * np.conj(s_all)).imag
    return float(np.sum(terms) / (4.0 * math.pi ** 2))


def orthogonality_residual(cmap: ConformalMap, ensemble: VortexEnsemble,
                           circ: CirculationSpec, x, step: Optional[float] = None) -> float:
    """|u . grad L1| / (|u| |grad L1|) with a central-difference gradient.

    Zero up to finite-difference error, because grad L1 = -u_perp exactly
    for the regularised system.
    """
    from .biot_savart import velocity_field  # local import avoids a cycle

    z = as_complex(x)
    if step is None:
        step = 1e-6 * max(1.0, abs(z))
    pts = np.array([z + step, z - step, z + 1j * step, z - 1j * step])
    vals = stream_values(cmap, ensemble, circ, pts)
    gx = (vals[0] - vals[1]) / (2.0 * step)
    gy = (vals[2] - vals[3]) / (2.0 * step)
    u = complex(velocity_field(cmap, ensemble, circ, np.array([z]))[0])
    dot = u.real * gx + u.imag * gy
    nu = abs(u)
    ng = math.hypot(gx, gy)
    if nu * ng < _L1_FLOOR:
        return 0.0
    return abs(dot) / (nu * ng)


# --------------------------------------------------------------------------
# traces
# --------------------------------------------------------------------------


class LyapunovTrace:
    """Per-particle time series of L1, its formula derivative and -ln|L1|."""

    def __init__(self, index: int):
        self.index = index
        self.times: list = []
        self.L1: list = []
        self.dt_L1: list = []
        self.L: list = []

    def append(self, t: float, l1: float, dl1: float):
        self.times.append(float(t))
        self.L1.append(float(l1))
        self.dt_L1.append(float(dl1))
        self.L.append(math.inf if abs(l1) < _L1_FLOOR else -math.log(abs(l1)))

    def __len__(self):
        return len(self.times)

    def as_arrays(self):
        return (
            np.asarray(self.times),
            np.asarray(self.L1),
            np.asarray(self.dt_L1),
            np.asarray(self.L),
        )

    def fd_dt(self):
        """Centered finite differences of L1 (interior samples only)."""
        t, l1, _, _ = self.as_arrays()
        if t.size < 3:
            raise EmptyTrace("need at least 3 samples for finite differences")
        return t[1:-1], (l1[2:] - l1[:-2]) / (t[2:] - t[:-2])


# --------------------------------------------------------------------------
# sign conditions and pinch bounds
# --------------------------------------------------------------------------


def sign_conditions(kind: str, ensemble: VortexEnsemble, circ: CirculationSpec):
    """(armed, sigma): sigma is the sign L1 takes when the hypotheses hold.

    Outside a body: one-signed vorticity with a point circulation at least
    cancelling the total (alpha and the vorticity on opposite signs).
    Inside: one-signed vorticity alone suffices.
    """
    g = ensemble.gamma
    all_neg = bool(np.all(g <= 0.0))
    all_pos = bool(np.all(g >= 0.0))
    if kind == "exterior":
        if all_neg and circ.alpha >= 0.0:
            return True, 1.0
        if all_pos and circ.alpha <= 0.0:
            return True, -1.0
        return False, 0.0
    if all_neg:
        return True, 1.0
    if all_pos:
        return True, -1.0
    return False, 0.0


@dataclasses.dataclass(frozen=True)
class PinchBound:
    """Sampled pinch constant for L1 against the mapped boundary gap."""

    constant: float
    n_samples: int
    gap_min: float
    gap_max: float


def _pinch_samples(cmap, ensemble, circ, points):
    pts = np.ascontiguousarray(points, dtype=np.complex128)
    if pts.size == 0:
        raise ValidationError("pinch check needs sample points")
    if not np.all(cmap.contains(pts)):
        raise PointOutsideDomain("pinch sample outside the flow domain")
    gap = np.asarray(cmap.mapped_gap(pts), dtype=float)
    if np.any(gap <= 0.0):
        raise PointOutsideDomain("pinch sample is on the boundary")
    vals = stream_values(cmap, ensemble, circ, pts)
    return gap, vals


def check_L1_upper(cmap: ConformalMap, ensemble: VortexEnsemble, circ: CirculationSpec,
                   points) -> PinchBound:
    """Smallest C1 with |L1| <= C1 sqrt(gap) over the samples."""
    gap, vals = _pinch_samples(cmap, ensemble, circ, points)
    c1 = float(np.max(np.abs(vals) / np.sqrt(gap)))
    return PinchBound(c1, gap.size, float(gap.min()), float(gap.max()))


def check_L1_lower(cmap: ConformalMap, ensemble: VortexEnsemble, circ: CirculationSpec,
                   points) -> PinchBound:
    """Largest C2 with sigma L1 >= C2 gap over the samples.

    Requires the sign hypotheses; C2 > 0 certifies the lower pinch there.
    Samples must keep gap well above delta^2 / (2 min(|zeta_j|^2 - 1)), the
    scale where the blob floor of the regularised logs takes over.
    """
    armed, sigma = sign_conditions(cmap.kind, ensemble, circ)
    if not armed:
        raise SignConditionViolated(
            "one-signed circulation hypotheses do not hold for this flow"
        )
    gap, vals = _pinch_samples(cmap, ensemble, circ, points)
    c2 = float(np.min(sigma * vals / gap))
    return PinchBound(c2, gap.size, float(gap.min()), float(gap.max()))


# --------------------------------------------------------------------------
# Gronwall envelope
# --------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class GronwallFit:
    """Envelope L(t) <= (L0 + c5/c6) exp(c6 (t - t0)) - c5/c6 fitted from
    the observed slopes s ~ c5 + c6 L."""

    c5: float
    c6: float
    times: np.ndarray
    values: np.ndarray
    envelope: np.ndarray
    max_excess: float


def gronwall_monitor(times, values) -> GronwallFit:
    """Fit a linear slope law to a trace of L and check its own envelope."""
    t = np.asarray(times, dtype=float)
    L = np.asarray(values, dtype=float)
    good = np.isfinite(t) & np.isfinite(L)
    t, L = t[good], L[good]
    if t.size < 3:
        raise EmptyTrace("need at least 3 finite samples for an envelope fit")
    dt = np.diff(t)
    if np.any(dt <= 0.0):
        raise ValidationError("trace times must increase")
    s = np.diff(L) / dt
    mid = 0.5 * (L[1:] + L[:-1])
    if float(np.var(mid)) < 1e-30:
        c6 = 0.0
    else:
        c6 = max(0.0, float(np.polyfit(mid, s, 1)[0]))
    c5 = float(np.max(s - c6 * mid))
    tau = t - t[0]
    if c6 < 1e-12:
        env = L[0] + c5 * tau
    else:
        env = (L[0] + c5 / c6) * np.exp(c6 * tau) - c5 / c6
    return GronwallFit(
        c5=c5,
        c6=c6,
        times=t,
        values=L,
        envelope=env,
        max_excess=float(np.max(L - env)),
    )


# --------------------------------------------------------------------------
# the technical integral estimate
# --------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class TechnicCheck:
    """Quadrature check that the pair-denominator integral grows no faster
    than 1 + |ln gap| as the probe approaches the circle."""

    gaps: np.ndarray
    integrals: np.ndarray
    ratios: np.ndarray
    spread: float


def technic_bound_check(gaps: Sequence[float], support=(1.5, 3.0),
                        weight: Optional[Callable] = None,
                        n_r: int = 256, n_theta: int = 512) -> TechnicCheck:
    """Evaluate I(g) = int_A w(|y|) / (|y - x| |y - x*|) dA for probes
    x = 1 + g and report I / (1 + |ln g|).

    A is the (mapped-plane) annulus support[0] <= |y| <= support[1] with
    support[0] > 1, so the probe never meets the support; x* = 1/(1+g) is
    its reflection. Bounded ratios certify the logarithmic growth used by
    the continuity-in-time argument.
    """
    r1, r2 = float(support[0]), float(support[1])
    if not (1.0 < r1 < r2):
        raise ValidationError("support must satisfy 1 < r1 < r2")
    g = np.asarray(gaps, dtype=float)
    if g.size == 0 or np.any(g <= 0.0):
        raise ValidationError("gaps must be positive")
    if np.any(1.0 + g >= r1):
        raise ValidationError("probe would enter the support annulus")
    r = r1 + (np.arange(n_r) + 0.5) * (r2 - r1) / n_r
    th = (np.arange(n_theta) + 0.5) * (2.0 * np.pi / n_theta)
    y = r[:, None] * np.exp(1j * th[None, :])
    w = np.ones_like(r) if weight is None else np.asarray([weight(v) for v in r])
    da = (r2 - r1) / n_r * (2.0 * np.pi / n_theta) * r
    cell = (w * da)[:, None]
    out_i = np.empty(g.size)
    for k, gk in enumerate(g):
        x = 1.0 + gk
        xs = 1.0 / x
        out_i[k] = float(np.sum(cell / (np.abs(y - x) * np.abs(y - xs))))
    ratios = out_i / (1.0 + np.abs(np.log(g)))
    return TechnicCheck(
        gaps=g,
        integrals=out_i,
        ratios=ratios,
        spread=float(ratios.max() / ratios.min()),
    )
