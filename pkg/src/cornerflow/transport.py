"""Vortex patch initialisation and RK4 transport.

Particles move with the regularised ensemble velocity (self term excluded,
images always active). The integrator is classic fixed-step RK4 with a
stability guard tied to the mapped boundary gap: a step is refused when

    dt > 0.5 * min_j(|T(x_j)| gap) / max_j |zeta_dot_j|

because a particle could then jump a sizeable fraction of its distance to
the wall within one step. Along the way the run accumulates the running
maximum of the particle speeds, which makes the a-priori support bound
|x_j(t)| <= R0 + C t exact for the discrete trajectory (each RK4 update
displaces a particle by at most dt times the largest stage speed).
"""

from __future__ import annotations

import dataclasses
import math
from typing import Optional, Sequence

import numpy as np

from . import _backend
from .biot_savart import (
    CirculationSpec,
    VortexEnsemble,
    mapped_circle_contour,
    circulation_probe,
    velocity_field,
)
from .conformal import ConformalMap, as_complex
from .errors import (
    EmptyEnsemble,
    ParticleEscapedDomain,
    ParticleOnBoundary,
    PatchTouchesBoundary,
    StepTooLarge,
    ValidationError,
)
from .lyapunov import LyapunovTrace, dt_L1_formula, stream_values

__all__ = [
    "PatchSpec",
    "FlowState",
    "StepStats",
    "DiagnosticsRecord",
    "SimulationResult",
    "patch_init",
    "rhs",
    "step_rk4",
    "auto_time_step",
    "simulate",
    "min_mapped_gap",
]

_PATCH_SHAPES = ("disk", "square", "annulus")
_PATCH_PROFILES = ("uniform", "gaussian")


@dataclasses.dataclass(frozen=True)
class PatchSpec:
    """Initial vorticity patch discretised on a lattice of spacing h.

    size is the disk radius, the half side of the square, or the outer
    radius of the annulus (whose inner radius defaults to size/2). The
    gaussian profile uses sigma = size/2 about the centre.
    """

    shape: str
    center: complex
    size: float
    omega0: float
    h: float
    profile: str = "uniform"
    inner: Optional[float] = None

    def validate(self):
        if self.shape not in _PATCH_SHAPES:
            raise ValidationError(f"unknown patch shape {self.shape!r}")
        if self.profile not in _PATCH_PROFILES:
            raise ValidationError(f"unknown patch profile {self.profile!r}")
        if not (self.size > 0.0 and math.isfinite(self.size)):
            raise ValidationError("patch size must be positive")
        if not (0.0 < self.h <= self.size):
            raise ValidationError("patch spacing h must satisfy 0 < h <= size")
        if not math.isfinite(self.omega0):
            raise ValidationError("omega0 must be finite")
        inner = self.size / 2.0 if self.inner is None else self.inner
        if self.shape == "annulus" and not (0.0 <= inner < self.size):
            raise ValidationError("annulus needs 0 <= inner < size")


def patch_init(cmap: ConformalMap, patch: PatchSpec) -> VortexEnsemble:
    """Cell-centred lattice discretisation of a vorticity patch.

    Nodes sit at the centres of an h-lattice symmetric about the patch
    centre; a node is kept when it lies in the patch shape and the flow
    domain, and each carries Gamma_j = omega(x_j) h^2. The blob radius is
    one global value 2 h median|T'| over the kept nodes (mapped plane).
    """
    patch.validate()
    c = as_complex(patch.center)
    half = patch.size
    h = patch.h
    m = int(math.ceil(2.0 * half / h)) + 2
    off = (np.arange(m) + 0.5) * h - 0.5 * m * h
    gx, gy = np.meshgrid(off, off, indexing="ij")
    pts = (c.real + gx.ravel()) + 1j * (c.imag + gy.ravel())
    r = np.abs(pts - c)

    if patch.shape == "disk":
        keep = r <= half
    elif patch.shape == "square":
        keep = (np.abs(pts.real - c.real) <= half) & (np.abs(pts.imag - c.imag) <= half)
    else:  # annulus
        inner = half / 2.0 if patch.inner is None else patch.inner
        keep = (r <= half) & (r >= inner)

    keep &= np.asarray(cmap.contains(pts), dtype=bool)
    pts = pts[keep]
    if pts.size == 0:
        raise EmptyEnsemble("patch discretisation produced no particles")

    clearance = float(np.min(cmap.boundary_distance(pts)))
    if clearance < 2.0 * h:
        raise PatchTouchesBoundary(
            f"patch comes within {clearance:.4g} of the boundary (< 2h = {2 * h:.4g})"
        )

    if patch.profile == "uniform":
        omega = np.full(pts.size, patch.omega0)
    else:
        sigma = half / 2.0
        rr = np.abs(pts - c)
        omega = patch.omega0 * np.exp(-(rr * rr) / (2.0 * sigma * sigma))

    delta = 2.0 * h * float(np.median(np.abs(cmap.derivative_values(pts))))
    return VortexEnsemble(
        pts, omega * h * h, np.full(pts.size, delta), cell_area=h * h
    )


# --------------------------------------------------------------------------
# time stepping
# --------------------------------------------------------------------------


@dataclasses.dataclass
class FlowState:
    time: float
    ensemble: VortexEnsemble


@dataclasses.dataclass
class StepStats:
    """Per-step extremes plus the first-stage interaction sums (reusable
    by diagnostics without another O(N^2) pass)."""

    max_speed: float
    max_mapped_speed: float
    stage1_velocity: np.ndarray
    stage1_sum: np.ndarray


def _stage_velocity(cmap, positions, ensemble, circ):
    """Velocities of the particles themselves; returns (u, S, |T'|)."""
    zeta = np.ascontiguousarray(cmap.map_values(positions), dtype=np.complex128)
    s = _backend.momentum_sum(
        zeta, zeta, ensemble.gamma, ensemble.delta2(), circ.alpha, True
    )
    dt_abs = np.abs(cmap.derivative_values(positions))
    u = 1j / (2.0 * math.pi) * np.conj(cmap.derivative_values(positions)) * s
    return u, s, dt_abs


def rhs(cmap: ConformalMap, ensemble: VortexEnsemble, circ: CirculationSpec):
    """Physical particle velocities (self term excluded)."""
    u, _, _ = _stage_velocity(cmap, ensemble.z, ensemble, circ)
    return u


def min_mapped_gap(cmap: ConformalMap, ensemble: VortexEnsemble) -> float:
    if len(ensemble) == 0:
        return float("nan")
    return float(np.min(cmap.mapped_gap(ensemble.z)))


def _check_positions(cmap, positions, when: str):
    inside = np.asarray(cmap.contains(positions), dtype=bool)
    if not np.all(inside):
        bad = int(np.argmin(inside))
        raise ParticleEscapedDomain(
            f"particle {bad} left the domain {when} (at {positions[bad]})"
        )


def step_rk4(cmap: ConformalMap, state: FlowState, circ: CirculationSpec, dt: float,
             guard: bool = True):
    """One classic RK4 step; returns (new state, StepStats)."""
    ens = state.ensemble
    z0 = ens.z
    _check_positions(cmap, z0, "before the step")
    gap = min_mapped_gap(cmap, ens)
    if len(ens) and gap < 1e-12:
        raise ParticleOnBoundary("a particle is numerically on the boundary")

    u1, s1, da1 = _stage_velocity(cmap, z0, ens, circ)
    speeds = [np.abs(u1)]
    mapped = [speeds[0] * da1]
    ms = float(np.max(mapped[0])) if len(ens) else 0.0
    if guard and ms > 0.0 and dt > 0.5 * gap / ms:
        raise StepTooLarge(
            f"dt = {dt:.4g} exceeds 0.5 * gap/speed = {0.5 * gap / ms:.4g}"
        )

    p2 = z0 + 0.5 * dt * u1
    _check_positions(cmap, p2, "at the midpoint stage")
    u2, _, da2 = _stage_velocity(cmap, p2, ens, circ)
    speeds.append(np.abs(u2))
    mapped.append(speeds[1] * da2)

    p3 = z0 + 0.5 * dt * u2
    _check_positions(cmap, p3, "at the midpoint stage")
    u3, _, da3 = _stage_velocity(cmap, p3, ens, circ)
    speeds.append(np.abs(u3))
    mapped.append(speeds[2] * da3)

    p4 = z0 + dt * u3
    _check_positions(cmap, p4, "at the end stage")
    u4, _, da4 = _stage_velocity(cmap, p4, ens, circ)
    speeds.append(np.abs(u4))
    mapped.append(speeds[3] * da4)

    z1 = z0 + (dt / 6.0) * (u1 + 2.0 * u2 + 2.0 * u3 + u4)
    _check_positions(cmap, z1, "after the step")

    if len(ens):
        max_speed = float(max(np.max(s) for s in speeds))
        max_mapped = float(max(np.max(s) for s in mapped))
    else:
        max_speed = max_mapped = 0.0
    stats = StepStats(max_speed, max_mapped, u1, s1)
    return FlowState(state.time + dt, ens.with_positions(z1)), stats


def auto_time_step(cmap: ConformalMap, ensemble: VortexEnsemble, circ: CirculationSpec) -> float:
    """Quarter of the guard bound at t = 0, clamped to [1e-4, 1e-1]."""
    if len(ensemble) == 0:
        return 0.1
    u, _, da = _stage_velocity(cmap, ensemble.z, ensemble, circ)
    ms = float(np.max(np.abs(u) * da))
    if ms == 0.0:
        return 0.1
    gap = min_mapped_gap(cmap, ensemble)
    return float(np.clip(0.25 * gap / ms, 1e-4, 1e-1))


# --------------------------------------------------------------------------
# diagnostics and the driver
# --------------------------------------------------------------------------


@dataclasses.dataclass
class DiagnosticsRecord:
    t: float
    total_circ: float
    l1: float
    linf: float
    support_radius: float
    min_gap: float
    gamma: float
    lyap_max: float

    FIELDS = ("t", "total_circ", "l1", "linf", "support_radius",
              "min_gap", "gamma", "lyap_max")

    def row(self):
        return [getattr(self, k) for k in self.FIELDS]


@dataclasses.dataclass
class SimulationResult:
    records: list
    snapshots: list
    traces: dict
    dt: float
    n_steps: int
    support_constant: float
    initial_support: float
    probe_rho: float
    final_state: FlowState


def _probe_rho_for(cmap, ensemble, override=None) -> float:
    if override is not None:
        return float(override)
    if len(ensemble) == 0:
        return 2.0 if cmap.kind == "exterior" else 0.5
    rz = float(np.max(np.abs(cmap.map_values(ensemble.z))))
    if cmap.kind == "exterior":
        return 1.5 * rz + 0.5
    return 0.5 * (1.0 + rz)


def simulate(cmap: ConformalMap, ensemble: VortexEnsemble, circ: CirculationSpec,
             t_final: float, dt="auto", output_stride: int = 10,
             tracked: Sequence[int] = (), probe_rho=None, quiet: bool = True) -> SimulationResult:
    """Fixed-step RK4 run with conservation and boundary diagnostics.

    Diagnostics are recorded at step 0, every output_stride steps and at the
    final step. Tracked particle indices get a boundary-functional trace
    sampled at every step (value, formula time derivative, and -ln|value|).
    The circulation probe integrates u . dl around the pullback of a circle
    of radius probe_rho in the mapped plane; the radius is re-fitted if the
    support outgrows it.
    """
    if t_final < 0.0:
        raise ValidationError("t_final must be >= 0")
    if output_stride < 1:
        raise ValidationError("output_stride must be >= 1")
    for i in tracked:
        if not (0 <= int(i) < len(ensemble)):
            raise ValidationError(f"tracked index {i} out of range")

    if dt == "auto":
        dt_val = auto_time_step(cmap, ensemble, circ)
    else:
        dt_val = float(dt)
        if dt_val <= 0.0:
            raise ValidationError("dt must be positive")
    n_steps = max(1, int(math.ceil(t_final / dt_val - 1e-12))) if t_final > 0 else 0
    dt_val = t_final / n_steps if n_steps else dt_val

    state = FlowState(0.0, ensemble)
    rho = _probe_rho_for(cmap, ensemble, probe_rho)
    traces = {int(i): LyapunovTrace(int(i)) for i in tracked}
    records: list = []
    snapshots: list = []
    support_c = 0.0
    r0 = ensemble.support_radius()

    def _trace_point(st: FlowState, s_all):
        if not traces:
            return float("nan")
        zeta = np.ascontiguousarray(cmap.map_values(st.ensemble.z), dtype=np.complex128)
        worst = -math.inf
        for i, tr in traces.items():
            zi = st.ensemble.z[i]
            l1 = float(
                stream_values(cmap, st.ensemble, circ, np.array([zi]), mapped=zeta)[0]
            )
            dl1 = dt_L1_formula(cmap, st.ensemble, circ, zi, s_all=s_all, mapped=zeta)
            tr.append(st.time, l1, dl1)
            worst = max(worst, tr.L[-1])
        return worst

    def _record(st: FlowState, s_all):
        nonlocal rho
        ens = st.ensemble
        lyap = _trace_point(st, s_all)
        if len(ens):
            rz = float(np.max(np.abs(cmap.map_values(ens.z))))
            if rz >= rho:
                rho = _probe_rho_for(cmap, ens)
        contour = mapped_circle_contour(cmap, rho)
        probe = circulation_probe(cmap, ens, circ, contour)
        gamma_est = probe - ens.total_circulation()
        records.append(
            DiagnosticsRecord(
                t=st.time,
                total_circ=ens.total_circulation(),
                l1=ens.l1_norm(),
                linf=(ens.linf_vorticity() if ens.cell_area else
                      (float(np.max(np.abs(ens.gamma))) if len(ens) else 0.0)),
                support_radius=ens.support_radius(),
                min_gap=min_mapped_gap(cmap, ens),
                gamma=gamma_est,
                lyap_max=lyap,
            )
        )
        snapshots.append((st.time, ens))
        if not quiet:
            r = records[-1]
            print(
                f"t={r.t:9.4f}  circ={r.total_circ:+.6e}  gap={r.min_gap:.4e}  "
                f"gamma={r.gamma:+.4e}"
            )

    # one interaction pass for the initial diagnostics
    if len(ensemble):
        _, s0, _ = _stage_velocity(cmap, ensemble.z, ensemble, circ)
    else:
        s0 = np.zeros(0, dtype=complex)
    _record(state, s0)

    for k in range(n_steps):
        state, stats = step_rk4(cmap, state, circ, dt_val)
        support_c = max(support_c, stats.max_speed)
        done = k + 1 == n_steps
        if done or ((k + 1) % output_stride == 0):
            u, s, _ = _stage_velocity(cmap, state.ensemble.z, state.ensemble, circ)
            _record(state, s)
        elif traces:
            _, s, _ = _stage_velocity(cmap, state.ensemble.z, state.ensemble, circ)
            _trace_point(state, s)

    return SimulationResult(
        records=records,
        snapshots=snapshots,
        traces=traces,
        dt=dt_val,
        n_steps=n_steps,
        support_constant=support_c,
        initial_support=r0,
        probe_rho=rho,
        final_state=state,
    )
