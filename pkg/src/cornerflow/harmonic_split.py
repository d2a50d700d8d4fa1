"""Free-space / wall-correction split of the velocity field.

Extend the domain velocity u by zero into the obstacle (call it u_bar) and
subtract the free-space blob field v of the same particles:

    w = u_bar - v.

Away from the vortex support and the boundary w is (nearly) harmonic, so it
obeys the mean-value property on admissible disks; and since u_bar - v is a
gradient-free, divergence-free correction, its zero-mean part is controlled
by the free part through the L2 projection bound |w~|_2 <= 2 |v~|_2 when two
flows share total circulation and gamma0. Both facts are checked here on
grids and circles, and the same grid metric measures how fast two nearby
runs drift apart.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable, Optional

import numpy as np

from . import _backend
from .biot_savart import CirculationSpec, VortexEnsemble, velocity_field
from .conformal import ConformalMap, as_complex
from .errors import (
    CirculationMismatch,
    DiskContainsVorticity,
    DiskLeavesRegion,
    ValidationError,
)

__all__ = [
    "freespace_velocity",
    "freespace_field",
    "SplitField",
    "GridSpec",
    "mean_value_residual",
    "ProjectionCheck",
    "projection_inequality_check",
    "DivergenceSeries",
    "twin_run_divergence",
]


def freespace_field(ensemble: VortexEnsemble, points):
    """Free-plane blob velocity at points, as complex numbers.

    Each particle's blob radius is reused as a physical-plane radius here;
    no boundary, no images, no point circulation.
    """
    pts = np.ascontiguousarray(points, dtype=np.complex128)
    s = _backend.freespace_sum(pts, ensemble.z, ensemble.gamma, ensemble.delta2())
    return 1j / (2.0 * math.pi) * s


def freespace_velocity(ensemble: VortexEnsemble, x):
    """Free-plane blob velocity at one point, as a length-2 array."""
    u = complex(freespace_field(ensemble, np.array([as_complex(x)]))[0])
    return np.array([u.real, u.imag])


class SplitField:
    """Evaluates u_bar (zero-extended), v (free space) and w = u_bar - v."""

    def __init__(self, cmap: ConformalMap, ensemble: VortexEnsemble, circ: CirculationSpec):
        self.cmap = cmap
        self.ensemble = ensemble
        self.circ = circ

    def total(self, points):
        """Domain velocity extended by zero outside the flow domain."""
        pts = np.ascontiguousarray(points, dtype=np.complex128)
        inside = np.asarray(self.cmap.contains(pts), dtype=bool)
        out = np.zeros(pts.shape, dtype=np.complex128)
        if np.any(inside):
            out[inside] = velocity_field(
                self.cmap, self.ensemble, self.circ, pts[inside]
            )
        return out

    def free(self, points):
        return freespace_field(self.ensemble, points)

    def wall(self, points):
        return self.total(points) - self.free(points)

    def wall_mean_value_residual(self, center, radius: float, n_nodes: int = 256) -> float:
        """Mean-value residual of w with the admissibility checks armed."""
        return mean_value_residual(
            self.wall,
            center,
            radius,
            n_nodes=n_nodes,
            ensemble=self.ensemble,
            cmap=self.cmap,
        )


def mean_value_residual(field: Callable, center, radius: float, n_nodes: int = 256,
                        ensemble: Optional[VortexEnsemble] = None,
                        cmap: Optional[ConformalMap] = None) -> float:
    """Relative gap between field(center) and its circle average.

    field maps a complex array to a complex array. When an ensemble is
    given, the disk must keep 3 blob radii clear of every particle
    (DiskContainsVorticity); when a map is given, the disk must lie inside
    the flow domain (DiskLeavesRegion). For a harmonic field the residual is
    pure quadrature error and shrinks by ~4x per halving of the radius.
    """
    c = as_complex(center)
    if radius <= 0.0:
        raise ValidationError("disk radius must be positive")
    if ensemble is not None and len(ensemble):
        dist = np.abs(ensemble.z - c)
        bad = dist < radius + 3.0 * ensemble.delta
        if np.any(bad):
            raise DiskContainsVorticity(
                f"{int(np.sum(bad))} particle(s) within radius + 3 delta of the disk"
            )
    nodes = c + radius * np.exp(2j * np.pi * np.arange(n_nodes) / n_nodes)
    if cmap is not None:
        probe = np.concatenate([[c], nodes])
        if not np.all(cmap.contains(probe)):
            raise DiskLeavesRegion("mean-value disk crosses the domain boundary")
        # discrete ring nodes can straddle a slit without touching it, so
        # also require the whole disk clear of the wall
        if float(cmap.boundary_distance(np.array([c]))[0]) < radius:
            raise DiskLeavesRegion("mean-value disk reaches the domain boundary")
    fc = complex(field(np.array([c]))[0])
    ring = np.asarray(field(nodes))
    avg = complex(np.mean(ring))
    return abs(fc - avg) / max(abs(fc), 1e-300)


# --------------------------------------------------------------------------
# grid norms
# --------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class GridSpec:
    """Square lattice of given spacing masked to the disk |z| <= radius."""

    radius: float
    spacing: float

    def nodes(self):
        if not (self.spacing > 0.0 and self.radius > 0.0):
            raise ValidationError("grid needs positive radius and spacing")
        n = int(math.floor(self.radius / self.spacing))
        axis = np.arange(-n, n + 1) * self.spacing
        gx, gy = np.meshgrid(axis, axis, indexing="ij")
        z = (gx + 1j * gy).ravel()
        return z[np.abs(z) <= self.radius]

    def l2_norm(self, values) -> float:
        v = np.asarray(values)
        return float(np.sqrt(np.sum(np.abs(v) ** 2) * self.spacing ** 2))


@dataclasses.dataclass(frozen=True)
class ProjectionCheck:
    v_norm: float
    w_norm: float
    ratio: float
    n_nodes: int


def projection_inequality_check(cmap: ConformalMap,
                                ens_a: VortexEnsemble, circ_a: CirculationSpec,
                                ens_b: VortexEnsemble, circ_b: CirculationSpec,
                                grid: GridSpec) -> ProjectionCheck:
    """Grid norms of w_a - w_b against v_a - v_b.

    The two flows must share total circulation and gamma0 (otherwise the
    difference field keeps a far tail the grid cannot integrate); the
    projection argument then bounds |w~|_2 by 2 |v~|_2 up to truncation
    and quadrature error.
    """
    scale = max(
        1.0,
        abs(ens_a.total_circulation()),
        abs(ens_b.total_circulation()),
        abs(circ_a.gamma0),
        abs(circ_b.gamma0),
    )
    if abs(ens_a.total_circulation() - ens_b.total_circulation()) > 1e-12 * scale:
        raise CirculationMismatch("total circulations differ between the runs")
    if abs(circ_a.gamma0 - circ_b.gamma0) > 1e-12 * scale:
        raise CirculationMismatch("gamma0 differs between the runs")
    z = grid.nodes()
    split_a = SplitField(cmap, ens_a, circ_a)
    split_b = SplitField(cmap, ens_b, circ_b)
    dv = split_a.free(z) - split_b.free(z)
    dw = split_a.wall(z) - split_b.wall(z)
    v_norm = grid.l2_norm(dv)
    w_norm = grid.l2_norm(dw)
    ratio = w_norm / v_norm if v_norm > 0.0 else math.inf
    return ProjectionCheck(v_norm, w_norm, ratio, int(z.size))


@dataclasses.dataclass(frozen=True)
class DivergenceSeries:
    times: np.ndarray
    gap_l2: np.ndarray
    fitted_rate: float


def twin_run_divergence(snapshots_a, snapshots_b, grid: GridSpec) -> DivergenceSeries:
    """Free-field L2 gap between two runs at matching snapshot times.

    The fitted rate is the least-squares slope of ln(gap) against t over
    the strictly positive gaps (0.0 when fewer than two points qualify,
    e.g. for bitwise-identical twins).
    """
    if len(snapshots_a) != len(snapshots_b):
        raise ValidationError("twin runs recorded different numbers of snapshots")
    times = []
    gaps = []
    z = grid.nodes()
    for (ta, ea), (tb, eb) in zip(snapshots_a, snapshots_b):
        if abs(ta - tb) > 1e-12 * max(1.0, abs(ta)):
            raise ValidationError("twin runs recorded different snapshot times")
        dv = freespace_field(ea, z) - freespace_field(eb, z)
        times.append(ta)
        gaps.append(grid.l2_norm(dv))
    t = np.asarray(times)
    g = np.asarray(gaps)
    pos = g > 0.0
    if int(np.sum(pos)) >= 2 and float(np.var(t[pos])) > 0.0:
        rate = float(np.polyfit(t[pos], np.log(g[pos]), 1)[0])
    else:
        rate = 0.0
    return DivergenceSeries(times=t, gap_l2=g, fitted_rate=rate)
