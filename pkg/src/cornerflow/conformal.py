"""Conformal maps between corner domains and the unit-circle reference plane.

A flow domain Omega is either the exterior or the interior of a simply
connected region whose boundary may have corners with interior angle
alpha in (pi/2, 2*pi]. Each map T sends Omega onto the exterior (|T| > 1)
or interior (|T| < 1) of the unit circle, boundary to boundary. Near a
corner the derivative behaves like r**(pi/alpha - 1) along rays into the
domain, and the mapped boundary gap grows like r**(pi/alpha); for exterior
domains T(z) = beta*z + beta_tilde + O(1/z) at infinity.

Four closed-form families are registered:

======================  =========  =====================================
map_id                  kind       geometry
======================  =========  =====================================
unit_disk_identity      either     unit circle, T(z) = z
scaled_disk             either     circle of radius R, T(z) = z / R
exterior_segment        exterior   slit along [-1, 1] (flat plate)
exterior_ellipse        exterior   ellipse with semi-axes a >= b > 0
interior_wedge_lens     interior   one-corner lens, opening angle alpha
======================  =========  =====================================

The flat plate uses T(z) = z + sqrt(z - 1) * sqrt(z + 1) with principal
square roots; the product of the two factors is continuous across the
negative real axis, so the only branch cut is the slit itself.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Optional

import numpy as np

from .errors import (
    BranchCutViolation,
    FitDegenerate,
    InsufficientSamples,
    InteriorDomainHasNoFarField,
    PointOutsideDomain,
    PointOutsideTarget,
    TooCloseToCorner,
    UnknownMapFamily,
    ValidationError,
)

__all__ = [
    "CornerSpec",
    "DomainSpec",
    "ConformalMap",
    "CornerFit",
    "FarfieldFit",
    "make_map",
    "eval_map",
    "eval_inverse",
    "eval_derivative",
    "corner_exponent_probe",
    "farfield_coefficients",
    "MAP_FAMILIES",
]


def as_complex(point) -> complex:
    """Coerce a complex number or an (x, y) pair to a Python complex."""
    if isinstance(point, complex):
        return point
    if isinstance(point, (int, float, np.floating, np.integer)):
        return complex(point)
    if isinstance(point, np.complexfloating):
        return complex(point)
    x, y = point
    return complex(float(x), float(y))


@dataclasses.dataclass(frozen=True)
class CornerSpec:
    """One boundary corner.

    position : corner location in the physical plane
    interior_angle : opening angle measured inside the flow domain, radians
    bisector : unit vector from the corner into the flow domain
    image_on_circle : T(position), a point of the unit circle
    """

    position: complex
    interior_angle: float
    bisector: complex
    image_on_circle: complex

    def exponent(self) -> float:
        """Power-law exponent of |T'| at this corner, pi/alpha - 1."""
        return math.pi / self.interior_angle - 1.0


@dataclasses.dataclass(frozen=True)
class DomainSpec:
    """Declarative description of a flow domain (kind + map family)."""

    kind: str
    map_id: str
    parameters: dict = dataclasses.field(default_factory=dict)

    def build(self) -> "ConformalMap":
        return make_map(self.map_id, self.parameters, kind=self.kind)


class ConformalMap:
    """Base class for the closed-form map families.

    Subclasses fill in the vectorised raw evaluators; the checked
    single-point operations live at module level (eval_map and friends).
    """

    kind: str = ""
    map_id: str = ""

    def __init__(self, parameters: Optional[dict] = None):
        self.parameters = dict(parameters or {})
        self.corners: tuple[CornerSpec, ...] = ()

    # -- raw vectorised evaluators (no domain checks) -------------------

    def map_values(self, z):
        raise NotImplementedError

    def inverse_values(self, w):
        raise NotImplementedError

    def derivative_values(self, z):
        raise NotImplementedError

    def inverse_derivative_values(self, w):
        raise NotImplementedError

    def contains(self, z):
        """True where z lies strictly inside the flow domain."""
        raise NotImplementedError

    def boundary_distance(self, z):
        """Distance from z to the boundary (exact or first-order estimate)."""
        w = self.map_values(z)
        gap = np.abs(np.abs(w) - 1.0)
        return gap / np.abs(self.derivative_values(z))

    # -- shared helpers ---------------------------------------------------

    @property
    def exact_farfield(self) -> Optional[tuple[complex, complex]]:
        """(beta, beta_tilde) when known in closed form, else None."""
        return None

    def on_branch_cut(self, z) -> bool:
        """True if the point sits on a cut of the raw evaluators."""
        return False

    def mapped_gap(self, z):
        """|T(z)| - 1 for exterior maps, 1 - |T(z)| for interior ones.

        Positive inside the flow domain; this is the quantity the
        boundary-avoidance functional controls.
        """
        mod = np.abs(self.map_values(z))
        return mod - 1.0 if self.kind == "exterior" else 1.0 - mod

    def boundary_point(self, theta: float) -> complex:
        """Physical boundary point whose image is exp(i*theta)."""
        return complex(self.inverse_values(np.exp(1j * float(theta))))

    def boundary_frame(self, theta: float) -> tuple[complex, complex, complex]:
        """(point, unit normal into the fluid, unit tangent) at exp(i*theta).

        The tangent is the normal rotated by +pi/2. Raises TooCloseToCorner
        where the boundary parametrisation degenerates (corner images).
        """
        w = np.exp(1j * float(theta))
        b = complex(self.inverse_values(w))
        # radial push in the mapped plane pulled back through the inverse map
        vel = complex(w * self.inverse_derivative_values(w))
        if abs(vel) < 1e-12:
            raise TooCloseToCorner(
                f"boundary frame degenerate at theta={theta!r} (corner image)"
            )
        n = vel / abs(vel)
        if self.kind == "interior":
            n = -n  # growing |w| points out of an interior domain
        return b, n, 1j * n


# --------------------------------------------------------------------------
# map families
# --------------------------------------------------------------------------


class UnitDiskIdentity(ConformalMap):
    """T(z) = z for the unit disk itself (exterior or interior flow)."""

    map_id = "unit_disk_identity"

    def __init__(self, parameters=None, kind="exterior"):
        super().__init__(parameters)
        if kind not in ("exterior", "interior"):
            raise ValidationError(f"unknown domain kind {kind!r}")
        self.kind = kind

    def map_values(self, z):
        return np.asarray(z, dtype=complex)

    def inverse_values(self, w):
        return np.asarray(w, dtype=complex)

    def derivative_values(self, z):
        return np.ones_like(np.asarray(z, dtype=complex))

    def inverse_derivative_values(self, w):
        return np.ones_like(np.asarray(w, dtype=complex))

    def contains(self, z):
        r = np.abs(np.asarray(z, dtype=complex))
        return r > 1.0 if self.kind == "exterior" else r < 1.0

    def boundary_distance(self, z):
        return np.abs(np.abs(np.asarray(z, dtype=complex)) - 1.0)


class ScaledDisk(ConformalMap):
    """T(z) = z / R for a circle of radius R (exterior or interior flow)."""

    map_id = "scaled_disk"

    def __init__(self, parameters=None, kind="exterior"):
        super().__init__(parameters)
        if kind not in ("exterior", "interior"):
            raise ValidationError(f"unknown domain kind {kind!r}")
        self.kind = kind
        radius = float(self.parameters.get("radius", 1.0))
        if radius <= 0.0:
            raise ValidationError("scaled_disk needs radius > 0")
        self.radius = radius

    @property
    def exact_farfield(self):
        if self.kind == "exterior":
            return (1.0 / self.radius, 0.0)
        return None

    def map_values(self, z):
        return np.asarray(z, dtype=complex) / self.radius

    def inverse_values(self, w):
        return np.asarray(w, dtype=complex) * self.radius

    def derivative_values(self, z):
        return np.full_like(np.asarray(z, dtype=complex), 1.0 / self.radius)

    def inverse_derivative_values(self, w):
        return np.full_like(np.asarray(w, dtype=complex), self.radius)

    def contains(self, z):
        r = np.abs(np.asarray(z, dtype=complex))
        return r > self.radius if self.kind == "exterior" else r < self.radius

    def boundary_distance(self, z):
        return np.abs(np.abs(np.asarray(z, dtype=complex)) - self.radius)


class ExteriorSegment(ConformalMap):
    """Flow outside the slit [-1, 1]: T(z) = z + sqrt(z - 1) sqrt(z + 1).

    Both slit tips are corners of interior angle 2*pi (the fluid wraps all
    the way around). T' = 1 + z / (sqrt(z - 1) sqrt(z + 1)), which blows up
    like r**(-1/2) at the tips; the inverse is (w + 1/w) / 2.
    """

    map_id = "exterior_segment"
    kind = "exterior"

    def __init__(self, parameters=None, kind="exterior"):
        super().__init__(parameters)
        if kind != "exterior":
            raise ValidationError("exterior_segment is an exterior family")
        two_pi = 2.0 * math.pi
        self.corners = (
            CornerSpec(1.0 + 0j, two_pi, 1.0 + 0j, 1.0 + 0j),
            CornerSpec(-1.0 + 0j, two_pi, -1.0 + 0j, -1.0 + 0j),
        )

    @property
    def exact_farfield(self):
        return (2.0, 0.0)

    @staticmethod
    def _root(z):
        # principal-branch product; continuous everywhere off [-1, 1]
        return np.sqrt(z - 1.0) * np.sqrt(z + 1.0)

    def map_values(self, z):
        z = np.asarray(z, dtype=complex)
        return z + self._root(z)

    def inverse_values(self, w):
        w = np.asarray(w, dtype=complex)
        return 0.5 * (w + 1.0 / w)

    def derivative_values(self, z):
        z = np.asarray(z, dtype=complex)
        return 1.0 + z / self._root(z)

    def inverse_derivative_values(self, w):
        w = np.asarray(w, dtype=complex)
        return 0.5 * (1.0 - 1.0 / (w * w))

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        on_slit = (z.imag == 0.0) & (np.abs(z.real) <= 1.0)
        return ~on_slit

    def on_branch_cut(self, z) -> bool:
        z = complex(z)
        return z.imag == 0.0 and abs(z.real) <= 1.0

    def boundary_distance(self, z):
        z = np.asarray(z, dtype=complex)
        dx = np.maximum(np.abs(z.real) - 1.0, 0.0)
        return np.hypot(dx, z.imag)


class ExteriorEllipse(ConformalMap):
    """Flow outside an ellipse with semi-axes a >= b > 0 (smooth boundary).

    T(z) = (z + sqrt(z - c) sqrt(z + c)) / (a + b) with c = sqrt(a^2 - b^2);
    inverse z = ((a + b) w + (a - b) / w) / 2. For a = b this degenerates to
    scaled_disk, which should be used instead.
    """

    map_id = "exterior_ellipse"
    kind = "exterior"

    def __init__(self, parameters=None, kind="exterior"):
        super().__init__(parameters)
        if kind != "exterior":
            raise ValidationError("exterior_ellipse is an exterior family")
        a = float(self.parameters.get("a", 2.0))
        b = float(self.parameters.get("b", 1.0))
        if not (a >= b > 0.0):
            raise ValidationError("exterior_ellipse needs a >= b > 0")
        self.a, self.b = a, b
        self.c = math.sqrt(max(a * a - b * b, 0.0))

    @property
    def exact_farfield(self):
        return (2.0 / (self.a + self.b), 0.0)

    def _root(self, z):
        return np.sqrt(z - self.c) * np.sqrt(z + self.c)

    def map_values(self, z):
        z = np.asarray(z, dtype=complex)
        return (z + self._root(z)) / (self.a + self.b)

    def inverse_values(self, w):
        w = np.asarray(w, dtype=complex)
        return 0.5 * ((self.a + self.b) * w + (self.a - self.b) / w)

    def derivative_values(self, z):
        z = np.asarray(z, dtype=complex)
        return (1.0 + z / self._root(z)) / (self.a + self.b)

    def inverse_derivative_values(self, w):
        w = np.asarray(w, dtype=complex)
        return 0.5 * ((self.a + self.b) - (self.a - self.b) / (w * w))

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        q = (z.real / self.a) ** 2 + (z.imag / self.b) ** 2
        return q > 1.0

    def on_branch_cut(self, z) -> bool:
        # the cut [-c, c] lies strictly inside the ellipse hole
        z = complex(z)
        return z.imag == 0.0 and abs(z.real) <= self.c


class InteriorWedgeLens(ConformalMap):
    """Bounded lens with one corner of opening angle alpha at the origin.

    The domain is the image of the unit disk under z = (1 + w)**p with
    p = alpha / pi in (1/2, 2]; so T(z) = z**(1/p) - 1 maps it back onto
    the unit disk. The corner sits at z = 0 with bisector along +x and
    image T = -1; the boundary is smooth elsewhere, and z = 1 maps to 0
    with T'(1) = 1/p.
    """

    map_id = "interior_wedge_lens"
    kind = "interior"

    def __init__(self, parameters=None, kind="interior"):
        super().__init__(parameters)
        if kind != "interior":
            raise ValidationError("interior_wedge_lens is an interior family")
        alpha = float(self.parameters.get("alpha", 1.5 * math.pi))
        if not (0.5 * math.pi < alpha <= 2.0 * math.pi):
            raise ValidationError(
                "interior_wedge_lens needs alpha in (pi/2, 2*pi]"
            )
        self.alpha = alpha
        self.p = alpha / math.pi
        self.corners = (CornerSpec(0.0 + 0j, alpha, 1.0 + 0j, -1.0 + 0j),)

    def map_values(self, z):
        z = np.asarray(z, dtype=complex)
        return z ** (1.0 / self.p) - 1.0

    def inverse_values(self, w):
        w = np.asarray(w, dtype=complex)
        return (1.0 + w) ** self.p

    def derivative_values(self, z):
        z = np.asarray(z, dtype=complex)
        return (1.0 / self.p) * z ** (1.0 / self.p - 1.0)

    def inverse_derivative_values(self, w):
        w = np.asarray(w, dtype=complex)
        return self.p * (1.0 + w) ** (self.p - 1.0)

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        # principal branch is valid on the whole lens (it avoids the
        # negative real axis), and points on the axis evaluate to
        # |T| >= 1 anyway
        with np.errstate(invalid="ignore", divide="ignore"):
            t = z ** (1.0 / self.p) - 1.0
        mod = np.abs(t)
        return np.where(np.isfinite(mod), mod < 1.0, False)

    def on_branch_cut(self, z) -> bool:
        z = complex(z)
        return z.imag == 0.0 and z.real <= 0.0


MAP_FAMILIES = {
    UnitDiskIdentity.map_id: UnitDiskIdentity,
    ScaledDisk.map_id: ScaledDisk,
    ExteriorSegment.map_id: ExteriorSegment,
    ExteriorEllipse.map_id: ExteriorEllipse,
    InteriorWedgeLens.map_id: InteriorWedgeLens,
}


def make_map(map_id: str, parameters: Optional[dict] = None, kind: Optional[str] = None) -> ConformalMap:
    """Instantiate a registered map family."""
    try:
        family = MAP_FAMILIES[map_id]
    except KeyError:
        raise UnknownMapFamily(
            f"unknown map family {map_id!r}; known: {sorted(MAP_FAMILIES)}"
        ) from None
    if kind is None:
        kind = family.kind or "exterior"
    return family(parameters, kind=kind)


# --------------------------------------------------------------------------
# checked single-point operations
# --------------------------------------------------------------------------


def eval_map(cmap: ConformalMap, x) -> complex:
    """T(x) for a point strictly inside the flow domain."""
    z = as_complex(x)
    if cmap.on_branch_cut(z):
        raise BranchCutViolation(f"point {z} lies on a branch cut")
    if not bool(cmap.contains(z)):
        raise PointOutsideDomain(f"point {z} is not inside the flow domain")
    return complex(cmap.map_values(z))


def eval_derivative(cmap: ConformalMap, x) -> complex:
    """T'(x) for a point strictly inside the flow domain."""
    z = as_complex(x)
    if cmap.on_branch_cut(z):
        raise BranchCutViolation(f"point {z} lies on a branch cut")
    if not bool(cmap.contains(z)):
        raise PointOutsideDomain(f"point {z} is not inside the flow domain")
    return complex(cmap.derivative_values(z))


def eval_inverse(cmap: ConformalMap, y) -> complex:
    """T^(-1)(y) for a point strictly inside the open target region."""
    w = as_complex(y)
    r = abs(w)
    if cmap.kind == "exterior":
        if r <= 1.0:
            raise PointOutsideTarget(f"|{w}| = {r} is not > 1")
    else:
        if r >= 1.0:
            raise PointOutsideTarget(f"|{w}| = {r} is not < 1")
    return complex(cmap.inverse_values(w))


# --------------------------------------------------------------------------
# fits
# --------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class CornerFit:
    """Least-squares exponent of |T'| ~ r**slope along a corner bisector."""

    slope: float
    expected: float
    max_residual: float
    radii: tuple[float, ...]


@dataclasses.dataclass(frozen=True)
class FarfieldFit:
    """Fitted far-field expansion T(z) ~ beta*z + beta_tilde."""

    beta: complex
    beta_tilde: complex
    residual: float
    radius: float
    n_samples: int


def corner_exponent_probe(cmap: ConformalMap, corner: CornerSpec, radii=None) -> CornerFit:
    """Fit the power-law exponent of |T'| approaching a corner.

    Samples x_k = corner + r_k * bisector, fits ln|T'(x_k)| against ln r_k
    by ordinary least squares and reports the slope next to the predicted
    pi/alpha - 1. The corner may be fictitious (e.g. a marked point of a
    smooth boundary with alpha = pi, where the exponent degenerates to 0).
    """
    if radii is None:
        radii = np.geomspace(1e-4, 1e-2, 9)
    radii = np.asarray(radii, dtype=float)
    if radii.size < 5:
        raise InsufficientSamples(f"need at least 5 radii, got {radii.size}")
    if np.any(radii <= 1e-5) or np.any(radii >= 1e-1):
        raise ValidationError("probe radii must lie in (1e-5, 1e-1)")
    b = as_complex(corner.bisector)
    b = b / abs(b)
    pts = np.asarray(corner.position, dtype=complex) + radii * b
    inside = cmap.contains(pts)
    if not np.all(inside):
        raise PointOutsideDomain("corner bisector samples leave the domain")
    lr = np.log(radii)
    if float(np.var(lr)) < 1e-6:
        raise FitDegenerate("radii span is too narrow for a slope fit")
    ld = np.log(np.abs(cmap.derivative_values(pts)))
    slope, intercept = np.polyfit(lr, ld, 1)
    resid = np.max(np.abs(ld - (slope * lr + intercept)))
    return CornerFit(
        slope=float(slope),
        expected=corner.exponent(),
        max_residual=float(resid),
        radii=tuple(float(r) for r in radii),
    )


def farfield_coefficients(cmap: ConformalMap, radius: float = 1e3, n_samples: int = 64) -> FarfieldFit:
    """Fit beta and beta_tilde of T(z) = beta*z + beta_tilde + O(1/z).

    Circle means over |z| = radius: both estimators kill the O(1/z) tail up
    to quadrature error, so the reported residual decays like 1/radius.
    """
    if cmap.kind != "exterior":
        raise InteriorDomainHasNoFarField(
            "far-field expansion only exists for exterior domains"
        )
    if n_samples < 4:
        raise InsufficientSamples("need at least 4 far-field samples")
    k = np.arange(n_samples)
    z = radius * np.exp(1j * (k + 0.5) * 2.0 * np.pi / n_samples)
    t = cmap.map_values(z)
    beta = np.mean(t / z)
    beta_tilde = np.mean(t - beta * z)
    resid = float(np.max(np.abs(t - beta * z - beta_tilde)))
    return FarfieldFit(
        beta=complex(beta),
        beta_tilde=complex(beta_tilde),
        residual=resid,
        radius=float(radius),
        n_samples=int(n_samples),
    )
