"""Exception types shared across the package.

Everything derives from CornerflowError so callers can catch the library's
failures with a single except clause. The CLI maps ParseError/ValidationError
to exit code 2 and leaves the rest to surface as ordinary tracebacks.
"""


class CornerflowError(Exception):
    """Base class for all errors raised by cornerflow."""


# --- conformal maps ---------------------------------------------------------

class PointOutsideDomain(CornerflowError):
    """A physical point was expected inside the flow domain but is not."""


class PointOutsideTarget(CornerflowError):
    """A mapped point was expected inside the open target region of the map."""


class BranchCutViolation(CornerflowError):
    """Evaluation landed on a branch cut where the map is not single valued."""


class InsufficientSamples(CornerflowError):
    """A fit was requested with too few sample points to be meaningful."""


class FitDegenerate(CornerflowError):
    """The abscissae of a least-squares fit have (numerically) zero spread."""


class InteriorDomainHasNoFarField(CornerflowError):
    """Far-field expansion requested for a bounded (interior) domain."""


class UnknownMapFamily(CornerflowError):
    """Map identifier does not name a registered map family."""


# --- kernels / velocity -----------------------------------------------------

class CoincidentPoints(CornerflowError):
    """Source and evaluation point coincide where a kernel is singular."""


class InteriorDomainHasNoHarmonicField(CornerflowError):
    """The circulatory harmonic field only exists for exterior domains."""


class TooCloseToCorner(CornerflowError):
    """Boundary trace requested inside the excluded neighbourhood of a corner."""


class ContourLeavesDomain(CornerflowError):
    """A circulation contour has vertices outside the flow domain."""


class EmptyEnsemble(CornerflowError):
    """An operation needs at least one vortex particle."""


# --- transport --------------------------------------------------------------

class PatchTouchesBoundary(CornerflowError):
    """Requested vortex patch overlaps the safety margin at the boundary."""


class StepTooLarge(CornerflowError):
    """Time step violates the advection stability guard."""


class ParticleEscapedDomain(CornerflowError):
    """A particle left the flow domain during a time step."""


class ParticleOnBoundary(CornerflowError):
    """A particle sits on (or numerically on) the domain boundary."""


# --- boundary-avoidance functional ------------------------------------------

class CoincidesWithParticle(CornerflowError):
    """Evaluation point coincides with a vortex particle."""


class SignConditionViolated(CornerflowError):
    """One-signed vorticity / circulation hypotheses do not hold."""


class EmptyTrace(CornerflowError):
    """A time-series fit needs more recorded samples."""


# --- harmonic split ----------------------------------------------------------

class DiskContainsVorticity(CornerflowError):
    """Mean-value test disk overlaps the vortex support."""


class DiskLeavesRegion(CornerflowError):
    """Mean-value test disk crosses the domain boundary."""


class CirculationMismatch(CornerflowError):
    """Two runs that must share total circulation and gamma0 do not."""


# --- configuration / CLI -----------------------------------------------------

class ParseError(CornerflowError):
    """Configuration file is not syntactically valid."""


class ValidationError(CornerflowError):
    """Configuration parsed but violates the schema or a value constraint."""
