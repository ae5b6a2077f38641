"""Exception types shared across the library."""


class PlemeljLabError(Exception):
    """Base class for all library errors."""


class InvalidCurve(PlemeljLabError):
    """Curve specification violates an invariant (self-intersection, r <= 0, ...)."""


class DegeneratePath(PlemeljLabError):
    """Input polyline has repeated consecutive points or zero length."""


class InvalidParameter(PlemeljLabError):
    """A numeric parameter is outside its admissible range."""


class InvalidInput(PlemeljLabError):
    """Malformed sample array (wrong length, odd size, ...)."""


class DivergentWeight(PlemeljLabError):
    """Requested spectral weight mode has a divergent radial integral."""


class QuadratureFailure(PlemeljLabError):
    """Adaptive quadrature or grid sweep did not reach the target tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class SCNoConvergence(PlemeljLabError):
    """Schwarz-Christoffel parameter solve stagnated."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class IllConditioned(PlemeljLabError):
    """Problem data leads to a numerically ill-conditioned solve."""


class SingularPoint(PlemeljLabError):
    """Evaluation requested exactly at a singular point (prevertex, node)."""


class TheodorsenDiverged(PlemeljLabError):
    """Theodorsen iteration cannot contract (max |r'/r| >= 1) or failed to converge."""


class CurveMapMismatch(PlemeljLabError):
    """Riemann map image and sampled curve disagree beyond tolerance."""


class CorrespondenceDegenerate(PlemeljLabError):
    """Boundary correspondence is not strictly monotone on the grid."""


class OnCurvePoint(PlemeljLabError):
    """Off-curve evaluation requested at a curve node."""


class GramIllConditioned(PlemeljLabError):
    """Gram form of a discrete norm is numerically singular."""


class GridTooFine(PlemeljLabError):
    """Requested bitmap ladder exceeds the memory cap."""


class InvalidWeight(PlemeljLabError):
    """Weight samples must be strictly positive."""


class EmptyInterval(PlemeljLabError):
    """Solvable interval is empty (h >= 2)."""


class BranchError(PlemeljLabError):
    """Branch tracking of log(phi') failed."""


class PeriodizationWarning(UserWarning):
    """Grid field does not decay at the box boundary; FFT result is periodized."""
