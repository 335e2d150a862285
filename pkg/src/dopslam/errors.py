"""Exception hierarchy shared across the package."""


class DopSlamError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateGeometry(DopSlamError):
    """Geometric construction is undefined (parallel line/plane, coincident points)."""


class InvalidKind(DopSlamError):
    """A landmark kind is not admissible for the requested operation."""


class InfeasibleBirth(DopSlamError):
    """No landmark position is consistent with the measurement (ellipse constraint)."""


class SingularPrior(DopSlamError):
    """A prior covariance is not positive definite."""


class NumericalFailure(DopSlamError):
    """A matrix operation exceeded the conditioning / PSD-repair tolerances."""


class Infeasible(DopSlamError):
    """No finite-cost assignment exists."""


class NoFeasibleDA(DopSlamError):
    """No data association hypothesis has nonzero likelihood."""


class LengthMismatch(DopSlamError):
    """Paired series have different lengths."""


class ConfigError(DopSlamError):
    """A run configuration is missing, malformed or inconsistent."""
