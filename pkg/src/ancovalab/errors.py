"""Typed exceptions shared across the package."""


class AncovaLabError(Exception):
    """Base class for all ancovalab errors."""


class DimensionMismatch(AncovaLabError):
    """Inputs disagree on the number of rows or columns."""


class DimensionError(AncovaLabError):
    """Too few observations for the requested statistic."""


class RankDeficient(AncovaLabError):
    """Design matrix has numerically collinear columns."""


class PerfectCollinearity(AncovaLabError):
    """Treatment is perfectly explained by the covariates."""


class ConstantTreatment(AncovaLabError):
    """Treatment vector has no variation."""


class InsufficientDof(AncovaLabError):
    """No residual degrees of freedom left for a variance estimate."""


class DegenerateAssignment(AncovaLabError):
    """Assignment puts every unit in the same arm."""


class InvalidCounts(AncovaLabError):
    """Treated/control counts are impossible for the given n."""


class SingularCovariance(AncovaLabError):
    """Finite-population covariance of the covariates is not invertible."""


class AcceptanceExhausted(AncovaLabError):
    """Rejection sampling hit max_attempts without an acceptable draw."""

    def __init__(self, attempts: int, smallest_seen: float):
        self.attempts = attempts
        self.smallest_seen = smallest_seen
        super().__init__(
            f"no acceptable assignment in {attempts} attempts "
            f"(smallest balance statistic seen: {smallest_seen:.6g})"
        )
