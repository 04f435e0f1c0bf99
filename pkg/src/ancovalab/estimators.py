"""Treatment-effect estimators and design-based summary statistics.

Three point estimators of the average treatment effect are provided: the
plain difference in means, the covariate-adjusted (ANCOVA) regression
coefficient, and the fully interacted regression coefficient.  All of them
delegate the linear algebra to :mod:`ancovalab.ols` so there is a single
source of truth for rank handling and variance formulas.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ols
from .errors import (
    DegenerateAssignment,
    DimensionError,
    DimensionMismatch,
    InsufficientDof,
)


@dataclass(frozen=True)
class Assignment:
    """Binary treatment vector with its arm counts.

    Attributes
    ----------
    z : ndarray of int, shape (n,)
        Entries in {0, 1}.
    n1, n0 : int
        Number of treated / control units; both must be >= 1.
    """

    z: np.ndarray
    n1: int
    n0: int

    def __post_init__(self):
        arr = np.asarray(self.z)
        if arr.ndim != 1:
            raise DimensionMismatch("assignment must be 1-d")
        arr = arr.astype(np.int64, copy=False)
        if not np.all((arr == 0) | (arr == 1)):
            raise DimensionMismatch("assignment entries must be 0 or 1")
        n1 = int(arr.sum())
        n0 = arr.shape[0] - n1
        if n1 != self.n1 or n0 != self.n0:
            raise DimensionMismatch(
                f"counts (n1={self.n1}, n0={self.n0}) do not match z "
                f"(n1={n1}, n0={n0})"
            )
        if n1 < 1 or n0 < 1:
            raise DegenerateAssignment(f"need both arms non-empty, got n1={n1}, n0={n0}")
        object.__setattr__(self, "z", arr)

    @classmethod
    def from_z(cls, z) -> "Assignment":
        arr = np.asarray(z).astype(np.int64)
        n1 = int(np.sum(arr == 1))
        return cls(z=arr, n1=n1, n0=arr.shape[0] - n1)

    @property
    def n(self) -> int:
        return self.z.shape[0]


@dataclass(frozen=True)
class EstimatorResult:
    """Point estimate of the treatment effect, optionally with its OLS variance."""

    tau_hat: float
    estimator_kind: str  # "unadjusted" | "ancova" | "lin"
    est_variance: float | None = None


def _coerce_assignment(assignment) -> Assignment:
    if isinstance(assignment, Assignment):
        return assignment
    return Assignment.from_z(assignment)


def diff_in_means(v, assignment) -> float | np.ndarray:
    """Treated-minus-control mean difference of ``v``.

    Parameters
    ----------
    v : array_like, shape (n,) or (n, k)
        A 2-d input is handled columnwise and returns a length-k vector.
    assignment : Assignment or array_like of {0, 1}

    Raises
    ------
    DegenerateAssignment
        If either arm is empty.
    """
    a = _coerce_assignment(assignment)
    arr = np.asarray(v, dtype=float)
    if arr.shape[0] != a.n:
        raise DimensionMismatch(f"v has {arr.shape[0]} rows, assignment has {a.n}")
    if not np.all(np.isfinite(arr)):
        raise DimensionMismatch("v contains non-finite entries")
    treated = a.z == 1
    if arr.ndim == 1:
        return float(arr[treated].mean() - arr[~treated].mean())
    return arr[treated].mean(axis=0) - arr[~treated].mean(axis=0)


def unadjusted_estimator(y, assignment, with_variance: bool = False) -> EstimatorResult:
    """Difference in mean outcomes; the ``z`` coefficient of ``y ~ (1, z)``."""
    a = _coerce_assignment(assignment)
    tau_hat = diff_in_means(y, a)
    est_variance = None
    if with_variance:
        est_variance = ols.estimated_variance_unadjusted(y, a.z.astype(float))
    return EstimatorResult(tau_hat=tau_hat, estimator_kind="unadjusted", est_variance=est_variance)


def ancova_estimator(y, assignment, x, with_variance: bool = False) -> EstimatorResult:
    """Covariate-adjusted effect: the ``z`` coefficient of OLS ``y ~ (1, z, x)``.

    Raises
    ------
    RankDeficient
        If ``(1, z, x)`` is collinear.
    InsufficientDof
        If ``n <= 2 + dim(x)``.
    DegenerateAssignment
        If either arm is empty.
    """
    a = _coerce_assignment(assignment)
    X = ols.as_matrix(x, allow_empty=True)
    if X.shape[1] == 0:
        res = unadjusted_estimator(y, a, with_variance=with_variance)
        return EstimatorResult(res.tau_hat, "ancova", res.est_variance)
    n = a.n
    if n <= 2 + X.shape[1]:
        raise InsufficientDof(f"need n > {2 + X.shape[1]}, got n={n}")
    zf = a.z.astype(float)
    design = np.column_stack([np.ones(n), zf, X])
    fit = ols.least_squares(design, y)
    est_variance = None
    if with_variance:
        est_variance = ols.estimated_variance_adjusted(y, zf, X)
    return EstimatorResult(
        tau_hat=float(fit.coefficients[1]), estimator_kind="ancova", est_variance=est_variance
    )


def lin_estimator(y, assignment, x, with_variance: bool = False) -> EstimatorResult:
    """Interacted adjustment: ``z`` coefficient of ``y ~ (1, z, x_c, z * x_c)``.

    The covariates are centered at their realized sample mean before the
    interaction is formed, so the coefficient of ``z`` is the effect at the
    covariate mean.  With no covariates this reduces to the difference in
    means.  Equivalent to fitting separate regressions in each arm and
    differencing their predictions at the overall covariate mean.

    Raises
    ------
    RankDeficient
        If the interacted design is collinear.
    InsufficientDof
        If ``n <= 2 + 2 * dim(x)``.
    """
    a = _coerce_assignment(assignment)
    X = ols.as_matrix(x, allow_empty=True)
    k = X.shape[1]
    if k == 0:
        res = unadjusted_estimator(y, a, with_variance=with_variance)
        return EstimatorResult(res.tau_hat, "lin", res.est_variance)
    n = a.n
    if n <= 2 + 2 * k:
        raise InsufficientDof(f"need n > {2 + 2 * k}, got n={n}")
    zf = a.z.astype(float)
    x_c = X - X.mean(axis=0)
    interactions = x_c * zf[:, None]
    design = np.column_stack([np.ones(n), zf, x_c, interactions])
    fit = ols.least_squares(design, y)
    est_variance = None
    if with_variance:
        z_res = ols.fwl_residualize(zf, np.column_stack([x_c, interactions]))
        est_variance = fit.sigma2 / float(z_res @ z_res)
    return EstimatorResult(
        tau_hat=float(fit.coefficients[1]), estimator_kind="lin", est_variance=est_variance
    )


def finite_pop_covariance(x) -> np.ndarray:
    """Finite-population covariance ``sum((x_i - xbar)(x_i - xbar)') / (n - 1)``.

    Returns a (k, k) symmetric positive semidefinite matrix; a 1-d input is
    treated as a single column.

    Raises
    ------
    DimensionError
        If fewer than two rows.
    """
    X = ols.as_matrix(x)
    n = X.shape[0]
    if n < 2:
        raise DimensionError(f"need at least 2 rows, got {n}")
    centered = X - X.mean(axis=0)
    return centered.T @ centered / (n - 1)
