"""Numerically stable least squares with residualization and variance diagnostics.

The solver is QR-based (column-pivoted orthogonal decomposition, never the
normal equations) because downstream diagnostics divide by residual sums of
squares that can be tiny.  Rank decisions use a fixed relative pivot
threshold; near-perfect collinearity of the treatment with the covariates is
reported as an error rather than as an enormous variance inflation factor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    ConstantTreatment,
    DimensionMismatch,
    InsufficientDof,
    PerfectCollinearity,
    RankDeficient,
)

# Relative magnitude below which a QR pivot marks the design as rank deficient.
PIVOT_RTOL = 1e-10
# R^2 of treatment on covariates at or above 1 - COLLINEARITY_RTOL is treated
# as perfect collinearity.
COLLINEARITY_RTOL = 1e-12


@dataclass(frozen=True)
class DesignMatrix:
    """Validated (n, p) regressor matrix with column labels.

    Parameters
    ----------
    values : array_like, shape (n, p) or (n,)
        Regressor values; a 1-d input becomes a single column.
    column_labels : tuple of str, optional
        One label per column; defaults to ``("x_1", ..., "x_p")``.

    Raises
    ------
    DimensionMismatch
        If n < p, p < 1, entries are non-finite, or label count is wrong.
    """

    values: np.ndarray
    column_labels: tuple[str, ...] = ()

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise DimensionMismatch(f"design must be 2-d, got ndim={arr.ndim}")
        n, p = arr.shape
        if p < 1:
            raise DimensionMismatch("design needs at least one column")
        if n < p:
            raise DimensionMismatch(f"need n >= p, got n={n}, p={p}")
        if not np.all(np.isfinite(arr)):
            raise DimensionMismatch("design contains non-finite entries")
        labels = tuple(self.column_labels) or tuple(f"x_{j + 1}" for j in range(p))
        if len(labels) != p:
            raise DimensionMismatch(f"{len(labels)} labels for {p} columns")
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "column_labels", labels)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class OlsFit:
    """Result of one least-squares fit.

    Attributes
    ----------
    coefficients : ndarray, shape (p,)
    residuals : ndarray, shape (n,)
        ``response - fitted``; orthogonal to every design column.
    rss : float
        Squared norm of the residuals.
    dof : int
        Residual degrees of freedom, ``n - p``.
    fitted : ndarray, shape (n,)
    """

    coefficients: np.ndarray
    residuals: np.ndarray
    rss: float
    dof: int
    fitted: np.ndarray

    @property
    def sigma2(self) -> float:
        """Residual variance estimate ``rss / dof``."""
        if self.dof <= 0:
            raise InsufficientDof("zero residual degrees of freedom")
        return self.rss / self.dof


def as_matrix(x, *, allow_empty: bool = False) -> np.ndarray:
    """Coerce a DesignMatrix / 2-d / 1-d input to an (n, k) float array."""
    if isinstance(x, DesignMatrix):
        return x.values
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got ndim={arr.ndim}")
    if arr.shape[1] == 0 and not allow_empty:
        raise DimensionMismatch("matrix has no columns")
    if not np.all(np.isfinite(arr)):
        raise DimensionMismatch("matrix contains non-finite entries")
    return arr


def as_vector(v, n: int | None = None, name: str = "vector") -> np.ndarray:
    """Coerce to a finite 1-d float array, optionally checking its length."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-d, got ndim={arr.ndim}")
    if n is not None and arr.shape[0] != n:
        raise DimensionMismatch(f"{name} has length {arr.shape[0]}, expected {n}")
    if not np.all(np.isfinite(arr)):
        raise DimensionMismatch(f"{name} contains non-finite entries")
    return arr


def _pivoted_qr(X: np.ndarray):
    return scipy.linalg.qr(X, mode="economic", pivoting=True)


def _check_pivots(r: np.ndarray, context: str) -> None:
    pivots = np.abs(np.diag(r))
    if pivots.size == 0 or pivots[0] == 0.0 or pivots[-1] <= PIVOT_RTOL * pivots[0]:
        raise RankDeficient(f"collinear columns in {context}")


def least_squares(design, response) -> OlsFit:
    """Solve ``min ||response - design @ beta||^2`` by column-pivoted QR.

    Parameters
    ----------
    design : DesignMatrix or array_like, shape (n, p)
        Full design including any intercept column.
    response : array_like, shape (n,)

    Returns
    -------
    OlsFit

    Raises
    ------
    RankDeficient
        If the smallest QR pivot falls below ``PIVOT_RTOL`` times the largest.
    DimensionMismatch
        If the response length differs from n, or n < p.
    """
    X = as_matrix(design)
    n, p = X.shape
    y = as_vector(response, n=n, name="response")
    if n < p:
        raise DimensionMismatch(f"need n >= p, got n={n}, p={p}")
    q, r, piv = _pivoted_qr(X)
    _check_pivots(r, "design")
    coef_p = scipy.linalg.solve_triangular(r, q.T @ y)
    coefficients = np.empty(p)
    coefficients[piv] = coef_p
    fitted = X @ coefficients
    residuals = y - fitted
    rss = float(residuals @ residuals)
    return OlsFit(
        coefficients=coefficients,
        residuals=residuals,
        rss=rss,
        dof=n - p,
        fitted=fitted,
    )


def _with_intercept(x_values: np.ndarray) -> np.ndarray:
    return np.column_stack([np.ones(x_values.shape[0]), x_values])


def _fit_z_on_covariates(z: np.ndarray, x_values: np.ndarray) -> OlsFit:
    """OLS fit of the treatment on an intercept and the covariate block."""
    return least_squares(_with_intercept(x_values), z)


def fwl_residualize(z, x) -> np.ndarray:
    """Residualize ``z`` on an intercept and covariates ``x``.

    The returned vector is orthogonal to the all-ones column and to every
    column of ``x``.  By the partialling-out identity, the coefficient of
    ``z`` in the full regression of any ``y`` on ``(1, z, x)`` equals
    ``sum(z_res * y) / sum(z_res**2)``.

    Raises
    ------
    RankDeficient
        If ``(1, x)`` is rank deficient or ``z`` lies in its span
        (e.g. a constant ``z``).
    DimensionMismatch
        If ``n <= dim(x) + 1``.
    """
    X = as_matrix(x)
    n = X.shape[0]
    zv = as_vector(z, n=n, name="z")
    if n <= X.shape[1] + 1:
        raise DimensionMismatch(f"need n > dim(x) + 1, got n={n}, dim(x)={X.shape[1]}")
    augmented = np.column_stack([np.ones(n), X, zv])
    _, r_aug, _ = _pivoted_qr(augmented)
    _check_pivots(r_aug, "(1, x, z)")
    return _fit_z_on_covariates(zv, X).residuals


def _treatment_tss(z: np.ndarray) -> float:
    centered = z - z.mean()
    return float(centered @ centered)


def vif(z, x) -> float:
    """Variance inflation factor of ``z`` given covariates ``x``.

    Total sum of squares of ``z`` divided by the residual sum of squares
    from the fit of ``z`` on ``(1, x)``; always >= 1 and equal to
    ``1 / (1 - r_squared_z_given_x(z, x))``.

    Raises
    ------
    ConstantTreatment
        If ``z`` has no variation.
    PerfectCollinearity
        If the fit explains ``z`` with R^2 >= 1 - 1e-12.
    """
    X = as_matrix(x)
    zv = as_vector(z, n=X.shape[0], name="z")
    if np.ptp(zv) == 0:
        raise ConstantTreatment("treatment vector is constant")
    fit = _fit_z_on_covariates(zv, X)
    tss = _treatment_tss(zv)
    r2 = 1.0 - fit.rss / tss
    if r2 >= 1.0 - COLLINEARITY_RTOL:
        raise PerfectCollinearity(
            f"treatment is perfectly explained by the covariates (R^2 = {r2:.17g})"
        )
    return tss / fit.rss


def r_squared_z_given_x(z, x) -> float:
    """Sample R^2 from the fit of ``z`` on ``(1, x)``, clipped to [0, 1].

    Unlike :func:`vif`, a perfect fit is a valid value (1.0), not an error.
    """
    X = as_matrix(x)
    zv = as_vector(z, n=X.shape[0], name="z")
    if np.ptp(zv) == 0:
        raise ConstantTreatment("treatment vector is constant")
    fit = _fit_z_on_covariates(zv, X)
    r2 = 1.0 - fit.rss / _treatment_tss(zv)
    return float(min(max(r2, 0.0), 1.0))


def estimated_variance_unadjusted(y, z) -> float:
    """Classical OLS variance estimate of the ``z`` coefficient in ``y ~ (1, z)``.

    Computes ``sigma2_yz / tss_z`` where ``sigma2_yz`` is the residual sum of
    squares of the two-column fit divided by ``n - 2``.

    Raises
    ------
    InsufficientDof
        If ``n <= 2``.
    ConstantTreatment
        If ``z`` has no variation.
    """
    zv = as_vector(z, name="z")
    n = zv.shape[0]
    yv = as_vector(y, n=n, name="y")
    if n <= 2:
        raise InsufficientDof(f"need n > 2, got n={n}")
    if np.ptp(zv) == 0:
        raise ConstantTreatment("treatment vector is constant")
    fit = least_squares(_with_intercept(zv[:, None]), yv)
    sigma2 = fit.rss / (n - 2)
    return sigma2 / _treatment_tss(zv)


def estimated_variance_adjusted(y, z, x) -> float:
    """Classical OLS variance estimate of the ``z`` coefficient in ``y ~ (1, z, x)``.

    Computes ``sigma2_yzx / tss_z * vif(z, x)`` where ``sigma2_yzx`` is the
    residual sum of squares of the full fit divided by ``n - 2 - dim(x)``.
    Algebraically equal to ``sigma2_yzx / sum(z_res**2)`` with ``z_res`` the
    partialled-out treatment.

    Raises
    ------
    InsufficientDof
        If ``n <= 2 + dim(x)``.
    RankDeficient
        If ``(1, z, x)`` is collinear (including constant or covariate-spanned z).
    """
    X = as_matrix(x)
    n, k = X.shape
    zv = as_vector(z, n=n, name="z")
    yv = as_vector(y, n=n, name="y")
    if n <= 2 + k:
        raise InsufficientDof(f"need n > 2 + dim(x), got n={n}, dim(x)={k}")
    full = np.column_stack([np.ones(n), zv, X])
    fit = least_squares(full, yv)
    sigma2 = fit.rss / (n - 2 - k)
    return sigma2 / _treatment_tss(zv) * vif(zv, X)
