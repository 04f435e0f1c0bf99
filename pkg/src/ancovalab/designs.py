"""Treatment-assignment mechanisms.

Complete randomization, Bernoulli assignment with conditioning on the
realized arm counts, and rerandomization under the Mahalanobis balance
criterion.  Generators are pure functions of an explicit
``numpy.random.Generator``; callers own stream allocation (see
:mod:`ancovalab.rng`).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Iterable

import numpy as np

from . import ols
from .errors import (
    AcceptanceExhausted,
    DegenerateAssignment,
    InvalidCounts,
    SingularCovariance,
)
from .estimators import Assignment, diff_in_means, finite_pop_covariance

# Relative eigenvalue threshold below which the balance covariance counts as singular.
EIGENVALUE_RTOL = 1e-10
# Consecutive degenerate Bernoulli draws tolerated before giving up.
MAX_DEGENERATE_DRAWS = 10_000
# Default rejection-sampling budget for rerandomization.
DEFAULT_MAX_ATTEMPTS = 1_000_000
# Largest number of enumerated assignments allowed.
ENUMERATION_LIMIT = 500_000


@dataclass(frozen=True)
class DesignSpec:
    """Description of an assignment mechanism.

    ``kind`` is one of ``"complete"``, ``"bernoulli"``, ``"rerandomized"``.
    Complete and rerandomized designs fix the treated count ``n1``;
    Bernoulli designs fix the treatment probability ``p``; rerandomized
    designs additionally carry the balance threshold and attempt budget.
    """

    kind: str
    n: int
    n1: int | None = None
    p: float | None = None
    threshold_a: float | None = None
    max_attempts: int = DEFAULT_MAX_ATTEMPTS

    def __post_init__(self):
        if self.n < 2:
            raise InvalidCounts(f"need n >= 2, got n={self.n}")
        if self.kind in ("complete", "rerandomized"):
            if self.n1 is None or not 1 <= self.n1 <= self.n - 1:
                raise InvalidCounts(f"need 1 <= n1 <= n - 1, got n1={self.n1}, n={self.n}")
        elif self.kind == "bernoulli":
            if self.p is None or not 0.0 < self.p < 1.0:
                raise ValueError(f"need 0 < p < 1, got p={self.p}")
        else:
            raise ValueError(f"unknown design kind {self.kind!r}")
        if self.kind == "rerandomized":
            if self.threshold_a is None or self.threshold_a <= 0:
                raise ValueError(f"need threshold_a > 0, got {self.threshold_a}")
            if self.max_attempts < 1:
                raise ValueError(f"need max_attempts >= 1, got {self.max_attempts}")

    @classmethod
    def complete(cls, n: int, n1: int) -> "DesignSpec":
        return cls(kind="complete", n=n, n1=n1)

    @classmethod
    def bernoulli(cls, n: int, p: float) -> "DesignSpec":
        return cls(kind="bernoulli", n=n, p=p)

    @classmethod
    def rerandomized(
        cls, n: int, n1: int, threshold_a: float, max_attempts: int = DEFAULT_MAX_ATTEMPTS
    ) -> "DesignSpec":
        return cls(
            kind="rerandomized", n=n, n1=n1, threshold_a=threshold_a, max_attempts=max_attempts
        )


def complete_randomization(n: int, n1: int, rng: np.random.Generator) -> Assignment:
    """Uniform draw over all arrangements of ``n1`` ones and ``n - n1`` zeros.

    Raises
    ------
    InvalidCounts
        Unless ``1 <= n1 <= n - 1``.
    """
    if not 1 <= n1 <= n - 1:
        raise InvalidCounts(f"need 1 <= n1 <= n - 1, got n1={n1}, n={n}")
    z = np.zeros(n, dtype=np.int64)
    z[:n1] = 1
    rng.shuffle(z)
    return Assignment(z=z, n1=n1, n0=n - n1)


def bernoulli_assignment(
    n: int, p: float, rng: np.random.Generator
) -> tuple[Assignment, int]:
    """IID Bernoulli(p) assignment, redrawing any all-0 or all-1 vector.

    Returns
    -------
    (Assignment, int)
        The accepted assignment and the number of degenerate draws rejected
        before acceptance.

    Raises
    ------
    DegenerateAssignment
        After 10,000 consecutive degenerate draws (e.g. ``n = 1``).
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"need 0 < p < 1, got p={p}")
    rejections = 0
    for _ in range(MAX_DEGENERATE_DRAWS):
        z = (rng.random(n) < p).astype(np.int64)
        n1 = int(z.sum())
        if 0 < n1 < n:
            return Assignment(z=z, n1=n1, n0=n - n1), rejections
        rejections += 1
    raise DegenerateAssignment(
        f"{MAX_DEGENERATE_DRAWS} consecutive degenerate draws (n={n}, p={p})"
    )


def condition_on_counts(draws: Iterable[Assignment], n1: int) -> list[Assignment]:
    """Keep only the assignments with exactly ``n1`` treated units.

    Conditioning Bernoulli draws on the realized counts reduces them to
    complete randomization; may return an empty list.
    """
    return [a for a in draws if a.n1 == n1]


def _balance_whitener(x_values: np.ndarray, n1: int, n0: int):
    """Eigendecomposition of ``(n / (n1 n0)) * S_x^2`` for the balance metric.

    Raises SingularCovariance when the smallest eigenvalue is at or below
    EIGENVALUE_RTOL times the largest.
    """
    n = n1 + n0
    cov = (n / (n1 * n0)) * finite_pop_covariance(x_values)
    eigenvalues, eigenvectors = np.linalg.eigh(cov)
    if eigenvalues[-1] <= 0 or eigenvalues[0] <= EIGENVALUE_RTOL * eigenvalues[-1]:
        raise SingularCovariance(
            "covariate covariance is singular "
            f"(eigenvalue range [{eigenvalues[0]:.3g}, {eigenvalues[-1]:.3g}])"
        )
    return eigenvalues, eigenvectors


def _balance_statistic(delta, eigenvalues, eigenvectors) -> float:
    u = eigenvectors.T @ delta
    return float(np.sum(u * u / eigenvalues))


def mahalanobis_balance(x, assignment) -> float:
    """Covariate imbalance ``delta' cov(delta)^(-1) delta``.

    ``delta`` is the vector of treated-minus-control covariate means and
    ``cov(delta) = (n / (n1 n0)) * S_x^2`` its exact covariance under
    complete randomization.  Nonnegative, zero iff the arms have identical
    covariate means, and invariant under invertible affine maps of ``x``.

    Raises
    ------
    SingularCovariance
        If ``S_x^2`` is not invertible at the relative eigenvalue threshold.
    """
    X = ols.as_matrix(x)
    a = assignment if isinstance(assignment, Assignment) else Assignment.from_z(assignment)
    eigenvalues, eigenvectors = _balance_whitener(X, a.n1, a.n0)
    delta = np.atleast_1d(diff_in_means(X, a))
    return _balance_statistic(delta, eigenvalues, eigenvectors)


def rerandomize(
    x,
    n1: int,
    threshold_a: float,
    rng: np.random.Generator,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
) -> tuple[Assignment, int]:
    """Redraw complete randomization until the balance statistic is <= ``threshold_a``.

    Returns
    -------
    (Assignment, int)
        The accepted assignment and the number of attempts used (>= 1).
        The accepted law is complete randomization truncated to the
        acceptance region.

    Raises
    ------
    AcceptanceExhausted
        If ``max_attempts`` draws are all rejected; carries the smallest
        balance statistic seen.
    SingularCovariance
        If the balance metric is not defined for ``x``.
    """
    if threshold_a <= 0:
        raise ValueError(f"need threshold_a > 0, got {threshold_a}")
    if max_attempts < 1:
        raise ValueError(f"need max_attempts >= 1, got {max_attempts}")
    X = ols.as_matrix(x)
    n = X.shape[0]
    eigenvalues, eigenvectors = _balance_whitener(X, n1, n - n1)
    smallest = np.inf
    for attempt in range(1, max_attempts + 1):
        candidate = complete_randomization(n, n1, rng)
        delta = np.atleast_1d(diff_in_means(X, candidate))
        statistic = _balance_statistic(delta, eigenvalues, eigenvectors)
        if statistic <= threshold_a:
            return candidate, attempt
        smallest = min(smallest, statistic)
    raise AcceptanceExhausted(max_attempts, smallest)


def enumerate_assignments(n: int, n1: int) -> np.ndarray:
    """All ``C(n, n1)`` binary assignment vectors, one per row.

    Rows follow the lexicographic order of the treated index sets, so the
    output is deterministic.  Intended for exact small-sample distributions.

    Raises
    ------
    InvalidCounts
        Unless ``1 <= n1 <= n - 1`` or if ``C(n, n1)`` exceeds the
        enumeration limit.
    """
    if not 1 <= n1 <= n - 1:
        raise InvalidCounts(f"need 1 <= n1 <= n - 1, got n1={n1}, n={n}")
    total = comb(n, n1)
    if total > ENUMERATION_LIMIT:
        raise InvalidCounts(f"C({n}, {n1}) = {total} exceeds enumeration limit")
    out = np.zeros((total, n), dtype=np.int64)
    for i, treated in enumerate(combinations(range(n), n1)):
        out[i, list(treated)] = 1
    return out


def draw_assignment(design: DesignSpec, x, rng: np.random.Generator) -> Assignment:
    """Draw one assignment from ``design`` (``x`` is used only for rerandomization)."""
    if design.kind == "complete":
        return complete_randomization(design.n, design.n1, rng)
    if design.kind == "bernoulli":
        assignment, _ = bernoulli_assignment(design.n, design.p, rng)
        return assignment
    if design.kind == "rerandomized":
        assignment, _ = rerandomize(
            x, design.n1, design.threshold_a, rng, max_attempts=design.max_attempts
        )
        return assignment
    raise ValueError(f"unknown design kind {design.kind!r}")
