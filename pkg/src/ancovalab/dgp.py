"""Constant-effect data-generating process with fixed, centered covariates.

The generating recipe: covariates are fixed constants centered at zero;
control potential outcomes are ``alpha + beta'x_i + eps_i`` with IID
mean-zero errors of variance ``sigma**2``; treated potential outcomes add a
constant effect ``tau``; an assignment is drawn from the configured design;
and the observed outcome selects the potential outcome of the realized arm.

Latents (errors and both potential outcomes) are kept in the generated
:class:`Dataset` so that decomposition identities remain checkable; this is
a simulation laboratory, not an analysis tool.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import ols
from .designs import DesignSpec, draw_assignment
from .errors import DimensionError, DimensionMismatch
from .estimators import Assignment
from .ols import DesignMatrix

ERROR_DISTRIBUTIONS = ("normal", "uniform", "rademacher")


def center_covariates(x_raw) -> tuple[DesignMatrix, np.ndarray]:
    """Center each covariate column at zero, returning the offsets removed.

    Two subtraction passes are used so the residual column means stay below
    1e-12 even when the raw columns sit far from zero.

    Returns
    -------
    (DesignMatrix, ndarray)
        Centered covariates and the per-column offsets, with
        ``x_raw ≈ centered + offsets``.
    """
    labels = x_raw.column_labels if isinstance(x_raw, DesignMatrix) else ()
    X = ols.as_matrix(x_raw)
    if X.shape[0] < 2:
        raise DimensionError(f"need at least 2 rows, got {X.shape[0]}")
    first = X.mean(axis=0)
    centered = X - first
    second = centered.mean(axis=0)
    centered = centered - second
    return DesignMatrix(centered, labels), first + second


@dataclass(frozen=True)
class DgpSpec:
    """Full description of one simulated experiment.

    Covariates are centered at ingestion (column means below 1e-12), so the
    stored matrix always satisfies the ``xbar = 0`` convention regardless of
    the input.

    Attributes
    ----------
    x : DesignMatrix
        Fixed covariates, shape (n, k).
    alpha : float
        Control-arm intercept.
    tau : float
        Constant individual treatment effect.
    beta : ndarray, shape (k,)
        Covariate coefficients.
    sigma : float
        Error standard deviation, > 0.
    design : DesignSpec
        Assignment mechanism; must have ``design.n == n``.
    error_dist : str
        ``"normal"``, ``"uniform"`` (on ``[-sigma*sqrt(3), sigma*sqrt(3)]``),
        or ``"rademacher"`` (``+-sigma`` equiprobably).
    """

    x: DesignMatrix
    alpha: float
    tau: float
    beta: np.ndarray
    sigma: float
    design: DesignSpec
    error_dist: str = "normal"

    def __post_init__(self):
        centered, _ = center_covariates(self.x)
        beta = np.atleast_1d(np.asarray(self.beta, dtype=float))
        if beta.shape != (centered.p,):
            raise DimensionMismatch(
                f"beta has shape {beta.shape}, expected ({centered.p},)"
            )
        if not np.all(np.isfinite(beta)):
            raise DimensionMismatch("beta contains non-finite entries")
        for name in ("alpha", "tau", "sigma"):
            if not np.isfinite(getattr(self, name)):
                raise DimensionMismatch(f"{name} must be finite")
        if self.sigma <= 0:
            raise ValueError(f"need sigma > 0, got {self.sigma}")
        if self.error_dist not in ERROR_DISTRIBUTIONS:
            raise ValueError(
                f"error_dist must be one of {ERROR_DISTRIBUTIONS}, got {self.error_dist!r}"
            )
        if self.design.n != centered.n:
            raise DimensionMismatch(
                f"design.n = {self.design.n} does not match covariate rows {centered.n}"
            )
        object.__setattr__(self, "x", centered)
        object.__setattr__(self, "beta", beta)

    @property
    def n(self) -> int:
        return self.x.n

    @property
    def k(self) -> int:
        return self.x.p


@dataclass(frozen=True)
class Dataset:
    """One realized experiment, latents included.

    Invariants (guaranteed by the constructors in this module):

    * ``y = z * y1 + (1 - z) * y0`` elementwise and exactly;
    * ``y0 = alpha + x @ beta + epsilon`` exactly;
    * ``y1 - y0 == tau`` up to floating-point rounding.
    """

    y: np.ndarray
    assignment: Assignment
    x: DesignMatrix
    epsilon: np.ndarray
    y0: np.ndarray
    y1: np.ndarray
    spec_snapshot: DgpSpec

    @property
    def n(self) -> int:
        return self.y.shape[0]

    def to_csv(self, path) -> None:
        """Write columns ``y, z, x_1..x_K, epsilon, y0, y1`` with a header row."""
        header = ["y", "z", *self.x.column_labels, "epsilon", "y0", "y1"]
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(header)
            for i in range(self.n):
                row = [
                    _cell(self.y[i]),
                    str(int(self.assignment.z[i])),
                    *(_cell(v) for v in self.x.values[i]),
                    _cell(self.epsilon[i]),
                    _cell(self.y0[i]),
                    _cell(self.y1[i]),
                ]
                writer.writerow(row)


def _cell(value: float) -> str:
    # repr round-trips doubles exactly, so the CSV is lossless.
    return repr(float(value))


def draw_errors(
    n: int, sigma: float, error_dist: str, rng: np.random.Generator
) -> np.ndarray:
    """IID mean-zero errors with standard deviation ``sigma``.

    The uniform variant draws on ``[-sigma*sqrt(3), sigma*sqrt(3)]`` and the
    rademacher variant puts mass 1/2 on each of ``+-sigma``, so all three
    distributions share the first two moments.
    """
    if sigma <= 0:
        raise ValueError(f"need sigma > 0, got {sigma}")
    if error_dist == "normal":
        return sigma * rng.standard_normal(n)
    if error_dist == "uniform":
        half_width = sigma * np.sqrt(3.0)
        return rng.uniform(-half_width, half_width, n)
    if error_dist == "rademacher":
        return sigma * (2.0 * rng.integers(0, 2, n) - 1.0)
    raise ValueError(f"error_dist must be one of {ERROR_DISTRIBUTIONS}, got {error_dist!r}")


def assemble(spec: DgpSpec, assignment: Assignment, epsilon: np.ndarray) -> Dataset:
    """Build the dataset implied by ``spec`` for a given assignment and error vector."""
    eps = ols.as_vector(epsilon, n=spec.n, name="epsilon")
    if assignment.n != spec.n:
        raise DimensionMismatch(f"assignment has n={assignment.n}, spec has n={spec.n}")
    y0 = spec.alpha + spec.x.values @ spec.beta + eps
    y1 = y0 + spec.tau
    y = np.where(assignment.z == 1, y1, y0)
    return Dataset(
        y=y, assignment=assignment, x=spec.x, epsilon=eps, y0=y0, y1=y1, spec_snapshot=spec
    )


def generate(spec: DgpSpec, rng: np.random.Generator) -> Dataset:
    """Draw a fresh assignment, then fresh errors, and assemble the dataset."""
    assignment = draw_assignment(spec.design, spec.x.values, rng)
    epsilon = draw_errors(spec.n, spec.sigma, spec.error_dist, rng)
    return assemble(spec, assignment, epsilon)


def regenerate_errors(dataset: Dataset, rng: np.random.Generator) -> Dataset:
    """Fresh errors, same assignment (bit-exact): the conditional-on-Z redraw."""
    spec = dataset.spec_snapshot
    epsilon = draw_errors(spec.n, spec.sigma, spec.error_dist, rng)
    return assemble(spec, dataset.assignment, epsilon)


def regenerate_assignment(dataset: Dataset, rng: np.random.Generator) -> Dataset:
    """Fresh assignment, same latents (bit-exact): the conditional-on-errors redraw.

    Potential outcomes never depend on the assignment, so ``epsilon``,
    ``y0`` and ``y1`` are carried over unchanged and only the observed
    outcome is recomputed.
    """
    spec = dataset.spec_snapshot
    assignment = draw_assignment(spec.design, spec.x.values, rng)
    y = np.where(assignment.z == 1, dataset.y1, dataset.y0)
    return Dataset(
        y=y,
        assignment=assignment,
        x=dataset.x,
        epsilon=dataset.epsilon,
        y0=dataset.y0,
        y1=dataset.y1,
        spec_snapshot=spec,
    )


def unit_variance_covariates(n: int, k: int, seed: int) -> DesignMatrix:
    """Deterministic covariates with exact identity finite-population covariance.

    A seeded Gaussian draw is centered, orthonormalized by QR, and rescaled
    by ``sqrt(n - 1)``, giving centered columns with ``S_x^2 = I`` up to
    floating-point error.  Useful for constructing scenarios where
    ``beta' S_x^2 beta`` is known exactly.
    """
    if not 1 <= k <= n - 1:
        raise DimensionError(f"need 1 <= k <= n - 1, got n={n}, k={k}")
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((n, k))
    centered = raw - raw.mean(axis=0)
    q, r = np.linalg.qr(centered)
    diag = np.diag(r)
    if np.any(np.abs(diag) < 1e-12):
        raise DimensionError("degenerate draw; choose another seed")
    q = q * np.sign(diag)
    return DesignMatrix(q * np.sqrt(n - 1.0))
