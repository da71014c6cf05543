"""Least-squares kernels: standardization, joint OLS, partial regression.

No intercepts appear anywhere: columns are standardized to mean zero
before any fitting, so regressions go through the origin.  Joint OLS
solves the normal equations by Cholesky with a relative pivot floor;
neighborhoods are small, so this is both fast and numerically adequate.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg

from .model import DataMatrix

# Relative floor for the Cholesky pivots of Z'Z: below it the design is
# treated as rank deficient.
PIVOT_RTOL = 1e-10

# A residual column with squared norm below this fraction of n carries no
# usable signal; partial updates against it are skipped.
DEGENERATE_NORM2_PER_ROW = 1e-12


class ZeroVarianceColumn(ValueError):
    """A data column is constant and cannot be standardized."""

    def __init__(self, column: int):
        super().__init__(f"column {column} has zero variance")
        self.column = column


class RankDeficient(ValueError):
    """The regression design matrix is numerically rank deficient."""

    def __init__(self, message: str = "design matrix is rank deficient",
                 node: int | None = None, step: int | None = None):
        super().__init__(message)
        self.node = node
        self.step = step


def column_moments(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-column mean and standard deviation (denominator n)."""
    values = np.asarray(values, dtype=float)
    return values.mean(axis=0), values.std(axis=0)


def standardize(x: DataMatrix) -> DataMatrix:
    """Center and scale every column to mean 0, sd 1 (denominator n)."""
    if x.n < 2:
        raise ValueError("standardization needs at least two rows")
    mean, sd = column_moments(x.values)
    bad = np.flatnonzero(sd == 0.0)
    if bad.size:
        raise ZeroVarianceColumn(int(bad[0]))
    return DataMatrix((x.values - mean) / sd, standardized=True)


def apply_moments(x: DataMatrix, mean: np.ndarray, sd: np.ndarray) -> DataMatrix:
    """Apply a previously fitted standardization (e.g. training statistics).

    The result is not flagged ``standardized``: its columns are centered by
    the supplied moments, not its own.
    """
    mean = np.asarray(mean, dtype=float)
    sd = np.asarray(sd, dtype=float)
    if mean.shape != (x.p,) or sd.shape != (x.p,):
        raise ValueError("moments do not match the data's column count")
    if not np.all(sd > 0):
        raise ValueError("standard deviations must be positive")
    return DataMatrix((x.values - mean) / sd)


def ols_residual(y: np.ndarray, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares residual and coefficients of y on the columns of z.

    Solves the normal equations (z'z) beta = z'y through a Cholesky
    factorization; raises :class:`RankDeficient` when the factorization
    fails or its smallest pivot falls below ``PIVOT_RTOL`` times the
    largest.  An empty z (zero columns) returns y unchanged.
    """
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if z.ndim != 2:
        raise ValueError("z must be 2-d")
    n, m = z.shape
    if m == 0:
        return y.copy(), np.empty(0)
    if y.shape != (n,):
        raise ValueError("y and z disagree on the sample count")
    if m > n:
        raise RankDeficient(f"more regressors ({m}) than samples ({n})")
    gram = z.T @ z
    try:
        chol = scipy.linalg.cho_factor(gram, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise RankDeficient(str(exc)) from exc
    # classical pivots are the squared factor diagonals; compare on the
    # Gram matrix's own scale
    pivots = np.diag(chol[0]) ** 2
    if pivots.min() < PIVOT_RTOL * np.max(np.diag(gram)):
        raise RankDeficient("Cholesky pivot below the relative floor")
    beta = scipy.linalg.cho_solve(chol, z.T @ y, check_finite=False)
    return y - z @ beta, beta


class ResidualState:
    """Evolving residual matrix R and partial-regression coefficient rows.

    ``rows[k]`` maps source column a to the coefficient used when R_k was
    regressed on R_a; the diagonal entry rows[k][k] = 1 is set at
    construction and never rewritten.  Presence in the dict is the support
    marker: an off-diagonal entry is written at most once, even when the
    fitted coefficient happens to be zero.
    """

    def __init__(self, standardized_values: np.ndarray):
        values = np.asarray(standardized_values, dtype=float)
        if values.ndim != 2:
            raise ValueError("need an n x p matrix")
        # private copy in column-major order: every operation here touches
        # single columns
        self.r = np.array(values, dtype=float, order="F")
        self.rows: list[dict[int, float]] = [{k: 1.0} for k in range(values.shape[1])]
        self.update_count = 0
        self.skipped: list[tuple[int, int]] = []

    @property
    def n(self) -> int:
        return self.r.shape[0]

    @property
    def p(self) -> int:
        return self.r.shape[1]

    @classmethod
    def from_data(cls, x: DataMatrix) -> "ResidualState":
        return cls(x.values)


def partial_update(state: ResidualState, k: int, a: int) -> bool:
    """Regress residual column k on residual column a and subtract the fit.

    Writes the simple-regression coefficient into ``state.rows[k][a]`` and
    increments the update counter.  If column a is numerically degenerate
    (squared norm under ``DEGENERATE_NORM2_PER_ROW`` per row) the update is
    skipped and recorded instead of raising.  Returns True when performed.
    """
    if k == a:
        raise ValueError("cannot regress a column on itself")
    if a in state.rows[k]:
        raise ValueError(f"column {k} was already regressed on column {a}")
    ra = state.r[:, a]
    denom = float(ra @ ra)
    if denom < DEGENERATE_NORM2_PER_ROW * state.n:
        state.skipped.append((k, a))
        return False
    coef = float(ra @ state.r[:, k]) / denom
    state.rows[k][a] = coef
    state.r[:, k] -= coef * ra
    state.update_count += 1
    return True
