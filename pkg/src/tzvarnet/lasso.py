"""Penalized least squares for a single equation.

Solves ``argmin_b 0.5 * ||y - X b||^2 + lam * ||b||_1`` by cyclic coordinate
descent with soft-thresholding, warm starts along a penalty path, and a
stationarity check at convergence. Predictors are standardized to unit
sample variance and everything is centered by default, so an equal penalty
is meaningful across markets with different volatilities; reported
coefficients are always on the original scale. There is no intercept term:
centering absorbs the means, and predictions add the implied offset back.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _cd

DEFAULT_TOL = 1e-7
DEFAULT_MAX_ITER = 10_000


def soft_threshold(z: float, t: float) -> float:
    """sign(z) * max(|z| - t, 0)."""
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


@dataclass(frozen=True)
class DesignMatrix:
    """Processed regressors and response for one equation.

    ``X`` and ``y`` are the arrays the solver sees. With standardization on,
    every non-constant column of X has mean 0 and sample standard deviation
    1, y has mean 0, and ``column_means`` / ``column_scales`` / ``y_mean``
    record what was applied. Constant (zero-variance) columns are flagged in
    ``excluded``; their coefficient is pinned at zero.
    """

    X: np.ndarray
    y: np.ndarray
    column_means: np.ndarray
    column_scales: np.ndarray
    y_mean: float
    standardized: bool
    excluded: np.ndarray

    @classmethod
    def build(cls, X_raw: np.ndarray, y_raw: np.ndarray, standardize: bool = True) -> "DesignMatrix":
        X_raw = np.ascontiguousarray(X_raw, dtype=np.float64)
        y_raw = np.ascontiguousarray(y_raw, dtype=np.float64)
        if X_raw.ndim != 2 or y_raw.ndim != 1 or X_raw.shape[0] != y_raw.shape[0]:
            raise ValueError(f"design shapes do not match: {X_raw.shape} vs {y_raw.shape}")
        if X_raw.shape[0] < 1:
            raise ValueError("design needs at least one row")
        T, n = X_raw.shape
        if standardize:
            means = X_raw.mean(axis=0)
            if T > 1:
                var = ((X_raw - means) ** 2).sum(axis=0) / (T - 1)
            else:
                var = np.zeros(n)
            excluded = var == 0.0
            scales = np.where(excluded, 1.0, np.sqrt(var))
            X = (X_raw - means) / scales
            y_mean = float(y_raw.mean())
            y = y_raw - y_mean
        else:
            means = np.zeros(n)
            scales = np.ones(n)
            excluded = (X_raw == 0.0).all(axis=0)
            X = X_raw.copy()
            y_mean = 0.0
            y = y_raw.copy()
        for a in (X, y, means, scales, excluded):
            a.setflags(write=False)
        return cls(X, y, means, scales, y_mean, standardize, excluded)

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_cols(self) -> int:
        return self.X.shape[1]

    @cached_property
    def _gram_xty(self) -> tuple[np.ndarray, np.ndarray]:
        G, c = _cd.gram_and_xty(self.X, self.y)
        G.setflags(write=False)
        c.setflags(write=False)
        return G, c

    def gram(self) -> np.ndarray:
        return self._gram_xty[0]

    def xty(self) -> np.ndarray:
        return self._gram_xty[1]

    @cached_property
    def yty(self) -> float:
        return float(self.y @ self.y)


@dataclass(frozen=True)
class LambdaGrid:
    """Strictly decreasing, geometrically spaced penalty values."""

    values: np.ndarray
    n_points: int
    min_ratio: float

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("grid must be a non-empty 1-d sequence")
        if v.size > 1 and not (np.diff(v) < 0).all():
            raise ValueError("grid values must be strictly decreasing")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class LassoFit:
    """One solved equation: coefficients on the original predictor scale."""

    coef: np.ndarray
    coef_std: np.ndarray
    intercept: float
    lam: float
    n_sweeps: int
    converged: bool
    objectives: np.ndarray | None = None

    def predict(self, X_raw: np.ndarray) -> np.ndarray:
        return X_raw @ self.coef + self.intercept


def lambda_max(d: DesignMatrix) -> float:
    """Smallest penalty at which the fit is entirely zero: max_j |x_j'y|."""
    c = d.xty()
    if c.size == 0:
        return 0.0
    return float(np.max(np.abs(c)))


def lambda_grid(lmax: float, n: int = 100, min_ratio: float = 1e-3) -> LambdaGrid:
    """Geometric grid from lmax down to min_ratio * lmax, length n."""
    if lmax < 0 or not np.isfinite(lmax):
        raise ValueError(f"lambda_max must be finite and non-negative, got {lmax}")
    if n < 2:
        raise ValueError(f"grid needs at least 2 points, got {n}")
    if not 0 < min_ratio < 1:
        raise ValueError(f"min_ratio must lie in (0, 1), got {min_ratio}")
    if lmax == 0.0:
        # Degenerate design: only the unpenalized fit is meaningful.
        return LambdaGrid(np.array([0.0]), 1, min_ratio)
    values = lmax * min_ratio ** (np.arange(n) / (n - 1))
    return LambdaGrid(values, n, min_ratio)


def _destandardize(d: DesignMatrix, beta_std: np.ndarray) -> tuple[np.ndarray, float]:
    coef = beta_std / d.column_scales
    intercept = d.y_mean - float(d.column_means @ coef)
    return coef, intercept


def lasso_fit(
    d: DesignMatrix,
    lam: float,
    init: np.ndarray | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    trace_objectives: bool = False,
) -> LassoFit:
    """Solve one equation at penalty lam.

    ``init`` is a warm start on the original coefficient scale. On hitting
    ``max_iter`` the result is returned with ``converged=False``; the caller
    decides what to do with it.
    """
    if not np.isfinite(lam) or lam < 0:
        raise ValueError(f"penalty must be finite and non-negative, got {lam}")
    G, c = d._gram_xty
    if init is None:
        beta = np.zeros(d.n_cols)
    else:
        beta = np.asarray(init, dtype=np.float64) * d.column_scales
        if beta.shape != (d.n_cols,):
            raise ValueError("warm start has wrong length")
        beta = beta.copy()
    objectives = np.empty(max_iter if trace_objectives else 0)
    yty = d.yty if trace_objectives else 0.0
    sweeps, converged = _cd.solve_gram(G, c, float(lam), beta, tol, max_iter, objectives, yty)
    coef, intercept = _destandardize(d, beta)
    return LassoFit(
        coef=coef,
        coef_std=beta,
        intercept=intercept,
        lam=float(lam),
        n_sweeps=int(sweeps),
        converged=bool(converged),
        objectives=objectives[:sweeps].copy() if trace_objectives else None,
    )


def lasso_path(
    d: DesignMatrix,
    grid: LambdaGrid,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> list[LassoFit]:
    """Warm-started fits in decreasing penalty order.

    Agrees with independent cold-start fits to within the solver tolerance
    (monotone support growth along the path is not guaranteed and not
    asserted).
    """
    G, c = d._gram_xty
    lams = grid.values
    L = lams.shape[0]
    betas = np.empty((L, d.n_cols))
    conv = np.empty(L, np.bool_)
    iters = np.empty(L, np.int64)
    _cd.solve_path(G, c, lams, tol, max_iter, betas, conv, iters)
    fits = []
    for i in range(L):
        coef, intercept = _destandardize(d, betas[i])
        fits.append(
            LassoFit(
                coef=coef,
                coef_std=betas[i].copy(),
                intercept=intercept,
                lam=float(lams[i]),
                n_sweeps=int(iters[i]),
                converged=bool(conv[i]),
            )
        )
    return fits


def kkt_max_violation(d: DesignMatrix, coef_std: np.ndarray, lam: float) -> float:
    """Largest stationarity violation of the solver objective at coef_std."""
    G, c = d._gram_xty
    g = c - G @ coef_std
    worst = 0.0
    for j in range(d.n_cols):
        if G[j, j] <= 0.0:
            continue
        if coef_std[j] > 0.0:
            v = abs(g[j] - lam)
        elif coef_std[j] < 0.0:
            v = abs(g[j] + lam)
        else:
            v = max(0.0, abs(g[j]) - lam)
        worst = max(worst, v)
    return worst


def objective_value(d: DesignMatrix, coef_std: np.ndarray, lam: float) -> float:
    """0.5 * ||y - X b||^2 + lam * ||b||_1 on the processed design."""
    r = d.y - d.X @ coef_std
    return float(0.5 * (r @ r) + lam * np.abs(coef_std).sum())
