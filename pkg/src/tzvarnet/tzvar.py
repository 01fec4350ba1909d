"""Per-equation designs under the time-zone or classic lag structure.

Under the time-zone structure, a target's regressors from continents that
close earlier the same day enter at lag 0 (Asia for European targets; Asia
and Europe for American targets); everything else, including every own-lag
term, enters at lag 1. The classic structure lags every regressor by one
day. Systems are estimated equation by equation, so equations are fully
independent and the coefficient matrix is assembled row-wise.
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .config import LassoConfig
from .lasso import DesignMatrix, LassoFit, lasso_fit
from .markets import CONTINENT_ORDER, Continent, MarketSet, ReturnsPanel


class LagStructure(enum.Enum):
    TIME_ZONE = "timezone"
    CLASSIC = "classic"

    def lag(self, target: Continent, source: Continent) -> int:
        """0 for same-day regressors, 1 for previous-day regressors."""
        if self is LagStructure.CLASSIC:
            return 1
        rank = {c: i for i, c in enumerate(CONTINENT_ORDER)}
        return 0 if rank[source] < rank[target] else 1


def structure_from_name(name: str) -> LagStructure:
    for s in LagStructure:
        if s.value == name:
            return s
    raise ValueError(f"unknown structure {name!r}")


@dataclass(frozen=True)
class CoefficientMatrix:
    """VAR coefficients, B[target, source]; the diagonal is the own-lag term."""

    B: np.ndarray
    intercepts: np.ndarray
    structure: LagStructure
    markets: MarketSet
    converged: np.ndarray

    def __post_init__(self) -> None:
        n = self.markets.n
        if self.B.shape != (n, n):
            raise ValueError(f"coefficient matrix shape {self.B.shape} != ({n}, {n})")

    def row(self, market_id: str) -> np.ndarray:
        return self.B[self.markets.index(market_id)]


def design_arrays(p: ReturnsPanel, target: str, s: LagStructure) -> tuple[np.ndarray, np.ndarray]:
    """Raw response and regressor matrix for one equation.

    Response rows cover t = 2..T (length T-1) for every equation, even where
    lag-0 regressors would permit t = 1, so all equations share the same
    sample length. Column order equals the roster order.
    """
    k = p.markets.index(target)
    target_cont = p.markets.markets[k].continent
    values = p.values
    y = values[1:, k].copy()
    lag_row = np.array(
        [s.lag(target_cont, m.continent) for m in p.markets.markets], dtype=np.int64
    )
    X = np.where(lag_row[None, :] == 1, values[:-1, :], values[1:, :])
    return np.ascontiguousarray(X), y


def build_design(
    p: ReturnsPanel, target: str, s: LagStructure, standardize: bool = True
) -> DesignMatrix:
    X, y = design_arrays(p, target, s)
    if X.shape[0] < 2:
        warnings.warn(f"equation for {target!r} has a single usable row", stacklevel=2)
    return DesignMatrix.build(X, y, standardize=standardize)


def estimate_equation(
    p: ReturnsPanel,
    target: str,
    s: LagStructure,
    lam: float,
    lasso_cfg: LassoConfig = LassoConfig(),
) -> LassoFit:
    d = build_design(p, target, s, standardize=lasso_cfg.standardize)
    return lasso_fit(d, lam, tol=lasso_cfg.tol, max_iter=lasso_cfg.max_iter)


def estimate_system(
    p: ReturnsPanel,
    s: LagStructure,
    lams: Mapping[str, float],
    lasso_cfg: LassoConfig = LassoConfig(),
) -> CoefficientMatrix:
    """Estimate every equation at its own penalty and assemble row-wise."""
    missing = [mid for mid in p.markets.ids if mid not in lams]
    if missing:
        raise ValueError(f"missing penalty for markets: {', '.join(missing)}")
    n = p.markets.n
    B = np.zeros((n, n))
    intercepts = np.zeros(n)
    converged = np.zeros(n, dtype=bool)
    for i, mid in enumerate(p.markets.ids):
        fit = estimate_equation(p, mid, s, lams[mid], lasso_cfg)
        B[i] = fit.coef
        intercepts[i] = fit.intercept
        converged[i] = fit.converged
    return CoefficientMatrix(B, intercepts, s, p.markets, converged)


def ar_diagonal(cm: CoefficientMatrix) -> list[tuple[str, float]]:
    """Own-lag coefficients in roster order, zeros included."""
    return [(mid, float(cm.B[i, i])) for i, mid in enumerate(cm.markets.ids)]


def predictions(p: ReturnsPanel, cm: CoefficientMatrix) -> np.ndarray:
    """Fitted values for rows t = 2..T, column per market."""
    n = p.markets.n
    out = np.empty((p.n_dates - 1, n))
    for i, mid in enumerate(p.markets.ids):
        X, _ = design_arrays(p, mid, cm.structure)
        out[:, i] = X @ cm.B[i] + cm.intercepts[i]
    return out
