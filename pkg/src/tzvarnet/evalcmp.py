"""Time-zone versus classic specification comparison.

The per-market in-sample ratio is one minus the ratio of the two models'
residual sums of squares over rows t = 2..T; positive values mean the
time-zone specification fits better. Each specification gets its own
independent penalty selection. An out-of-sample variant holds out the last
fraction of rows, fits both specifications on the rest, and applies the
same ratio to held-out prediction errors.
"""
from __future__ import annotations

from dataclasses import dataclass

from .config import CompareConfig, LassoConfig, SelectionConfig
from .errors import DataError
from .markets import ReturnsPanel
from .seeding import TAG_COMPARE_CLASSIC, TAG_COMPARE_TZ, derive_seed
from .selection import build_network
from .tzvar import CoefficientMatrix, LagStructure, predictions


def in_sample_r2(
    p: ReturnsPanel, tz_fit: CoefficientMatrix, cls_fit: CoefficientMatrix
) -> dict[str, float | None]:
    """1 - SSE(time-zone) / SSE(classic) per market; None when SSE(classic) = 0."""
    if tz_fit.structure is not LagStructure.TIME_ZONE:
        raise ValueError("tz_fit must use the time-zone structure")
    if cls_fit.structure is not LagStructure.CLASSIC:
        raise ValueError("cls_fit must use the classic structure")
    if tz_fit.markets.ids != p.markets.ids or cls_fit.markets.ids != p.markets.ids:
        raise ValueError("fits do not match the panel roster")
    actual = p.values[1:]
    tz_pred = predictions(p, tz_fit)
    cls_pred = predictions(p, cls_fit)
    out: dict[str, float | None] = {}
    for i, mid in enumerate(p.markets.ids):
        sse_tz = float(((actual[:, i] - tz_pred[:, i]) ** 2).sum())
        sse_cls = float(((actual[:, i] - cls_pred[:, i]) ** 2).sum())
        out[mid] = None if sse_cls == 0.0 else 1.0 - sse_tz / sse_cls
    return out


@dataclass(frozen=True)
class ComparisonRow:
    market: str
    continent: str
    r2_is: float | None
    r2_oos: float | None = None


def _holdout_r2(
    p: ReturnsPanel,
    tz_fit: CoefficientMatrix,
    cls_fit: CoefficientMatrix,
    first_holdout_row: int,
) -> dict[str, float | None]:
    actual = p.values[1:]
    tz_pred = predictions(p, tz_fit)
    cls_pred = predictions(p, cls_fit)
    held = slice(first_holdout_row - 1, None)  # design row i targets panel row i+1
    out: dict[str, float | None] = {}
    for i, mid in enumerate(p.markets.ids):
        sse_tz = float(((actual[held, i] - tz_pred[held, i]) ** 2).sum())
        sse_cls = float(((actual[held, i] - cls_pred[held, i]) ** 2).sum())
        out[mid] = None if sse_cls == 0.0 else 1.0 - sse_tz / sse_cls
    return out


def compare_structures(
    p: ReturnsPanel,
    sel_cfg: SelectionConfig = SelectionConfig(),
    lasso_cfg: LassoConfig = LassoConfig(),
    cmp_cfg: CompareConfig = CompareConfig(),
    seed: int = 0,
    threads: int = 1,
) -> list[ComparisonRow]:
    """Full-pipeline comparison: independent selection for each specification."""
    tz_est = build_network(
        p, LagStructure.TIME_ZONE, sel_cfg, lasso_cfg,
        seed=derive_seed(seed, TAG_COMPARE_TZ), threads=threads,
    )
    cls_est = build_network(
        p, LagStructure.CLASSIC, sel_cfg, lasso_cfg,
        seed=derive_seed(seed, TAG_COMPARE_CLASSIC), threads=threads,
    )
    r2 = in_sample_r2(p, tz_est.coefficients, cls_est.coefficients)

    r2_oos: dict[str, float | None] = {}
    if cmp_cfg.out_of_sample:
        n_hold = max(1, int(cmp_cfg.holdout_fraction * p.n_dates))
        first_holdout_row = p.n_dates - n_hold
        if first_holdout_row < 61:
            raise DataError(
                "holdout leaves too few rows to select penalties "
                f"({first_holdout_row} training rows)"
            )
        train = ReturnsPanel(
            dates=p.dates[:first_holdout_row],
            markets=p.markets,
            values=p.values[:first_holdout_row],
            policy=p.policy,
        )
        tz_train = build_network(
            train, LagStructure.TIME_ZONE, sel_cfg, lasso_cfg,
            seed=derive_seed(seed, TAG_COMPARE_TZ, 1), threads=threads,
        )
        cls_train = build_network(
            train, LagStructure.CLASSIC, sel_cfg, lasso_cfg,
            seed=derive_seed(seed, TAG_COMPARE_CLASSIC, 1), threads=threads,
        )
        r2_oos = _holdout_r2(
            p, tz_train.coefficients, cls_train.coefficients, first_holdout_row
        )

    rows = []
    for mid, m in zip(p.markets.ids, p.markets.markets):
        rows.append(
            ComparisonRow(
                market=mid,
                continent=m.continent.value,
                r2_is=r2[mid],
                r2_oos=r2_oos.get(mid),
            )
        )
    return rows
