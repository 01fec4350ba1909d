"""Rolling-window estimation of continent strength flows.

Fixed-length windows (default 150 trading rows) advance by a fixed step
(default 5 rows). Each window runs the full static pipeline on its slice
with a seed derived from (global seed, window index), so any single window
can be reproduced in isolation and the whole run is independent of worker
scheduling. The first window entering each calendar year carries that year
as a label.
"""
from __future__ import annotations

import datetime as dt
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .config import LassoConfig, SelectionConfig
from .errors import DataError, EstimationError
from .markets import ReturnsPanel
from .netmetrics import Basis, ContinentFlow, SignClass, continent_flows
from .seeding import TAG_WINDOW, derive_seed
from .selection import build_network
from .tzvar import LagStructure


@dataclass(frozen=True)
class Window:
    index: int
    start_row: int
    end_row: int  # exclusive; end_row - start_row == window length
    start_date: dt.date
    end_date: dt.date
    year_label: str | None


@dataclass(frozen=True)
class WindowPlan:
    length_days: int
    step_days: int
    windows: tuple[Window, ...]


def rolling_windows(p: ReturnsPanel, length: int = 150, step: int = 5) -> WindowPlan:
    """Window starts at rows 0, step, 2*step, ... while a full window fits."""
    if length < 60:
        raise ValueError(f"window length must be >= 60 rows, got {length}")
    if step < 1:
        raise ValueError(f"step must be >= 1, got {step}")
    T = p.n_dates
    if T < length:
        raise DataError(f"panel has {T} rows, shorter than the window length {length}")
    windows = []
    seen_years: set[int] = set()
    index = 0
    for start in range(0, T - length + 1, step):
        end = start + length
        start_date = p.dates[start]
        label = None
        if start_date.year not in seen_years:
            seen_years.add(start_date.year)
            label = str(start_date.year)
        windows.append(
            Window(
                index=index,
                start_row=start,
                end_row=end,
                start_date=start_date,
                end_date=p.dates[end - 1],
                year_label=label,
            )
        )
        index += 1
    return WindowPlan(length_days=length, step_days=step, windows=tuple(windows))


def window_seed(seed: int, window_index: int) -> int:
    """Seed the static pipeline uses for one window of a rolling run."""
    return derive_seed(seed, TAG_WINDOW, window_index)


def window_panel(p: ReturnsPanel, w: Window) -> ReturnsPanel:
    return ReturnsPanel(
        dates=p.dates[w.start_row : w.end_row],
        markets=p.markets,
        values=p.values[w.start_row : w.end_row],
        policy=p.policy,
        gap_mask=None if p.gap_mask is None else p.gap_mask[w.start_row : w.end_row],
    )


@dataclass(frozen=True)
class WindowFlows:
    window: Window
    positive: ContinentFlow | None
    negative: ContinentFlow | None
    partial: tuple[str, ...] = ()  # markets skipped inside the window
    error: str | None = None


def rolling_flows(
    p: ReturnsPanel,
    s: LagStructure,
    sel_cfg: SelectionConfig = SelectionConfig(),
    lasso_cfg: LassoConfig = LassoConfig(),
    length: int = 150,
    step: int = 5,
    seed: int = 0,
    threads: int = 1,
) -> list[WindowFlows]:
    """Positive and negative continent strength flows per window.

    A window that fails to estimate is recorded with its error and skipped;
    windows with individually failing markets carry a partial-coverage flag.
    """
    plan = rolling_windows(p, length, step)

    def job(w: Window) -> WindowFlows:
        sub = window_panel(p, w)
        try:
            est = build_network(
                sub,
                s,
                sel_cfg,
                lasso_cfg,
                seed=window_seed(seed, w.index),
                threads=1,
                on_equation_error="skip",
            )
        except EstimationError as exc:
            return WindowFlows(window=w, positive=None, negative=None, error=str(exc))
        return WindowFlows(
            window=w,
            positive=continent_flows(est.network, Basis.STRENGTHS, SignClass.POSITIVE),
            negative=continent_flows(est.network, Basis.STRENGTHS, SignClass.NEGATIVE),
            partial=est.skipped_markets,
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(job, plan.windows))
    return [job(w) for w in plan.windows]
