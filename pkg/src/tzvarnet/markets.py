"""Market metadata and daily return panels.

Loads the market roster CSV (``id,name,continent,close_est,index_code``)
and the wide returns CSV (``date,<id1>,<id2>,...``), aligns them into a
rectangular panel, and slices sample periods.

Markets are kept in a fixed block order (Asia, then Europe, then the
Americas, file order within each block); every panel column order follows
the roster order.
"""
from __future__ import annotations

import bisect
import csv
import datetime as dt
import enum
import re
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DataError


class Continent(enum.Enum):
    ASIA = "Asia"
    EUROPE = "Europe"
    AMERICAS = "Americas"


CONTINENT_ORDER: tuple[Continent, ...] = (
    Continent.ASIA,
    Continent.EUROPE,
    Continent.AMERICAS,
)

_CONTINENT_ALIASES = {
    "asia": Continent.ASIA,
    "europe": Continent.EUROPE,
    "americas": Continent.AMERICAS,
    "america": Continent.AMERICAS,
}

_CLOSE_RE = re.compile(r"^(\d{1,2})\.(\d{2})([ap])$")


def parse_close_time(text: str) -> int:
    """Parse a close time such as ``4.00p`` or ``1.30a`` to minutes past midnight EST."""
    m = _CLOSE_RE.match(text.strip().lower())
    if m is None:
        raise ValueError(f"unparseable close time {text!r} (expected H.MMa or H.MMp)")
    hour, minute, half = int(m.group(1)), int(m.group(2)), m.group(3)
    if hour > 12 or minute > 59:
        raise ValueError(f"close time {text!r} out of range")
    if hour == 12:
        hour = 0
    return hour * 60 + minute + (720 if half == "p" else 0)


def format_close_time(minutes: int) -> str:
    """Inverse of :func:`parse_close_time`."""
    if not 0 <= minutes < 1440:
        raise ValueError(f"close minutes {minutes} out of range")
    half = "p" if minutes >= 720 else "a"
    hour, minute = divmod(minutes - (720 if half == "p" else 0), 60)
    if half == "p" and hour == 0:
        hour = 12
    return f"{hour}.{minute:02d}{half}"


@dataclass(frozen=True)
class Market:
    id: str
    name: str
    continent: Continent
    close_minutes: int
    index_code: str


@dataclass(frozen=True)
class MarketSet:
    """Ordered market roster: Asia block, Europe block, Americas block."""

    markets: tuple[Market, ...]

    def __post_init__(self) -> None:
        if not self.markets:
            raise DataError("no markets")
        seen: set[str] = set()
        for m in self.markets:
            if m.id in seen:
                raise DataError(f"duplicate market id {m.id!r}")
            seen.add(m.id)
        ranks = [CONTINENT_ORDER.index(m.continent) for m in self.markets]
        if ranks != sorted(ranks):
            raise DataError("markets are not in Asia/Europe/Americas block order")

    @classmethod
    def ordered(cls, markets: list[Market] | tuple[Market, ...]) -> "MarketSet":
        """Build a MarketSet, stably sorting into continent blocks."""
        key = {c: i for i, c in enumerate(CONTINENT_ORDER)}
        return cls(tuple(sorted(markets, key=lambda m: key[m.continent])))

    @property
    def n(self) -> int:
        return len(self.markets)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(m.id for m in self.markets)

    @property
    def continents(self) -> tuple[Continent, ...]:
        return tuple(m.continent for m in self.markets)

    def continent_codes(self) -> np.ndarray:
        """Per-market continent index (0=Asia, 1=Europe, 2=Americas)."""
        key = {c: i for i, c in enumerate(CONTINENT_ORDER)}
        return np.array([key[m.continent] for m in self.markets], dtype=np.int8)

    def index(self, market_id: str) -> int:
        try:
            return self.ids.index(market_id)
        except ValueError:
            raise KeyError(f"unknown market id {market_id!r}") from None

    def members(self, continent: Continent) -> tuple[int, ...]:
        return tuple(i for i, m in enumerate(self.markets) if m.continent is continent)


class AlignmentPolicy(enum.Enum):
    """How to reconcile per-market gaps (holidays) across the panel.

    INTERSECT keeps only dates where every market has data. ZERO_FILL keeps
    the union of dates and sets missing returns to 0.0, retaining the gap
    mask. FORWARD_FILL also fills with 0.0 (carrying price levels is out of
    scope) but records the gaps under its own policy label.
    """

    INTERSECT = "intersect"
    ZERO_FILL = "zerofill"
    FORWARD_FILL = "forwardfill"


@dataclass(frozen=True)
class RawReturns:
    """Returns as loaded: possibly gappy, columns already in roster order."""

    dates: tuple[dt.date, ...]
    markets: MarketSet
    values: np.ndarray  # (T, N), NaN where a cell is missing
    gap_mask: np.ndarray  # (T, N) bool

    def __post_init__(self) -> None:
        if len(self.dates) == 0:
            raise DataError("returns file has no data rows")


@dataclass(frozen=True)
class ReturnsPanel:
    """Aligned T x N daily-return panel on a strictly increasing date axis."""

    dates: tuple[dt.date, ...]
    markets: MarketSet
    values: np.ndarray
    policy: str = AlignmentPolicy.INTERSECT.value
    gap_mask: np.ndarray | None = None

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape != (len(self.dates), self.markets.n):
            raise DataError(
                f"panel shape {v.shape} does not match {len(self.dates)} dates x "
                f"{self.markets.n} markets"
            )
        if len(self.dates) < 2:
            raise DataError("insufficient aligned sample (need at least 2 dates)")
        for a, b in zip(self.dates, self.dates[1:]):
            if not a < b:
                raise DataError(f"dates not strictly increasing at {b}")
        if not np.isfinite(v).all():
            raise DataError("panel contains non-finite values after alignment")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n_dates(self) -> int:
        return len(self.dates)


def load_market_metadata(path: str) -> MarketSet:
    """Read the roster CSV and return markets in continent block order."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: no markets") from None
        expected = ["id", "name", "continent", "close_est", "index_code"]
        if [h.strip() for h in header] != expected:
            raise DataError(f"{path}: expected header {','.join(expected)}")
        markets: list[Market] = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 5:
                raise DataError(f"{path}:{lineno}: expected 5 fields, got {len(row)}")
            mid, name, cont_raw, close_raw, code = (c.strip() for c in row)
            cont = _CONTINENT_ALIASES.get(cont_raw.lower())
            if cont is None:
                raise DataError(f"{path}:{lineno}: unknown continent {cont_raw!r}")
            try:
                close_minutes = parse_close_time(close_raw)
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
            markets.append(Market(mid, name, cont, close_minutes, code))
    if not markets:
        raise DataError(f"{path}: no markets")
    try:
        ms = MarketSet.ordered(markets)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None
    _warn_on_close_overlap(ms)
    return ms


def _warn_on_close_overlap(ms: MarketSet) -> None:
    # The lag rules assume the three continent blocks close in order.
    closes = {
        c: [m.close_minutes for m in ms.markets if m.continent is c]
        for c in CONTINENT_ORDER
    }
    for earlier, later in zip(CONTINENT_ORDER, CONTINENT_ORDER[1:]):
        if not closes[earlier] or not closes[later]:
            continue
        if max(closes[earlier]) >= min(closes[later]):
            warnings.warn(
                f"close times overlap between {earlier.value} and {later.value}; "
                "the continent-block lag rules may be inconsistent with this roster",
                stacklevel=3,
            )


def load_returns_csv(path: str, ms: MarketSet) -> RawReturns:
    """Read the wide returns CSV, reordering columns to the roster order."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty returns file") from None
        if not header or header[0] != "date":
            raise DataError(f"{path}: first column must be 'date'")
        file_ids = header[1:]
        extra = sorted(set(file_ids) - set(ms.ids))
        missing = sorted(set(ms.ids) - set(file_ids))
        if extra or missing:
            parts = []
            if extra:
                parts.append(f"columns not in roster: {', '.join(extra)}")
            if missing:
                parts.append(f"roster markets missing: {', '.join(missing)}")
            raise DataError(f"{path}: schema mismatch ({'; '.join(parts)})")
        if len(set(file_ids)) != len(file_ids):
            raise DataError(f"{path}: duplicate market column")
        col_of = [file_ids.index(mid) for mid in ms.ids]

        dates: list[dt.date] = []
        rows: list[list[float]] = []
        gaps: list[list[bool]] = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(file_ids) + 1:
                raise DataError(
                    f"{path}:{lineno}: expected {len(file_ids) + 1} fields, got {len(row)}"
                )
            try:
                date = dt.date.fromisoformat(row[0].strip())
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad date {row[0]!r}") from None
            vals = []
            gap = []
            for j, mid in enumerate(ms.ids):
                cell = row[1 + col_of[j]].strip()
                if cell == "":
                    vals.append(np.nan)
                    gap.append(True)
                    continue
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"{path}:{lineno}: non-numeric cell {cell!r} in column {mid}"
                    ) from None
                gap.append(False)
            dates.append(date)
            rows.append(vals)
            gaps.append(gap)

    if not dates:
        raise DataError(f"{path}: empty returns file")
    if len(set(dates)) != len(dates):
        seen: set[dt.date] = set()
        for d in dates:
            if d in seen:
                raise DataError(f"{path}: duplicate date {d.isoformat()}")
            seen.add(d)
    order = np.argsort(np.array([d.toordinal() for d in dates]))
    values = np.array(rows, dtype=np.float64)[order]
    gap_mask = np.array(gaps, dtype=bool)[order]
    return RawReturns(
        dates=tuple(dates[i] for i in order),
        markets=ms,
        values=values,
        gap_mask=gap_mask,
    )


def align_panel(
    raw: RawReturns, policy: AlignmentPolicy = AlignmentPolicy.INTERSECT
) -> ReturnsPanel:
    """Resolve gaps into a rectangular panel under the given policy."""
    if policy is AlignmentPolicy.INTERSECT:
        keep = ~raw.gap_mask.any(axis=1)
        if keep.sum() < 2:
            raise DataError("insufficient aligned sample")
        return ReturnsPanel(
            dates=tuple(d for d, k in zip(raw.dates, keep) if k),
            markets=raw.markets,
            values=raw.values[keep],
            policy=policy.value,
        )
    values = np.where(raw.gap_mask, 0.0, raw.values)
    return ReturnsPanel(
        dates=raw.dates,
        markets=raw.markets,
        values=values,
        policy=policy.value,
        gap_mask=raw.gap_mask.copy(),
    )


def slice_period(p: ReturnsPanel, start: dt.date, end: dt.date) -> ReturnsPanel:
    """Rows with start <= date <= end, inclusive on both sides."""
    if start > end:
        raise ValueError(f"start {start} after end {end}")
    lo = bisect.bisect_left(p.dates, start)
    hi = bisect.bisect_right(p.dates, end)
    if hi - lo < 2:
        raise DataError(
            f"insufficient sample in [{start.isoformat()}, {end.isoformat()}] "
            f"({hi - lo} dates)"
        )
    return ReturnsPanel(
        dates=p.dates[lo:hi],
        markets=p.markets,
        values=p.values[lo:hi],
        policy=p.policy,
        gap_mask=None if p.gap_mask is None else p.gap_mask[lo:hi],
    )


def write_markets_csv(ms: MarketSet, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "name", "continent", "close_est", "index_code"])
        for m in ms.markets:
            writer.writerow(
                [m.id, m.name, m.continent.value, format_close_time(m.close_minutes), m.index_code]
            )


def write_returns_csv(p: ReturnsPanel, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", *p.markets.ids])
        for i, d in enumerate(p.dates):
            writer.writerow([d.isoformat(), *(repr(float(v)) for v in p.values[i])])
