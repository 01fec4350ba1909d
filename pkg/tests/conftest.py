from __future__ import annotations

import datetime as dt

import numpy as np
import pytest
from hypothesis import settings

from tzvarnet.markets import Continent, Market, MarketSet, ReturnsPanel
from tzvarnet.network import SignedNetwork

# Numba compilation on first use makes wall-clock deadlines meaningless.
settings.register_profile("suite", deadline=None, max_examples=50)
settings.load_profile("suite")


def make_market_set(n_per_continent=(1, 1, 1)) -> MarketSet:
    close = {Continent.ASIA: 60, Continent.EUROPE: 690, Continent.AMERICAS: 960}
    prefix = {Continent.ASIA: "AS", Continent.EUROPE: "EU", Continent.AMERICAS: "AM"}
    markets = []
    for cont, count in zip(
        (Continent.ASIA, Continent.EUROPE, Continent.AMERICAS), n_per_continent
    ):
        for i in range(count):
            mid = f"{prefix[cont]}{i + 1}"
            markets.append(Market(mid, mid, cont, close[cont], f"IDX{mid}"))
    return MarketSet.ordered(markets)


def make_panel(values: np.ndarray, ms: MarketSet | None = None) -> ReturnsPanel:
    values = np.asarray(values, dtype=np.float64)
    if ms is None:
        assert values.shape[1] == 3
        ms = make_market_set()
    start = dt.date(2015, 1, 5)
    dates = []
    d = start
    while len(dates) < values.shape[0]:
        if d.weekday() < 5:
            dates.append(d)
        d += dt.timedelta(days=1)
    return ReturnsPanel(dates=tuple(dates), markets=ms, values=values)


def random_signed_network(rng: np.random.Generator, n_max: int = 8) -> SignedNetwork:
    """Small random network; weights carry the adjacency signs."""
    sizes = rng.integers(0, n_max, size=3)
    while sizes.sum() < 2:
        sizes = rng.integers(0, n_max, size=3)
    per_cont = [int(s) for s in sizes]
    total = sum(per_cont)
    while total > n_max:
        per_cont[int(rng.integers(0, 3))] = max(0, per_cont[int(rng.integers(0, 3))] - 1)
        total = sum(per_cont)
    if total < 2:
        per_cont[0] += 2 - total
    ms = make_market_set(tuple(per_cont))
    n = ms.n
    a = rng.choice(np.array([-1, 0, 0, 1], dtype=np.int8), size=(n, n))
    w = np.round(rng.uniform(0.05, 1.5, size=(n, n)), 3) * a
    return SignedNetwork(A=a, W=w, markets=ms)


@pytest.fixture
def three_market_set() -> MarketSet:
    return make_market_set()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240811)
