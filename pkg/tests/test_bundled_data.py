from __future__ import annotations

from collections import Counter
from pathlib import Path

from tzvarnet.config import load_config
from tzvarnet.markets import load_market_metadata

DATA = Path(__file__).resolve().parents[1] / "data"


def test_bundled_roster_loads():
    ms = load_market_metadata(str(DATA / "markets36.csv"))
    assert ms.n == 36
    counts = Counter(m.continent.value for m in ms.markets)
    assert counts == {"Asia": 11, "Europe": 19, "Americas": 6}
    assert ms.markets[ms.index("US")].close_minutes == 960
    assert ms.markets[ms.index("JP")].close_minutes == 60
    assert ms.markets[ms.index("NZ")].close_minutes == 0
    assert ms.markets[ms.index("DE")].close_minutes == 840


def test_example_config_loads():
    cfg = load_config(str(DATA / "config.example.json"))
    assert cfg.structure == "timezone"
    assert cfg.selection.replications == 100
    assert cfg.rolling.window == 150
