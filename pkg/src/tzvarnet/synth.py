"""Ground-truth simulation and recovery scoring.

Panels are generated from a known sparse system with the same lag
conventions the estimator uses, so support/sign recovery is verifiable.
Generation runs day by day in continent order (Asia, then Europe, then the
Americas): same-day terms feed later-closing continents exactly as the lag
rules prescribe. Stationarity is enforced at construction by writing the
system as x_t = C x_t + D x_{t-1} + eps (C holds the same-day coefficients
and is strictly block-lower-triangular) and requiring the spectral radius
of (I - C)^{-1} D to stay below one.
"""
from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass

import numpy as np

from .errors import EstimationError
from .markets import Continent, Market, MarketSet, ReturnsPanel
from .network import SignedNetwork
from .seeding import TAG_PANEL, TAG_TRUTH, derive_seed
from .tzvar import LagStructure, structure_from_name

_SYNTH_CLOSE = {Continent.ASIA: 60, Continent.EUROPE: 690, Continent.AMERICAS: 960}
_SYNTH_PREFIX = {Continent.ASIA: "AS", Continent.EUROPE: "EU", Continent.AMERICAS: "AM"}


def synthetic_market_set(n_per_continent: tuple[int, int, int]) -> MarketSet:
    markets = []
    for cont, count in zip(
        (Continent.ASIA, Continent.EUROPE, Continent.AMERICAS), n_per_continent
    ):
        for i in range(count):
            mid = f"{_SYNTH_PREFIX[cont]}{i + 1:02d}"
            markets.append(
                Market(mid, f"Synthetic {mid}", cont, _SYNTH_CLOSE[cont], f"IDX{mid}")
            )
    return MarketSet.ordered(markets)


@dataclass(frozen=True)
class GroundTruth:
    """A stationary sparse system with known coefficients and noise levels."""

    markets: MarketSet
    structure: LagStructure
    B: np.ndarray  # (N, N), indexed (target, source)
    noise_sd: np.ndarray  # (N,)
    seed: int

    def __post_init__(self) -> None:
        n = self.markets.n
        if self.B.shape != (n, n) or self.noise_sd.shape != (n,):
            raise ValueError("ground-truth arrays do not match the roster size")

    def lag0_lag1_parts(self) -> tuple[np.ndarray, np.ndarray]:
        """Split B into same-day (C) and previous-day (D) coefficient matrices."""
        n = self.markets.n
        conts = self.markets.continents
        C = np.zeros((n, n))
        D = np.zeros((n, n))
        for t in range(n):
            for s_ in range(n):
                if self.structure.lag(conts[t], conts[s_]) == 0:
                    C[t, s_] = self.B[t, s_]
                else:
                    D[t, s_] = self.B[t, s_]
        return C, D

    def spectral_radius(self) -> float:
        C, D = self.lag0_lag1_parts()
        n = self.markets.n
        M = np.linalg.solve(np.eye(n) - C, D)
        return float(np.max(np.abs(np.linalg.eigvals(M))))

    def adjacency_signs(self) -> np.ndarray:
        """True edge signs oriented (source, target)."""
        return np.sign(self.B).T.astype(np.int8)


def random_tz_var(
    n_per_continent: tuple[int, int, int],
    sparsity: float,
    coef_range: tuple[float, float],
    seed: int,
    noise_sd: float | np.ndarray = 1.0,
    ar_on_diag: bool = False,
    structure: LagStructure = LagStructure.TIME_ZONE,
    max_attempts: int = 1000,
) -> GroundTruth:
    """Draw a random stationary system.

    Every entry of B is active with probability ``sparsity`` (the diagonal is
    always active when ``ar_on_diag``); active coefficients are uniform on
    +-[low, high]. Draws are rejected until the stationarity check passes.
    """
    low, high = coef_range
    if not 0 <= sparsity <= 1:
        raise ValueError(f"sparsity must lie in [0, 1], got {sparsity}")
    if not 0 < low <= high:
        raise ValueError(f"coefficient range must satisfy 0 < low <= high, got {coef_range}")
    ms = synthetic_market_set(n_per_continent)
    n = ms.n
    sd = np.broadcast_to(np.asarray(noise_sd, dtype=np.float64), (n,)).copy()
    if (sd <= 0).any():
        raise ValueError("noise_sd must be positive")
    rng = np.random.default_rng(derive_seed(seed, TAG_TRUTH))
    for _ in range(max_attempts):
        active = rng.random((n, n)) < sparsity
        if ar_on_diag:
            np.fill_diagonal(active, True)
        magnitudes = rng.uniform(low, high, size=(n, n))
        signs = rng.choice(np.array([-1.0, 1.0]), size=(n, n))
        B = np.where(active, magnitudes * signs, 0.0)
        truth = GroundTruth(markets=ms, structure=structure, B=B, noise_sd=sd, seed=seed)
        if truth.spectral_radius() < 1.0:
            return truth
    raise EstimationError(
        f"no stationary system found in {max_attempts} draws; use smaller coefficients"
    )


def _business_dates(count: int, start: dt.date = dt.date(2010, 1, 4)) -> tuple[dt.date, ...]:
    dates = []
    d = start
    while len(dates) < count:
        if d.weekday() < 5:
            dates.append(d)
        d += dt.timedelta(days=1)
    return tuple(dates)


def simulate_panel(
    g: GroundTruth,
    T: int,
    burn_in: int = 200,
    seed: int | None = None,
    coupling_on_at: int | None = None,
) -> ReturnsPanel:
    """Simulate T rows from the system, discarding the first burn_in rows.

    With ``coupling_on_at`` set, all off-diagonal coefficients are held at
    zero until that output row, which gives rolling-window tests a known
    switch point. The default noise stream derives from the truth's seed.
    """
    if T < 60:
        raise ValueError(f"need T >= 60 simulated rows, got {T}")
    if burn_in < 0:
        raise ValueError("burn_in must be non-negative")
    base_seed = g.seed if seed is None else seed
    rng = np.random.default_rng(derive_seed(base_seed, TAG_PANEL))
    n = g.markets.n
    C_on, D_on = g.lag0_lag1_parts()
    if coupling_on_at is None:
        C_off, D_off = C_on, D_on
    else:
        off = GroundTruth(
            markets=g.markets,
            structure=g.structure,
            B=np.diag(np.diag(g.B)),
            noise_sd=g.noise_sd,
            seed=g.seed,
        )
        C_off, D_off = off.lag0_lag1_parts()
    blocks = [g.markets.members(c) for c in
              (Continent.ASIA, Continent.EUROPE, Continent.AMERICAS)]
    out = np.zeros((T, n))
    x_prev = np.zeros(n)
    for t in range(burn_in + T):
        row = t - burn_in
        coupled = coupling_on_at is None or row >= coupling_on_at
        C = C_on if coupled else C_off
        D = D_on if coupled else D_off
        eps = rng.standard_normal(n) * g.noise_sd
        x = np.zeros(n)
        for block in blocks:
            idx = np.array(block, dtype=np.intp)
            if idx.size == 0:
                continue
            x[idx] = D[idx] @ x_prev + C[idx] @ x + eps[idx]
        if row >= 0:
            out[row] = x
        x_prev = x
    if not np.isfinite(out).all():
        raise EstimationError("simulation produced non-finite values (explosive draw)")
    return ReturnsPanel(
        dates=_business_dates(T), markets=g.markets, values=out, policy="synthetic"
    )


@dataclass(frozen=True)
class RecoveryScore:
    """Support precision/recall and sign accuracy over off-diagonal entries."""

    precision: float | None
    recall: float | None
    sign_accuracy: float | None
    true_edges: int
    predicted_edges: int
    true_positives: int


def recovery_score(truth: GroundTruth, est: SignedNetwork) -> RecoveryScore:
    if truth.markets.ids != est.markets.ids:
        raise ValueError("ground truth and estimate cover different markets")
    n = truth.markets.n
    off = ~np.eye(n, dtype=bool)
    a_true = truth.adjacency_signs()
    a_est = np.asarray(est.A)
    true_edge = (a_true != 0) & off
    pred_edge = (a_est != 0) & off
    tp_mask = true_edge & pred_edge
    n_true = int(true_edge.sum())
    n_pred = int(pred_edge.sum())
    n_tp = int(tp_mask.sum())
    precision = None if n_pred == 0 else n_tp / n_pred
    recall = None if n_true == 0 else n_tp / n_true
    sign_acc = None if n_tp == 0 else float((a_true[tp_mask] == a_est[tp_mask]).mean())
    return RecoveryScore(
        precision=precision,
        recall=recall,
        sign_accuracy=sign_acc,
        true_edges=n_true,
        predicted_edges=n_pred,
        true_positives=n_tp,
    )


def load_scenario(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    known = {
        "n_per_continent",
        "sparsity",
        "coef_range",
        "noise_sd",
        "T",
        "seed",
        "burn_in",
        "ar_on_diag",
        "structure",
        "coupling_on_at",
    }
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"{path}: unknown scenario keys: {', '.join(sorted(unknown))}")
    for key in ("n_per_continent", "sparsity", "coef_range", "T", "seed"):
        if key not in raw:
            raise ValueError(f"{path}: scenario missing key {key!r}")
    return raw


def run_scenario(scenario: dict) -> tuple[GroundTruth, ReturnsPanel]:
    truth = random_tz_var(
        n_per_continent=tuple(scenario["n_per_continent"]),
        sparsity=float(scenario["sparsity"]),
        coef_range=tuple(scenario["coef_range"]),
        seed=int(scenario["seed"]),
        noise_sd=scenario.get("noise_sd", 1.0),
        ar_on_diag=bool(scenario.get("ar_on_diag", False)),
        structure=structure_from_name(scenario.get("structure", "timezone")),
    )
    panel = simulate_panel(
        truth,
        T=int(scenario["T"]),
        burn_in=int(scenario.get("burn_in", 200)),
        coupling_on_at=scenario.get("coupling_on_at"),
    )
    return truth, panel


def truth_to_dict(truth: GroundTruth) -> dict:
    return {
        "markets": list(truth.markets.ids),
        "structure": truth.structure.value,
        "coefficients": {
            target: {
                source: float(truth.B[i, j])
                for j, source in enumerate(truth.markets.ids)
                if truth.B[i, j] != 0.0
            }
            for i, target in enumerate(truth.markets.ids)
        },
        "noise_sd": [float(v) for v in truth.noise_sd],
        "seed": truth.seed,
        "spectral_radius": truth.spectral_radius(),
    }
