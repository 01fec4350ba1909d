"""Penalty selection and network construction.

Per-equation penalties come from K-fold cross-validation with K = floor(T/30)
(fold sizes stay above 30). Because random fold partitions can flip which
penalty wins, the repeated variant regenerates the folds R times, tabulates
how often each grid value is selected, keeps the M most frequent values, and
uses their maximum as the working penalty; edge weights average the
coefficient fits at all M values, weighted by selection frequency.

The adjacency entry for (source i, target j) is the sign of source i's
coefficient in target j's equation; weights are masked to that support.
"""
from __future__ import annotations

import enum
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _cd
from .config import LassoConfig, SelectionConfig
from .errors import EstimationError
from .lasso import DesignMatrix, LambdaGrid, lambda_grid, lambda_max, lasso_path
from .markets import ReturnsPanel
from .network import SignedNetwork
from .seeding import (
    TAG_EQUATION,
    TAG_FOLD_REPLICATION,
    TAG_STABILITY_REP,
    derive_seed,
)
from .tzvar import CoefficientMatrix, LagStructure, build_design, design_arrays


@dataclass(frozen=True)
class FoldPlan:
    """Partition of the usable rows into K near-equal folds."""

    K: int
    assignment: np.ndarray  # fold index per row, values in 0..K-1
    seed: int

    def __post_init__(self) -> None:
        a = np.asarray(self.assignment, dtype=np.int64)
        if a.ndim != 1 or self.K < 2:
            raise ValueError("fold plan needs a 1-d assignment and K >= 2")
        counts = np.bincount(a, minlength=self.K)
        if counts.min() + 1 < counts.max():
            raise ValueError("fold sizes differ by more than 1")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)


@dataclass(frozen=True)
class LambdaSelection:
    """Outcome of repeated CV for one equation."""

    market: str
    lambda_star: float
    top: tuple[tuple[float, int], ...]  # (penalty, frequency), frequency-descending
    replications: int
    top_m: int
    note: str | None = None


def partition_folds(t_rows: int, seed: int) -> FoldPlan:
    """K = floor(t_rows / 30) folds, uniformly random, reproducible from seed."""
    if t_rows < 60:
        raise EstimationError(f"sample too short for CV ({t_rows} rows, need >= 60)")
    K = t_rows // 30
    rng = np.random.default_rng(seed)
    perm = rng.permutation(t_rows)
    assignment = np.empty(t_rows, dtype=np.int64)
    for pos, row in enumerate(perm):
        assignment[row] = pos % K
    return FoldPlan(K=K, assignment=assignment, seed=seed)


def _cv_error_curve(
    X: np.ndarray,
    y: np.ndarray,
    grid: LambdaGrid,
    plan: FoldPlan,
    lasso_cfg: LassoConfig,
    context: str,
) -> np.ndarray:
    errors = np.zeros(grid.values.shape[0])
    skipped = np.zeros(plan.K, dtype=np.bool_)
    _cd.cv_errors(
        X,
        y,
        plan.assignment,
        plan.K,
        grid.values,
        lasso_cfg.tol,
        lasso_cfg.max_iter,
        lasso_cfg.standardize,
        errors,
        skipped,
    )
    if skipped.any():
        folds = ", ".join(str(k) for k in np.nonzero(skipped)[0])
        warnings.warn(f"{context}: skipped folds with zero-variance response: {folds}")
    if skipped.all():
        raise EstimationError(f"{context}: every CV fold has a zero-variance response")
    return errors


def _select_index(errors: np.ndarray) -> int:
    # Grid is in decreasing penalty order; strict improvement keeps the
    # largest penalty on ties.
    best = 0
    for i in range(1, errors.shape[0]):
        if errors[i] < errors[best]:
            best = i
    return best


def cv_select(
    p: ReturnsPanel,
    target: str,
    s: LagStructure,
    grid: LambdaGrid,
    plan: FoldPlan,
    lasso_cfg: LassoConfig = LassoConfig(),
) -> float:
    """Penalty minimizing the summed held-out squared error over folds."""
    X, y = design_arrays(p, target, s)
    if plan.assignment.shape[0] != X.shape[0]:
        raise ValueError(
            f"fold plan covers {plan.assignment.shape[0]} rows, design has {X.shape[0]}"
        )
    errors = _cv_error_curve(X, y, grid, plan, lasso_cfg, f"cv({target})")
    return float(grid.values[_select_index(errors)])


def _top_selection(
    counts: np.ndarray, grid: LambdaGrid, market: str, R: int, M: int
) -> LambdaSelection:
    chosen = np.nonzero(counts)[0]
    # Frequency-descending; ties go to the larger penalty (smaller index).
    order = sorted(chosen, key=lambda i: (-counts[i], i))
    note = None
    if len(order) < M:
        note = f"only {len(order)} distinct penalties selected over {R} replications"
    top_idx = order[: min(M, len(order))]
    top = tuple((float(grid.values[i]), int(counts[i])) for i in top_idx)
    lambda_star = float(grid.values[min(top_idx)])
    return LambdaSelection(
        market=market,
        lambda_star=lambda_star,
        top=top,
        replications=R,
        top_m=M,
        note=note,
    )


def repeated_cv(
    p: ReturnsPanel,
    target: str,
    s: LagStructure,
    grid: LambdaGrid,
    R: int,
    M: int,
    seed: int,
    lasso_cfg: LassoConfig = LassoConfig(),
) -> LambdaSelection:
    """Rerun CV over R fresh fold plans and keep the M most frequent penalties."""
    if R < 1 or M < 1:
        raise ValueError("repeated CV needs R >= 1 and M >= 1")
    X, y = design_arrays(p, target, s)
    counts = np.zeros(grid.values.shape[0], dtype=np.int64)
    for r in range(R):
        plan = partition_folds(X.shape[0], derive_seed(seed, TAG_FOLD_REPLICATION, r))
        errors = _cv_error_curve(X, y, grid, plan, lasso_cfg, f"cv({target}, rep {r})")
        counts[_select_index(errors)] += 1
    return _top_selection(counts, grid, target, R, M)


def _equation_columns(
    p: ReturnsPanel,
    target: str,
    s: LagStructure,
    selection: LambdaSelection,
    lasso_cfg: LassoConfig,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, float, bool]:
    """Fit one equation at its selected penalties.

    Returns (signs, weights, coefficient row at the working penalty,
    intercept, converged). Weight entries whose frequency-weighted average
    disagrees in sign with the working fit are zeroed with a warning.
    """
    d = DesignMatrix.build(*design_arrays(p, target, s), standardize=lasso_cfg.standardize)
    lams = np.array([lam for lam, _ in selection.top])
    freqs = np.array([q for _, q in selection.top], dtype=np.float64)
    order = np.argsort(-lams, kind="stable")
    ratio = 1.0 if len(lams) == 1 or lams[order][0] == 0 else float(lams[order][-1] / lams[order][0])
    path_grid = LambdaGrid(lams[order], len(lams), ratio)
    fits = lasso_path(d, path_grid, tol=lasso_cfg.tol, max_iter=lasso_cfg.max_iter)
    coef_by_lam = {float(f.lam): f for f in fits}
    star = coef_by_lam[selection.lambda_star]
    if not star.converged:
        warnings.warn(f"equation for {target!r} did not converge at its working penalty")
    weights = freqs / freqs.sum()
    avg = np.zeros(d.n_cols)
    for (lam, _), wq in zip(selection.top, weights):
        avg += wq * coef_by_lam[float(lam)].coef
    signs, masked, conflict = mask_sign_conflicts(np.sign(star.coef), avg)
    if conflict.any():
        bad = ", ".join(p.markets.ids[i] for i in np.nonzero(conflict)[0])
        warnings.warn(
            f"dropping edges into {target!r} whose averaged weight disagrees in sign "
            f"with the working fit: {bad}"
        )
    return signs, masked, star.coef, star.intercept, star.converged


def mask_sign_conflicts(
    signs: np.ndarray, avg: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mask averaged weights to the sign support, dropping disagreements.

    Entries where the working fit is zero are masked out of the weights;
    entries where the averaged weight has the opposite sign (or cancels to
    zero) are dropped from both, keeping weight support and signs aligned.
    """
    masked = np.where(signs != 0.0, avg, 0.0)
    conflict = (signs != 0.0) & (np.sign(masked) != signs)
    masked = np.where(conflict, 0.0, masked)
    signs = np.where(conflict, 0.0, signs)
    return signs, masked, conflict


def build_adjacency(
    p: ReturnsPanel,
    s: LagStructure,
    selections: dict[str, LambdaSelection],
    lasso_cfg: LassoConfig = LassoConfig(),
) -> np.ndarray:
    """Sign matrix, entry (source, target) from the target equation's fit."""
    _check_selections(p, selections)
    n = p.markets.n
    A = np.zeros((n, n), dtype=np.int8)
    for j, mid in enumerate(p.markets.ids):
        signs, _, _, _, _ = _equation_columns(p, mid, s, selections[mid], lasso_cfg)
        A[:, j] = signs.astype(np.int8)
    return A


def build_weights(
    p: ReturnsPanel,
    s: LagStructure,
    selections: dict[str, LambdaSelection],
    lasso_cfg: LassoConfig = LassoConfig(),
) -> np.ndarray:
    """Frequency-weighted coefficient matrix masked to the adjacency support."""
    _check_selections(p, selections)
    n = p.markets.n
    W = np.zeros((n, n))
    for j, mid in enumerate(p.markets.ids):
        _, w, _, _, _ = _equation_columns(p, mid, s, selections[mid], lasso_cfg)
        W[:, j] = w
    return W


def _check_selections(p: ReturnsPanel, selections: dict[str, LambdaSelection]) -> None:
    missing = [mid for mid in p.markets.ids if mid not in selections]
    if missing:
        raise ValueError(f"missing selections for markets: {', '.join(missing)}")


@dataclass(frozen=True)
class NetworkEstimate:
    """Full static pipeline output for one sample period."""

    network: SignedNetwork
    coefficients: CoefficientMatrix
    selections: dict[str, LambdaSelection]
    skipped_markets: tuple[str, ...] = ()


def _estimate_one_equation(
    p: ReturnsPanel,
    target: str,
    s: LagStructure,
    sel_cfg: SelectionConfig,
    lasso_cfg: LassoConfig,
    eq_seed: int,
    grid: LambdaGrid | None = None,
):
    if grid is None:
        d = build_design(p, target, s, standardize=lasso_cfg.standardize)
        grid = lambda_grid(lambda_max(d), sel_cfg.grid_points, sel_cfg.grid_min_ratio)
    selection = repeated_cv(
        p, target, s, grid, sel_cfg.replications, sel_cfg.top_m, eq_seed, lasso_cfg
    )
    signs, w, coef, intercept, conv = _equation_columns(p, target, s, selection, lasso_cfg)
    return selection, signs, w, coef, intercept, conv


def build_network(
    p: ReturnsPanel,
    s: LagStructure,
    sel_cfg: SelectionConfig = SelectionConfig(),
    lasso_cfg: LassoConfig = LassoConfig(),
    seed: int = 0,
    threads: int = 1,
    on_equation_error: str = "raise",
    grid: LambdaGrid | None = None,
) -> NetworkEstimate:
    """Select penalties, estimate every equation, and assemble the network.

    Per-equation seeds derive from (seed, equation index), so results are
    identical for any thread count. With on_equation_error="skip", failing
    equations produce an empty column and are reported in skipped_markets.
    """
    if on_equation_error not in ("raise", "skip"):
        raise ValueError("on_equation_error must be 'raise' or 'skip'")
    n = p.markets.n
    A = np.zeros((n, n), dtype=np.int8)
    W = np.zeros((n, n))
    B = np.zeros((n, n))
    intercepts = np.zeros(n)
    converged = np.zeros(n, dtype=bool)
    selections: dict[str, LambdaSelection] = {}
    skipped: list[str] = []

    def job(j: int):
        mid = p.markets.ids[j]
        eq_seed = derive_seed(seed, TAG_EQUATION, j)
        return _estimate_one_equation(p, mid, s, sel_cfg, lasso_cfg, eq_seed, grid)

    indices = range(n)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {j: pool.submit(job, j) for j in indices}
            results = {j: _outcome(futures[j]) for j in indices}
    else:
        results = {}
        for j in indices:
            try:
                results[j] = (job(j), None)
            except EstimationError as exc:
                results[j] = (None, exc)

    for j in indices:
        mid = p.markets.ids[j]
        outcome, err = results[j]
        if err is not None:
            if on_equation_error == "raise":
                raise err
            skipped.append(mid)
            converged[j] = True  # nothing estimated, nothing to flag
            continue
        selection, signs, w, coef, intercept, conv = outcome
        selections[mid] = selection
        A[:, j] = signs.astype(np.int8)
        W[:, j] = w
        B[j] = coef
        intercepts[j] = intercept
        converged[j] = conv

    net = SignedNetwork(A=A, W=W, markets=p.markets)
    cm = CoefficientMatrix(B, intercepts, s, p.markets, converged)
    return NetworkEstimate(net, cm, selections, tuple(skipped))


def _outcome(future):
    try:
        return future.result(), None
    except EstimationError as exc:
        return None, exc


class CVVariant(enum.Enum):
    CLASSIC = "classic"
    IMPROVED = "improved"


def stability_diagnostics(
    p: ReturnsPanel,
    s: LagStructure,
    grid: LambdaGrid | None,
    reps: int,
    variant: CVVariant,
    seed: int,
    sel_cfg: SelectionConfig = SelectionConfig(),
    lasso_cfg: LassoConfig = LassoConfig(),
    threads: int = 1,
) -> list[tuple[float, float]]:
    """Regenerate the network `reps` times; report density and mutual proportion.

    The classic variant reselects a single penalty per equation from one
    fresh fold plan each replication; the improved variant reruns the full
    repeated-CV pipeline with fresh seeds. The mutual proportion of
    replication r is the share of possible directed links present in all of
    the first r networks, so the sequence is non-increasing. A fixed grid
    may be supplied; by default each equation uses its own data-driven grid.

    Returns one (density, mutual_proportion) pair per replication.
    """
    if reps < 1:
        raise ValueError("need at least one replication")
    if variant is CVVariant.CLASSIC:
        rep_cfg = SelectionConfig(
            replications=1,
            top_m=1,
            grid_points=sel_cfg.grid_points,
            grid_min_ratio=sel_cfg.grid_min_ratio,
        )
    else:
        rep_cfg = sel_cfg
    n = p.markets.n
    denom = n * (n - 1)
    out: list[tuple[float, float]] = []
    mutual: np.ndarray | None = None
    for r in range(reps):
        rep_seed = derive_seed(seed, TAG_STABILITY_REP, r)
        est = build_network(
            p, s, rep_cfg, lasso_cfg, seed=rep_seed, threads=threads, grid=grid,
        )
        support = est.network.support()
        mutual = support if mutual is None else (mutual & support)
        density = support.sum() / denom
        out.append((float(density), float(mutual.sum() / denom)))
    return out
