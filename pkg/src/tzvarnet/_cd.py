"""Numba kernels: cyclic coordinate descent on the Gram form and fold-level CV.

Everything here uses explicit fixed-order loops (no BLAS) so results are
bit-for-bit reproducible regardless of thread count or library build. The
kernels release the GIL, which is what makes equation/window-level thread
pools effective.
"""
from __future__ import annotations

import numpy as np
from numba import njit

# KKT slack is relative to max(1, lam).
KKT_RTOL = 1e-5


@njit(cache=True, nogil=True)
def _soft(z, t):
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


@njit(cache=True, nogil=True)
def gram_and_xty(X, y):
    """G = X'X and c = X'y with deterministic accumulation order."""
    T, n = X.shape
    G = np.zeros((n, n))
    c = np.zeros(n)
    for t in range(T):
        for j in range(n):
            xtj = X[t, j]
            c[j] += xtj * y[t]
            for l in range(j, n):
                G[j, l] += xtj * X[t, l]
    for j in range(n):
        for l in range(j + 1, n):
            G[l, j] = G[j, l]
    return G, c


@njit(cache=True, nogil=True)
def _kkt_ok_refresh(G, c, beta, gb, lam, eps):
    """Check stationarity of 0.5 b'Gb - c'b + lam|b|; refresh gb = G @ beta."""
    n = G.shape[0]
    for j in range(n):
        s = 0.0
        for l in range(n):
            s += G[j, l] * beta[l]
        gb[j] = s
    ok = True
    for j in range(n):
        if G[j, j] <= 0.0:
            continue
        g = c[j] - gb[j]
        if beta[j] > 0.0:
            if abs(g - lam) > eps:
                ok = False
        elif beta[j] < 0.0:
            if abs(g + lam) > eps:
                ok = False
        else:
            if abs(g) > lam + eps:
                ok = False
    return ok


@njit(cache=True, nogil=True)
def solve_gram(G, c, lam, beta, tol, max_iter, objectives, yty):
    """Minimize 0.5 b'Gb - c'b + lam*||b||_1 by cyclic coordinate descent.

    beta is the warm start on entry and the solution on exit. Sweeps stop
    once the largest coefficient move falls below tol and the stationarity
    conditions hold within KKT_RTOL * max(1, lam). Columns with G[j,j] <= 0
    (zero variance) are pinned at zero. When ``objectives`` is non-empty the
    objective value (including the 0.5*y'y constant) is recorded per sweep.

    Returns (sweeps, converged).
    """
    n = G.shape[0]
    eps = KKT_RTOL * max(1.0, lam)
    trace = objectives.shape[0] > 0
    gb = np.zeros(n)
    for j in range(n):
        if beta[j] != 0.0:
            for l in range(n):
                gb[l] += G[l, j] * beta[j]
    sweeps = 0
    converged = False
    for it in range(1, max_iter + 1):
        sweeps = it
        max_delta = 0.0
        for j in range(n):
            gjj = G[j, j]
            bj = beta[j]
            if gjj <= 0.0:
                if bj != 0.0:
                    for l in range(n):
                        gb[l] -= G[j, l] * bj
                    beta[j] = 0.0
                continue
            rho = c[j] - gb[j] + gjj * bj
            bj_new = _soft(rho, lam) / gjj
            if bj_new != bj:
                d = bj_new - bj
                for l in range(n):
                    gb[l] += G[j, l] * d
                beta[j] = bj_new
                ad = abs(d)
                if ad > max_delta:
                    max_delta = ad
        if trace and it <= objectives.shape[0]:
            f = 0.5 * yty
            for j in range(n):
                f += 0.5 * beta[j] * gb[j] - c[j] * beta[j] + lam * abs(beta[j])
            objectives[it - 1] = f
        if max_delta < tol:
            if max_delta == 0.0 or _kkt_ok_refresh(G, c, beta, gb, lam, eps):
                converged = True
                break
    return sweeps, converged


@njit(cache=True, nogil=True)
def solve_path(G, c, lams, tol, max_iter, betas, conv, iters):
    """Warm-started fits along a decreasing penalty sequence.

    betas (L, n), conv (L,), iters (L,) are filled in place.
    """
    n = G.shape[0]
    L = lams.shape[0]
    beta = np.zeros(n)
    empty = np.empty(0)
    for i in range(L):
        it, ok = solve_gram(G, c, lams[i], beta, tol, max_iter, empty, 0.0)
        for j in range(n):
            betas[i, j] = beta[j]
        conv[i] = ok
        iters[i] = it


@njit(cache=True, nogil=True)
def _fold_accumulate(X, y, train_idx, test_idx, lams, tol, max_iter, standardize, errors):
    T_tr = train_idx.shape[0]
    n = X.shape[1]
    means = np.zeros(n)
    scales = np.ones(n)
    ybar = 0.0
    if standardize:
        for r in range(T_tr):
            ybar += y[train_idx[r]]
        ybar /= T_tr
        for j in range(n):
            s = 0.0
            for r in range(T_tr):
                s += X[train_idx[r], j]
            means[j] = s / T_tr
        if T_tr > 1:
            for j in range(n):
                ss = 0.0
                for r in range(T_tr):
                    d = X[train_idx[r], j] - means[j]
                    ss += d * d
                v = ss / (T_tr - 1)
                if v > 0.0:
                    scales[j] = np.sqrt(v)
    Xs = np.empty((T_tr, n))
    yc = np.empty(T_tr)
    for r in range(T_tr):
        t = train_idx[r]
        yc[r] = y[t] - ybar
        for j in range(n):
            Xs[r, j] = (X[t, j] - means[j]) / scales[j]
    G, cvec = gram_and_xty(Xs, yc)
    L = lams.shape[0]
    betas = np.empty((L, n))
    conv = np.empty(L, np.bool_)
    iters = np.empty(L, np.int64)
    solve_path(G, cvec, lams, tol, max_iter, betas, conv, iters)
    for i in range(L):
        for r in range(test_idx.shape[0]):
            t = test_idx[r]
            pred = ybar
            for j in range(n):
                pred += betas[i, j] * (X[t, j] - means[j]) / scales[j]
            d = y[t] - pred
            errors[i] += d * d


@njit(cache=True, nogil=True)
def cv_errors(X, y, fold_of_row, K, lams, tol, max_iter, standardize, errors, skipped):
    """Accumulate held-out squared errors per penalty over all folds.

    errors (L,) must be zeroed by the caller; skipped (K,) flags folds whose
    training response has zero variance (those folds contribute nothing).
    """
    Trows = X.shape[0]
    for k in range(K):
        ntest = 0
        for t in range(Trows):
            if fold_of_row[t] == k:
                ntest += 1
        ntr = Trows - ntest
        if ntest == 0 or ntr == 0:
            skipped[k] = True
            continue
        train_idx = np.empty(ntr, np.int64)
        test_idx = np.empty(ntest, np.int64)
        a = 0
        b = 0
        for t in range(Trows):
            if fold_of_row[t] == k:
                test_idx[b] = t
                b += 1
            else:
                train_idx[a] = t
                a += 1
        y0 = y[train_idx[0]]
        constant = True
        for r in range(ntr):
            if y[train_idx[r]] != y0:
                constant = False
                break
        if constant:
            skipped[k] = True
            continue
        _fold_accumulate(X, y, train_idx, test_idx, lams, tol, max_iter, standardize, errors)
