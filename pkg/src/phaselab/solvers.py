"""Full-design solvers: coordinate descent and greedy forward selection.

These operate on either the Gram representation (G, X'y) or a materialized
design (X, y); both views carry the same information for every method here.
Selection thresholds arrive as scaled exponents and are converted to the raw
scale by sqrt(2 log p) internally.

Coordinate descent for the convex objectives runs to a 1e-10 max coefficient
change; SCAD descent is a local heuristic warm-started from the Lasso fit
(optionally with random restarts, keeping the best objective), which is the
contract the block-exact comparison tests pin down.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .selectors import Tuning

MAX_SWEEPS = 100_000
CD_TOL = 1e-10


@njit(cache=True)
def _cd_gram(G, xty, lam, mu, beta, max_sweeps, tol):
    """Cyclic coordinate descent for lasso/elastic net on the Gram view."""
    p = G.shape[0]
    grad_cache = G @ beta
    for sweep in range(max_sweeps):
        delta = 0.0
        for j in range(p):
            old = beta[j]
            z = xty[j] - (grad_cache[j] - G[j, j] * old)
            denom = G[j, j] + mu
            bj = np.sign(z) * max(abs(z) - lam, 0.0) / denom
            if bj != old:
                d = bj - old
                for i in range(p):
                    grad_cache[i] += G[i, j] * d
                beta[j] = bj
                ad = abs(d)
                if ad > delta:
                    delta = ad
        if delta < tol:
            return sweep + 1
    return -max_sweeps


@njit(cache=True)
def _scad_prox(z, c, lam, a):
    """argmin_b  c b^2/2 - z b + scad_pen(|b|; lam, a), by piece enumeration."""
    best_b = 0.0
    best_f = _scad_pen(0.0, lam, a)
    # piece 1: |b| <= lam
    b = np.sign(z) * max(abs(z) - lam, 0.0) / c
    if abs(b) * c <= lam * c:  # always a candidate; clip into the piece
        if abs(b) > lam:
            b = np.sign(b) * lam
        f = 0.5 * c * b * b - z * b + _scad_pen(abs(b), lam, a)
        if f < best_f:
            best_f = f
            best_b = b
    # piece 2: lam < |b| <= a lam
    denom = (a - 1.0) * c - 1.0
    if denom != 0.0:
        b = ((a - 1.0) * z - np.sign(z) * a * lam) / denom
        if np.sign(b) == np.sign(z) and lam < abs(b) <= a * lam:
            f = 0.5 * c * b * b - z * b + _scad_pen(abs(b), lam, a)
            if f < best_f:
                best_f = f
                best_b = b
    for bb in (lam, -lam, a * lam, -a * lam):
        f = 0.5 * c * bb * bb - z * bb + _scad_pen(abs(bb), lam, a)
        if f < best_f:
            best_f = f
            best_b = bb
    # piece 3: |b| > a lam
    b = z / c
    if abs(b) > a * lam:
        f = 0.5 * c * b * b - z * b + _scad_pen(abs(b), lam, a)
        if f < best_f:
            best_f = f
            best_b = b
    return best_b


@njit(cache=True)
def _scad_pen(theta, lam, a):
    if theta <= lam:
        return lam * theta
    if theta >= a * lam:
        return (a + 1.0) * lam * lam / 2.0
    return (2.0 * a * lam * theta - theta * theta - lam * lam) / (2.0 * (a - 1.0))


@njit(cache=True)
def _cd_scad_gram(G, xty, lam, a, beta, max_sweeps, tol):
    p = G.shape[0]
    grad_cache = G @ beta
    for sweep in range(max_sweeps):
        delta = 0.0
        for j in range(p):
            old = beta[j]
            z = xty[j] - (grad_cache[j] - G[j, j] * old)
            bj = _scad_prox(z, G[j, j], lam, a)
            if bj != old:
                d = bj - old
                for i in range(p):
                    grad_cache[i] += G[i, j] * d
                beta[j] = bj
                ad = abs(d)
                if ad > delta:
                    delta = ad
        if delta < tol:
            return sweep + 1
    return -max_sweeps


def scad_objective_gram(G, xty, lam, a, beta):
    pen = np.where(
        np.abs(beta) <= lam, lam * np.abs(beta),
        np.where(np.abs(beta) >= a * lam, (a + 1.0) * lam * lam / 2.0,
                 (2 * a * lam * np.abs(beta) - beta**2 - lam**2) / (2 * (a - 1.0))))
    return 0.5 * beta @ G @ beta - xty @ beta + pen.sum()


def lasso_gram(G, xty, lam, mu=0.0, beta0=None):
    beta = np.zeros(G.shape[0]) if beta0 is None else beta0.copy()
    status = _cd_gram(G, xty, float(lam), float(mu), beta, MAX_SWEEPS, CD_TOL)
    if status < 0:
        raise RuntimeError(f"coordinate descent did not converge in {MAX_SWEEPS} sweeps")
    return beta


def scad_gram(G, xty, lam, a, beta0=None, restarts=0, rng=None):
    """SCAD by coordinate descent with a Lasso warm start.

    restarts > 0 adds random restarts; the best objective wins.
    """
    warm = lasso_gram(G, xty, lam) if beta0 is None else beta0.copy()
    beta = warm.copy()
    status = _cd_scad_gram(G, xty, float(lam), float(a), beta, MAX_SWEEPS, CD_TOL)
    if status < 0:
        raise RuntimeError(f"SCAD coordinate descent did not converge in {MAX_SWEEPS} sweeps")
    best = (scad_objective_gram(G, xty, lam, a, beta), beta)
    if restarts and rng is not None:
        scale = max(1.0, float(np.abs(xty).max()))
        for _ in range(restarts):
            candidate = warm + rng.standard_normal(len(warm)) * 0.5 * scale
            _cd_scad_gram(G, xty, float(lam), float(a), candidate, MAX_SWEEPS, CD_TOL)
            obj = scad_objective_gram(G, xty, lam, a, candidate)
            if obj < best[0] - 1e-12:
                best = (obj, candidate)
    return best[1]


@njit(cache=True)
def _forward_gram(G, xty, max_steps):
    """Greedy forward path on the Gram view.

    Returns (order, gains, ncols): order[k] is the variable entering at step
    k, gains[k] the forward gain delta; collinear candidates (projected norm
    below 1e-12) are skipped.  Runs the full path so every threshold t can be
    read off afterwards.
    """
    p = G.shape[0]
    order = np.full(max_steps, -1, dtype=np.int64)
    gains = np.zeros(max_steps)
    selected = np.zeros(p, dtype=np.bool_)
    # Cholesky factor L of G[S,S] grown incrementally, plus w = L^-1 xty_S
    L = np.zeros((max_steps, max_steps))
    Wcols = np.zeros((max_steps, p))  # rows of L^-1 G[S,:]
    w = np.zeros(max_steps)
    corr = xty.copy()  # x_i' r  for current residual
    pnorm2 = np.ones(p)  # squared projected norms ||P_perp x_i||^2
    k = 0
    while k < max_steps:
        best_i = -1
        best_c = -1.0
        for i in range(p):
            if selected[i] or pnorm2[i] < 1e-24:
                continue
            c = abs(corr[i])
            if c > best_c + 1e-15:
                best_c = c
                best_i = i
        if best_i < 0:
            break
        if pnorm2[best_i] < 1e-24:
            break
        delta = best_c / np.sqrt(pnorm2[best_i])
        order[k] = best_i
        gains[k] = delta
        # grow the factorization with column best_i
        gi = G[best_i]
        v = np.zeros(k)
        for j in range(k):
            acc = gi[order[j]]
            for m in range(j):
                acc -= L[j, m] * v[m]
            v[j] = acc / L[j, j]
        diag = G[best_i, best_i]
        for m in range(k):
            diag -= v[m] * v[m]
        if diag < 1e-24:
            break
        L[k, :k] = v
        L[k, k] = np.sqrt(diag)
        # w_k, row of L^-1 G[S,:]
        acc = xty[best_i]
        for m in range(k):
            acc -= v[m] * w[m]
        w[k] = acc / L[k, k]
        for i in range(p):
            acc = gi[i]
            for m in range(k):
                acc -= v[m] * Wcols[m, i]
            Wcols[k, i] = acc / L[k, k]
        selected[best_i] = True
        for i in range(p):
            corr[i] = corr[i] - Wcols[k, i] * w[k]
            pnorm2[i] = pnorm2[i] - Wcols[k, i] * Wcols[k, i]
        k += 1
    return order, gains, k, L, w


def forward_path_gram(G, xty, max_steps=None, return_factor=False):
    """Full greedy path; rank deficiency ends it via the collinearity guard."""
    p = G.shape[0]
    if max_steps is None:
        max_steps = p
    order, gains, k, L, w = _forward_gram(np.ascontiguousarray(G, dtype=float),
                                          np.ascontiguousarray(xty, dtype=float),
                                          max_steps)
    if return_factor:
        return order[:k], gains[:k], L[:k, :k], w[:k]
    return order[:k], gains[:k]


def forward_prefix_refits(order, L, w):
    """OLS coefficients for every prefix of the forward path.

    Uses the path's Cholesky factor: beta_S = L^-T (L^-1 xty_S), where the
    inner solve w is built incrementally during the path.  Returns a list of
    dense coefficient vectors indexed by prefix length (0..k)."""
    from scipy.linalg import solve_triangular

    k = len(order)
    out = [np.zeros(0)]
    for m in range(1, k + 1):
        z = solve_triangular(L[:m, :m], w[:m], lower=True, trans="T")
        out.append(z)
    return out


def forward_support(order, gains, t_raw):
    """Support of forward selection with stopping threshold t (raw scale)."""
    keep = []
    for i, g in zip(order, gains):
        if g <= t_raw:
            break
        keep.append(int(i))
    return keep


def refit_ols_gram(G, xty, support):
    beta = np.zeros(G.shape[0])
    if support:
        S = np.asarray(support)
        beta[S] = np.linalg.solve(G[np.ix_(S, S)], xty[S])
    return beta


def fit_general(method_or_tuning, design, data, tuning: Tuning = None,
                scad_restarts: int = 5, rng=None):
    """Support set of a method on a general design.

    `design` is a DesignSpec (or anything with gram_matrix()); `data` is a
    SufficientStats (or raw xty array).  Thresholds are the Tuning's scaled
    exponents, converted internally by sqrt(2 log p).
    """
    if isinstance(method_or_tuning, Tuning):
        tuning = method_or_tuning
    method = tuning.method
    G = design.gram_matrix()
    xty = data.xty if hasattr(data, "xty") else np.asarray(data, dtype=float)
    p = G.shape[0]
    scale = np.sqrt(2.0 * np.log(p))
    lam = tuning.sqrt_q * scale
    t = tuning.sqrt_w * scale
    v = tuning.sqrt_u * scale

    if method == "marginal":
        return sorted(np.flatnonzero(np.abs(xty) > t).tolist())
    if method in ("lasso", "elastic_net"):
        mu = tuning.mu if method == "elastic_net" else 0.0
        beta = lasso_gram(G, xty, lam, mu)
        return sorted(np.flatnonzero(beta != 0.0).tolist())
    if method == "thresholded_lasso":
        beta = lasso_gram(G, xty, lam)
        return sorted(np.flatnonzero(np.abs(beta) > t).tolist())
    if method == "scad":
        beta = scad_gram(G, xty, lam, tuning.a, restarts=scad_restarts, rng=rng)
        return sorted(np.flatnonzero(beta != 0.0).tolist())
    if method == "forward":
        order, gains = forward_path_gram(G, xty)
        return sorted(forward_support(order, gains, t))
    if method == "forward_backward":
        order, gains = forward_path_gram(G, xty)
        support = forward_support(order, gains, t)
        beta = refit_ols_gram(G, xty, support)
        return sorted(np.flatnonzero(np.abs(beta) > v).tolist())
    raise ValueError(method)
