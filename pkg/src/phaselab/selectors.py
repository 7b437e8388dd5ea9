"""Exact bivariate solution paths and rejection regions for seven selectors.

On a design whose Gram matrix is block-diagonal with 2x2 blocks
[[1, rho], [rho, 1]], each selection method decomposes into independent
bivariate problems in the scaled statistics (h1, h2) = (x_j'y, x_{j+1}'y) /
sqrt(2 log p).  This module implements the closed-form selection pattern of
each method as a function of (h1, h2), the tuning exponents, and rho, plus
the induced rejection region {h : coordinate 1 selected} as a union of
convex cells.

Every path is stated for the canonical configuration h1 >= |h2|, rho >= 0;
general inputs are reduced to it by (i) swapping coordinates so that
coordinate 1 is the leader, (ii) negating both coordinates so the leader is
nonnegative, and (iii) for rho < 0, negating the second coordinate and using
|rho|.  All penalties are even, so these maps leave the objectives invariant.
Ties |h1| = |h2| keep coordinate 1 as the leader.

All selector functions are vectorized over numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import ConvexCell, RegionSpec

METHODS = (
    "lasso",
    "elastic_net",
    "scad",
    "thresholded_lasso",
    "marginal",
    "forward",
    "forward_backward",
)


@dataclass(frozen=True)
class Tuning:
    """Scaled tuning exponents; only the fields a method reads are meaningful.

    q: lambda exponent, lambda' = sqrt(q) (penalized methods and forward's t
       in the paper-facing CLI is w; internally forward/FB use w).
    w: threshold exponent, t' = sqrt(w) (marginal / thresholded Lasso /
       forward / forward-backward entry threshold).
    u: backward threshold exponent, v' = sqrt(u) (forward-backward).
    mu: ridge weight (elastic net), mu >= 0.
    a: SCAD shape, a > 2.
    """

    method: str
    q: float = 0.0
    w: float = 0.0
    u: float = 0.0
    mu: float = 0.0
    a: float = 3.7

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.method == "scad" and not self.a > 2.0:
            raise ValueError("SCAD requires a > 2")
        for name in ("q", "w", "u", "mu"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be nonnegative")

    @property
    def sqrt_q(self) -> float:
        return float(np.sqrt(self.q))

    @property
    def sqrt_w(self) -> float:
        return float(np.sqrt(self.w))

    @property
    def sqrt_u(self) -> float:
        return float(np.sqrt(self.u))

    def eta(self, rho: float) -> float:
        """Effective correlation rho/(1+mu) seen by the elastic net."""
        return rho / (1.0 + self.mu)


def _canon(h1, h2, rho):
    """Reduce to h1 >= |h2|, rho >= 0.  Returns (g1, g2, rho_c, swapped)."""
    h1 = np.asarray(h1, dtype=float)
    h2 = np.asarray(h2, dtype=float)
    swapped = np.abs(h2) > np.abs(h1)
    g1 = np.where(swapped, h2, h1)
    g2 = np.where(swapped, h1, h2)
    neg = g1 < 0
    g1 = np.where(neg, -g1, g1)
    g2 = np.where(neg, -g2, g2)
    if rho < 0:
        g2 = -g2
    return g1, g2, abs(rho), swapped


def _unswap(s1, s2, swapped):
    return np.where(swapped, s2, s1), np.where(swapped, s1, s2)


# ---------------------------------------------------------------------------
# Elastic net / Lasso
# ---------------------------------------------------------------------------

def en_coefficients(h1, h2, rho, lam, mu=0.0):
    """Exact minimizer of the bivariate elastic-net objective.

    Objective: b'[[1,rho],[rho,1]]b/2 - h'b + lam*||b||_1 + mu*||b||^2/2,
    in scaled units (lam = sqrt(q)).  mu = 0 gives the Lasso.
    Returns (b1, b2) in the original coordinates.
    """
    h1 = np.asarray(h1, dtype=float)
    h2 = np.asarray(h2, dtype=float)
    swapped = np.abs(h2) > np.abs(h1)
    g1 = np.where(swapped, h2, h1)
    g2 = np.where(swapped, h1, h2)
    neg = g1 < 0
    g1 = np.where(neg, -g1, g1)
    g2 = np.where(neg, -g2, g2)
    flip = rho < 0
    if flip:
        g2 = -g2
    r = abs(rho)
    eta = r / (1.0 + mu)

    solo = (g1 - lam) / (1.0 + mu)
    upper = g2 >= eta * g1
    thr_up = (g2 - eta * g1) / (1.0 - eta)
    thr_dn = (eta * g1 - g2) / (1.0 + eta)
    joint = np.where(upper, lam < thr_up, lam < thr_dn)
    sgn2 = np.where(upper, 1.0, -1.0)
    a1 = (g1 - lam) / (1.0 + mu)
    a2 = (g2 - sgn2 * lam) / (1.0 + mu)
    b1j = (a1 - eta * a2) / (1.0 - eta * eta)
    b2j = (a2 - eta * a1) / (1.0 - eta * eta)

    b1 = np.where(lam >= g1, 0.0, np.where(joint, b1j, solo))
    b2 = np.where(lam >= g1, 0.0, np.where(joint, b2j, 0.0))
    if flip:
        b2 = -b2
    b1 = np.where(neg, -b1, b1)
    b2 = np.where(neg, -b2, b2)
    return np.where(swapped, b2, b1), np.where(swapped, b1, b2)


def en_select(h1, h2, rho, q, mu=0.0):
    """Selection pattern of the bivariate elastic net (Lasso when mu = 0)."""
    g1, g2, r, swapped = _canon(h1, h2, rho)
    lam = np.sqrt(q)
    eta = r / (1.0 + mu)
    s1 = lam < g1
    upper = g2 >= eta * g1
    thr = np.where(upper, (g2 - eta * g1) / (1.0 - eta), (eta * g1 - g2) / (1.0 + eta))
    s2 = s1 & (lam < thr)
    return _unswap(s1, s2, swapped)


def lasso_select(h1, h2, rho, q):
    return en_select(h1, h2, rho, q, mu=0.0)


def marginal_select(h1, h2, w):
    """Threshold |x'y| marginally; invariant to rho."""
    t = np.sqrt(w)
    return np.abs(np.asarray(h1, dtype=float)) > t, np.abs(np.asarray(h2, dtype=float)) > t


def threslasso_select(h1, h2, rho, q, w):
    """Lasso fit followed by a hard threshold at t' = sqrt(w)."""
    b1, b2 = en_coefficients(h1, h2, rho, np.sqrt(q), mu=0.0)
    t = np.sqrt(w)
    return np.abs(b1) > t, np.abs(b2) > t


# ---------------------------------------------------------------------------
# SCAD
# ---------------------------------------------------------------------------

def _scad_joint_threshold(g1, g2, rho, a):
    """Penalty level below which the second coordinate enters, canonical frame.

    Piecewise in g2/g1; follows the staged growth of the leader coefficient
    b1(lam): h1 - lam for lam in [h1/2, h1], ((a-1)h1 - a*lam)/(a-2) for lam
    in [h1/a, h1/2], then h1.  The partner enters when |g2 - rho*b1(lam)|
    reaches lam.
    """
    u_band = 0.5 * (1.0 + rho) * g1
    l_band = 0.5 * (rho - 1.0) * g1
    m_hi = (rho + 1.0 / a) * g1
    m_lo = (rho - 1.0 / a) * g1

    thr = np.abs(g2 - rho * g1)  # inner band default
    thr = np.where(g2 >= u_band, (g2 - rho * g1) / (1.0 - rho), thr)
    thr = np.where(g2 <= l_band, (rho * g1 - g2) / (1.0 + rho), thr)
    if a * (1.0 - rho) > 2.0:
        in_b = (g2 >= m_hi) & (g2 < u_band)
        thr = np.where(
            in_b, ((a - 2.0) * g2 - rho * (a - 1.0) * g1) / (a - 2.0 - a * rho), thr
        )
    in_d = (g2 > l_band) & (g2 <= m_lo)
    thr = np.where(
        in_d, (rho * (a - 1.0) * g1 - (a - 2.0) * g2) / (a * (1.0 + rho) - 2.0), thr
    )
    return thr


def scad_select(h1, h2, rho, q, a):
    """Selection pattern of the bivariate SCAD global minimizer."""
    g1, g2, r, swapped = _canon(h1, h2, rho)
    lam = np.sqrt(q)
    s1 = lam < g1
    s2 = s1 & (lam < _scad_joint_threshold(g1, g2, r, a))
    return _unswap(s1, s2, swapped)


# ---------------------------------------------------------------------------
# Forward and forward-backward selection
# ---------------------------------------------------------------------------

def forward_select_bivariate(h1, h2, rho, w):
    """Greedy forward selection on one correlated pair, threshold t'=sqrt(w)."""
    g1, g2, r, swapped = _canon(h1, h2, rho)
    t = np.sqrt(w)
    s = np.sqrt(1.0 - r * r)
    s1 = g1 > t
    s2 = s1 & (np.abs(g2 - r * g1) / s > t)
    return _unswap(s1, s2, swapped)


def fb_select_bivariate(h1, h2, rho, w, u):
    """Forward selection, least-squares refit, hard threshold at v'=sqrt(u)."""
    g1, g2, r, swapped = _canon(h1, h2, rho)
    t = np.sqrt(w)
    v = np.sqrt(u)
    s = np.sqrt(1.0 - r * r)
    f1 = g1 > t
    f2 = f1 & (np.abs(g2 - r * g1) / s > t)
    omr2 = 1.0 - r * r
    # refit: solo coefficient is g1; joint refit solves the 2x2 system
    beta1 = np.where(f2, (g1 - r * g2) / omr2, g1)
    beta2 = np.where(f2, (g2 - r * g1) / omr2, 0.0)
    s1 = f1 & (np.abs(beta1) > v)
    s2 = f2 & (np.abs(beta2) > v)
    return _unswap(s1, s2, swapped)


# ---------------------------------------------------------------------------
# Unified dispatch
# ---------------------------------------------------------------------------

def select(h1, h2, rho, tuning: Tuning):
    """Selection pattern (sel1, sel2) for any method, vectorized."""
    m = tuning.method
    if m in ("lasso", "elastic_net"):
        mu = tuning.mu if m == "elastic_net" else 0.0
        return en_select(h1, h2, rho, tuning.q, mu)
    if m == "scad":
        return scad_select(h1, h2, rho, tuning.q, tuning.a)
    if m == "thresholded_lasso":
        return threslasso_select(h1, h2, rho, tuning.q, tuning.w)
    if m == "marginal":
        return marginal_select(h1, h2, tuning.w)
    if m == "forward":
        return forward_select_bivariate(h1, h2, rho, tuning.w)
    if m == "forward_backward":
        return fb_select_bivariate(h1, h2, rho, tuning.w, tuning.u)
    raise ValueError(m)


# ---------------------------------------------------------------------------
# Rejection regions
# ---------------------------------------------------------------------------
#
# Each method's pattern in the canonical sector {g1 >= |g2|} is a finite list
# of convex cells labeled with (sel_leader, sel_partner).  The four sector
# images (identity, negation, swap, negated swap) tile the plane, so mapping
# the labeled cells through them yields the full rejection region R (cells
# whose label selects coordinate 1) and its complement R^c, both exact.

def _en_templates(lam, eta):
    cells = [
        ([(-1.0, 0.0, -lam)], (False, False)),
        ([(1.0, 0.0, lam), (-eta, 1.0, 0.0), (eta, -1.0, -lam * (1.0 - eta))], (True, False)),
        ([(1.0, 0.0, lam), (-eta, 1.0, lam * (1.0 - eta))], (True, True)),
        ([(1.0, 0.0, lam), (eta, -1.0, 0.0), (-eta, 1.0, -lam * (1.0 + eta))], (True, False)),
        ([(1.0, 0.0, lam), (eta, -1.0, lam * (1.0 + eta))], (True, True)),
    ]
    return cells


def _marginal_templates(t):
    return [
        ([(-1.0, 0.0, -t)], (False, False)),
        ([(1.0, 0.0, t), (0.0, -1.0, -t), (0.0, 1.0, -t)], (True, False)),
        ([(1.0, 0.0, t), (0.0, 1.0, t)], (True, True)),
        ([(1.0, 0.0, t), (0.0, -1.0, t)], (True, True)),
    ]


def _tl_templates(lam, t, rho):
    omr2 = 1.0 - rho * rho
    cp = lam * (1.0 - rho) + t * omr2  # joint-positive coefficient margin
    cn = lam * (1.0 + rho) + t * omr2  # joint-negative coefficient margin
    band = [(-rho, 1.0, -lam * (1.0 + rho)), (rho, -1.0, -lam * (1.0 - rho))]
    jpos = (-rho, 1.0, lam * (1.0 - rho))
    jneg = (rho, -1.0, lam * (1.0 + rho))
    cells = [
        (band + [(-1.0, 0.0, -(lam + t))], (False, False)),
        (band + [(1.0, 0.0, lam + t)], (True, False)),
        # joint entry with positive partner coefficient
        ([jpos, (1.0, -rho, cp), (-rho, 1.0, cp)], (True, True)),
        ([jpos, (1.0, -rho, cp), (rho, -1.0, -cp)], (True, False)),
        ([jpos, (-1.0, rho, -cp), (-rho, 1.0, cp)], (False, True)),
        ([jpos, (-1.0, rho, -cp), (rho, -1.0, -cp)], (False, False)),
        # joint entry with negative partner coefficient
        ([jneg, (1.0, -rho, cn), (rho, -1.0, cn)], (True, True)),
        ([jneg, (1.0, -rho, cn), (-rho, 1.0, -cn)], (True, False)),
        ([jneg, (-1.0, rho, -cn), (rho, -1.0, cn)], (False, True)),
        ([jneg, (-1.0, rho, -cn), (-rho, 1.0, -cn)], (False, False)),
    ]
    return cells


def _scad_templates(lam, a, rho):
    on = (1.0, 0.0, lam)  # leader active
    cells = [([(-1.0, 0.0, -lam)], (False, False))]
    half = 0.5 * (1.0 + rho)
    large_a = a * (1.0 - rho) > 2.0

    # band A: g2 >= (1+rho)/2 g1, Lasso-like entry at (g2-rho g1)/(1-rho)
    bandA = [(-half, 1.0, 0.0)]
    cells.append(([on] + bandA + [(-rho, 1.0, lam * (1.0 - rho))], (True, True)))
    cells.append(([on] + bandA + [(rho, -1.0, -lam * (1.0 - rho))], (True, False)))

    if large_a:
        # band B: (rho + 1/a) g1 <= g2 < (1+rho)/2 g1
        bandB = [(-(rho + 1.0 / a), 1.0, 0.0), (half, -1.0, 0.0)]
        coefB = (-rho * (a - 1.0), a - 2.0, lam * (a - 2.0 - a * rho))
        coefBc = (rho * (a - 1.0), -(a - 2.0), -lam * (a - 2.0 - a * rho))
        cells.append(([on] + bandB + [coefB], (True, True)))
        cells.append(([on] + bandB + [coefBc], (True, False)))
        top_c = [((rho + 1.0 / a), -1.0, 0.0)]
    else:
        top_c = [(half, -1.0, 0.0)]

    # band C: (rho - 1/a) g1 < g2 < top, entry at |g2 - rho g1|
    bandC = [(-(rho - 1.0 / a), 1.0, 0.0)] + top_c
    cells.append(([on] + bandC + [(-rho, 1.0, lam)], (True, True)))
    cells.append(([on] + bandC + [(rho, -1.0, lam)], (True, True)))
    cells.append(([on] + bandC + [(-rho, 1.0, -lam), (rho, -1.0, -lam)], (True, False)))

    # band D: (rho-1)/2 g1 < g2 <= (rho - 1/a) g1
    bandD = [(-0.5 * (rho - 1.0), 1.0, 0.0), ((rho - 1.0 / a), -1.0, 0.0)]
    coefD = (rho * (a - 1.0), -(a - 2.0), lam * (a * (1.0 + rho) - 2.0))
    coefDc = (-rho * (a - 1.0), (a - 2.0), -lam * (a * (1.0 + rho) - 2.0))
    cells.append(([on] + bandD + [coefD], (True, True)))
    cells.append(([on] + bandD + [coefDc], (True, False)))

    # band E: g2 <= (rho-1)/2 g1, Lasso-like entry at (rho g1 - g2)/(1+rho)
    bandE = [(0.5 * (rho - 1.0), -1.0, 0.0)]
    cells.append(([on] + bandE + [(rho, -1.0, lam * (1.0 + rho))], (True, True)))
    cells.append(([on] + bandE + [(-rho, 1.0, -lam * (1.0 + rho))], (True, False)))
    return cells


def _forward_templates(t, rho):
    s = np.sqrt(1.0 - rho * rho)
    on = (1.0, 0.0, t)
    return [
        ([(-1.0, 0.0, -t)], (False, False)),
        ([on, (-rho, 1.0, t * s)], (True, True)),
        ([on, (rho, -1.0, t * s)], (True, True)),
        ([on, (-rho, 1.0, -t * s), (rho, -1.0, -t * s)], (True, False)),
    ]


def _fb_templates(t, v, rho):
    s = np.sqrt(1.0 - rho * rho)
    omr2 = 1.0 - rho * rho
    on = (1.0, 0.0, t)
    solo = [(-rho, 1.0, -t * s), (rho, -1.0, -t * s)]
    jpos = (-rho, 1.0, t * s)
    jneg = (rho, -1.0, t * s)
    # refit margins
    m1 = (1.0, -rho, v * omr2)     # beta1 > v
    m1c = (-1.0, rho, -v * omr2)
    m2p = (-rho, 1.0, v * omr2)    # beta2 > v (positive-partner branch)
    m2pc = (rho, -1.0, -v * omr2)
    m2n = (rho, -1.0, v * omr2)    # -beta2 > v (negative-partner branch)
    m2nc = (-rho, 1.0, -v * omr2)
    cells = [
        ([(-1.0, 0.0, -t)], (False, False)),
        ([on] + solo + [(1.0, 0.0, v)], (True, False)),
        ([on] + solo + [(-1.0, 0.0, -v)], (False, False)),
        ([on, jpos, m1, m2p], (True, True)),
        ([on, jpos, m1, m2pc], (True, False)),
        ([on, jpos, m1c, m2p], (False, True)),
        ([on, jpos, m1c, m2pc], (False, False)),
        ([on, jneg, m1, m2n], (True, True)),
        ([on, jneg, m1, m2nc], (True, False)),
        ([on, jneg, m1c, m2n], (False, True)),
        ([on, jneg, m1c, m2nc], (False, False)),
    ]
    return cells


_SECTOR_ROWS = [(1.0, -1.0, 0.0), (1.0, 1.0, 0.0)]  # g1 >= g2 and g1 >= -g2

_MAPS = [
    (np.array([[1.0, 0.0], [0.0, 1.0]]), False),
    (np.array([[-1.0, 0.0], [0.0, -1.0]]), False),
    (np.array([[0.0, 1.0], [1.0, 0.0]]), True),
    (np.array([[0.0, -1.0], [-1.0, 0.0]]), True),
]


def _templates_for(tuning: Tuning, rho_c: float):
    m = tuning.method
    if m in ("lasso", "elastic_net"):
        mu = tuning.mu if m == "elastic_net" else 0.0
        return _en_templates(tuning.sqrt_q, rho_c / (1.0 + mu))
    if m == "marginal":
        return _marginal_templates(tuning.sqrt_w)
    if m == "thresholded_lasso":
        return _tl_templates(tuning.sqrt_q, tuning.sqrt_w, rho_c)
    if m == "scad":
        return _scad_templates(tuning.sqrt_q, tuning.a, rho_c)
    if m == "forward":
        return _forward_templates(tuning.sqrt_w, rho_c)
    if m == "forward_backward":
        return _fb_templates(tuning.sqrt_w, tuning.sqrt_u, rho_c)
    raise ValueError(m)


def region_for(method_or_tuning, tuning: Optional[Tuning] = None, rho: float = 0.0) -> RegionSpec:
    """Rejection region of a method in the original (h1, h2) coordinates.

    Accepts either region_for(tuning, rho=...) or region_for(method, tuning, rho).
    Cells are exact: membership in cells_R is equivalent to the corresponding
    selector reporting coordinate 1 selected (up to the measure-zero
    boundaries), and cells_R together with cells_Rc cover the plane.
    """
    if isinstance(method_or_tuning, Tuning):
        tun = method_or_tuning
    else:
        if tuning is None:
            raise TypeError("region_for(method, tuning, rho) requires a Tuning")
        if method_or_tuning != tuning.method:
            tun = Tuning(method_or_tuning, q=tuning.q, w=tuning.w, u=tuning.u,
                         mu=tuning.mu, a=tuning.a)
        else:
            tun = tuning
    rho_c = abs(rho)
    templates = _templates_for(tun, rho_c)
    flip = np.array([[1.0, 0.0], [0.0, -1.0]]) if rho < 0 else np.eye(2)

    mats = [np.asarray(np.vstack(rows + _SECTOR_ROWS), dtype=float)
            if not isinstance(rows, np.ndarray) else rows
            for rows, _ in [(list(r) , lab) for r, lab in templates]]
    cells_R, cells_Rc = [], []
    for S, swaps in _MAPS:
        M = S @ flip
        for mat, (_, lab) in zip(mats, [(None, t[1]) for t in templates]):
            new = mat.copy()
            new[:, :2] = mat[:, :2] @ M
            cell = ConvexCell(new)
            s_lead, s_part = lab
            sel1 = s_part if swaps else s_lead
            (cells_R if sel1 else cells_Rc).append(cell)
    return RegionSpec(cells_R=cells_R, cells_Rc=cells_Rc)


def region_to_rows(region: RegionSpec):
    """Flatten a region into (cell_index, side, a, b, c) rows for CSV dumps."""
    out = []
    for idx, cell in enumerate(region.cells_R):
        for a, b, c in cell.rows:
            out.append((idx, "R", a, b, c))
    for idx, cell in enumerate(region.cells_Rc):
        for a, b, c in cell.rows:
            out.append((idx, "Rc", a, b, c))
    return out
