"""Hamming-error exponents: generic distance engine and closed-form rates.

The expected Hamming error of every method here scales as p^(1-h) with

    h = min( fp00, theta + fp01, theta + fn10, 2*theta + fn11 ),

where the four terms are squared Mahalanobis distances between the block
means of the scaled statistics and the method's rejection region R (false
positives) or its complement (false negatives).  `exponent_generic` computes
them from the region geometry; the `*_breakdown` functions evaluate the
piecewise closed forms of the corresponding rate theorems and must agree
term by term.

Conventions: sr = sqrt(r), lam = lambda' = sqrt(q), t = t' = sqrt(w),
v = v' = sqrt(u), all in scaled units.  rho enters through |rho| plus the
sign-flip relocation of the double-signal mean for rho < 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .geometry import INF, d_rho_sq, region_distance_sq
from .selectors import Tuning, region_for


class ClosedFormUnavailable(Exception):
    """Requested regime is not covered by a rate theorem; use the generic engine."""


@dataclass(frozen=True)
class RateBreakdown:
    fp00: float
    fp01: float
    fn10: float
    fn11: float
    h: float
    method: str = ""
    tuning: Tuning | None = None

    @staticmethod
    def combine(fp00, fp01, fn10, fn11, theta, method="", tuning=None):
        h = min(fp00, theta + fp01, theta + fn10, 2.0 * theta + fn11)
        return RateBreakdown(fp00, fp01, fn10, fn11, h, method, tuning)


def block_means(r: float, rho: float):
    """Means of (h1, h2) for the four block signal patterns, canonical frame.

    For rho < 0 the second coordinate is sign-flipped so that regions built
    for |rho| apply; by centrosymmetry only mu11 actually moves.
    """
    sr = np.sqrt(r)
    rc = abs(rho)
    mu00 = (0.0, 0.0)
    mu01 = (rc * sr, sr)
    mu10 = (sr, rc * sr)
    if rho >= 0:
        mu11 = ((1.0 + rc) * sr, (1.0 + rc) * sr)
    else:
        mu11 = ((1.0 - rc) * sr, -(1.0 - rc) * sr)
    return mu00, mu01, mu10, mu11


def exponent_generic(method, tuning: Tuning, theta: float, r: float, rho: float) -> RateBreakdown:
    """Four-term exponent from rejection-region distances (any method/tuning)."""
    if isinstance(method, Tuning):
        tuning = method
    else:
        tuning = tuning if tuning.method == method else Tuning(
            method, q=tuning.q, w=tuning.w, u=tuning.u, mu=tuning.mu, a=tuning.a)
    rc = abs(rho)
    region = region_for(tuning, rho=rc)
    mu00, mu01, mu10, mu11 = block_means(r, rho)
    fp00 = region_distance_sq(region.cells_R, mu00, rc)
    fp01 = region_distance_sq(region.cells_R, mu01, rc)
    fn10 = region_distance_sq(region.cells_Rc, mu10, rc)
    fn11 = region_distance_sq(region.cells_Rc, mu11, rc)
    return RateBreakdown.combine(fp00, fp01, fn10, fn11, theta,
                                 method=tuning.method, tuning=tuning)


def _pos(x):
    return np.maximum(x, 0.0)


def _d2(p1, p2, q1, q2, rho):
    """Elementwise d_rho^2 between points (p1,p2) and (q1,q2)."""
    du = p1 - q1
    dv = p2 - q2
    return du * du + dv * dv - 2.0 * rho * du * dv


# ---------------------------------------------------------------------------
# Elastic net / Lasso (Theorem on the elastic-net Hamming rate)
# ---------------------------------------------------------------------------

def en_breakdown(lam, theta, r, rho, mu=0.0):
    lam = np.asarray(lam, dtype=float)
    sr = np.sqrt(r)
    rc = abs(rho)
    e = rc / (1.0 + mu)   # |eta|
    omr2 = 1.0 - rc * rc
    den = 1.0 + e * e - 2.0 * rc * e

    fp00 = lam * lam

    b1 = _pos(lam - rc * sr) ** 2
    b2 = _d2(lam, lam, rc * sr, sr, rc) / omr2
    b3 = _pos((1.0 - e) * lam - (rc - e) * sr) ** 2 / den
    fp01 = np.where(
        sr <= lam / (1.0 + rc), b1,
        np.where(sr <= (1.0 + e) * lam / (1.0 + rc), b2, b3),
    )

    fn10 = np.minimum(
        _pos(sr - lam) ** 2,
        _pos((1.0 - rc * e) * sr - (1.0 - e) * lam) ** 2 / den,
    )

    if rho >= 0:
        fn11 = (1.0 - e) ** 2 * _pos((1.0 + rc) * sr - lam) ** 2 / den
    else:
        fn11 = (1.0 + e) ** 2 * _pos((1.0 - rc) * sr - lam) ** 2 / den
    return fp00, fp01, fn10, fn11


# ---------------------------------------------------------------------------
# Marginal regression (Appendix rate theorem)
# ---------------------------------------------------------------------------

def marginal_breakdown(t, theta, r, rho):
    t = np.asarray(t, dtype=float)
    sr = np.sqrt(r)
    rc = abs(rho)
    fp00 = t * t
    fp01 = _pos(t - rc * sr) ** 2
    fn10 = _pos(sr - t) ** 2
    coef = (1.0 + rc) if rho >= 0 else (1.0 - rc)
    fn11 = _pos(coef * sr - t) ** 2
    return fp00, fp01, fn10, fn11


# ---------------------------------------------------------------------------
# Thresholded Lasso (Appendix rate theorem)
# ---------------------------------------------------------------------------

def tl_breakdown(lam, t, theta, r, rho):
    lam = np.asarray(lam, dtype=float)
    t = np.asarray(t, dtype=float)
    sr = np.sqrt(r)
    rc = abs(rho)
    omr2 = 1.0 - rc * rc

    fp00 = np.minimum(
        ((1.0 + rc) * lam + omr2 * t) ** 2 / omr2,
        (lam + t) ** 2,
    )

    b1 = _pos(lam + t - rc * sr) ** 2
    b2 = _d2(lam + t, lam + rc * t, rc * sr, sr, rc) / omr2
    b3 = (lam * (1.0 - rc) + t * omr2) ** 2 / omr2
    fp01 = np.where(
        sr <= lam / (1.0 + rc), b1,
        np.where(sr <= lam + rc * t, b2, b3),
    )

    fn10 = np.minimum(
        _pos(sr - lam - t) ** 2,
        _pos(omr2 * sr - t * omr2 - lam * (1.0 - rc)) ** 2 / omr2,
    )

    coef = (1.0 - rc) if rho >= 0 else (1.0 + rc)
    fn11 = _pos(omr2 * sr - t * omr2 - lam * coef) ** 2 / omr2
    return fp00, fp01, fn10, fn11


# ---------------------------------------------------------------------------
# Forward selection (Appendix rate theorem)
# ---------------------------------------------------------------------------

def forward_breakdown(t, theta, r, rho):
    t = np.asarray(t, dtype=float)
    sr = np.sqrt(r)
    rc = abs(rho)
    omr2 = 1.0 - rc * rc
    s = np.sqrt(omr2)

    fp00 = t * t

    b1 = _pos(t - rc * sr) ** 2
    b2 = _d2(t, t, rc * sr, sr, rc) / omr2
    b3 = 0.5 * (1.0 - rc) * r
    fp01 = np.where(
        sr <= t / (1.0 + rc), b1,
        np.where(sr <= 2.0 * t / (1.0 + rc), b2, b3),
    )
    # tangent on the partner's joint-entry line, feasible once sr > t
    fp01 = np.where(sr > t, np.minimum(fp01, t * t), fp01)

    bcorner = t * s / (1.0 - rc)
    f2_b1 = np.minimum(_pos(sr - t) ** 2, 0.5 * (1.0 - rc) * r)
    f2_b2 = np.minimum(_pos(sr - t) ** 2, _d2(bcorner, bcorner, sr, rc * sr, rc) / omr2)
    f2_b3 = _pos(s * sr - t) ** 2
    with np.errstate(divide="ignore"):
        hi = np.where(rc > 0, t * s / (rc * (1.0 - rc)), np.inf)
    fn10 = np.where(
        sr <= 2.0 * t / s, f2_b1,
        np.where(sr <= hi, f2_b2, f2_b3),
    )

    if rho >= 0:
        fn11 = _pos(s * sr - t) ** 2
    else:
        # nearest complement piece is either the joint-entry line or the
        # central corner (t, -t): 2 [(1-|rho|) sr - t]_+^2 / (1-|rho|)
        fn11 = np.minimum(
            _pos(s * sr - t) ** 2,
            2.0 * _pos((1.0 - rc) * sr - t) ** 2 / (1.0 - rc),
        )
    return fp00, fp01, fn10, fn11


# ---------------------------------------------------------------------------
# SCAD (Appendix rate theorems, small-a and large-a regimes)
# ---------------------------------------------------------------------------

def scad_breakdown(lam, a, theta, r, rho):
    lam = np.asarray(lam, dtype=float)
    sr = np.sqrt(r)
    rc = abs(rho)
    omr2 = 1.0 - rc * rc
    small_a = a * (1.0 - rc) <= 2.0

    fp00 = lam * lam

    if small_a:
        fp01 = _scad_small_fp01(lam, a, sr, rc, omr2)
        fn10 = _scad_small_fn10(lam, a, sr, rc, omr2)
        if rho >= 0:
            fn11 = _scad_small_fn11_pos(lam, a, sr, rc, omr2)
        else:
            fn11 = _scad_fn11_neg(lam, a, sr, rc, omr2)
    else:
        fp01 = _scad_large_fp01(lam, a, sr, rc, omr2)
        fn10 = _scad_large_fn10(lam, a, sr, rc, omr2)
        if rho >= 0:
            fn11 = _scad_large_fn11_pos(lam, a, sr, rc, omr2)
        else:
            fn11 = _scad_fn11_neg(lam, a, sr, rc, omr2)
    return fp00, fp01, fn10, fn11


def _scad_small_fp01(lam, a, sr, rc, omr2):
    b1 = _pos(lam - rc * sr) ** 2
    b2 = _d2(lam, lam, rc * sr, sr, rc) / omr2
    b3 = (1.0 - rc) / (1.0 + rc) * lam * lam
    b4 = np.minimum(
        lam * lam / omr2,
        _d2((1.0 + rc) * lam, 2.0 * lam, rc * sr, sr, rc) / omr2,
    )
    b5 = np.minimum(lam * lam / omr2, (1.0 - rc) * sr * sr / (5.0 + 3.0 * rc))
    edge = (5.0 + 3.0 * rc) / (2.0 + 2.0 * rc)
    out = np.where(
        sr <= lam / (1.0 + rc), b1,
        np.where(sr <= lam, b2,
                 np.where(sr <= 2.0 * lam, b3,
                          np.where(sr <= edge * lam, b4, b5))),
    )
    cs = 1.0 / (1.0 - rc)  # corner where the band edge leaves the sector
    return np.minimum(out, _d2((1.0 + rc) * lam * cs, 2.0 * lam * cs,
                               rc * sr, sr, rc) / omr2)


def _scad_small_fn10(lam, a, sr, rc, omr2):
    c1 = (1.0 + rc) / (1.0 - rc) * lam
    c2 = 2.0 * lam / (1.0 - rc)
    b1 = np.minimum(
        np.minimum(_pos(sr - lam) ** 2,
                   (omr2 * sr - (1.0 - rc) * lam) ** 2 / omr2),
        (1.0 - rc) * (2.0 + rc) ** 2 * sr * sr / (5.0 + 3.0 * rc),
    )
    b2 = _d2(c1, c2, sr, rc * sr, rc) / omr2
    b3 = _pos(omr2 * sr - lam) ** 2 / omr2
    lo = (5.0 + 3.0 * rc) / ((1.0 - rc) * (1.0 + rc) ** 2) * lam
    with np.errstate(divide="ignore"):
        hi = np.where(rc > 0, 2.0 * lam / (rc * (1.0 - rc)), np.inf)
    out = np.where(sr <= lo, b1, np.where(sr <= hi, b2, b3))
    # (lam, rc*lam) lies on the central block for every tuning, so the
    # one-coordinate candidate is a valid upper bound in all branches
    return np.minimum(out, _pos(sr - lam) ** 2)


def _scad_small_fn11_pos(lam, a, sr, rc, omr2):
    c1 = (1.0 + rc) / (1.0 - rc) * lam
    c2 = 2.0 * lam / (1.0 - rc)
    m = (1.0 + rc) * sr
    hh = np.where(
        sr <= lam / (1.0 + rc) * (5.0 + 3.0 * rc) / ((1.0 - rc) * (3.0 + rc)),
        omr2 * omr2 * (1.0 + rc) * sr * sr / (5.0 + 3.0 * rc),
        _d2(c1, c2, m, m, rc),
    )
    b1 = np.minimum(_pos(omr2 * sr - (1.0 - rc) * lam) ** 2, hh) / omr2
    b2 = _pos(omr2 * sr - lam) ** 2 / omr2
    return np.where(sr <= 2.0 * lam / omr2, b1, b2)


def _scad_fn11_neg(lam, a, sr, rc, omr2):
    """FN double-signal term for rho < 0 (same form in both a-regimes)."""
    m = (1.0 - rc) * sr
    d1 = (1.0 - rc) * lam
    d2c = -2.0 * lam
    denom_k = (a - 2.0) * omr2 - (rc + rc * rc)
    with np.errstate(divide="ignore"):
        kedge = np.where(
            denom_k > 0,
            lam / (1.0 - rc) * (2.0 + (rc + rc * rc) / np.where(denom_k > 0, denom_k, 1.0)),
            np.inf,
        )
    Q = 1.0 + rc**2 * (a - 1.0) ** 2 / (a - 2.0) ** 2 - 2.0 * rc**2 * (a - 1.0) / (a - 2.0)
    kfar = omr2 * (
        -lam * (1.0 + a * rc / (a - 2.0)) + m * (1.0 + rc * (a - 1.0) / (a - 2.0))
    ) ** 2 / Q
    k = np.where(sr <= kedge, _d2(d1, d2c, m, -m, rc), kfar)
    b1 = _pos(omr2 * sr - (1.0 + rc) * lam) ** 2 / omr2
    b2 = np.minimum(_pos(omr2 * sr - lam) ** 2, k) / omr2
    return np.where(sr <= 2.0 * lam / (1.0 - rc), b1, b2)


def _scad_large_fp01(lam, a, sr, rc, omr2):
    # Distance from mu01 to the boundary polyline face -> A -> B -> C -> exit
    # ray, with exact tangency windows (the theorem's stated branch edges are
    # approximate near the B-C transition).
    beta = rc * (a - 1.0) / (a - 2.0)
    Q = 1.0 + beta * beta - 2.0 * rc * beta
    big = np.inf
    c_face = np.where(sr <= lam / (1.0 + rc), _pos(lam - rc * sr) ** 2, big)
    c_A = _d2(lam, lam, rc * sr, sr, rc) / omr2
    c_AB = np.where((lam <= sr) & (sr <= 2.0 * lam),
                    (1.0 - rc) / (1.0 + rc) * lam * lam, big)
    c_B = _d2((1.0 + rc) * lam, 2.0 * lam, rc * sr, sr, rc) / omr2
    c0 = lam * (1.0 - a * rc / (a - 2.0))
    Cc = rc * sr - beta * sr - c0
    x2t = sr + Cc * (beta - rc) / Q
    c_BC = np.where((2.0 * lam <= x2t) & (x2t <= a * lam), Cc * Cc / Q, big)
    c_C = _d2((1.0 + a * rc) * lam, a * lam, rc * sr, sr, rc) / omr2
    c_exit = np.where(sr >= a * lam, lam * lam / omr2, big)
    return np.minimum.reduce([c_face, c_A, c_AB, c_B, c_BC, c_C, c_exit])


def _scad_large_fn10(lam, a, sr, rc, omr2):
    Q = 1.0 + rc**2 * (a - 1.0) ** 2 / (a - 2.0) ** 2 - 2.0 * rc**2 * (a - 1.0) / (a - 2.0)
    b1 = np.minimum(
        np.minimum(_pos(sr - lam) ** 2,
                   _pos(omr2 * sr - (1.0 - rc) * lam) ** 2 / omr2),
        (lam * (1.0 - a * rc / (a - 2.0)) - sr * (1.0 - rc**2 * (a - 1.0) / (a - 2.0))) ** 2 / Q,
    )
    b2 = _d2((1.0 + a * rc) * lam, a * lam, sr, rc * sr, rc) / omr2
    b3 = _pos(omr2 * sr - lam) ** 2 / omr2
    with np.errstate(divide="ignore"):
        lo = np.where(
            rc > 0,
            (a * (a - 2.0) * omr2 + rc) / (rc * (a - 1.0) * omr2) * lam,
            np.inf,
        )
        hi = np.where(rc > 0, a * lam / rc, np.inf)
    out = np.where(sr <= lo, b1, np.where(sr <= hi, b2, b3))
    return np.minimum(out, _pos(sr - lam) ** 2)


def _scad_large_fn11_pos(lam, a, sr, rc, omr2):
    Q = 1.0 + rc**2 * (a - 1.0) ** 2 / (a - 2.0) ** 2 - 2.0 * rc**2 * (a - 1.0) / (a - 2.0)
    m = (1.0 + rc) * sr
    hedge = lam / (1.0 + rc) * (a * (a - 2.0) * omr2 + rc) / ((a - 2.0) * omr2 + rc - rc * rc)
    hh = np.where(
        sr <= hedge,
        omr2 * (lam * (1.0 - a * rc / (a - 2.0)) - m * (1.0 - rc * (a - 1.0) / (a - 2.0))) ** 2 / Q,
        _d2((1.0 + a * rc) * lam, a * lam, m, m, rc),
    )
    b1 = np.minimum(_pos(omr2 * sr - (1.0 - rc) * lam) ** 2, hh) / omr2
    b2 = _pos(omr2 * sr - lam) ** 2 / omr2
    return np.where(sr <= a * lam / (1.0 + rc), b1, b2)


# ---------------------------------------------------------------------------
# Forward-backward selection (tuning regimes 1-3)
# ---------------------------------------------------------------------------

def fb_regime(t, v, rho):
    """Tuning regime 1-6 of thresholded forward selection."""
    rc = abs(rho)
    s = np.sqrt(1.0 - rc * rc)
    if v <= t:
        return 1
    if v <= t / s:
        return 2
    if v <= t * (1.0 + rc / s):
        return 3
    if v <= t * s / (1.0 - rc):
        return 4
    if v <= t / (1.0 - rc):
        return 5
    return 6


def fb_breakdown(t, v, theta, r, rho):
    """Closed-form FB terms for regimes 1-3; raises beyond."""
    t_arr = np.asarray(t, dtype=float)
    v_arr = np.asarray(v, dtype=float)
    if t_arr.shape or v_arr.shape:
        raise ValueError("fb_breakdown is scalar in (t, v); vectorize outside")
    t = float(t_arr)
    v = float(v_arr)
    regime = fb_regime(t, v, rho)
    if regime > 3:
        raise ClosedFormUnavailable(
            f"forward-backward tuning regime {regime}: use exponent_generic")
    sr = np.sqrt(r)
    rc = abs(rho)
    omr2 = 1.0 - rc * rc
    s = np.sqrt(omr2)

    if regime == 1:
        return forward_breakdown(t, theta, r, rho)

    fp00 = min(v * v, 2.0 * t * t)

    # Boundary polyline for regimes 2-3 (canonical frame, upper half; the
    # lower half mirrors with the refit sign flipped).  Writing b for the
    # point where the joint-entry band meets the diagonal and W = v(1-rho^2)
    # for the refit margin:
    #   regime 2 (v <= t/s):  h1=v face -> diagonal [v, b] -> entry band edge
    #   regime 3 (v >  t/s):  h1=v face -> diagonal [v, b] -> entry segment
    #       [b, xD] -> corner D -> refit line, plus the diagonal segment
    #       [xD, xE] and the refit edge in the swapped sector.
    W = v * omr2
    b = t * s / (1.0 - rc) if rc < 1 else np.inf
    xE = max(b, v * (1.0 + rc))
    xD = v + rc * t / s
    yD = rc * v + t / s
    margin = max(t * s, W)

    # ---- FP01: mu01 = (rc*sr, sr) to the rejection region ----
    cands = []
    if sr <= v / (1.0 + rc):
        cands.append(_pos(v - rc * sr) ** 2)             # solo-keep face
    cands.append(_d2(v, v, rc * sr, sr, rc) / omr2)      # corner (v, v)
    if 2.0 * v / (1.0 + rc) <= sr <= 2.0 * b / (1.0 + rc):
        cands.append(0.5 * (1.0 - rc) * r)               # diagonal [v, b]
    cands.append(_d2(b, b, rc * sr, sr, rc) / omr2)      # corner at b
    cands.append(_d2(t, rc * t - t * s, rc * sr, sr, rc) / omr2)  # entry corner
    if regime == 2:
        if sr >= b:
            cands.append(t * t)                          # swapped entry edge
        if sr > t:
            cands.append(t * t)                          # negative-side edge
        cands.append(_d2(rc * t - t * s, t, rc * sr, sr, rc) / omr2)
    else:
        if b <= rc * sr <= xD:
            cands.append(_pos(s * sr - t) ** 2)          # entry segment [b, xD]
        cands.append(_d2(xD, yD, rc * sr, sr, rc) / omr2)   # corner D
        cands.append(_d2(xE, xE, rc * sr, sr, rc) / omr2)
        if sr >= xE:
            cands.append(v * v * omr2)                   # swapped refit edge
        if sr > t and sr >= W / (1.0 + rc):
            cands.append(v * v * omr2)                   # negative-side refit
        cands.append(_d2(rc * t - W, t, rc * sr, sr, rc) / omr2)
    fp01 = min(cands)

    # ---- FN10: mu10 = (sr, rc*sr) to the complement ----
    cands = [_pos(sr - v) ** 2]                          # solo-deselect face
    if sr <= 2.0 * xE / (1.0 + rc):
        cands.append(0.5 * (1.0 - rc) * r)               # diagonal face of the
    cands.append(_d2(v, v, sr, rc * sr, rc) / omr2)      # swapped band/pocket
    cands.append(_d2(b, b, sr, rc * sr, rc) / omr2)
    cands.append(_d2(xE, xE, sr, rc * sr, rc) / omr2)
    if rc > 0 and sr >= t * s / (rc * (1.0 - rc)):
        cands.append(_pos(s * sr - t) ** 2)              # swapped entry band
    if regime == 3:
        if b <= sr <= xD:
            cands.append(t * t)                          # pocket above [b, xD]
        cands.append(_d2(xD, yD, sr, rc * sr, rc) / omr2)
        cands.append(_d2(xD, xD, sr, rc * sr, rc) / omr2)
        if rc > 0 and sr >= v + t / (rc * s):
            cands.append(omr2 * _pos(sr - v) ** 2)       # beyond the refit line
    fn10 = min(cands)

    # ---- FN11 ----
    if rho >= 0:
        m = (1.0 + rc) * sr
        if sr <= max(v, t / s):
            fn11 = 0.0
        elif regime == 2:
            fn11 = min(
                _pos(s * sr - t) ** 2,                   # entry band edge
                _d2(v, rc * v + t * s, m, m, rc) / omr2,  # face/band corner
            )
        else:
            fn11 = min(
                _pos(s * sr - t) ** 2,                   # band interior edge
                omr2 * _pos(sr - v) ** 2,                # refit line
                _d2(xD, yD, m, m, rc) / omr2,            # corner D
                _d2(xE, xE, m, m, rc) / omr2,
            )
    else:
        mn = (1.0 - rc) * sr
        c0 = max(t, v * (1.0 - rc))
        if mn <= c0:
            fn11 = 0.0
        else:
            cands = [2.0 * _pos(mn - c0) ** 2 / (1.0 - rc)]  # anti-diag corner
            cands.append(_pos(s * sr - t) ** 2)          # entry band edge
            if s * s * sr * (1.0 - rc) + rc * W >= t * s:
                cands.append(omr2 * _pos(sr - v) ** 2)   # refit line
            cands.append(_d2(v, rc * v - t * s, mn, -mn, rc) / omr2)
            cands.append(_d2(v - rc * t / s, rc * v - t / s, mn, -mn, rc) / omr2)
            fn11 = min(cands)
    return fp00, float(fp01), float(fn10), float(fn11)


# ---------------------------------------------------------------------------
# Unified closed-form dispatch
# ---------------------------------------------------------------------------

def rate_closed_form(method, tuning: Tuning, theta: float, r: float, rho: float) -> RateBreakdown:
    """Evaluate the rate-theorem closed form for a method/tuning.

    Raises ClosedFormUnavailable for regimes the theorems do not cover
    (forward-backward tuning regimes 4-6).
    """
    if isinstance(method, Tuning):
        tuning = method
        method = tuning.method
    if method in ("lasso", "elastic_net"):
        mu = tuning.mu if method == "elastic_net" else 0.0
        terms = en_breakdown(tuning.sqrt_q, theta, r, rho, mu=mu)
    elif method == "marginal":
        terms = marginal_breakdown(tuning.sqrt_w, theta, r, rho)
    elif method == "thresholded_lasso":
        terms = tl_breakdown(tuning.sqrt_q, tuning.sqrt_w, theta, r, rho)
    elif method == "scad":
        terms = scad_breakdown(tuning.sqrt_q, tuning.a, theta, r, rho)
    elif method == "forward":
        terms = forward_breakdown(tuning.sqrt_w, theta, r, rho)
    elif method == "forward_backward":
        terms = fb_breakdown(tuning.sqrt_w, tuning.sqrt_u, theta, r, rho)
    else:
        raise ValueError(method)
    fp00, fp01, fn10, fn11 = (float(x) for x in terms)
    return RateBreakdown.combine(fp00, fp01, fn10, fn11, theta,
                                 method=method, tuning=tuning)


# ---------------------------------------------------------------------------
# Tuning optimization
# ---------------------------------------------------------------------------

def _h_from_terms(fp00, fp01, fn10, fn11, theta):
    a0, a1, a2, a3 = np.broadcast_arrays(
        np.asarray(fp00, dtype=float), theta + np.asarray(fp01, dtype=float),
        theta + np.asarray(fn10, dtype=float),
        2.0 * theta + np.asarray(fn11, dtype=float))
    return np.minimum(np.minimum(a0, a1), np.minimum(a2, a3))


def _golden_1d(f, lo, hi, iters=40):
    """Golden-section maximization of a scalar function on [lo, hi]."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = (a + b) / 2.0
    return x, f(x)


def _fb_h(t, v, theta, r, rho):
    try:
        fp00, fp01, fn10, fn11 = fb_breakdown(t, v, theta, r, rho)
    except ClosedFormUnavailable:
        tun = Tuning("forward_backward", w=t * t, u=v * v)
        bd = exponent_generic("forward_backward", tun, theta, r, rho)
        return bd.h
    return min(fp00, theta + fp01, theta + fn10, 2.0 * theta + fn11)


def optimal_exponent(method, theta, r, rho, mu=0.0, a=None, coarse=None):
    """Maximize h over the method's tuning exponents.

    Returns (best_tuning, h_star).  One-parameter methods use a fine grid on
    the scaled tuning (sqrt of the exponent) over [0, 3(1+sqrt(r))] followed
    by golden-section refinement; two-parameter methods use a coarse product
    grid plus per-coordinate golden passes.  SCAD searches a grid of shapes a
    spanning both sides of 2/(1-|rho|) unless a is fixed.
    """
    sr = np.sqrt(r)
    hi = 3.0 * (1.0 + sr)
    grid = np.linspace(1e-6, hi, coarse or 600)

    if method in ("lasso", "elastic_net"):
        mu_use = mu if method == "elastic_net" else 0.0

        def h_of(lam):
            return float(_h_from_terms(*en_breakdown(lam, theta, r, rho, mu_use), theta))

        hs = _h_from_terms(*en_breakdown(grid, theta, r, rho, mu_use), theta)
        k = int(np.argmax(hs))
        lo = grid[max(k - 1, 0)]
        up = grid[min(k + 1, len(grid) - 1)]
        lam, hstar = _golden_1d(h_of, lo, up)
        if hs[k] > hstar:
            lam, hstar = grid[k], float(hs[k])
        return Tuning(method, q=lam * lam, mu=mu_use), hstar

    if method == "marginal":
        hs = _h_from_terms(*marginal_breakdown(grid, theta, r, rho), theta)
        k = int(np.argmax(hs))

        def h_of(t):
            return float(_h_from_terms(*marginal_breakdown(t, theta, r, rho), theta))

        t, hstar = _golden_1d(h_of, grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)])
        if hs[k] > hstar:
            t, hstar = grid[k], float(hs[k])
        return Tuning(method, w=t * t), hstar

    if method == "forward":
        hs = _h_from_terms(*forward_breakdown(grid, theta, r, rho), theta)
        k = int(np.argmax(hs))

        def h_of(t):
            return float(_h_from_terms(*forward_breakdown(t, theta, r, rho), theta))

        t, hstar = _golden_1d(h_of, grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)])
        if hs[k] > hstar:
            t, hstar = grid[k], float(hs[k])
        return Tuning(method, w=t * t), hstar

    if method == "scad":
        rc = abs(rho)
        cap = 2.0 / (1.0 - rc)
        if a is not None:
            a_grid = [a]
        else:
            a_grid = sorted({2.0 + 1e-3, (2.0 + cap) / 2.0, cap - 1e-6,
                             cap + 1e-6, 2.0 * cap, 10.0, 50.0})
        best = (None, -np.inf)
        for av in a_grid:
            if av <= 2.0:
                continue
            hs = _h_from_terms(*scad_breakdown(grid, av, theta, r, rho), theta)
            k = int(np.argmax(hs))

            def h_of(lam, _a=av):
                return float(_h_from_terms(*scad_breakdown(lam, _a, theta, r, rho), theta))

            lam, hstar = _golden_1d(h_of, grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)])
            if hs[k] > hstar:
                lam, hstar = grid[k], float(hs[k])
            if hstar > best[1]:
                best = (Tuning("scad", q=lam * lam, a=av), hstar)
        return best

    if method == "thresholded_lasso":
        n = coarse or 140
        lam_g = np.linspace(1e-6, hi, n)
        t_g = np.linspace(0.0, hi, n)
        L, T = np.meshgrid(lam_g, t_g, indexing="ij")
        hs = _h_from_terms(*tl_breakdown(L, T, theta, r, rho), theta)
        k = np.unravel_index(np.argmax(hs), hs.shape)
        lam, t = float(L[k]), float(T[k])
        best = [lam, t, float(hs[k])]

        def h_tl(x, y):
            val = float(_h_from_terms(*tl_breakdown(x, y, theta, r, rho), theta))
            if val > best[2]:
                best[0], best[1], best[2] = x, y, val
            return val

        for _ in range(3):
            lam, _ = _golden_1d(lambda x: h_tl(x, t), max(lam - hi / n, 1e-9), lam + hi / n)
            t, _ = _golden_1d(lambda x: h_tl(lam, x), max(t - hi / n, 0.0), t + hi / n)
        minimize(lambda x: -h_tl(max(x[0], 1e-9), max(x[1], 0.0)),
                 [best[0], best[1]], method="Nelder-Mead",
                 options={"xatol": 1e-7, "fatol": 1e-10, "maxfev": 400})
        return Tuning("thresholded_lasso", q=best[0] ** 2, w=best[1] ** 2), best[2]

    if method == "forward_backward":
        # Regimes 1-3 via the closed form; the optimum provably sits there
        # for rho >= 0.  For rho < 0 the deeper-backward regimes 4-6 can win,
        # so they are scanned with the generic engine on a coarser grid.
        rc = abs(rho)
        s = np.sqrt(1.0 - rc * rc)
        n = coarse or 80
        t_g = np.linspace(1e-6, hi, n)
        best = (t_g[0], 0.0, -np.inf)
        for t in t_g:
            cap3 = t * (1.0 + rc / s)
            for v in np.linspace(0.0, cap3, 30):
                try:
                    h = _fb_h(t, v, theta, r, rho)
                except Exception:
                    continue
                if h > best[2]:
                    best = (t, v, h)
        if rho < 0:
            for t in np.linspace(1e-6, hi, 24):
                lo4 = t * (1.0 + rc / s)
                for v in np.linspace(lo4, min(3.0 * lo4 + 1.0, hi), 16):
                    h = _fb_h(t, v, theta, r, rho)
                    if h > best[2]:
                        best = (t, v, h)
        t, v, h0 = best
        track = [t, v, h0]

        def h_fb(x, y):
            val = _fb_h(x, y, theta, r, rho)
            if val > track[2]:
                track[0], track[1], track[2] = x, y, val
            return val

        minimize(lambda x: -h_fb(max(x[0], 1e-9), max(x[1], 0.0)),
                 [track[0], track[1]], method="Nelder-Mead",
                 options={"xatol": 1e-7, "fatol": 1e-10, "maxfev": 400})
        # a second start nudged along the regime-3 ridge helps on kinks
        minimize(lambda x: -h_fb(max(x[0], 1e-9), max(x[1], 0.0)),
                 [track[0] * 0.97, track[1] * 1.03], method="Nelder-Mead",
                 options={"xatol": 1e-7, "fatol": 1e-10, "maxfev": 400})
        return Tuning("forward_backward", w=track[0] ** 2, u=track[1] ** 2), track[2]

    raise ValueError(method)


# ---------------------------------------------------------------------------
# Monte Carlo Hamming error
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HammingEstimate:
    mean: float
    sd: float
    reps: int

    def __post_init__(self):
        if self.mean < 0 or self.sd < 0:
            raise ValueError("mean and sd must be nonnegative")


def _select_singleton(tuning: Tuning, h):
    """Selection rule for the trailing 1x1 block when p is odd."""
    m = tuning.method
    ah = np.abs(h)
    if m in ("lasso", "elastic_net", "scad"):
        return ah > tuning.sqrt_q
    if m in ("marginal", "forward"):
        return ah > tuning.sqrt_w
    if m == "thresholded_lasso":
        return ah > tuning.sqrt_q + tuning.sqrt_w
    if m == "forward_backward":
        return ah > max(tuning.sqrt_w, tuning.sqrt_u)
    raise ValueError(m)


def hamming_counts_block(tuning: Tuning, params, reps: int, seed):
    """Hamming errors per replicate on the block design, via the exact
    bivariate solution paths (vectorized across replicates and blocks)."""
    from .model import make_rng, sample_beta_batch, sample_block_stats_batch
    from .selectors import select

    rng = make_rng(seed)
    beta = sample_beta_batch(params, reps, rng)
    h, odd = sample_block_stats_batch(beta, params.rho, params, rng)
    s1, s2 = select(h[:, :, 0], h[:, :, 1], params.rho, tuning)
    truth = beta != 0.0
    nblk = params.p // 2
    sel = np.zeros((reps, params.p), dtype=bool)
    sel[:, 0:2 * nblk:2] = s1
    sel[:, 1:2 * nblk:2] = s2
    if odd is not None:
        sel[:, -1] = _select_singleton(tuning, odd)
    return (sel != truth).sum(axis=1)


def estimate_hamming(method, tuning: Tuning, params, reps: int, seed) -> HammingEstimate:
    """Monte Carlo expected Hamming error on the block design."""
    if isinstance(method, Tuning):
        tuning = method
    if reps < 1:
        raise ValueError("reps must be >= 1")
    counts = hamming_counts_block(tuning, params, reps, seed)
    return HammingEstimate(mean=float(counts.mean()),
                           sd=float(counts.std(ddof=1)) if reps > 1 else 0.0,
                           reps=reps)
