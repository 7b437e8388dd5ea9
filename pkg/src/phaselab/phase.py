"""Phase curves and phase-space classification.

For each method the (theta, r) plane splits into Exact Recovery (h > 1),
Almost Full Recovery (theta < h < 1) and No Recovery (h <= theta), where h is
the Hamming exponent at the ideal tuning.  The lower curve is L(theta) =
theta for every method; the upper curve U(theta) is available in closed form
(the rate theorems) and numerically (bisection on the exponent optimizer).

Closed forms carry the convention that curve pieces arising from the
double-signal term (those containing sqrt(1-2*theta)) are active only for
theta < 1/2; for theta >= 1/2 that term is never binding and the positive-rho
curve set applies for either sign of rho.

Marginal regression with rho <= -1/2 has no exact-recovery region for
theta <= 1/2: the infinite sentinel is returned (serialized as "inf").
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .rates import optimal_exponent
from .selectors import METHODS

INF = float("inf")


class Region(str, Enum):
    EXACT_RECOVERY = "ExactRecovery"
    ALMOST_FULL_RECOVERY = "AlmostFullRecovery"
    NO_RECOVERY = "NoRecovery"


@dataclass(frozen=True)
class PhasePoint:
    theta: float
    r: float
    rho: float
    region: Region
    h: float


@dataclass
class CurveSpec:
    method: str
    rho: float
    samples: list = field(default_factory=list)  # rows (theta, U, L)


def _sq(x):
    return x * x


def upper_curve_closed(method, theta, rho, mu=0.0, a=None, scad_optimal_a=False):
    """Closed-form upper phase curve U(theta) of the rate theorems.

    elastic_net takes the ridge weight mu (mu=0 reduces to lasso); for scad
    the curve is for any fixed a in (2, 2/(1-|rho|)) per its theorem, or the
    optimal-a envelope when scad_optimal_a=True (equal to lasso for rho>=0).
    """
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must be in (0, 1)")
    rc = abs(rho)
    v1 = 1.0 - theta
    v2 = 1.0 - 2.0 * theta  # only used when theta < 1/2
    neg = rho < 0 and theta < 0.5
    h1 = _sq(1.0 + np.sqrt(v1))

    if method in ("lasso", "elastic_net"):
        mu_use = mu if method == "elastic_net" else 0.0
        e = rc / (1.0 + mu_use)
        den = np.sqrt(1.0 + e * e - 2.0 * rc * e)
        h2 = _sq((1.0 - e) / (1.0 - rc) + den / (1.0 - rc)) * v1
        curves = [h1, h2]
        if neg:
            h3 = _sq(1.0 + den / (1.0 + e) * np.sqrt(v2)) / _sq(1.0 - rc)
            base = 1.0 - 2.0 * rc + rc * e
            if base > 0:
                h4 = (1.0 + e * e - 2.0 * rc * e) / _sq(base) * _sq(
                    np.sqrt(v1) + (1.0 - e) / (1.0 + e) * np.sqrt(v2))
            else:
                h4 = INF
            curves += [h3, h4]
        return float(max(curves))

    if method == "marginal":
        c1 = 1.0 + np.sqrt(v1)
        c2 = 2.0 * np.sqrt(v1) / (1.0 - rc)
        curves = [c1, c2]
        if rho < 0 and theta <= 0.5:
            # at theta = 1/2 the double-signal constraint caps h at exactly 1,
            # so the sentinel zone is inclusive of the boundary
            if rc >= 0.5:
                return INF
            w2 = np.sqrt(max(v2, 0.0))
            curves.append((np.sqrt(v1) + w2) / (1.0 - 2.0 * rc))
            curves.append((1.0 + w2) / (1.0 - rc))
        return float(max(curves)) ** 2

    if method == "scad":
        if scad_optimal_a:
            if rho >= 0:
                return upper_curve_closed("lasso", theta, rho)
            # optimal a sits anywhere in (2, 2/(1-|rho|)): same curve
        h2 = _sq(1.0 + np.sqrt((1.0 + rc) / (1.0 - rc))) * v1
        curves = [h1, h2]
        if rho >= 0 and theta < 0.5:
            arg = 2.0 * v2 / (1.0 + rc) - v1 / _sq(1.0 - rc)
            if arg > 0:
                h3 = _sq((3.0 + rc) / (2.0 * (1.0 - rc * rc))
                         * np.sqrt((1.0 + rc) / (1.0 - rc)) * np.sqrt(v1)
                         + 0.5 * np.sqrt(arg))
                curves.append(h3)
        if neg:
            h4 = _sq(np.sqrt(v2 / (1.0 - rc * rc)) + 1.0 / (1.0 - rc))
            x = np.sqrt(v2 / v1)
            e1 = (3.0 - 4.0 * rc - 3.0 * rc * rc) / (1.0 - rc) * np.sqrt(
                (1.0 + rc) / (5.0 + 3.0 * rc))
            e2 = (1.0 + rc) * (1.0 - 2.0 * rc) / (1.0 - rc)
            if x >= e1:
                h5 = (5.0 + 3.0 * rc) / (1.0 - rc) * v1
            elif x <= e2:
                h5 = _sq(np.sqrt((1.0 + rc) / (1.0 - rc)) * np.sqrt(v1)
                         + np.sqrt((1.0 - rc) / (1.0 + rc)) * np.sqrt(v2)) / _sq(1.0 - rc)
            else:
                num = ((1.0 - 2.0 * rc) / (1.0 - rc) * np.sqrt(v2 / (1.0 - rc * rc))
                       + np.sqrt((_sq((1.0 - 2.0 * rc) / (1.0 - rc))
                                  + (1.0 - rc) / (1.0 + rc)) * v1
                                 - v2 / _sq(1.0 + rc)))
                den6 = (1.0 - rc) * (_sq((1.0 - 2.0 * rc) / (1.0 - rc))
                                     + (1.0 - rc) / (1.0 + rc))
                h5 = _sq(np.sqrt(v2 / (1.0 - rc * rc)) + num / den6)
            curves += [h4, h5]
        return float(max(curves))

    if method == "thresholded_lasso":
        h2 = 4.0 * v1 / (1.0 - rc * rc)
        curves = [h1, h2]
        if neg:
            h3 = _sq(1.0 + (1.0 + rc) / 2.0 * np.sqrt(v1 / (1.0 - rc * rc))
                     + (1.0 - rc) / 2.0 * np.sqrt(v2 / (1.0 - rc * rc)))
            curves.append(h3)
        return float(max(curves))

    if method == "forward":
        h2 = 2.0 * v1 / (1.0 - rc)
        curves = [h1, h2]
        if theta < 0.5:
            curves.append(_sq(1.0 + np.sqrt(v2)) / (1.0 - rc * rc))
        if neg:
            curves.append(_sq(np.sqrt(v2 / (2.0 * (1.0 - rc))) + 1.0 / (1.0 - rc)))
        return float(max(curves))

    if method == "forward_backward":
        h2 = 2.0 * v1 / (1.0 - rc)
        if rho >= 0:
            curves = [h1, h2]
            if theta < 0.5:
                curves.append(_sq(np.sqrt(v1) + np.sqrt(v2)) / (1.0 - rc * rc))
            return float(max(curves))
        # rho < 0: Theorem upper bound (exact curve only numeric)
        vmin = max(1.0, np.sqrt(v1 / (1.0 - rc * rc)))
        tmin = max(np.sqrt(0.5), vmin / (1.0 + rc / np.sqrt(1.0 - rc * rc)))
        curves = [_sq(vmin + np.sqrt(v1)), h2]
        if theta < 0.5:
            curves.append(_sq(np.sqrt(v2 / (1.0 - rc * rc)) + vmin))
            curves.append(_sq(np.sqrt(v2 / (2.0 * (1.0 - rc))) + tmin / (1.0 - rc)))
        return float(max(curves))

    raise ValueError(method)


def upper_curve_numeric(method, theta, rho, tol=1e-3, r_max=64.0, mu=0.0,
                        a=None, bracket_lo=None):
    """U(theta) by bisection of {r : optimal exponent > 1}."""
    if tol <= 0:
        raise ValueError("tol must be positive")

    def exceeds(r):
        _, h = optimal_exponent(method, theta, r, rho, mu=mu, a=a)
        return h > 1.0

    lo = bracket_lo if bracket_lo is not None else max(theta, 1e-3)
    hi = r_max
    while exceeds(lo):
        # the warm-start bracket overshot U; walk the left end down
        hi = lo
        lo /= 2.0
        if lo < 1e-6:
            return lo
    if hi == r_max and not exceeds(hi):
        return INF
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if exceeds(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def classify(method, theta, r, rho, mu=0.0, a=None) -> PhasePoint:
    _, h = optimal_exponent(method, theta, r, rho, mu=mu, a=a)
    if h > 1.0:
        region = Region.EXACT_RECOVERY
    elif h > theta:
        region = Region.ALMOST_FULL_RECOVERY
    else:
        region = Region.NO_RECOVERY
    return PhasePoint(theta=theta, r=r, rho=rho, region=region, h=h)


def emit_phase_grid(method, rho, theta_grid, mode="both", tol=1e-3, mu=0.0,
                    a=None) -> CurveSpec:
    """Sample (theta, U_closed, U_numeric, L) along a monotone theta grid."""
    theta_grid = np.asarray(theta_grid, dtype=float)
    if np.any(np.diff(theta_grid) <= 0):
        raise ValueError("theta grid must be strictly increasing")
    spec = CurveSpec(method=method, rho=rho)
    prev_u = None
    for theta in theta_grid:
        u_closed = (upper_curve_closed(method, theta, rho, mu=mu, a=a)
                    if mode in ("closed", "both") else None)
        u_num = None
        if mode in ("numeric", "both"):
            lo = max(theta, 1e-3)
            if prev_u is not None and np.isfinite(prev_u):
                lo = max(lo, 0.5 * prev_u)
            u_num = upper_curve_numeric(method, theta, rho, tol=tol, mu=mu,
                                        a=a, bracket_lo=lo)
            prev_u = u_num
        spec.samples.append((float(theta), u_closed, u_num, float(theta)))
    return spec
