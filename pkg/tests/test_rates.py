"""Closed-form rate theorems against the generic distance engine."""

import numpy as np
import pytest

from phaselab.rates import (
    ClosedFormUnavailable,
    RateBreakdown,
    exponent_generic,
    fb_regime,
    rate_closed_form,
)
from phaselab.selectors import Tuning

TERMS = ("fp00", "fp01", "fn10", "fn11")


def _draw_case(method, rng):
    theta = rng.uniform(0.05, 0.95)
    r = rng.uniform(0.05, 9.0)
    rho = rng.uniform(0.05, 0.9) * rng.choice([-1.0, 1.0])
    kw = {"q": rng.uniform(0.05, 2.5) ** 2, "w": rng.uniform(0.05, 2.0) ** 2}
    if method == "elastic_net":
        kw["mu"] = float(rng.choice([0.25, 1.0, 4.0]))
    if method == "scad":
        cap = 2.0 / (1.0 - abs(rho))
        kw["a"] = float(rng.uniform(2.001, cap) if rng.random() < 0.7
                        else rng.uniform(cap, cap + 8.0))
    if method == "forward_backward":
        t = rng.uniform(0.05, 2.0)
        rc = abs(rho)
        s = np.sqrt(1 - rc * rc)
        reg = rng.integers(1, 4)
        hi = [t, t / s, t * (1 + rc / s)][reg - 1]
        lo = [0.0, t, t / s][reg - 1]
        v = rng.uniform(lo, hi)
        kw["w"], kw["u"] = t * t, v * v
    return theta, r, rho, Tuning(method, **kw)


METHOD_SEEDS = {
    "lasso": 101, "elastic_net": 102, "marginal": 103,
    "thresholded_lasso": 104, "scad": 105, "forward": 106,
    "forward_backward": 107,
}


@pytest.mark.parametrize("method", sorted(METHOD_SEEDS))
def test_closed_form_matches_generic(method):
    rng = np.random.default_rng(METHOD_SEEDS[method])
    n_checked = 0
    for _ in range(120):
        theta, r, rho, tun = _draw_case(method, rng)
        cf = rate_closed_form(method, tun, theta, r, rho)
        gen = exponent_generic(method, tun, theta, r, rho)
        for term in TERMS:
            c, g = getattr(cf, term), getattr(gen, term)
            if np.isinf(c) and np.isinf(g):
                continue
            assert abs(c - g) <= 1e-8, (method, term, theta, r, rho, tun, c, g)
        assert abs(cf.h - gen.h) <= 1e-8
        n_checked += 1
    assert n_checked == 120


def test_breakdown_invariant():
    tun = Tuning("lasso", q=1.0)
    bd = rate_closed_form("lasso", tun, 0.3, 2.0, 0.5)
    assert bd.h == min(bd.fp00, 0.3 + bd.fp01, 0.3 + bd.fn10, 0.6 + bd.fn11)
    assert all(getattr(bd, t) >= 0 for t in TERMS)


def test_lasso_orthogonal_fp00_is_q():
    bd = rate_closed_form("lasso", Tuning("lasso", q=1.37), 0.3, 2.0, 0.0)
    assert abs(bd.fp00 - 1.37) < 1e-14


def test_en_closed_form_example_against_theorem_terms():
    # eta = rho/(1+mu) = 0.25 at rho=0.5, mu=1
    theta, r, rho, q, mu = 0.3, 2.0, 0.5, 1.0, 1.0
    tun = Tuning("elastic_net", q=q, mu=mu)
    cf = rate_closed_form("elastic_net", tun, theta, r, rho)
    gen = exponent_generic("elastic_net", tun, theta, r, rho)
    for term in TERMS:
        assert abs(getattr(cf, term) - getattr(gen, term)) < 1e-9


def test_forward_fn11_formula_value():
    # [sqrt(1-rho^2) sqrt(r) - t']^2 at rho=0.5, r=4, t'=1
    bd = rate_closed_form("forward", Tuning("forward", w=1.0), 0.3, 4.0, 0.5)
    want = (np.sqrt(0.75) * 2.0 - 1.0) ** 2
    assert abs(bd.fn11 - want) < 1e-12
    assert abs(want - 0.5359) < 1e-3


def test_marginal_full_breakdown_example():
    theta, r, rho, w = 0.3, 2.0, -0.4, 1.44
    t = 1.2
    bd = rate_closed_form("marginal", Tuning("marginal", w=w), theta, r, rho)
    sr = np.sqrt(r)
    assert abs(bd.fp00 - t * t) < 1e-12
    assert abs(bd.fp01 - max(t - 0.4 * sr, 0) ** 2) < 1e-12
    assert abs(bd.fn10 - max(sr - t, 0) ** 2) < 1e-12
    assert abs(bd.fn11 - max(0.6 * sr - t, 0) ** 2) < 1e-12
    gen = exponent_generic("marginal", Tuning("marginal", w=w), theta, r, rho)
    for term in TERMS:
        assert abs(getattr(bd, term) - getattr(gen, term)) < 1e-9


def test_tl_zero_threshold_equals_lasso():
    theta, r, rho = 0.4, 3.0, -0.6
    q = 0.9
    tl = rate_closed_form("thresholded_lasso",
                          Tuning("thresholded_lasso", q=q, w=0.0), theta, r, rho)
    lasso = rate_closed_form("lasso", Tuning("lasso", q=q), theta, r, rho)
    for term in TERMS:
        assert abs(getattr(tl, term) - getattr(lasso, term)) < 1e-12


def test_fb_zero_backward_equals_forward():
    theta, r, rho = 0.4, 3.0, 0.35
    w = 0.8
    fb = rate_closed_form("forward_backward",
                          Tuning("forward_backward", w=w, u=0.0), theta, r, rho)
    fwd = rate_closed_form("forward", Tuning("forward", w=w), theta, r, rho)
    for term in TERMS:
        assert abs(getattr(fb, term) - getattr(fwd, term)) < 1e-12


def test_fb_out_of_regime_signals():
    # v' beyond regime 3 must raise the typed signal, never a wrong number
    t = 1.0
    rho = -0.5
    s = np.sqrt(0.75)
    v = t * (1 + 0.5 / s) + 0.1
    assert fb_regime(t, v, rho) > 3
    with pytest.raises(ClosedFormUnavailable):
        rate_closed_form("forward_backward",
                         Tuning("forward_backward", w=t * t, u=v * v), 0.3, 2.0, rho)
    # but the generic engine covers it
    bd = exponent_generic("forward_backward",
                          Tuning("forward_backward", w=t * t, u=v * v), 0.3, 2.0, rho)
    assert np.isfinite(bd.h)


def test_region_shrinks_fp_grows_fn_with_q():
    theta, r, rho = 0.3, 2.0, 0.4
    prev = None
    for q in (0.3, 0.7, 1.2, 2.0):
        bd = rate_closed_form("lasso", Tuning("lasso", q=q), theta, r, rho)
        if prev is not None:
            assert bd.fp00 >= prev.fp00 - 1e-12
            assert bd.fp01 >= prev.fp01 - 1e-12
            assert bd.fn10 <= prev.fn10 + 1e-12
            assert bd.fn11 <= prev.fn11 + 1e-12
        prev = bd
