"""Region/selector equivalence: the module's master invariant."""

import numpy as np
import pytest

from phaselab.selectors import Tuning, region_for, select


def _random_tuning(method, rng):
    q = rng.uniform(0.05, 2.5) ** 2
    w = rng.uniform(0.05, 2.0) ** 2
    u = rng.uniform(0.05, 2.0) ** 2
    mu = float(rng.choice([0.0, 0.25, 1.0, 4.0]))
    if method == "scad":
        rho_hint = None  # a drawn with rho below
    return q, w, u, mu


def _check_equivalence(method, n_points, n_settings, seed):
    rng = np.random.default_rng(seed)
    bad = 0
    total = 0
    for _ in range(n_settings):
        rho = rng.uniform(0.0, 0.92) * rng.choice([-1.0, 1.0])
        q, w, u, mu = _random_tuning(method, rng)
        kw = {"q": q, "w": w, "u": u, "mu": mu}
        if method == "scad":
            cap = 2.0 / (1.0 - abs(rho))
            kw["a"] = float(rng.uniform(2.001, cap + 3.0))
        tun = Tuning(method, **{k: v for k, v in kw.items() if k in
                                ("q", "w", "u", "mu", "a")})
        region = region_for(tun, rho=rho)
        pts = rng.normal(scale=2.0, size=(n_points, 2))
        s1, _ = select(pts[:, 0], pts[:, 1], rho, tun)
        in_r_strict = region.member_many(pts, tol=-1e-9)
        in_r_loose = region.member_many(pts, tol=1e-9)
        interior = in_r_strict == in_r_loose
        # points within 1e-9 of a boundary are excluded
        mism = (s1 != in_r_loose) & interior
        bad += int(mism.sum())
        total += int(interior.sum())
        # and the complement cells cover everything R does not
        in_rc = region.member_many_complement(pts, tol=1e-9)
        cover = in_r_loose | in_rc
        assert cover.all(), f"{method}: plane not covered"
    assert bad == 0, f"{method}: {bad} interior disagreements of {total}"


SEEDS = {
    "lasso": 11, "elastic_net": 12, "scad": 13, "thresholded_lasso": 14,
    "marginal": 15, "forward": 16, "forward_backward": 17,
}


@pytest.mark.parametrize("method", sorted(SEEDS))
def test_region_selector_equivalence(method):
    _check_equivalence(method, n_points=20000, n_settings=12, seed=SEEDS[method])


def test_region_matches_paper_lasso_display():
    # Lasso rho=0: R = {|h1| > sqrt(q)}
    tun = Tuning("lasso", q=0.49)
    region = region_for(tun, rho=0.0)
    rng = np.random.default_rng(5)
    pts = rng.normal(scale=1.5, size=(5000, 2))
    want = np.abs(pts[:, 0]) > 0.7
    got = region.member_many(pts)
    ok = np.abs(np.abs(pts[:, 0]) - 0.7) > 1e-9
    assert np.array_equal(want[ok], got[ok])


def test_region_matches_paper_marginal_display():
    # Marginal: R = {|h1| > t'} for all rho
    tun = Tuning("marginal", w=1.21)
    for rho in (-0.7, 0.0, 0.5):
        region = region_for(tun, rho=rho)
        rng = np.random.default_rng(6)
        pts = rng.normal(scale=2.0, size=(5000, 2))
        want = np.abs(pts[:, 0]) > 1.1
        got = region.member_many(pts)
        ok = np.abs(np.abs(pts[:, 0]) - 1.1) > 1e-9
        assert np.array_equal(want[ok], got[ok])


def test_region_matches_paper_en_display():
    # Eq. for the elastic-net region as a union of four explicit cells
    q, mu, rho = 0.81, 1.0, 0.6
    lam = np.sqrt(q)
    eta = rho / (1 + mu)
    tun = Tuning("elastic_net", q=q, mu=mu)
    region = region_for(tun, rho=rho)
    rng = np.random.default_rng(7)
    pts = rng.normal(scale=1.8, size=(20000, 2))
    h1, h2 = pts[:, 0], pts[:, 1]
    g = h1 - eta * h2
    want = (
        ((g > lam * (1 - eta)) & (h1 > lam))
        | (g > lam * (1 + eta))
        | (g < -lam * (1 + eta))
        | ((g < -lam * (1 - eta)) & (h1 < -lam))
    )
    margins = np.minimum.reduce([
        np.abs(g - lam * (1 - eta)), np.abs(g - lam * (1 + eta)),
        np.abs(g + lam * (1 - eta)), np.abs(g + lam * (1 + eta)),
        np.abs(h1 - lam), np.abs(h1 + lam),
    ])
    ok = margins > 1e-9
    got = region.member_many(pts)
    assert np.array_equal(want[ok], got[ok])


def test_region_matches_paper_forward_display():
    # forward-selection region display, rho > 0
    rho, w = 0.45, 0.64
    t = np.sqrt(w)
    s = np.sqrt(1 - rho * rho)
    tun = Tuning("forward", w=w)
    region = region_for(tun, rho=rho)
    rng = np.random.default_rng(8)
    pts = rng.normal(scale=1.8, size=(20000, 2))
    h1, h2 = pts[:, 0], pts[:, 1]
    want = (
        ((h1 - rho * h2 > t * s) & (h1 > t * s / (1 - rho)))
        | ((h1 > t) & (h1 > h2))
        | ((h2 < -t) & (h1 - rho * h2 > t * s))
        | ((-h1 + rho * h2 > t * s) & (h1 < -t * s / (1 - rho)))
        | ((h1 < -t) & (h1 < h2))
        | ((h2 > t) & (-h1 + rho * h2 > t * s))
    )
    margins = np.minimum.reduce([
        np.abs(np.abs(h1 - rho * h2) - t * s),
        np.abs(np.abs(h1) - t * s / (1 - rho)),
        np.abs(np.abs(h1) - t), np.abs(np.abs(h2) - t),
        np.abs(h1 - h2), np.abs(h1 + h2),
    ])
    ok = margins > 1e-9
    got = region.member_many(pts)
    assert np.array_equal(want[ok], got[ok])


def test_region_nesting_in_lambda():
    # growing q shrinks the Lasso rejection region (monotone nesting)
    rng = np.random.default_rng(9)
    pts = rng.normal(scale=2.0, size=(20000, 2))
    rho = 0.5
    prev = None
    for q in (0.2, 0.6, 1.2, 2.0):
        member = region_for(Tuning("lasso", q=q), rho=rho).member_many(pts)
        if prev is not None:
            assert not np.any(member & ~prev)
        prev = member
