"""Generators: two-point prior, block statistics, designs."""

import numpy as np
import pytest

from phaselab.model import (
    ModelParams,
    build_general_gram,
    make_rng,
    sample_beta,
    sample_beta_batch,
    sample_block_stats,
    sample_block_stats_batch,
    sample_random_design,
    sample_response,
)


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(theta=0.0, r=1.0, rho=0.5, p=300)
    with pytest.raises(ValueError):
        ModelParams(theta=0.5, r=-1.0, rho=0.5, p=300)
    with pytest.raises(ValueError):
        ModelParams(theta=0.5, r=1.0, rho=1.0, p=300)
    with pytest.raises(ValueError):
        ModelParams(theta=0.5, r=1.0, rho=0.5, p=1)


def test_beta_two_point_values():
    params = ModelParams(theta=0.3, r=2.0, rho=0.5, p=300)
    beta = sample_beta(params, 0)
    vals = np.unique(beta.values)
    assert set(vals).issubset({0.0, params.tau_p})
    assert params.tau_p == np.sqrt(2 * 2.0 * np.log(300))


def test_beta_mean_count_near_theta_one():
    params = ModelParams(theta=0.999, r=1.0, rho=0.0, p=300)
    counts = (sample_beta_batch(params, 100_000, 1) != 0).sum(axis=1)
    expect = 300 * params.eps_p
    assert expect == pytest.approx(300 ** (1 - 0.999), rel=1e-12)
    se = np.sqrt(300 * params.eps_p * (1 - params.eps_p) / 100_000)
    assert abs(counts.mean() - expect) < 3 * se


def test_beta_mean_count_dense():
    params = ModelParams(theta=0.1, r=2.0, rho=0.0, p=300)
    expect = 300 * 300 ** (-0.1)  # Binomial mean = 300^0.9
    assert expect == pytest.approx(300 ** 0.9)
    counts = (sample_beta_batch(params, 100_000, 2) != 0).sum(axis=1)
    se = np.sqrt(300 * params.eps_p * (1 - params.eps_p) / 100_000)
    assert abs(counts.mean() - expect) < 3 * se


def test_reproducibility_bit_identical():
    params = ModelParams(theta=0.3, r=2.0, rho=0.5, p=100, n=200)
    assert np.array_equal(sample_beta(params, 7).values, sample_beta(params, 7).values)
    X1 = sample_random_design(200, 100, 0.5, 7)
    X2 = sample_random_design(200, 100, 0.5, 7)
    assert np.array_equal(X1, X2)


def test_block_stats_means():
    params = ModelParams(theta=0.3, r=1.0, rho=0.5, p=300)
    tau = params.tau_p
    rng = make_rng(5)
    n = 100_000
    beta = np.tile([tau, 0.0], (n, 1))
    h, _ = sample_block_stats_batch(beta, 0.5, params, rng)
    # mu10 = (sqrt(r), rho sqrt(r)) in scaled units
    se = 1.0 / params.scale / np.sqrt(n)
    assert abs(h[:, 0, 0].mean() - 1.0) < 4 * se
    assert abs(h[:, 0, 1].mean() - 0.5) < 4 * se
    beta11 = np.tile([tau, tau], (n, 1))
    h11, _ = sample_block_stats_batch(beta11, 0.5, params, rng)
    assert abs(h11[:, 0, 0].mean() - 1.5) < 4 * se
    assert abs(h11[:, 0, 1].mean() - 1.5) < 4 * se


def test_block_stats_null_covariance():
    params = ModelParams(theta=0.3, r=1.0, rho=0.7, p=300)
    rng = make_rng(6)
    beta = np.zeros((100_000, 2))
    h, _ = sample_block_stats_batch(beta, 0.7, params, rng)
    flat = h[:, 0, :]
    cov = np.cov(flat.T) * params.scale ** 2
    assert abs(cov[0, 0] - 1.0) < 0.02
    assert abs(cov[0, 1] - 0.7) < 0.02
    mu = flat.mean(axis=0)
    assert np.all(np.abs(mu) < 4 / params.scale / np.sqrt(100_000))


def test_block_stats_scalar_api():
    params = ModelParams(theta=0.3, r=1.0, rho=0.5, p=300)
    h1, h2 = sample_block_stats((params.tau_p, 0.0), 0.5, params, 9)
    assert np.isfinite(h1) and np.isfinite(h2)


def test_random_design_concentration():
    n, p, rho = 5000, 50, 0.5
    Sigma = np.eye(p)
    idx = np.arange(p // 2) * 2
    Sigma[idx, idx + 1] = rho
    Sigma[idx + 1, idx] = rho
    # pilot runs calibrate the constant
    devs = []
    for seed in range(10):
        X = sample_random_design(n, p, rho, seed)
        devs.append(np.abs(X.T @ X - Sigma).max())
    C = 1.5 * max(devs) / np.sqrt(np.log(p) / n)
    for seed in range(10, 15):
        X = sample_random_design(n, p, rho, seed)
        assert np.abs(X.T @ X - Sigma).max() <= C * np.sqrt(np.log(p) / n)
    # column norms approximately 1 in expectation
    X = sample_random_design(n, p, rho, 99)
    assert abs((X ** 2).sum(axis=0).mean() - 1.0) < 0.05


def test_random_design_zero_rho_cross_correlations():
    X = sample_random_design(4000, 20, 0.0, 3)
    G = X.T @ X
    off = G[np.triu_indices(20, 1)]
    assert abs(off.mean()) < 0.01


def test_toeplitz_gram():
    params = ModelParams(theta=0.1, r=2.5, rho=0.0, p=3)
    spec = build_general_gram("toeplitz", 3, params)
    want = np.array([[1.0, 0.7, 0.49], [0.7, 1.0, 0.7], [0.49, 0.7, 1.0]])
    assert np.allclose(spec.gram, want)


def test_factor_gram_unit_diagonal_and_pd():
    params = ModelParams(theta=0.1, r=1.5, rho=0.0, p=40)
    spec = build_general_gram("factor", 40, params, seed=4)
    assert np.allclose(np.diag(spec.gram), 1.0)
    assert np.linalg.eigvalsh(spec.gram)[0] > 0


def test_response_null_variance():
    params = ModelParams(theta=0.3, r=1.0, rho=0.5, p=100)
    spec = build_general_gram("block", 100, params)
    draws = []
    for seed in range(2000):
        stats = sample_response(spec, np.zeros(100), 1.0, seed)
        draws.append(stats.xty[0])
    assert abs(np.var(draws) - 1.0) < 0.1


def test_block_gram_structure():
    params = ModelParams(theta=0.3, r=1.0, rho=0.6, p=5)
    G = build_general_gram("block", 5, params).gram_matrix()
    want = np.eye(5)
    want[0, 1] = want[1, 0] = want[2, 3] = want[3, 2] = 0.6
    assert np.allclose(G, want)  # odd p: trailing 1x1 block
