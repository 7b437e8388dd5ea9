"""Data model: two-point coefficient prior and block/Toeplitz/factor/random designs.

Coefficients are iid tau_p = sqrt(2 r log p) with probability eps_p = p^-theta
and 0 otherwise.  For designs whose Gram matrix G is available exactly, the
sufficient statistics X'y ~ N(G beta, sigma^2 G) are sampled directly without
materializing X; the random Gaussian design materializes X with iid rows
N(0, Sigma/n).

All randomness flows through numpy's counter-based Philox generator so that
runs are reproducible across platforms, and replicate streams are spawned
from a root SeedSequence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

DESIGN_KINDS = ("block", "toeplitz", "factor", "random")


def make_rng(seed) -> np.random.Generator:
    """Counter-based generator; accepts an int seed, SeedSequence, or Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def spawn_rngs(seed, n: int):
    """n independent Philox streams derived from one root seed."""
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.Generator(np.random.Philox(s)) for s in root.spawn(n)]


@dataclass(frozen=True)
class ModelParams:
    """Sparsity exponent theta, signal exponent r, block correlation rho."""

    theta: float
    r: float
    rho: float
    p: int
    sigma: float = 1.0
    n: Optional[int] = None

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise ValueError("theta must be in (0, 1)")
        if not self.r > 0.0:
            raise ValueError("r must be positive")
        if not abs(self.rho) < 1.0:
            raise ValueError("|rho| must be < 1")
        if self.p < 2:
            raise ValueError("p must be at least 2")
        if not self.sigma > 0.0:
            raise ValueError("sigma must be positive")

    @property
    def eps_p(self) -> float:
        return float(self.p) ** (-self.theta)

    @property
    def tau_p(self) -> float:
        return float(np.sqrt(2.0 * self.r * np.log(self.p)))

    @property
    def scale(self) -> float:
        """sqrt(2 log p): converts x'y to the scaled statistic h."""
        return float(np.sqrt(2.0 * np.log(self.p)))

    @staticmethod
    def from_config(cfg: dict) -> "ModelParams":
        return ModelParams(
            theta=float(cfg["theta"]), r=float(cfg["r"]), rho=float(cfg["rho"]),
            p=int(cfg["p"]), sigma=float(cfg.get("sigma", 1.0)),
            n=int(cfg["n"]) if cfg.get("n") is not None else None,
        )


@dataclass(frozen=True)
class BetaVector:
    values: np.ndarray

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.values)


@dataclass
class DesignSpec:
    kind: str
    p: int
    rho: float = 0.0
    gram: Optional[np.ndarray] = None  # None for the implicit block design
    X: Optional[np.ndarray] = None     # materialized only for kind="random"

    def gram_matrix(self) -> np.ndarray:
        if self.gram is not None:
            return self.gram
        G = np.eye(self.p)
        nblk = self.p // 2
        idx = np.arange(nblk) * 2
        G[idx, idx + 1] = self.rho
        G[idx + 1, idx] = self.rho
        return G


@dataclass
class SufficientStats:
    """x_j'y values plus the sqrt(2 log p) conversion to scaled coordinates."""

    xty: np.ndarray
    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @property
    def h(self) -> np.ndarray:
        return self.xty / self.scale


def sample_beta(params: ModelParams, seed) -> BetaVector:
    rng = make_rng(seed)
    mask = rng.random(params.p) < params.eps_p
    return BetaVector(values=np.where(mask, params.tau_p, 0.0))


def sample_beta_batch(params: ModelParams, reps: int, seed) -> np.ndarray:
    """(reps, p) matrix of iid two-point draws."""
    rng = make_rng(seed)
    mask = rng.random((reps, params.p)) < params.eps_p
    return np.where(mask, params.tau_p, 0.0)


def sample_block_stats(beta_pair, rho: float, params: ModelParams, seed):
    """Scaled statistics (h1, h2) for one block given its coefficients."""
    rng = make_rng(seed)
    b1, b2 = beta_pair
    mean = np.array([b1 + rho * b2, b2 + rho * b1]) / params.scale
    cov = np.array([[1.0, rho], [rho, 1.0]]) / (params.scale ** 2)
    L = np.linalg.cholesky(cov)
    return tuple(mean + L @ rng.standard_normal(2) * params.sigma)


def sample_block_stats_batch(beta: np.ndarray, rho: float, params: ModelParams, rng):
    """Scaled statistics for all blocks of all replicates at once.

    beta: (reps, p).  Returns (h, odd_h): h has shape (reps, p//2, 2); odd_h
    is the trailing singleton coordinate (reps,) when p is odd, else None.
    """
    reps, p = beta.shape
    nblk = p // 2
    b = beta[:, : 2 * nblk].reshape(reps, nblk, 2)
    mean1 = b[:, :, 0] + rho * b[:, :, 1]
    mean2 = b[:, :, 1] + rho * b[:, :, 0]
    z = rng.standard_normal((reps, nblk, 2))
    s = np.sqrt(1.0 - rho * rho)
    g1 = z[:, :, 0]
    g2 = rho * z[:, :, 0] + s * z[:, :, 1]
    h = np.empty((reps, nblk, 2))
    h[:, :, 0] = (mean1 + params.sigma * g1) / params.scale
    h[:, :, 1] = (mean2 + params.sigma * g2) / params.scale
    odd = None
    if p % 2 == 1:
        zo = rng.standard_normal(reps)
        odd = (beta[:, -1] + params.sigma * zo) / params.scale
    return h, odd


def sample_random_design(n: int, p: int, rho: float, seed) -> np.ndarray:
    """n x p matrix with iid rows N(0, Sigma/n), Sigma block-diagonal."""
    if n < 2 or p < 2:
        raise ValueError("need n >= 2 and p >= 2")
    rng = make_rng(seed)
    Z = rng.standard_normal((n, p)) / np.sqrt(n)
    X = Z.copy()
    s = np.sqrt(1.0 - rho * rho)
    nblk = p // 2
    idx = np.arange(nblk) * 2
    X[:, idx + 1] = rho * Z[:, idx] + s * Z[:, idx + 1]
    return X


def build_general_gram(kind: str, p: int, params: ModelParams, seed=0,
                       toeplitz_base: float = 0.7, max_retries: int = 50) -> DesignSpec:
    """Gram matrices for the supported design kinds.

    factor: G = BB' - diag(BB') + I with B iid Unif(0, 0.6) p x 2; redrawn
    until positive definite.
    """
    if kind not in DESIGN_KINDS:
        raise ValueError(f"unknown design kind {kind!r}")
    if kind == "block":
        return DesignSpec(kind="block", p=p, rho=params.rho)
    if kind == "toeplitz":
        idx = np.arange(p)
        G = toeplitz_base ** np.abs(idx[:, None] - idx[None, :])
        return DesignSpec(kind="toeplitz", p=p, gram=G)
    if kind == "factor":
        rng = make_rng(seed)
        for _ in range(max_retries):
            B = rng.uniform(0.0, 0.6, size=(p, 2))
            G = B @ B.T
            np.fill_diagonal(G, 1.0)
            if np.linalg.eigvalsh(G)[0] > 1e-10:
                return DesignSpec(kind="factor", p=p, gram=G)
        raise RuntimeError("could not draw a positive-definite factor Gram")
    # random design
    if params.n is None:
        raise ValueError("random design requires n")
    X = sample_random_design(params.n, p, params.rho, seed)
    return DesignSpec(kind="random", p=p, rho=params.rho, gram=X.T @ X, X=X)


def sample_response(design: DesignSpec, beta: np.ndarray, sigma: float, seed):
    """Response data for one replicate.

    For implicit/Gram designs returns SufficientStats with xty ~ N(G b,
    sigma^2 G) sampled exactly; for the random design returns (y,
    SufficientStats) with y = X b + N(0, sigma^2 I_n).
    """
    rng = make_rng(seed)
    p = design.p
    scale = float(np.sqrt(2.0 * np.log(p)))
    if design.kind == "random":
        y = design.X @ beta + sigma * rng.standard_normal(design.X.shape[0])
        return y, SufficientStats(xty=design.X.T @ y, scale=scale)
    G = design.gram_matrix()
    L = np.linalg.cholesky(G)
    xty = G @ beta + sigma * (L @ rng.standard_normal(p))
    return SufficientStats(xty=xty, scale=scale)


def load_config(path) -> dict:
    with open(path) as f:
        return json.load(f)


def export_blocks_csv(path, beta: np.ndarray, h: np.ndarray, scale: float):
    """One row per block: j, beta_j, beta_j1, h1, h2."""
    nblk = h.shape[0]
    with open(path, "w") as f:
        f.write("j,beta_j,beta_j1,h1,h2\n")
        for k in range(nblk):
            f.write(f"{2 * k},{beta[2 * k]:.17g},{beta[2 * k + 1]:.17g},"
                    f"{h[k, 0]:.17g},{h[k, 1]:.17g}\n")
