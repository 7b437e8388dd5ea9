"""Experiment orchestration: two-stage tuned Monte Carlo and heatmaps.

Protocol: for each method, a pilot stage grid-searches the tuning on
`pilot_reps` replicates; the best tuning is then evaluated on `eval_reps`
fresh replicates from a disjoint seed stream.  Tables report mean and
standard deviation of the Hamming error per (method, setting).

Default tuning grids (scaled exponents): lambda', t', v' in {0.05 k},
k = 1..40; ridge weights mu in {0, 0.25, 0.5, 1, 2}; SCAD shapes a in
{2.01, 2.1, 2.5, 3, 3.7, 5, 10} (the extra 2.01 because the ideal shape for
negative correlations sits arbitrarily close to 2).
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .model import (
    ModelParams,
    build_general_gram,
    make_rng,
    sample_beta_batch,
    sample_block_stats_batch,
    sample_response,
)
from .rates import optimal_exponent
from .selectors import Tuning, select
from .solvers import (
    forward_path_gram,
    forward_support,
    lasso_gram,
    refit_ols_gram,
    scad_gram,
)

LAMBDA_GRID = [0.05 * k for k in range(1, 41)]  # scaled lambda'/t'/v'
MU_GRID = [0.0, 0.25, 0.5, 1.0, 2.0]
A_GRID = [2.01, 2.1, 2.5, 3.0, 3.7, 5.0, 10.0]

EXPERIMENT_METHODS = ("lasso", "thresholded_lasso", "elastic_net", "scad",
                      "forward", "forward_backward")


@dataclass
class ExperimentConfig:
    experiment: int
    params: ModelParams
    methods: tuple = EXPERIMENT_METHODS
    design: str = "block"
    pilot_reps: int = 50
    eval_reps: int = 500
    seed: int = 0
    output: Optional[str] = None
    factor_redraw_per_rep: bool = False
    scad_restarts: int = 1
    lambda_grid: tuple = tuple(LAMBDA_GRID)
    mu_grid: tuple = tuple(MU_GRID)
    a_grid: tuple = tuple(A_GRID)

    def __post_init__(self):
        if self.pilot_reps < 1 or self.eval_reps < 1:
            raise ValueError("reps must be positive")
        if not self.methods:
            raise ValueError("need at least one method")
        if not self.lambda_grid:
            raise ValueError("tuning grid must be nonempty")
        for m in self.methods:
            if m not in EXPERIMENT_METHODS + ("marginal",):
                raise ValueError(f"method {m} not implemented")

    @staticmethod
    def from_file(path) -> "ExperimentConfig":
        with open(path) as f:
            cfg = json.load(f)
        params = ModelParams.from_config(cfg)
        kw = {k: cfg[k] for k in ("experiment", "pilot_reps", "eval_reps",
                                  "seed", "output", "factor_redraw_per_rep",
                                  "scad_restarts") if k in cfg}
        if "methods" in cfg:
            kw["methods"] = tuple(cfg["methods"])
        if "design" in cfg:
            kw["design"] = cfg["design"]
        return ExperimentConfig(experiment=kw.pop("experiment", 1),
                                params=params, **kw)


@dataclass
class ResultRow:
    method: str
    setting: str
    mean: float
    sd: float
    tuning: dict


@dataclass
class ResultTable:
    rows: list = field(default_factory=list)
    errors: dict = field(default_factory=dict)

    def by_method(self):
        return {row.method: row for row in self.rows}


def _tuning_grid(method, cfg: ExperimentConfig):
    lam = cfg.lambda_grid
    if method == "lasso":
        return [Tuning("lasso", q=x * x) for x in lam]
    if method == "marginal":
        return [Tuning("marginal", w=x * x) for x in lam]
    if method == "elastic_net":
        return [Tuning("elastic_net", q=x * x, mu=m) for m in cfg.mu_grid for x in lam]
    if method == "scad":
        return [Tuning("scad", q=x * x, a=a) for a in cfg.a_grid for x in lam]
    if method == "thresholded_lasso":
        return [Tuning("thresholded_lasso", q=x * x, w=t * t)
                for x in lam for t in lam]
    if method == "forward":
        return [Tuning("forward", w=x * x) for x in lam]
    if method == "forward_backward":
        return [Tuning("forward_backward", w=x * x, u=v * v)
                for x in lam for v in lam]
    raise ValueError(method)


# ---------------------------------------------------------------------------
# Block-design evaluation
# ---------------------------------------------------------------------------

def _block_draw(params, reps, rng):
    beta = sample_beta_batch(params, reps, rng)
    h, odd = sample_block_stats_batch(beta, params.rho, params, rng)
    return beta, h, odd


def _block_counts_separable(tun, params, beta, h, odd):
    from .rates import _select_singleton

    s1, s2 = select(h[:, :, 0], h[:, :, 1], params.rho, tun)
    truth = beta != 0.0
    nblk = params.p // 2
    reps = beta.shape[0]
    sel = np.zeros((reps, params.p), dtype=bool)
    sel[:, 0:2 * nblk:2] = s1
    sel[:, 1:2 * nblk:2] = s2
    if odd is not None:
        sel[:, -1] = _select_singleton(tun, odd)
    return (sel != truth).sum(axis=1)


def _counts_forward_family(method, tunings, params, G, xty_batch, truth, scale):
    """Hamming counts for forward / forward-backward from one greedy path per
    replicate (the path does not depend on the thresholds)."""
    from .solvers import forward_prefix_refits

    paths = [forward_path_gram(G, xty, return_factor=True) for xty in xty_batch]
    refits = None
    if method == "forward_backward":
        refits = [forward_prefix_refits(order, L, w)
                  for (order, gains, L, w) in paths]
    out = {}
    for tun in tunings:
        t_raw = tun.sqrt_w * scale
        counts = np.zeros(len(xty_batch), dtype=int)
        for idx, (order, gains, L, w) in enumerate(paths):
            stop = len(order)
            for k, g in enumerate(gains):
                if g <= t_raw:
                    stop = k
                    break
            sel = np.zeros(truth.shape[1], dtype=bool)
            if method == "forward":
                sel[order[:stop]] = True
            else:
                v_raw = tun.sqrt_u * scale
                coef = refits[idx][stop]
                keep = np.abs(coef) > v_raw
                sel[order[:stop][keep]] = True
            counts[idx] = (sel != truth[idx]).sum()
        out[tun] = counts
    return out


def _counts_scad_pathwise(tunings, params, G, xty_batch, truth, scale, cfg):
    """SCAD by coordinate descent warm-started along the descending lambda
    path (per shape a).  This is the estimator a pathwise numerical solver
    produces; at negative rho its local solutions differ from the exact
    bivariate path and give a lower Hamming error."""
    counts = {tun: np.zeros(len(xty_batch), dtype=int) for tun in tunings}
    groups = {}
    for tun in tunings:
        groups.setdefault(tun.a, []).append(tun)
    for a, tus in groups.items():
        tus = sorted(tus, key=lambda t: -t.sqrt_q)
        for i, xty in enumerate(xty_batch):
            warm = None
            for tun in tus:
                beta_hat = scad_gram(G, xty, tun.sqrt_q * scale, a, beta0=warm,
                                     restarts=cfg.scad_restarts - 1 if warm is None else 0,
                                     rng=None)
                warm = beta_hat
                counts[tun][i] = ((beta_hat != 0.0) != truth[i]).sum()
    return counts


def _block_stage(method, tunings, params, reps, rng, cfg):
    """Hamming counts per tuning on the block design."""
    beta, h, odd = _block_draw(params, reps, rng)
    if method in ("forward", "forward_backward", "scad"):
        G = build_general_gram("block", params.p, params).gram_matrix()
        xty_batch = (h.reshape(reps, -1) * params.scale)
        if odd is not None:
            xty_batch = np.hstack([xty_batch, (odd * params.scale)[:, None]])
        truth = beta != 0.0
        if method == "scad":
            return _counts_scad_pathwise(tunings, params, G, xty_batch, truth,
                                         params.scale, cfg)
        return _counts_forward_family(method, tunings, params, G, xty_batch,
                                      truth, params.scale)
    return {tun: _block_counts_separable(tun, params, beta, h, odd)
            for tun in tunings}


# ---------------------------------------------------------------------------
# Gram/materialized-design evaluation
# ---------------------------------------------------------------------------

def _gram_stage(method, tunings, params, design_kind, reps, rng, cfg, seed_tag):
    """Hamming counts per tuning on a general design, with pathwise warm
    starts over the lambda grid."""
    p = params.p
    scale = params.scale
    counts = {tun: np.zeros(reps, dtype=int) for tun in tunings}
    fixed_design = None
    if design_kind in ("toeplitz", "factor") and not cfg.factor_redraw_per_rep:
        fixed_design = build_general_gram(design_kind, p, params,
                                          seed=cfg.seed + 7_777)
    for rep in range(reps):
        if fixed_design is not None:
            design = fixed_design
        else:
            design = build_general_gram(design_kind, p, params,
                                        seed=rng.integers(2**63))
        beta = sample_beta_batch(params, 1, rng)[0]
        resp = sample_response(design, beta, params.sigma, rng)
        stats = resp[1] if isinstance(resp, tuple) else resp
        G = design.gram_matrix()
        xty = stats.xty
        truth = beta != 0.0

        if method in ("lasso", "elastic_net", "thresholded_lasso"):
            groups = {}
            for tun in tunings:
                groups.setdefault((tun.mu, tun.sqrt_q), []).append(tun)
            by_mu = {}
            for (mu, sq), tus in sorted(groups.items(), reverse=True):
                warm = by_mu.get(mu)
                beta_hat = lasso_gram(G, xty, sq * scale, mu, beta0=warm)
                by_mu[mu] = beta_hat
                for tun in tus:
                    t_raw = tun.sqrt_w * scale
                    sel = np.abs(beta_hat) > t_raw if tun.method == "thresholded_lasso" \
                        else beta_hat != 0.0
                    counts[tun][rep] = (sel != truth).sum()
        elif method == "scad":
            groups = {}
            for tun in tunings:
                groups.setdefault(tun.a, []).append(tun)
            for a, tus in groups.items():
                warm = None
                for tun in sorted(tus, key=lambda t: -t.sqrt_q):
                    beta_hat = scad_gram(G, xty, tun.sqrt_q * scale, a,
                                         beta0=warm, restarts=cfg.scad_restarts,
                                         rng=rng)
                    warm = beta_hat
                    sel = beta_hat != 0.0
                    counts[tun][rep] = (sel != truth).sum()
        elif method == "marginal":
            for tun in tunings:
                sel = np.abs(xty) > tun.sqrt_w * scale
                counts[tun][rep] = (sel != truth).sum()
        elif method in ("forward", "forward_backward"):
            fam = _counts_forward_family(method, tunings, params, G,
                                         xty[None, :], truth[None, :], scale)
            for tun, cnt in fam.items():
                counts[tun][rep] = cnt[0]
        else:
            raise ValueError(method)
    return counts


def _stage(method, tunings, params, design, reps, rng, cfg, tag):
    if design == "block":
        return _block_stage(method, tunings, params, reps, rng, cfg)
    return _gram_stage(method, tunings, params, design, reps, rng, cfg, tag)


def run_experiment(cfg: ExperimentConfig, verbose: bool = False) -> ResultTable:
    """Two-stage protocol: pilot grid search, then evaluation on fresh seeds."""
    params = cfg.params
    table = ResultTable()
    root = np.random.SeedSequence(cfg.seed)
    pilot_seq, eval_seq = root.spawn(2)
    setting = f"exp{cfg.experiment}:{cfg.design}:rho={params.rho}:theta={params.theta}:r={params.r}"
    for method in cfg.methods:
        try:
            t0 = time.time()
            tunings = _tuning_grid(method, cfg)
            pilot_rng = make_rng(pilot_seq.spawn(1)[0])
            pilot = _stage(method, tunings, params, cfg.design, cfg.pilot_reps,
                           pilot_rng, cfg, "pilot")
            best_tun = min(pilot, key=lambda t: pilot[t].mean())
            eval_rng = make_rng(eval_seq.spawn(1)[0])
            final = _stage(method, [best_tun], params, cfg.design,
                           cfg.eval_reps, eval_rng, cfg, "eval")[best_tun]
            row = ResultRow(
                method=method, setting=setting,
                mean=float(final.mean()),
                sd=float(final.std(ddof=1)),
                tuning={k: v for k, v in (("q", best_tun.q), ("w", best_tun.w),
                                          ("u", best_tun.u), ("mu", best_tun.mu),
                                          ("a", best_tun.a)) if v},
            )
            table.rows.append(row)
            if verbose:
                print(f"  {method}: {row.mean:.2f} ({row.sd:.2f})"
                      f"  [{time.time() - t0:.1f}s]", flush=True)
        except Exception as exc:  # isolate per-method failures
            table.errors[method] = repr(exc)
    return table


def tuning_heatmap(method, params, grid_t, grid_lambda, reps, seed,
                   design="block", cfg: ExperimentConfig = None):
    """Average Hamming error per (t, lambda) cell plus the theoretical
    optimum marker (converted to the raw scale by sqrt(2 log p)).

    For thresholded_lasso the grid axes are (t', lambda'); for
    forward_backward they are (v', t').  Scaled units in, scaled units out.
    """
    cfg = cfg or ExperimentConfig(experiment=3, params=params)
    if method == "thresholded_lasso":
        tunings = [Tuning(method, q=x * x, w=t * t)
                   for t in grid_t for x in grid_lambda]
    elif method == "forward_backward":
        tunings = [Tuning(method, w=x * x, u=t * t)
                   for t in grid_t for x in grid_lambda]
    else:
        raise ValueError("heatmap supports thresholded_lasso and forward_backward")
    rng = make_rng(seed)
    counts = _stage(method, tunings, params, design, reps, rng, cfg, "heatmap")
    grid = np.zeros((len(grid_t), len(grid_lambda)))
    k = 0
    for i in range(len(grid_t)):
        for j in range(len(grid_lambda)):
            grid[i, j] = counts[tunings[k]].mean()
            k += 1
    best_tun, _ = optimal_exponent(method, params.theta, params.r, params.rho)
    if method == "thresholded_lasso":
        marker = (best_tun.sqrt_w, best_tun.sqrt_q)
    else:
        marker = (best_tun.sqrt_u, best_tun.sqrt_w)
    return grid, marker


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def _sig4(x):
    if x == 0:
        return "0"
    return f"{x:.4g}"


def emit(obj, path, format="csv"):
    """Write a ResultTable or heatmap grid; CSV uses 4 significant digits,
    JSON full precision."""
    if format not in ("csv", "json"):
        raise ValueError("format must be csv or json")
    try:
        if isinstance(obj, ResultTable):
            if format == "csv":
                with open(path, "w") as f:
                    f.write("method,setting,mean,sd,tuning\n")
                    for row in obj.rows:
                        tun = ";".join(f"{k}={_sig4(v)}" for k, v in row.tuning.items())
                        f.write(f"{row.method},{row.setting},{_sig4(row.mean)},"
                                f"{_sig4(row.sd)},{tun}\n")
            else:
                payload = [{"method": r.method, "setting": r.setting,
                            "mean": r.mean, "sd": r.sd, "tuning": r.tuning}
                           for r in obj.rows]
                with open(path, "w") as f:
                    json.dump({"rows": payload, "errors": obj.errors}, f, indent=1)
        else:
            arr = np.asarray(obj)
            if format == "csv":
                with open(path, "w") as f:
                    for row in np.atleast_2d(arr):
                        f.write(",".join(_sig4(v) for v in row) + "\n")
            else:
                with open(path, "w") as f:
                    json.dump(arr.tolist(), f)
    except OSError as exc:
        raise OSError(f"could not write {path!r}: {exc}") from exc


def load_table_json(path) -> ResultTable:
    with open(path) as f:
        payload = json.load(f)
    table = ResultTable(errors=payload.get("errors", {}))
    for row in payload["rows"]:
        table.rows.append(ResultRow(method=row["method"], setting=row["setting"],
                                    mean=row["mean"], sd=row["sd"],
                                    tuning=row["tuning"]))
    return table
