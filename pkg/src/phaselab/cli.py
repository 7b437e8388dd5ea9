"""Command-line interface.

Subcommands:
  select      selection patterns for a CSV of (h1, h2) rows
  rate        exponent breakdown as JSON
  phase       upper/lower phase curves over a theta grid as CSV
  experiment  two-stage tuned Monte Carlo from a JSON config
  heatmap     tuning heatmap grid as CSV
  region      rejection-region polygon soup as CSV (debug)

The PHASELAB_THREADS environment variable caps numba parallelism.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np


def _cap_threads():
    cap = os.environ.get("PHASELAB_THREADS")
    if cap:
        try:
            import numba

            numba.set_num_threads(max(1, int(cap)))
        except (ImportError, ValueError):
            pass


def _tuning_from_args(args):
    from .selectors import Tuning

    kw = {}
    for name in ("q", "w", "u", "mu", "a"):
        val = getattr(args, name, None)
        if val is not None:
            kw[name] = val
    return Tuning(args.method, **kw)


def _add_tuning_flags(sp, need_method=True):
    if need_method:
        sp.add_argument("--method", required=True)
    sp.add_argument("--q", type=float, default=None, help="lambda exponent (lambda' = sqrt(q))")
    sp.add_argument("--w", type=float, default=None, help="threshold exponent (t' = sqrt(w))")
    sp.add_argument("--u", type=float, default=None, help="backward exponent (v' = sqrt(u))")
    sp.add_argument("--mu", type=float, default=None, help="ridge weight (elastic net)")
    sp.add_argument("--a", type=float, default=None, help="SCAD shape (a > 2)")


def cmd_select(args):
    from .selectors import select

    rows = np.loadtxt(args.input, delimiter=",", skiprows=args.skip_header, ndmin=2)
    tun = _tuning_from_args(args)
    s1, s2 = select(rows[:, 0], rows[:, 1], args.rho, tun)
    out = sys.stdout if args.output == "-" else open(args.output, "w")
    out.write("h1,h2,sel1,sel2\n")
    for k in range(rows.shape[0]):
        out.write(f"{rows[k, 0]:.10g},{rows[k, 1]:.10g},{int(s1[k])},{int(s2[k])}\n")
    if out is not sys.stdout:
        out.close()


def cmd_rate(args):
    from .rates import ClosedFormUnavailable, exponent_generic, rate_closed_form

    tun = _tuning_from_args(args)
    if args.engine == "closed":
        try:
            bd = rate_closed_form(args.method, tun, args.theta, args.r, args.rho)
        except ClosedFormUnavailable as exc:
            print(json.dumps({"error": str(exc)}))
            return 1
    else:
        bd = exponent_generic(args.method, tun, args.theta, args.r, args.rho)
    payload = {"fp00": bd.fp00, "fp01": bd.fp01, "fn10": bd.fn10,
               "fn11": bd.fn11, "h": bd.h, "method": args.method,
               "tuning": {"q": tun.q, "w": tun.w, "u": tun.u,
                          "mu": tun.mu, "a": tun.a}}
    print(json.dumps(payload, allow_nan=True))
    return 0


def cmd_phase(args):
    from .phase import emit_phase_grid

    grid = np.linspace(args.grid_start, args.grid_end, args.grid_n)
    spec = emit_phase_grid(args.method, args.rho, grid, mode=args.mode,
                           mu=args.mu or 0.0, a=args.a)
    out = sys.stdout if args.output == "-" else open(args.output, "w")
    out.write("theta,U_closed,U_numeric,L\n")
    for theta, uc, un, low in spec.samples:
        fc = "" if uc is None else ("inf" if np.isinf(uc) else f"{uc:.6g}")
        fn = "" if un is None else ("inf" if np.isinf(un) else f"{un:.6g}")
        out.write(f"{theta:.6g},{fc},{fn},{low:.6g}\n")
    if out is not sys.stdout:
        out.close()


def cmd_experiment(args):
    from .experiments import ExperimentConfig, emit, run_experiment

    cfg = ExperimentConfig.from_file(args.config)
    table = run_experiment(cfg, verbose=args.verbose)
    path = args.output or cfg.output or "-"
    if path == "-":
        for row in table.rows:
            print(f"{row.method},{row.mean:.4g},{row.sd:.4g}")
        for method, err in table.errors.items():
            print(f"{method},ERROR,{err}", file=sys.stderr)
    else:
        emit(table, path, format=args.format)
    return 0 if not table.errors else 2


def cmd_heatmap(args):
    from .experiments import emit, tuning_heatmap
    from .model import ModelParams

    params = ModelParams(theta=args.theta, r=args.r, rho=args.rho, p=args.p)
    grid_t = np.linspace(args.t_start, args.t_end, args.t_n)
    grid_lam = np.linspace(args.lam_start, args.lam_end, args.lam_n)
    grid, marker = tuning_heatmap(args.method, params, grid_t, grid_lam,
                                  args.reps, args.seed)
    emit(grid, args.output, format="csv")
    print(json.dumps({"theoretical_optimum": {"t": marker[0], "lambda": marker[1]}}))


def cmd_region(args):
    from .selectors import region_for, region_to_rows

    tun = _tuning_from_args(args)
    rows = region_to_rows(region_for(tun, rho=args.rho))
    out = sys.stdout if args.output == "-" else open(args.output, "w")
    out.write("cell,side,a,b,c\n")
    for cell, side, a, b, c in rows:
        out.write(f"{cell},{side},{a:.10g},{b:.10g},{c:.10g}\n")
    if out is not sys.stdout:
        out.close()


def build_parser():
    ap = argparse.ArgumentParser(prog="phaselab")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("select", help="selection patterns for CSV rows of h1,h2")
    _add_tuning_flags(sp)
    sp.add_argument("--rho", type=float, required=True)
    sp.add_argument("--input", required=True)
    sp.add_argument("--output", default="-")
    sp.add_argument("--skip-header", type=int, default=0)
    sp.set_defaults(func=cmd_select)

    sp = sub.add_parser("rate", help="exponent breakdown as JSON")
    _add_tuning_flags(sp)
    sp.add_argument("--theta", type=float, required=True)
    sp.add_argument("--r", type=float, required=True)
    sp.add_argument("--rho", type=float, required=True)
    sp.add_argument("--engine", choices=("generic", "closed"), default="generic")
    sp.set_defaults(func=cmd_rate)

    sp = sub.add_parser("phase", help="phase curves over a theta grid")
    sp.add_argument("--method", required=True)
    sp.add_argument("--rho", type=float, required=True)
    sp.add_argument("--grid-start", type=float, default=0.02)
    sp.add_argument("--grid-end", type=float, default=0.98)
    sp.add_argument("--grid-n", type=int, default=49)
    sp.add_argument("--mode", choices=("closed", "numeric", "both"), default="closed")
    sp.add_argument("--mu", type=float, default=None)
    sp.add_argument("--a", type=float, default=None)
    sp.add_argument("--output", default="-")
    sp.set_defaults(func=cmd_phase)

    sp = sub.add_parser("experiment", help="run a tuned Monte Carlo experiment")
    sp.add_argument("--config", required=True)
    sp.add_argument("--output", default=None)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--verbose", action="store_true")
    sp.set_defaults(func=cmd_experiment)

    sp = sub.add_parser("heatmap", help="tuning heatmap for TL or FB")
    sp.add_argument("--method", required=True,
                    choices=("thresholded_lasso", "forward_backward"))
    sp.add_argument("--theta", type=float, required=True)
    sp.add_argument("--r", type=float, required=True)
    sp.add_argument("--rho", type=float, required=True)
    sp.add_argument("--p", type=int, default=300)
    sp.add_argument("--t-start", type=float, default=0.05)
    sp.add_argument("--t-end", type=float, default=1.5)
    sp.add_argument("--t-n", type=int, default=20)
    sp.add_argument("--lam-start", type=float, default=0.05)
    sp.add_argument("--lam-end", type=float, default=1.5)
    sp.add_argument("--lam-n", type=int, default=20)
    sp.add_argument("--reps", type=int, default=50)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--output", required=True)
    sp.set_defaults(func=cmd_heatmap)

    sp = sub.add_parser("region", help="dump a rejection region as CSV")
    _add_tuning_flags(sp)
    sp.add_argument("--rho", type=float, required=True)
    sp.add_argument("--output", default="-")
    sp.set_defaults(func=cmd_region)
    return ap


def main(argv=None):
    _cap_threads()
    args = build_parser().parse_args(argv)
    return args.func(args) or 0


if __name__ == "__main__":
    sys.exit(main())
