"""Throwaway: find closed-form vs generic mismatches per method/term."""
import numpy as np
from phaselab.rates import exponent_generic, rate_closed_form, ClosedFormUnavailable, fb_regime
from phaselab.selectors import Tuning
import sys

method = sys.argv[1] if len(sys.argv) > 1 else "lasso"
n = int(sys.argv[2]) if len(sys.argv) > 2 else 300
rng = np.random.default_rng(0)

worst = {}
bad = []
for k in range(n):
    theta = rng.uniform(0.05, 0.95)
    r = rng.uniform(0.05, 9.0)
    rho = rng.uniform(0.05, 0.9) * rng.choice([-1.0, 1.0])
    q = rng.uniform(0.05, 2.5) ** 2
    w = rng.uniform(0.05, 2.0) ** 2
    kw = dict(q=q, w=w)
    if method == "elastic_net":
        kw["mu"] = float(rng.choice([0.25, 1.0, 4.0]))
    if method == "scad":
        cap = 2.0 / (1.0 - abs(rho))
        small = rng.random() < 0.7
        kw["a"] = float(rng.uniform(2.001, cap) if small else rng.uniform(cap, cap + 8))
    if method == "forward_backward":
        t = rng.uniform(0.05, 2.0)
        rc = abs(rho); s = np.sqrt(1 - rc * rc)
        reg = rng.integers(1, 4)
        if reg == 1:
            v = rng.uniform(0.0, t)
        elif reg == 2:
            v = rng.uniform(t, t / s)
        else:
            v = rng.uniform(t / s, t * (1 + rc / s))
        kw["w"] = t * t
        kw["u"] = v * v
    tun = Tuning(method, **kw)
    try:
        cf = rate_closed_form(method, tun, theta, r, rho)
    except ClosedFormUnavailable:
        continue
    gen = exponent_generic(method, tun, theta, r, rho)
    for term in ("fp00", "fp01", "fn10", "fn11"):
        c, g = getattr(cf, term), getattr(gen, term)
        if np.isinf(c) and np.isinf(g):
            continue
        err = abs(c - g)
        if err > worst.get(term, (0,))[0]:
            worst[term] = (err, theta, r, rho, kw, c, g)
        if err > 1e-8:
            bad.append((term, err, theta, r, rho, kw, c, g))

print(f"{method}: {len(bad)} mismatches / {n}")
for term, info in sorted(worst.items()):
    err, theta, r, rho, kw, c, g = info
    print(f"  worst {term}: err={err:.3e} th={theta:.3f} r={r:.3f} rho={rho:+.3f} "
          f"kw={ {k: round(v,4) for k,v in kw.items()} } closed={c:.6f} gen={g:.6f}")
