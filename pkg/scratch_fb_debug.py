import numpy as np
from phaselab.selectors import Tuning, region_for
from phaselab.geometry import region_distance_sq, _grid_min
from phaselab.rates import fb_breakdown, exponent_generic, block_means, fb_regime

cases = [
    # (theta, r, rho, w, u, term)
    (0.640, 8.421, -0.632, 2.9502, 3.1361, "fn10"),
    (0.890, 5.794, +0.805, 6.2113 * 0 + 2.1421, 2.3477, "fn11"),
    (0.679, 7.457, -0.513, 1.987, 1.9889, "fp01"),
]
for theta, r, rho, w, u, term in cases:
    t, v = np.sqrt(w), np.sqrt(u)
    tun = Tuning("forward_backward", w=w, u=u)
    rc = abs(rho)
    print(f"=== term={term} rho={rho} t={t:.4f} v={v:.4f} sr={np.sqrt(r):.4f} "
          f"regime={fb_regime(t, v, rho)}")
    cf = fb_breakdown(t, v, theta, r, rho)
    gen = exponent_generic("forward_backward", tun, theta, r, rho)
    names = ["fp00", "fp01", "fn10", "fn11"]
    i = names.index(term)
    print(f"closed={cf[i]:.6f} gen={getattr(gen, term):.6f}")
    region = region_for(tun, rho=rc)
    mus = block_means(r, rho)
    mu = {"fp00": mus[0], "fp01": mus[1], "fn10": mus[2], "fn11": mus[3]}[term]
    cells = region.cells_R if term.startswith("fp") else region.cells_Rc
    best = None
    for cell in cells:
        val, pt = _grid_min([cell], mu, rc, mu[0], mu[1], 15.0, 1000)
        if val is not None and (best is None or val < best[0]):
            best = (val, pt, cell.rows)
    val, pt, rows = best
    print("argmin:", np.round(pt, 4), " d2sigma:", val / (1 - rc * rc))
    print(np.round(rows, 4))
