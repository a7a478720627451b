"""
Lifespans below and at the Fujita exponent
==========================================

Below the threshold every positive solution blows up, and the blow-up time
grows like a power of 1/eps as the data shrink.  At the threshold the growth
is exponential in eps^(-2 sigma / n).  The full sweeps live in configs/c10
and configs/c11; this script runs a shortened version of each (about a
minute) and plots both laws.  Pass ``--full`` for the complete grids.
"""

# %%
import sys
from pathlib import Path

import numpy as np

from fracexchange.config import parse_config
from fracexchange.lifespan import fit_lifespan_critical, fit_lifespan_subcritical, sweep
from fracexchange.reports import svg_plot

ROOT = Path(__file__).resolve().parents[1]
OUT = Path("out/notebooks")
OUT.mkdir(parents=True, exist_ok=True)
FULL = "--full" in sys.argv


def run(name, keep):
    cfg = parse_config(ROOT / "configs" / name)
    eps = cfg.epsilons() if FULL else cfg.epsilons()[:keep]
    table = sweep(cfg.semilinear(), cfg.solver(), *cfg.initial_fields(), eps,
                  workers=cfg["lifespan"]["workers"], cap_factor=cfg["lifespan"]["cap_factor"])
    for e in table.entries:
        print(f"  eps {e.epsilon:<8g} T {e.lifespan:<10g} {e.status} dt {e.dt_used:g}")
    return table


# %% [markdown]
# Sub-critical, p = q = 2: theory says T ~ eps^-2.

# %%
sub = run("c10_subcritical_sweep.ini", keep=4)
fit = fit_lifespan_subcritical(sub)
print(f"slope {fit.slope:.3f}, r2 {fit.r_squared:.5f}")
e = np.array([x.epsilon for x in sub.entries])
T = np.array([x.lifespan for x in sub.entries])
svg_plot(OUT / "lifespan_sub.svg", [("T", e, T)], title="sub-critical lifespan",
         xlabel="eps", ylabel="T", ref_slopes=[("eps^-2", -2.0, (e[0], T[0]))])

# %% [markdown]
# Critical, p = q = 3: log T against eps^-2 should be a straight line with
# positive slope.  Only the first four radii by default; the last one is
# slow.  Four radii span a factor 2.56 in eps^-2, so the minimum span of the
# fit is relaxed for the short run.

# %%
crit = run("c11_critical_sweep.ini", keep=4)
fit = fit_lifespan_critical(crit, min_span=4.0 if FULL else 2.5)
print(f"slope {fit.slope:.3f}, r2 {fit.r_squared:.5f}")
e = np.array([x.epsilon for x in crit.entries])
T = np.array([x.lifespan for x in crit.entries])
svg_plot(OUT / "lifespan_crit.svg", [("T", e ** -2.0, T)], title="critical lifespan",
         xlabel="eps^-2", ylabel="T", logx=False)
