"""
Small data above the Fujita exponent
====================================

One run with p = q = 4 in one dimension (the threshold is 3).  The solution
exists for all time, decays like the heat kernel and approaches a multiple of
it whose weight includes the space-time mass of the nonlinearity.  Takes
about ten seconds.
"""

# %%
import math
from pathlib import Path

import numpy as np

from fracexchange.analysis import fit_decay_rate, l2_two_sided, nonlinear_mass, profile_error
from fracexchange.config import parse_config
from fracexchange.reports import svg_plot
from fracexchange.solver import simulate

ROOT = Path(__file__).resolve().parents[1]
OUT = Path("out/notebooks")
OUT.mkdir(parents=True, exist_ok=True)

cfg = parse_config(ROOT / "configs" / "c06_supercritical.ini")
traj = simulate(cfg.semilinear(), cfg.solver(), *cfg.initial_fields())
print(traj.outcome, "at t =", traj.norm_series.times[-1])

# %% [markdown]
# Decay slopes over the last decade.  With n = 1 and sigma = 1 the L^m norm
# should fall like t^{-(1 - 1/m)/2}.

# %%
for m in (1.0, 2.0, math.inf):
    fit = fit_decay_rate(traj.norm_series, "u", m)
    expected = -(1 - (0 if math.isinf(m) else 1 / m)) / 2 + 0.0
    print(f"L{m:g}: slope {fit.slope:+.4f}  expected {expected:+.4f}")

ser = traj.norm_series
sel = ser.times >= 1
svg_plot(OUT / "decay.svg", [(f"u L{m:g}", ser.times[sel], ser[("u", m)][sel]) for m in (1.0, 2.0, math.inf)],
         title="norms of u", xlabel="t", ylabel="norm",
         ref_slopes=[("t^-1/2", -0.5, (500.0, float(ser[("u", math.inf)][-1])))])

# %% [markdown]
# The nonlinear term adds mass that never leaves.  Its space-time integral is
# computed over the run, with a bound on the part beyond t_max.

# %%
nl, tail = nonlinear_mass(traj)
print(f"nonlinear mass {nl:.4e}, tail bound {tail:.2e}")

# %% [markdown]
# Scaled distance to the profile.  No rate is known, only that it tends to
# zero; here it drops by about a factor nine between t = 25 and t = 250.

# %%
rep = profile_error(traj, "u", math.inf)
svg_plot(OUT / "profile.svg", [("u", rep.times, rep.scaled_error)],
         title="scaled profile error", xlabel="t", ylabel="t^(1/2) sup error")
for t in (25.0, 250.0, 500.0):
    print(t, rep.scaled_error[np.argmin(np.abs(rep.times - t))])

# %% [markdown]
# The L^2 norm against the predicted constant: the ratio sits near 1.

# %%
l2 = l2_two_sided(traj)
print(np.round(l2.ratio_u[l2.times >= 100], 4)[:5])
