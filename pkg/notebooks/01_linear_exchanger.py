"""
The linear exchanger: exact propagation, mass laws and the profile
====================================================================

Run with ``python3 notebooks/01_linear_exchanger.py`` (or open the ``# %%``
cells in an editor that understands them).  Figures go to ``out/notebooks``.
"""

# %%
import math
from pathlib import Path

import numpy as np

from fracexchange import ExchangerParams, GridSpec, RealField
from fracexchange import spectral as sp
from fracexchange.linear import error_vs_profile, kernel_factors, linear_solution, linear_trajectory
from fracexchange.reports import svg_plot

OUT = Path("out/notebooks")
OUT.mkdir(parents=True, exist_ok=True)

# %% [markdown]
# Each Fourier mode evolves under a 2x2 matrix.  `kernel_factors` returns the
# four mixing coefficients (a0u, a1u, a0v, a1v) that multiply the heat
# kernel.  At t = 0 they are (1, 0, 0, 1); for large t the u pair tends to
# nu/(mu+nu) and the v pair to mu/(mu+nu).

# %%
ex = ExchangerParams(sigma=1.0, mu=2.0, nu=1.0)
for t in (0.0, 0.1, 1.0, 10.0):
    print(t, np.round(kernel_factors(t, ex), 6))

# %% [markdown]
# Total mass is conserved and the weighted difference mu*u - nu*v loses mass
# at rate mu + nu.

# %%
g = GridSpec(1, 1024, 64.0)
x = g.axis()
u0 = RealField(g, np.exp(-x ** 2))
v0 = RealField(g, 0.5 * np.exp(-2 * x ** 2))
times = np.linspace(0, 5, 51)
states = linear_trajectory(u0, v0, times, ex)
total = [sp.mass(s.u + s.v) for s in states]
skew = [sp.mass(s.u * ex.mu - s.v * ex.nu) for s in states]
print("mass drift", max(abs(m - total[0]) for m in total))
print("skew vs exp law", max(abs(s - skew[0] * math.exp(-ex.rate * t)) for s, t in zip(skew, times)))
svg_plot(OUT / "skew_mass.svg", [("skew mass", times[1:], np.abs(skew[1:]))],
         title="skew mass decay", xlabel="t", ylabel="|mass(mu u - nu v)|", logx=False)

# %% [markdown]
# Away from t = 0 the solution approaches gamma/(mu+nu) times the heat flow of
# u0 + v0.  The gap closes like exp(-(mu+nu) t) on top of the usual heat
# decay, and vanishes identically when mu*u0 = nu*v0.

# %%
late = np.geomspace(0.1, 10, 30)
rep = error_vs_profile(linear_trajectory(u0, v0, late, ex), math.inf, ex, u0, v0)
same = error_vs_profile(linear_trajectory(u0, u0 * 2.0, late, ex), math.inf, ex, u0, u0 * 2.0)
print("max error when mu u0 = nu v0:", max(same.u.max(), same.v.max()))
svg_plot(OUT / "linear_profile.svg", [("u error", late, rep.u), ("v error", late, rep.v)],
         title="distance to the linear profile", xlabel="t", ylabel="sup error", logx=False)

# %% [markdown]
# A single mode on [-pi, pi) can be checked against the 2x2 matrix exponential.

# %%
from scipy.linalg import expm

gm = GridSpec(1, 32, math.pi)
mode = RealField(gm, np.cos(gm.axis()))
s = linear_solution(mode, sp.zeros(gm), 1.0, ex)
A = np.array([[-1 - ex.mu, ex.nu], [ex.mu, -1 - ex.nu]])
ref = expm(A) @ np.array([sp.forward_transform(mode).coeff(1), 0.0])
print(sp.forward_transform(s.u).coeff(1), ref[0])
