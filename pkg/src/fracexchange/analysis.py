"""Decay-rate fits, nonlinear mass and asymptotic-profile diagnostics."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import DataWarning, DegenerateWarning, InsufficientDataError, PreconditionError
from .linear import linear_profile
from .series import FitResult, NormSeries
from .solver import COMPLETED, Trajectory, nonlinear_hats_for
from .spectral import heat_kernel_field, lm_norm, mass

__all__ = [
    "NormSeries",
    "FitResult",
    "ProfileReport",
    "L2TwoSided",
    "fit_line",
    "fit_decay_rate",
    "space_time_mass",
    "nonlinear_mass",
    "profile_error",
    "l2_two_sided",
    "window_median",
]


def fit_line(x, y, window=None) -> FitResult:
    """Ordinary least squares y = slope*x + intercept with diagnostics."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    if len(x) < 3:
        raise InsufficientDataError(f"need at least 3 points, got {len(x)}")
    res = stats.linregress(x, y)
    r2 = float(res.rvalue ** 2) if np.isfinite(res.rvalue) else 1.0
    # linregress derives stderr from 1 - r^2, which loses half the digits on
    # near-exact fits; recompute it from the residuals
    resid = y - (res.slope * x + res.intercept)
    sxx = float(np.sum((x - x.mean()) ** 2))
    stderr = math.sqrt(float(np.sum(resid ** 2)) / (len(x) - 2) / sxx) if sxx > 0 else math.inf
    if window is None:
        window = (float(x.min()), float(x.max()))
    return FitResult(float(res.slope), float(res.intercept), stderr,
                     tuple(window), min(max(r2, 0.0), 1.0), len(x))


def _decay_exponent(dim, sigma, m):
    inv_m = 0.0 if np.isinf(m) else 1.0 / m
    return dim / (2.0 * sigma) * (1.0 - inv_m)


def fit_decay_rate(series: NormSeries, field: str, m, window=None, min_points: int = 8) -> FitResult:
    """Fit log ||w(t)||_m against log t.

    The default window is the last time decade [t_end/10, t_end]; samples with
    t < 1 are always excluded.
    """
    t = series.times
    y = series[(field, m)]
    if window is None:
        window = (t[-1] / 10.0, t[-1])
    lo, hi = window
    sel = (t >= max(lo, 1.0)) & (t <= hi)
    pos = y > 0
    if np.any(sel & ~pos):
        warnings.warn(f"dropping {int(np.sum(sel & ~pos))} zero norms from the fit",
                      DataWarning, stacklevel=2)
    sel &= pos
    if sel.sum() < min_points:
        raise InsufficientDataError(
            f"window [{lo:g}, {hi:g}] holds {int(sel.sum())} usable samples, need {min_points}"
        )
    return fit_line(np.log(t[sel]), np.log(y[sel]), window=(float(lo), float(hi)))


def space_time_mass(times, masses, decay_exponent: float):
    """Trapezoid integral of ``masses`` over ``times`` plus a power-law tail bound.

    The tail beyond the last time T is bounded by int_T^inf C s^(-a) ds with
    a = ``decay_exponent`` and C fixed by the last sample, i.e.
    |m(T)| T / (a - 1).
    """
    times, masses = np.asarray(times, float), np.asarray(masses, float)
    if decay_exponent <= 1:
        raise PreconditionError(f"tail exponent {decay_exponent} <= 1: integral diverges")
    value = float(np.trapezoid(masses, times)) if len(times) > 1 else 0.0
    tail = float(abs(masses[-1]) * times[-1] / (decay_exponent - 1.0))
    return value, tail


def _fujita(dim, sigma):
    return 1.0 + 2.0 * sigma / dim


def nonlinear_mass(traj: Trajectory):
    """Space-time integral of u^p + v^q over [0, t_max] and a bound on the rest."""
    if traj.outcome != COMPLETED:
        raise PreconditionError(f"nonlinear mass of a {traj.outcome} trajectory refused")
    par = traj.params
    dim, sigma = traj.grid.dim, par.exchanger.sigma
    pmin = min(par.p, par.q)
    if not traj.config.linear_only and not pmin > _fujita(dim, sigma):
        raise PreconditionError(
            f"min(p, q) = {pmin} <= Fujita exponent {_fujita(dim, sigma)}: space-time mass diverges"
        )
    cell = traj.grid.cell_volume
    masses = []
    for s in traj.snapshots:
        nu_h, nv_h = nonlinear_hats_for(traj, s)
        masses.append(cell * float((nu_h.flat[0] + nv_h.flat[0]).real))
    expo = dim / (2.0 * sigma) * (pmin - 1.0)
    if traj.config.linear_only:
        # all masses vanish; any admissible exponent gives a zero tail
        expo = max(expo, 2.0)
    return space_time_mass(traj.snapshot_times, masses, expo)


@dataclass
class ProfileReport:
    times: np.ndarray
    scaled_error: np.ndarray
    main_term: np.ndarray
    p_mass: float
    nl_mass: float
    nl_mass_tail_bound: float
    field: str
    m: float


def _snapshot_subset(traj, times):
    snaps = [s for s in traj.snapshots if s.t > 0]
    if times is None:
        return snaps
    have = np.array([s.t for s in snaps])
    out = []
    for t in np.atleast_1d(times):
        idx = np.flatnonzero(np.isclose(have, t, rtol=0, atol=1e-9 * max(1.0, t)))
        if idx.size == 0:
            raise PreconditionError(f"no snapshot at t={t}; interpolation refused")
        out.append(snaps[idx[0]])
    return out


def profile_error(traj: Trajectory, field_choice: str, m, params=None, times=None) -> ProfileReport:
    """t^((n/2 sigma)(1-1/m)) ||w(t) - gamma/(mu+nu) G(t) (eps P + Pnl)||_m at snapshots.

    For a linear-only trajectory the reference is the linear profile
    gamma/(mu+nu) G(t) * (u0 + v0) instead, so the report coincides with the
    linear module's profile error (and vanishes when mu u0 = nu v0).
    """
    par = params or traj.params
    ex = par.exchanger
    if field_choice not in ("u", "v"):
        raise ValueError("field_choice must be 'u' or 'v'")
    nl, tail = nonlinear_mass(traj)
    s0 = traj.snapshots[0]
    p_mass = mass(s0.u + s0.v)
    gamma = ex.nu if field_choice == "u" else ex.mu
    amp = gamma / ex.rate * (p_mass + nl)
    expo = _decay_exponent(traj.grid.dim, ex.sigma, m)
    ts, err, main = [], [], []
    for s in _snapshot_subset(traj, times):
        if traj.config.linear_only:
            ref = linear_profile(s.t, gamma, ex, s0.u, s0.v)
        else:
            ref = heat_kernel_field(s.t, s.grid, ex.sigma) * amp
        w = s.u if field_choice == "u" else s.v
        scale = s.t ** expo
        ts.append(s.t)
        err.append(scale * lm_norm(w - ref, m))
        main.append(scale * lm_norm(ref, m))
    return ProfileReport(np.array(ts), np.array(err), np.array(main), p_mass, nl, tail,
                         field_choice, float(m))


def window_median(times, values, lo, hi) -> float:
    times, values = np.asarray(times), np.asarray(values)
    sel = (times >= lo) & (times <= hi)
    if not sel.any():
        raise InsufficientDataError(f"no samples in [{lo}, {hi}]")
    return float(np.median(values[sel]))


@dataclass
class L2TwoSided:
    times: np.ndarray
    scaled_u: np.ndarray
    scaled_v: np.ndarray
    predicted_u: np.ndarray
    predicted_v: np.ndarray
    degenerate: bool
    combined_mass: float

    @property
    def ratio_u(self):
        return self.scaled_u / self.predicted_u

    @property
    def ratio_v(self):
        return self.scaled_v / self.predicted_v


def l2_two_sided(traj: Trajectory, params=None) -> L2TwoSided:
    """Measured ||w(t)||_2 t^(n/4 sigma) against |eps P + Pnl| ||G(t)||_2 t^(n/4 sigma) gamma/(mu+nu)."""
    par = params or traj.params
    ex = par.exchanger
    nl, tail = nonlinear_mass(traj)
    s0 = traj.snapshots[0]
    total = mass(s0.u + s0.v) + nl
    scale = max(lm_norm(s0.u, 1) + lm_norm(s0.v, 1), np.finfo(float).tiny)
    degenerate = abs(total) <= tail + 1e-12 * scale
    expo = traj.grid.dim / (4.0 * ex.sigma)
    snaps = [s for s in traj.snapshots if s.t >= 1]
    times = np.array([s.t for s in snaps])
    su = np.array([lm_norm(s.u, 2) for s in snaps]) * times ** expo
    sv = np.array([lm_norm(s.v, 2) for s in snaps]) * times ** expo
    if degenerate:
        warnings.warn("combined mass indistinguishable from 0: no L2 prediction",
                      DegenerateWarning, stacklevel=2)
        nan = np.full_like(times, np.nan)
        return L2TwoSided(times, su, sv, nan, nan, True, total)
    g = np.array([lm_norm(heat_kernel_field(t, traj.grid, ex.sigma), 2) for t in times]) * times ** expo
    return L2TwoSided(times, su, sv, abs(total) * g * ex.nu / ex.rate,
                      abs(total) * g * ex.mu / ex.rate, False, total)
