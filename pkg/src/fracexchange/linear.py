"""Exact Fourier-space solution of the linear exchanger system.

For each wavenumber the linear system

    u_t + (-Delta)^sigma u + mu u - nu v = 0
    v_t + (-Delta)^sigma v - mu u + nu v = 0

is solved by exp(-|xi|^(2 sigma) t) times a 2x2 mixing matrix whose entries
only depend on t, mu and nu (see :func:`kernel_factors`).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateWarning, DivergedInputError, DomainError, ShapeError
from .spectral import (
    RealField,
    SpectralFieldData,
    forward_transform,
    heat_kernel_field,
    inverse_transform,
    lm_norm,
    mass,
)


@dataclass(frozen=True)
class ExchangerParams:
    sigma: float
    mu: float
    nu: float

    def __post_init__(self):
        for name in ("sigma", "mu", "nu"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be positive, got {value}")

    @property
    def rate(self) -> float:
        """Exchange relaxation rate mu + nu."""
        return self.mu + self.nu


@dataclass
class StatePair:
    t: float
    u: RealField
    v: RealField

    def __post_init__(self):
        if self.u.grid != self.v.grid:
            raise ShapeError("u and v must share one grid")
        if self.t < 0:
            raise DomainError(f"time must be nonnegative, got {self.t}")

    @property
    def grid(self):
        return self.u.grid

    def is_finite(self) -> bool:
        return self.u.is_finite() and self.v.is_finite()


def kernel_factors(t: float, params: ExchangerParams):
    """Mixing coefficients (a0u, a1u, a0v, a1v) of the four solution kernels.

    u_hat(t) = G_hat(t) (a0u u0_hat + a1u v0_hat)
    v_hat(t) = G_hat(t) (a0v u0_hat + a1v v0_hat)
    """
    if t < 0:
        raise DomainError(f"t must be nonnegative, got {t}")
    mu, nu = params.mu, params.nu
    E = np.exp(-(mu + nu) * t)
    total = mu + nu
    a0u = (nu + mu * E) / total
    a1u = (nu - nu * E) / total
    a0v = (mu - mu * E) / total
    a1v = (mu + nu * E) / total
    return a0u, a1u, a0v, a1v


def _propagate_hats(uh, vh, modulus, t, params):
    decay = np.exp(-(modulus ** (2.0 * params.sigma)) * t)
    a0u, a1u, a0v, a1v = kernel_factors(t, params)
    return decay * (a0u * uh + a1u * vh), decay * (a0v * uh + a1v * vh)


def linear_propagate(state: StatePair, dt: float, params: ExchangerParams) -> StatePair:
    """Advance the linear system exactly by ``dt``."""
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt}")
    if not state.is_finite():
        raise DivergedInputError("refusing to propagate a diverged state")
    grid = state.grid
    U = forward_transform(state.u).coefficients
    V = forward_transform(state.v).coefficients
    Uh, Vh = _propagate_hats(U, V, grid.wavenumber_modulus(), dt, params)
    return StatePair(
        state.t + dt,
        inverse_transform(SpectralFieldData(grid, Uh)),
        inverse_transform(SpectralFieldData(grid, Vh)),
    )


def linear_solution(u0: RealField, v0: RealField, t: float, params: ExchangerParams) -> StatePair:
    """Closed-form state at time ``t`` started from (u0, v0) at time 0."""
    state = StatePair(0.0, u0, v0)
    if t == 0:
        return StatePair(0.0, RealField(u0.grid, u0.values.copy()),
                         RealField(v0.grid, v0.values.copy()))
    return linear_propagate(state, t, params)


def linear_trajectory(u0, v0, times, params: ExchangerParams) -> list[StatePair]:
    """Exact states at each of ``times`` (each evaluated directly from t = 0)."""
    return [linear_solution(u0, v0, float(t), params) for t in times]


def _gamma_check(gamma, params):
    if gamma not in (params.mu, params.nu):
        raise DomainError(f"gamma must be mu={params.mu} or nu={params.nu}, got {gamma}")


def linear_profile(t, gamma, params: ExchangerParams, u0: RealField, v0: RealField) -> RealField:
    """gamma/(mu+nu) * G(t) (u0 + v0)."""
    if not t > 0:
        raise DomainError(f"profile needs t > 0, got {t}")
    _gamma_check(gamma, params)
    G = SpectralFieldData(u0.grid, np.exp(-(u0.grid.wavenumber_modulus() ** (2 * params.sigma)) * t))
    S = forward_transform(u0 + v0)
    sm = inverse_transform(SpectralFieldData(u0.grid, S.coefficients * G.coefficients))
    return sm * (gamma / params.rate)


def _decay_exponent(dim, sigma, m):
    inv_m = 0.0 if np.isinf(m) else 1.0 / m
    return dim / (2.0 * sigma) * (1.0 - inv_m)


@dataclass
class ProfileErrorSeries:
    """||w(t) - w_prof(t)||_m for both components and fitted envelope constants.

    ``constant_u`` is the smallest C with value(t) <= C exp(-(mu+nu) t)
    t^(-(n/2 sigma)(1-1/m)) over the sampled t >= 1.
    """

    times: np.ndarray
    u: np.ndarray
    v: np.ndarray
    m: float
    constant_u: float
    constant_v: float


def error_vs_profile(states, m, params: ExchangerParams, u0: RealField, v0: RealField) -> ProfileErrorSeries:
    grid = u0.grid
    if v0.grid != grid:
        raise ShapeError("u0 and v0 grids differ")
    times, eu, ev = [], [], []
    for st in states:
        if st.grid != grid:
            raise ShapeError(f"state at t={st.t} lives on a different grid")
        if st.t == 0:
            pu = (u0 + v0) * (params.nu / params.rate)
            pv = (u0 + v0) * (params.mu / params.rate)
        else:
            pu = linear_profile(st.t, params.nu, params, u0, v0)
            pv = linear_profile(st.t, params.mu, params, u0, v0)
        times.append(st.t)
        eu.append(lm_norm(st.u - pu, m))
        ev.append(lm_norm(st.v - pv, m))
    times = np.asarray(times, dtype=float)
    eu, ev = np.asarray(eu), np.asarray(ev)
    late = times >= 1
    with np.errstate(over="ignore", divide="ignore"):
        env = np.exp(-params.rate * times) * times ** (-_decay_exponent(grid.dim, params.sigma, m))
    cu = float(np.max(eu[late] / env[late])) if late.any() else float("nan")
    cv = float(np.max(ev[late] / env[late])) if late.any() else float("nan")
    return ProfileErrorSeries(times, eu, ev, m, cu, cv)


@dataclass
class L2Bounds:
    """Two-sided L^2 sandwich for the linear solution.

    ``lower_*`` subtracts the computed shape and exchange corrections from
    gamma/(mu+nu) |P| ||G(t)||_2 (a triangle-inequality lower bound);
    ``upper_*`` is the Young-inequality bound with ||G(t)||_2 t^(n/4 sigma)
    fixed at the first comparison time.
    """

    times: np.ndarray
    lower_u: np.ndarray
    norm_u: np.ndarray
    upper_u: np.ndarray
    lower_v: np.ndarray
    norm_v: np.ndarray
    upper_v: np.ndarray
    scaled_u: np.ndarray
    scaled_v: np.ndarray
    degenerate: bool
    cauchy_spread_u: float
    cauchy_spread_v: float

    @property
    def converged(self) -> bool:
        return (not self.degenerate and self.cauchy_spread_u <= 0.05
                and self.cauchy_spread_v <= 0.05)


def _last_decade_spread(times, values):
    if len(times) == 0:
        return float("nan")
    sel = times >= times[-1] / 10.0
    vals = values[sel]
    return float(vals.max() / vals.min() - 1.0) if vals.min() > 0 else float("inf")


def l2_lower_upper(states, params: ExchangerParams, u0: RealField, v0: RealField) -> L2Bounds:
    grid = u0.grid
    g0 = u0 + v0
    P = mass(g0)
    degenerate = abs(P) <= 1e-12 * max(lm_norm(g0, 1), np.finfo(float).tiny)
    states = [s for s in states if s.t >= 1]
    times = np.array([s.t for s in states], dtype=float)
    norm_u = np.array([lm_norm(s.u, 2) for s in states])
    norm_v = np.array([lm_norm(s.v, 2) for s in states])
    expo = grid.dim / (4.0 * params.sigma)
    scaled_u, scaled_v = norm_u * times ** expo, norm_v * times ** expo
    nan = np.full_like(times, np.nan)
    if degenerate:
        warnings.warn("P(u0+v0) = 0: no L2 bounds claimed", DegenerateWarning, stacklevel=2)
        return L2Bounds(times, nan, norm_u, nan, nan, norm_v, nan, scaled_u, scaled_v,
                        True, float("nan"), float("nan"))

    modulus = grid.wavenumber_modulus()
    G0 = forward_transform(g0).coefficients
    skew_hat = params.mu * forward_transform(u0).coefficients - params.nu * forward_transform(v0).coefficients
    skew_l1 = lm_norm(params.mu * u0 - params.nu * v0, 1)
    g_l1 = lm_norm(g0, 1)
    lower_u, lower_v, upper_u, upper_v = [], [], [], []
    c_kernel = None
    for t in times:
        heat = np.exp(-(modulus ** (2 * params.sigma)) * t)
        E = np.exp(-params.rate * t)
        kernel = inverse_transform(SpectralFieldData(grid, heat))
        g_norm = lm_norm(kernel, 2)
        shape_err = lm_norm(inverse_transform(SpectralFieldData(grid, heat * G0)) - kernel * P, 2)
        exch = lm_norm(inverse_transform(SpectralFieldData(grid, heat * E * skew_hat)), 2) / params.rate
        if c_kernel is None:
            c_kernel = g_norm * t ** expo
        g_fit = c_kernel * t ** (-expo)
        for gamma, lo, up in ((params.nu, lower_u, upper_u), (params.mu, lower_v, upper_v)):
            frac = gamma / params.rate
            lo.append(frac * (g_norm * abs(P) - shape_err) - exch)
            up.append(g_fit * (frac * g_l1 + E * skew_l1 / params.rate))
    return L2Bounds(
        times, np.array(lower_u), norm_u, np.array(upper_u),
        np.array(lower_v), norm_v, np.array(upper_v), scaled_u, scaled_v, False,
        _last_decade_spread(times, scaled_u), _last_decade_spread(times, scaled_v),
    )


def heat_kernel_l2(t, grid, sigma) -> float:
    """||G(t, .)||_2 of the discrete kernel."""
    return lm_norm(heat_kernel_field(t, grid, sigma), 2)
