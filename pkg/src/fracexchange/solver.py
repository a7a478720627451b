"""
Exponential Heun integration of the semilinear exchanger system
================================================================

    u_t + (-Delta)^sigma u + mu u - nu v = u^p
    v_t + (-Delta)^sigma v - mu u + nu v = v^q,     (u, v)(0) = eps (u0, v0)

Writing S(dt) for the exact per-mode linear propagator and N = (u^p, v^q),
one step is

    predictor   U~  = S U + dt S N(U)
    corrector   U+  = S U + dt/2 (S N(U) + N(U~))

i.e. the trapezoid rule applied to the Duhamel integral over one step.
Fields are advanced on the half spectrum of ``scipy.fft.rfftn``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.fft as sfft

from .errors import DivergedInputError, DomainError, PreconditionError, SignDomainError
from .linear import ExchangerParams, StatePair, kernel_factors
from .series import NormSeries
from .spectral import RealField, lm_norm

SIGNED = "signed_power"
PLAIN = "plain_power"
CONVENTIONS = (SIGNED, PLAIN)

# relative negativity tolerated by plain powers inside the solver (FFT rounding)
PLAIN_NEGATIVE_TOL = 1e-8


@dataclass(frozen=True)
class SemilinearParams:
    exchanger: ExchangerParams
    p: float
    q: float
    epsilon: float
    nonlin_convention: str = SIGNED

    def __post_init__(self):
        if not self.p > 1 or not self.q > 1:
            raise DomainError(f"need p, q > 1, got p={self.p}, q={self.q}")
        if not (self.epsilon >= 0 and np.isfinite(self.epsilon)):
            raise DomainError(f"epsilon must be nonnegative, got {self.epsilon}")
        if self.nonlin_convention not in CONVENTIONS:
            raise DomainError(f"unknown nonlinearity convention {self.nonlin_convention!r}")


@dataclass(frozen=True)
class SolverConfig:
    """Time stepping controls.

    ``linear_only`` switches the nonlinearity off (test hook).  When a run
    blows up and ``refine`` is set, it is repeated at dt/2, dt/4, ... until
    two consecutive detection times agree within ``refine_tolerance`` or
    ``max_refinements`` halvings were spent.
    """

    dt: float
    t_max: float
    snapshot_stride: int = 1
    blowup_threshold: float = 1e6
    dealias: bool = False
    linear_only: bool = False
    refine: bool = True
    refine_tolerance: float = 0.02
    max_refinements: int = 4
    resolution_probe: float = 1.0

    def __post_init__(self):
        if not (self.dt > 0 and self.t_max > 0):
            raise DomainError("dt and t_max must be positive")
        if not self.dt < self.t_max:
            raise DomainError(f"dt={self.dt} must be below t_max={self.t_max}")
        if int(self.snapshot_stride) != self.snapshot_stride or self.snapshot_stride < 1:
            raise DomainError("snapshot_stride must be a positive integer")
        if not self.blowup_threshold > 1:
            raise DomainError("blowup_threshold must exceed 1")


COMPLETED = "completed"
BLOWUP = "blowup"
ABORTED = "aborted"


@dataclass
class Trajectory:
    params: SemilinearParams
    config: SolverConfig
    snapshots: list
    norm_series: NormSeries
    outcome: str
    blowup_time: float | None = None
    abort_reason: str | None = None
    dt_used: float = 0.0
    refinement_times: list = field(default_factory=list)
    refinement_converged: bool | None = None
    spectral_tail: float | None = None

    @property
    def grid(self):
        return self.snapshots[0].grid

    @property
    def snapshot_times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    @property
    def blew_up(self) -> bool:
        return self.outcome == BLOWUP


def _power(w, r, convention, negative_tol=0.0):
    if convention == PLAIN:
        lo = w.min() if w.size else 0.0
        if lo < 0:
            if lo < -negative_tol * np.abs(w).max():
                raise SignDomainError(f"plain power of a state with min {lo:.3e}")
            w = np.maximum(w, 0.0)
        if float(r).is_integer():
            return w ** int(r)
        return w ** r
    # sign(w) |w|^r; built from |w| so that the map is exactly odd in floating point
    a = np.abs(w)
    return np.copysign(a ** int(r) if float(r).is_integer() else a ** r, w)


def nonlinearity(w: RealField, r: float, convention: str = SIGNED) -> RealField:
    """Pointwise power of a field under the chosen sign convention.

    The result carries ``diverged=True`` when the power overflows.
    """
    if convention not in CONVENTIONS:
        raise DomainError(f"unknown nonlinearity convention {convention!r}")
    with np.errstate(over="ignore", invalid="ignore"):
        out = _power(w.values, r, convention)
    return RealField(w.grid, out, diverged=not np.all(np.isfinite(out)))


class _Stepper:
    """Precomputed propagator and dealiasing masks for one (grid, params, dt)."""

    def __init__(self, grid, params: SemilinearParams, config: SolverConfig, dt: float):
        ex = params.exchanger
        self.grid = grid
        self.shape = grid.shape
        self.params = params
        self.dt = dt
        self.linear_only = config.linear_only
        decay = np.exp(-(grid.rfft_modulus() ** (2.0 * ex.sigma)) * dt)
        a0u, a1u, a0v, a1v = kernel_factors(dt, ex)
        self.s00, self.s01 = decay * a0u, decay * a1u
        self.s10, self.s11 = decay * a0v, decay * a1v
        kmax = grid.rfft_max_index()
        self.keep = (kmax <= grid.points_per_axis // 3) if config.dealias else None
        self.tail_modes = kmax > grid.points_per_axis // 3
        self.neg_tol = PLAIN_NEGATIVE_TOL

    def rfft(self, a):
        return sfft.rfftn(a)

    def irfft(self, a):
        return sfft.irfftn(a, s=self.shape)

    def S(self, uh, vh):
        return self.s00 * uh + self.s01 * vh, self.s10 * uh + self.s11 * vh

    def _one(self, w, wh, r):
        conv = self.params.nonlin_convention
        if self.keep is not None and float(r).is_integer():
            w = self.irfft(wh * self.keep)
        with np.errstate(over="ignore", invalid="ignore"):
            nh = self.rfft(_power(w, r, conv, self.neg_tol))
        if self.keep is not None:
            nh = nh * self.keep
        return nh

    def nonlinear_hats(self, u, v, uh, vh):
        """Half-spectrum coefficients of (u^p, v^q) as used by the integrator."""
        if self.linear_only:
            z = np.zeros_like(uh)
            return z, z
        return self._one(u, uh, self.params.p), self._one(v, vh, self.params.q)

    def step(self, uh, vh, u, v):
        dt = self.dt
        nu_h, nv_h = self.nonlinear_hats(u, v, uh, vh)
        su, sv = self.S(uh, vh)
        if self.linear_only:
            return su, sv, self.irfft(su), self.irfft(sv)
        snu, snv = self.S(nu_h, nv_h)
        pu_h, pv_h = su + dt * snu, sv + dt * snv
        nu1, nv1 = self.nonlinear_hats(self.irfft(pu_h), self.irfft(pv_h), pu_h, pv_h)
        uh_new = su + 0.5 * dt * (snu + nu1)
        vh_new = sv + 0.5 * dt * (snv + nv1)
        return uh_new, vh_new, self.irfft(uh_new), self.irfft(vh_new)

    def tail_ratio(self, uh, vh) -> float:
        a = np.abs(uh) + np.abs(vh)
        peak = a.max()
        return float(a[self.tail_modes].max() / peak) if peak > 0 else 0.0


def step(state: StatePair, dt: float, params: SemilinearParams, config: SolverConfig) -> StatePair:
    """One exponential Heun step; a non-finite result is returned flagged as diverged."""
    if not state.is_finite():
        raise DivergedInputError("cannot step a diverged state")
    st = _Stepper(state.grid, params, config, dt)
    uh, vh = st.rfft(state.u.values), st.rfft(state.v.values)
    with np.errstate(over="ignore", invalid="ignore"):
        _, _, u, v = st.step(uh, vh, state.u.values, state.v.values)
    return StatePair(state.t + dt, RealField(state.grid, u), RealField(state.grid, v))


def _norms(a, cell):
    b = np.abs(a)
    return cell * b.sum(), math.sqrt(cell * np.dot(b.ravel(), b.ravel())), b.max()


def _integrate(params, config, u0, v0, dt, stride, t_max):
    grid = u0.grid
    eps = params.epsilon
    st = _Stepper(grid, params, config, dt)
    cell = grid.cell_volume
    u, v = eps * u0.values, eps * v0.values
    uh, vh = st.rfft(u), st.rfft(v)
    snapshots = [StatePair(0.0, RealField(grid, u.copy()), RealField(grid, v.copy()))]
    times, rows = [0.0], [_norms(u, cell) + _norms(v, cell)]
    outcome, t_blow, reason, tail = COMPLETED, None, None, None
    if rows[0][2] + rows[0][5] >= config.resolution_probe:
        tail = st.tail_ratio(uh, vh)
    nsteps = int(math.ceil(t_max / dt - 1e-9))
    for k in range(1, nsteps + 1):
        t = k * dt
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                uh, vh, u, v = st.step(uh, vh, u, v)
                row = _norms(u, cell) + _norms(v, cell)
        except SignDomainError as exc:
            outcome, reason = ABORTED, f"sign-domain violation at t={t:.6g}: {exc}"
            break
        peak = row[2] + row[5]
        finite = all(np.isfinite(row))
        if finite:
            times.append(t)
            rows.append(row)
        if not finite or peak > config.blowup_threshold:
            outcome, t_blow = BLOWUP, t
            break
        if tail is None and peak >= config.resolution_probe:
            tail = st.tail_ratio(uh, vh)
        if k % stride == 0 or k == nsteps:
            snapshots.append(StatePair(t, RealField(grid, u.copy()), RealField(grid, v.copy())))
    rows = np.array(rows)
    entries = {}
    for j, (f, m) in enumerate([(f, m) for f in ("u", "v") for m in (1, 2, np.inf)]):
        entries[(f, m)] = rows[:, j]
    series = NormSeries(np.array(times), entries)
    return Trajectory(params, config, snapshots, series, outcome, t_blow, reason, dt,
                      spectral_tail=tail)


def _check_data(u0, v0):
    if u0.grid != v0.grid:
        raise DomainError("u0 and v0 must share one grid")
    if not (u0.is_finite() and v0.is_finite()):
        raise DivergedInputError("initial data must be finite")


def simulate(params: SemilinearParams, config: SolverConfig, u0: RealField, v0: RealField,
             t_max: float | None = None) -> Trajectory:
    """Integrate from (eps u0, eps v0) to ``t_max`` (default ``config.t_max``) or blow-up.

    On blow-up the run is repeated with halved steps (snapshot spacing in time
    is preserved) and the finest run is returned; ``refinement_times`` lists
    the detection time at each level.
    """
    _check_data(u0, v0)
    horizon = config.t_max if t_max is None else t_max
    stride = int(config.snapshot_stride)
    traj = _integrate(params, config, u0, v0, config.dt, stride, horizon)
    if traj.outcome != BLOWUP or not config.refine:
        if traj.outcome == BLOWUP:
            traj.refinement_times = [traj.blowup_time]
        return traj
    detections = [traj.blowup_time]
    converged = False
    dt = config.dt
    for _ in range(config.max_refinements):
        dt /= 2
        stride *= 2
        traj = _integrate(params, config, u0, v0, dt, stride, horizon)
        if traj.outcome != BLOWUP:
            break
        detections.append(traj.blowup_time)
        if len(detections) >= 3:
            a, b = detections[-2], detections[-1]
            if abs(a - b) <= config.refine_tolerance * b:
                converged = True
                break
    traj.refinement_times = detections
    traj.refinement_converged = converged if traj.outcome == BLOWUP else None
    return traj


def nonlinear_hats_for(traj: Trajectory, state: StatePair):
    """(u^p, v^q) half-spectrum coefficients exactly as the integrator formed them."""
    st = _Stepper(state.grid, traj.params, traj.config, traj.dt_used)
    uh, vh = st.rfft(state.u.values), st.rfft(state.v.values)
    return st.nonlinear_hats(state.u.values, state.v.values, uh, vh)


def duhamel_residual(traj: Trajectory, w_choice: str, m: float) -> float:
    """Max over snapshot times of the L^m defect of the Duhamel integral equation.

    The time integral is evaluated with the trapezoid rule over the stored
    snapshots.
    """
    if traj.outcome != COMPLETED:
        raise PreconditionError(f"duhamel residual needs a completed run, got {traj.outcome}")
    if w_choice not in ("u", "v"):
        raise DomainError("w_choice must be 'u' or 'v'")
    snaps = traj.snapshots
    times = traj.snapshot_times
    if len(times) > 1 and np.max(np.diff(times)) > 0.1 + 1e-12:
        raise PreconditionError("snapshot spacing exceeds 0.1; quadrature too coarse")
    grid = traj.grid
    ex = traj.params.exchanger
    lam = grid.rfft_modulus() ** (2.0 * ex.sigma)
    shape = grid.shape
    hats = [(sfft.rfftn(s.u.values), sfft.rfftn(s.v.values)) for s in snaps]
    nl = [nonlinear_hats_for(traj, s) for s in snaps]
    u0h, v0h = hats[0]

    def kernels(tau):
        a0u, a1u, a0v, a1v = kernel_factors(tau, ex)
        decay = np.exp(-lam * tau)
        if w_choice == "u":
            return decay * a0u, decay * a1u
        return decay * a0v, decay * a1v

    worst = 0.0
    for k in range(len(times)):
        t = times[k]
        K0, K1 = kernels(t)
        rec = K0 * u0h + K1 * v0h
        if k > 0:
            acc = np.zeros_like(rec)
            for j in range(k + 1):
                w = 0.5 * ((times[j + 1] - times[j]) if j < k else 0.0) + \
                    0.5 * ((times[j] - times[j - 1]) if j > 0 else 0.0)
                K0, K1 = kernels(t - times[j])
                acc += w * (K0 * nl[j][0] + K1 * nl[j][1])
            rec = rec + acc
        actual = hats[k][0] if w_choice == "u" else hats[k][1]
        diff = RealField(grid, sfft.irfftn(actual - rec, s=shape))
        worst = max(worst, lm_norm(diff, m))
    return float(worst)


def with_dt(config: SolverConfig, dt: float) -> SolverConfig:
    return replace(config, dt=dt)
