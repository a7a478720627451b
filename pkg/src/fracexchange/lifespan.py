"""Lifespan sweeps over the data size eps and lifespan scaling fits."""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .analysis import fit_line
from .errors import DomainError, InsufficientDataError, PreconditionError
from .series import FitResult
from .solver import ABORTED, BLOWUP, SemilinearParams, SolverConfig, simulate

CRITICAL_TOL = 1e-12


class Regime(str, enum.Enum):
    SUBCRITICAL = "subcritical"
    CRITICAL = "critical"
    SUPERCRITICAL = "supercritical"


def fujita_exponent(n, sigma) -> float:
    """p_Fuj(n / sigma) = 1 + 2 sigma / n."""
    return 1.0 + 2.0 * sigma / n


def regime(n, sigma, p, q) -> Regime:
    pmin, pf = min(p, q), fujita_exponent(n, sigma)
    if abs(pmin - pf) <= CRITICAL_TOL * max(1.0, pf):
        return Regime.CRITICAL
    return Regime.SUBCRITICAL if pmin < pf else Regime.SUPERCRITICAL


def theory_exponent(n, sigma, p, q):
    """Exponent a in T_eps ~ eps^a for subcritical exponents, else a Regime marker."""
    if not (p > 1 and q > 1):
        raise DomainError("need p, q > 1")
    r = regime(n, sigma, p, q)
    if r is not Regime.SUBCRITICAL:
        return r
    pm = min(p, q) - 1.0
    return -pm / (1.0 - n / (2.0 * sigma) * pm)


def predicted_lifespan(n, sigma, p, q, eps, eps_ref, t_ref) -> float:
    """Lifespan prior anchored at T(eps_ref) = t_ref using the theoretical law."""
    th = theory_exponent(n, sigma, p, q)
    if th is Regime.SUPERCRITICAL:
        return math.inf
    if th is Regime.CRITICAL:
        k = 2.0 * sigma / n
        return math.exp(math.log(max(t_ref, math.e)) * (eps_ref / eps) ** k)
    return t_ref * (eps / eps_ref) ** th


BLOWN = "blowup"
CENSORED = "censored"


@dataclass
class LifespanEntry:
    epsilon: float
    lifespan: float
    status: str
    dt_used: float
    reliable: bool = True
    refinement_times: list = field(default_factory=list)
    spectral_tail: float | None = None

    @property
    def censored(self) -> bool:
        return self.status != BLOWN


@dataclass
class LifespanTable:
    params: SemilinearParams | None
    entries: list
    theory_exponent: object
    dim: int = 1

    def __post_init__(self):
        eps = [e.epsilon for e in self.entries]
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise DomainError("table epsilons must be strictly decreasing")

    @property
    def uncensored(self) -> list:
        return [e for e in self.entries if not e.censored]

    @classmethod
    def synthetic(cls, epsilons, lifespans, dim=1, params=None):
        """Table from given values (all uncensored); for fit checks."""
        entries = [LifespanEntry(float(e), float(t), BLOWN, 0.0) for e, t in zip(epsilons, lifespans)]
        th = None
        if params is not None:
            p = params
            th = theory_exponent(dim, p.exchanger.sigma, p.p, p.q)
        return cls(params, entries, th, dim)


def _run_entry(args):
    params, config, u0, v0, eps, cap, tail_limit = args
    par = replace(params, epsilon=eps)
    cfg = replace(config, t_max=cap)
    traj = simulate(par, cfg, u0, v0)
    tail = traj.spectral_tail
    if traj.outcome == BLOWUP:
        reliable = bool(traj.refinement_converged) and (tail is None or tail <= tail_limit)
        return LifespanEntry(eps, float(traj.blowup_time), BLOWN, traj.dt_used, reliable,
                             list(traj.refinement_times), tail)
    status = ABORTED if traj.outcome == ABORTED else CENSORED
    return LifespanEntry(eps, math.inf, status, traj.dt_used, status == CENSORED,
                         list(traj.refinement_times), tail)


def dyadic_epsilons(eps_max, eps_min) -> list:
    out, e = [], float(eps_max)
    while e >= eps_min * (1 - 1e-12):
        out.append(e)
        e /= 2
    return out


def sweep(params: SemilinearParams, config: SolverConfig, u0, v0, epsilons, workers: int = 1,
          cap_factor: float = 50.0, tail_limit: float = 1e-3, max_snapshots: int = 50) -> LifespanTable:
    """Blow-up times for each eps (strictly decreasing).

    ``config.t_max`` is read as the expected lifespan at the first eps; the
    prior for later eps follows the theoretical law and each run may extend to
    ``cap_factor`` times its prior before it is censored.
    """
    eps = [float(e) for e in epsilons]
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise DomainError("epsilons must be strictly decreasing")
    n, sigma = u0.grid.dim, params.exchanger.sigma
    th = theory_exponent(n, sigma, params.p, params.q)
    jobs = []
    for e in eps:
        prior = predicted_lifespan(n, sigma, params.p, params.q, e, eps[0], config.t_max)
        cap = config.t_max if math.isinf(prior) else cap_factor * prior
        steps = cap / config.dt
        stride = max(int(config.snapshot_stride), int(math.ceil(steps / max_snapshots)))
        cfg = replace(config, snapshot_stride=stride)
        jobs.append((params, cfg, u0, v0, e, cap, tail_limit))
    if workers <= 1:
        entries = [_run_entry(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(_run_entry, jobs))
    return LifespanTable(params, entries, th, n)


def _fit_points(table: LifespanTable, min_entries=4):
    pts = [e for e in table.uncensored if math.isfinite(e.lifespan) and e.lifespan > 0]
    if len(pts) < min_entries:
        raise InsufficientDataError(f"need {min_entries} uncensored entries, have {len(pts)}")
    eps = np.array([e.epsilon for e in pts])
    T = np.array([e.lifespan for e in pts])
    return eps, T


def fit_lifespan_subcritical(table: LifespanTable, min_span: float = 4.0) -> FitResult:
    """Slope of log T against log eps."""
    if table.params is not None:
        p = table.params
        if regime(table.dim, p.exchanger.sigma, p.p, p.q) is not Regime.SUBCRITICAL:
            raise PreconditionError("table is not in the subcritical regime")
    eps, T = _fit_points(table)
    if eps.max() / eps.min() < min_span * (1 - 1e-12):
        raise InsufficientDataError(f"eps span {eps.max() / eps.min():.3g} below {min_span}")
    return fit_line(np.log(eps), np.log(T), window=(float(eps.min()), float(eps.max())))


def fit_lifespan_critical(table: LifespanTable, sigma: float | None = None,
                          min_span: float = 4.0) -> FitResult:
    """Linear fit of log T against eps^(-2 sigma / n); the span is measured in that variable."""
    if table.params is not None:
        p = table.params
        sigma = p.exchanger.sigma
        if regime(table.dim, sigma, p.p, p.q) is not Regime.CRITICAL:
            raise PreconditionError("table is not in the critical regime")
    if sigma is None:
        raise PreconditionError("sigma needed for a table without params")
    eps, T = _fit_points(table)
    x = eps ** (-2.0 * sigma / table.dim)
    if x.max() / x.min() < min_span * (1 - 1e-12):
        raise InsufficientDataError(f"eps^(-2 sigma/n) span {x.max() / x.min():.3g} below {min_span}")
    return fit_line(x, np.log(T), window=(float(eps.min()), float(eps.max())))
