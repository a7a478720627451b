"""Command line drivers: ``fracexchange <command> --config <path> [--out DIR] [--workers K] [--no-svg]``.

Each command writes CSV tables, SVG figures (unless disabled) and a
``summary.txt`` of ``key=value`` lines into the output directory.  The exit
status is 0 exactly when every check of the command passed; configuration and
runtime errors exit with status 2.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import reports
from .analysis import (fit_decay_rate, l2_two_sided, nonlinear_mass, profile_error,
                       window_median)
from .config import ExperimentConfig, parse_config
from .errors import ConfigError, DegenerateWarning, FracExchangeError
from .lifespan import (Regime, fit_lifespan_critical, fit_lifespan_subcritical, regime, sweep,
                       theory_exponent)
from .linear import error_vs_profile, l2_lower_upper, linear_trajectory
from .solver import ABORTED, COMPLETED, simulate
from .spectral import closed_form_kernel, heat_kernel_field, kernel_scaling_ratio, lm_norm, mass

NORM_ORDERS = (1.0, 2.0, math.inf)


def _mname(m):
    return "inf" if math.isinf(m) else str(int(m))


class Checks:
    """Ordered named pass/fail results; ``None`` marks a check that did not apply."""

    def __init__(self):
        self.items = {}

    def add(self, name, ok):
        self.items[name] = None if ok is None else bool(ok)

    @property
    def passed(self) -> bool:
        return all(v is not False for v in self.items.values())

    def summary(self):
        out = {f"check_{k}": ("n/a" if v is None else v) for k, v in self.items.items()}
        out["all_checks"] = self.passed
        return out


def _finish(cfg, name, out, summary, checks):
    summary = {"command": name, "config": cfg.source, **summary, **checks.summary()}
    reports.write_summary(out / "summary.txt", summary)
    for k, v in checks.items.items():
        status = "n/a" if v is None else ("PASS" if v else "FAIL")
        print(f"{status:4s} {k}")
    print(f"{'PASS' if checks.passed else 'FAIL'} {name} -> {out}")
    return 0 if checks.passed else 1


# ---------------------------------------------------------------- linear-verify

def cmd_linear_verify(cfg: ExperimentConfig, out: Path, args) -> int:
    ex = cfg.exchanger()
    u0, v0 = cfg.initial_fields()
    t = cfg["time"]
    spacing = t["dt"] * t["snapshot_stride"]
    times = np.arange(0.0, t["t_max"] + 0.5 * spacing, spacing)
    states = linear_trajectory(u0, v0, times, ex)
    checks, summary = Checks(), {}

    total0 = mass(u0 + v0)
    skew0 = mass(ex.mu * u0 - ex.nu * v0)
    # errors are measured against the size of the summands, which stays
    # meaningful when a mass cancels to zero
    total_scale = lm_norm(u0, 1) + lm_norm(v0, 1)
    skew_scale = max(ex.mu * lm_norm(u0, 1) + ex.nu * lm_norm(v0, 1), np.finfo(float).tiny)
    rows, dm, ds = [], 0.0, 0.0
    for s in states:
        norms = [lm_norm(w, m) for w in (s.u, s.v) for m in NORM_ORDERS]
        mt = mass(s.u + s.v)
        sk = mass(ex.mu * s.u - ex.nu * s.v)
        pred = math.exp(-ex.rate * s.t) * skew0
        dm = max(dm, abs(mt - total0))
        ds = max(ds, abs(sk - pred))
        rows.append([s.t, *norms, mt, sk, pred])
    reports.write_csv(out / "linear_norms.csv", "linear_norms", rows)
    summary["mass_drift_rel"] = dm / total_scale if total_scale > 0 else 0.0
    summary["skew_mass_error_rel"] = ds / skew_scale
    checks.add("mass_conservation", total_scale == 0 or dm <= 1e-10 * total_scale)
    checks.add("skew_mass_decay", ds <= 1e-8 * skew_scale)

    vanishing = lm_norm(ex.mu * u0 - ex.nu * v0, 1) <= 1e-14 * max(
        lm_norm(ex.mu * u0, 1) + lm_norm(ex.nu * v0, 1), np.finfo(float).tiny)
    summary["profile_vanishing_case"] = "yes" if vanishing else "no"
    prow, worst, fig = [], 0.0, []
    rate_ok = True
    for m in NORM_ORDERS:
        pe = error_vs_profile(states, m, ex, u0, v0)
        expo = u0.grid.dim / (2 * ex.sigma) * (1 - (0 if math.isinf(m) else 1 / m))
        with np.errstate(over="ignore", divide="ignore"):
            env = np.exp(-ex.rate * pe.times) * pe.times ** (-expo)
        for i, tt in enumerate(pe.times):
            prow.append([tt, m, pe.u[i], pe.v[i], pe.constant_u * env[i], pe.constant_v * env[i]])
        worst = max(worst, float(pe.u.max()), float(pe.v.max()))
        fig.append((f"u, m={_mname(m)}", pe.times, pe.u))
        if not vanishing:
            # the error must decay at least like exp(-(mu+nu) t) up to the algebraic factor
            floor = 1e-12 * max(pe.u.max(), pe.v.max())
            for errs in (pe.u, pe.v):
                sel = (pe.times >= 1) & (errs > floor)
                if sel.sum() >= 3:
                    slope = np.polyfit(pe.times[sel], np.log(errs[sel]), 1)[0]
                    rate_ok &= slope <= -0.95 * ex.rate
    reports.write_csv(out / "linear_profile.csv", "linear_profile", prow)
    summary["profile_error_max"] = worst
    if vanishing:
        checks.add("profile_error_vanishes", worst <= 1e-8)
    else:
        checks.add("profile_error_exponential", rate_ok)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateWarning)
        lb = l2_lower_upper(states, ex, u0, v0)
    if lb.degenerate or len(lb.times) == 0:
        checks.add("l2_sandwich", None)
    else:
        slack = 1e-9 * max(lb.norm_u.max(), lb.norm_v.max())
        ok = (np.all(lb.lower_u <= lb.norm_u + slack) and np.all(lb.norm_u <= lb.upper_u + slack)
              and np.all(lb.lower_v <= lb.norm_v + slack) and np.all(lb.norm_v <= lb.upper_v + slack))
        checks.add("l2_sandwich", ok)
        summary["l2_scaled_spread_u"] = lb.cauchy_spread_u
        summary["l2_scaled_spread_v"] = lb.cauchy_spread_v
    if cfg["output"]["emit_svg"] and not args.no_svg:
        try:
            reports.svg_plot(out / "linear_profile.svg", fig, title="distance to the linear profile",
                             xlabel="t", ylabel="error", logx=False)
        except ValueError:
            pass  # every error is exactly zero
    return _finish(cfg, "linear-verify", out, summary, checks)


# ---------------------------------------------------------------- simulate / decay / profile

def _run(cfg):
    return simulate(cfg.semilinear(), cfg.solver(), *cfg.initial_fields())


def _norm_figure(out, traj, dim, sigma):
    ser = traj.norm_series
    sel = ser.times > 0
    lines = [(f"{f} L{_mname(m)}", ser.times[sel], ser[(f, m)][sel])
             for f in ("u", "v") for m in NORM_ORDERS]
    refs = []
    tmax = ser.times[-1]
    for m in (2.0, math.inf):
        expo = dim / (2 * sigma) * (1 - (0 if math.isinf(m) else 1 / m))
        y = float(ser[("u", m)][-1])
        if y > 0:
            refs.append((f"t^-{expo:g}", -expo, (tmax, y)))
    reports.svg_plot(out / "norms.svg", lines, title="norm decay", xlabel="t", ylabel="norm",
                     ref_slopes=refs)


def cmd_simulate(cfg, out, args) -> int:
    traj = _run(cfg)
    reports.write_csv(out / "norms.csv", "norms", reports.norm_rows(traj.norm_series))
    checks = Checks()
    checks.add("run_not_aborted", traj.outcome != ABORTED)
    summary = {"outcome": traj.outcome, "dt_used": traj.dt_used,
               "t_end": float(traj.norm_series.times[-1])}
    if traj.blew_up:
        summary["blowup_time"] = traj.blowup_time
        summary["refinement_times"] = ",".join(reports.fmt(x) for x in traj.refinement_times)
        summary["refinement_converged"] = "yes" if traj.refinement_converged else "no"
    if traj.abort_reason:
        summary["abort_reason"] = traj.abort_reason
    expected = cfg["checks"]["expected_lifespan"]
    if expected is not None:
        tol = cfg["checks"]["lifespan_tolerance"]
        checks.add("lifespan_matches_expected",
                   traj.blew_up and abs(traj.blowup_time - expected) <= tol * expected)
    if cfg["output"]["emit_svg"] and not args.no_svg:
        _norm_figure(out, traj, traj.grid.dim, cfg["model"]["sigma"])
    return _finish(cfg, "simulate", out, summary, checks)


def decay_checks(traj, cfg, checks, summary):
    dim, sigma = traj.grid.dim, cfg["model"]["sigma"]
    rel = cfg["checks"]["slope_tolerance"]
    l1_tol = cfg["checks"]["l1_slope_tolerance"]
    for f in ("u", "v"):
        for m in NORM_ORDERS:
            fit = fit_decay_rate(traj.norm_series, f, m)
            pred = -dim / (2 * sigma) * (1 - (0 if math.isinf(m) else 1 / m))
            key = f"slope_l{_mname(m)}_{f}"
            summary[key] = fit.slope
            summary[f"predicted_l{_mname(m)}_{f}"] = pred
            ok = abs(fit.slope - pred) <= (l1_tol if pred == 0 else rel * abs(pred))
            checks.add(key, ok)


def cmd_decay(cfg, out, args) -> int:
    traj = _run(cfg)
    reports.write_csv(out / "norms.csv", "norms", reports.norm_rows(traj.norm_series))
    p = cfg["model"]
    checks, summary = Checks(), {"outcome": traj.outcome,
                                 "regime": regime(p["dim"], p["sigma"], p["p"], p["q"]).value}
    checks.add("run_completed", traj.outcome == COMPLETED)
    if traj.outcome == COMPLETED:
        decay_checks(traj, cfg, checks, summary)
    if cfg["output"]["emit_svg"] and not args.no_svg:
        _norm_figure(out, traj, traj.grid.dim, p["sigma"])
    return _finish(cfg, "decay", out, summary, checks)


def profile_checks(traj, cfg, checks, summary, out=None, svg=False):
    c = cfg["checks"]
    m = c["profile_norm"]
    nl, tail = nonlinear_mass(traj)
    summary["nl_mass"] = nl
    summary["nl_mass_tail_bound"] = tail
    checks.add("nl_mass_tail_below_10pct", tail < 0.1 * abs(nl) if nl != 0 else tail == 0)
    fig = []
    for f in ("u", "v"):
        rep = profile_error(traj, f, m)
        if out is not None:
            name = "profile.csv" if f == "u" else "profile_v.csv"
            reports.write_csv(out / name, "profile",
                              ([t, e, mt, tail] for t, e, mt in zip(rep.times, rep.scaled_error, rep.main_term)))
        early = window_median(rep.times, rep.scaled_error, *c["profile_early"])
        late = window_median(rep.times, rep.scaled_error, *c["profile_late"])
        summary[f"profile_median_early_{f}"] = early
        summary[f"profile_median_late_{f}"] = late
        summary["p_mass"] = rep.p_mass
        checks.add(f"profile_decrease_{f}", late < c["profile_ratio"] * early)
        fig.append((f"{f} scaled error", rep.times, rep.scaled_error))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateWarning)
        l2 = l2_two_sided(traj)
    if l2.degenerate:
        summary["l2_degenerate"] = "yes"
        checks.add("l2_two_sided", None)
    else:
        sel = l2.times >= c["l2_from"]
        band = c["l2_band"]
        for f, r in (("u", l2.ratio_u[sel]), ("v", l2.ratio_v[sel])):
            summary[f"l2_ratio_min_{f}"] = float(r.min())
            summary[f"l2_ratio_max_{f}"] = float(r.max())
            checks.add(f"l2_two_sided_{f}", r.size > 0 and r.min() >= 1 - band and r.max() <= 1 + band)
    if svg and out is not None:
        reports.svg_plot(out / "profile.svg", fig, title="scaled profile error", xlabel="t",
                         ylabel="scaled error")


def cmd_profile(cfg, out, args) -> int:
    traj = _run(cfg)
    reports.write_csv(out / "norms.csv", "norms", reports.norm_rows(traj.norm_series))
    checks, summary = Checks(), {"outcome": traj.outcome}
    checks.add("run_completed", traj.outcome == COMPLETED)
    if traj.outcome == COMPLETED:
        profile_checks(traj, cfg, checks, summary, out,
                       svg=cfg["output"]["emit_svg"] and not args.no_svg)
    return _finish(cfg, "profile", out, summary, checks)


# ---------------------------------------------------------------- lifespan-sweep

def cmd_lifespan_sweep(cfg, out, args) -> int:
    par = cfg.semilinear()
    u0, v0 = cfg.initial_fields()
    ls = cfg["lifespan"]
    workers = args.workers if args.workers else ls["workers"]
    eps = cfg.epsilons()
    table = sweep(par, cfg.solver(), u0, v0, eps, workers=workers, cap_factor=ls["cap_factor"])
    reports.write_csv(out / "lifespan.csv", "lifespan",
                      ([e.epsilon, e.lifespan, e.status, e.dt_used] for e in table.entries))
    dim, sigma = u0.grid.dim, par.exchanger.sigma
    reg = regime(dim, sigma, par.p, par.q)
    th = theory_exponent(dim, sigma, par.p, par.q)
    checks = Checks()
    summary = {"regime": reg.value,
               "theory_exponent": th if not isinstance(th, Regime) else th.value,
               "uncensored": len(table.uncensored), "entries": len(table.entries)}
    unc = table.uncensored
    checks.add("entries_reliable", all(e.reliable for e in unc) if unc else None)
    fit = None
    if reg is Regime.SUPERCRITICAL:
        checks.add("all_censored", not unc)
    elif reg is Regime.SUBCRITICAL:
        fit = fit_lifespan_subcritical(table)
        summary["exponent"] = fit.slope
        summary["r_squared"] = fit.r_squared
        if par.p != par.q:
            # blow-up for p != q below the Fujita exponent is not established; report only
            summary["exploratory"] = "yes"
            checks.add("exponent_within_15pct", None)
            checks.add("r_squared_ge_0.98", None)
        else:
            checks.add("exponent_within_15pct", abs(fit.slope - th) <= 0.15 * abs(th))
            checks.add("r_squared_ge_0.98", fit.r_squared >= 0.98)
    else:
        fit = fit_lifespan_critical(table)
        summary["critical_slope"] = fit.slope
        summary["r_squared"] = fit.r_squared
        checks.add("critical_slope_positive", fit.slope > 0)
        checks.add("r_squared_ge_0.9", fit.r_squared >= 0.9)
    if cfg["output"]["emit_svg"] and not args.no_svg and unc:
        e = np.array([x.epsilon for x in unc])
        T = np.array([x.lifespan for x in unc])
        if reg is Regime.CRITICAL:
            xv = e ** (-2 * sigma / dim)
            reports.svg_plot(out / "lifespan.svg", [("lifespan", xv, T)], title="critical lifespan",
                             xlabel="eps^(-2 sigma/n)", ylabel="T", logx=False)
        else:
            refs = [(f"slope {th:g}", th, (e[0], T[0]))] if not isinstance(th, Regime) else []
            reports.svg_plot(out / "lifespan.svg", [("lifespan", e, T)], title="lifespan",
                             xlabel="eps", ylabel="T", ref_slopes=refs)
    return _finish(cfg, "lifespan-sweep", out, summary, checks)


# ---------------------------------------------------------------- kernel-scaling

def cmd_kernel_scaling(cfg, out, args) -> int:
    k = cfg["kernel"]
    grid = cfg.grid()
    checks, summary, rows = Checks(), {}, []
    worst = 0.0
    fig = {}
    for sigma in k["sigmas"]:
        for mult in k["s_multiples"]:
            s = mult * 2 * sigma
            for m in k["orders"]:
                r = kernel_scaling_ratio(s, sigma, m, k["t"], k["factor"], grid)
                rows.append([sigma, s, m, k["t"], k["factor"], r.ratio, r.predicted])
                dev = abs(r.ratio / r.predicted - 1)
                worst = max(worst, dev)
                fig.setdefault(f"sigma={sigma:g}", []).append((r.predicted, r.ratio))
    reports.write_csv(out / "kernel_scaling.csv", "kernel_scaling", rows)
    summary["max_relative_deviation"] = worst
    summary["tolerance"] = k["tolerance"]
    checks.add("ratios_within_tolerance", worst <= k["tolerance"])
    if 1.0 in k["sigmas"]:
        d = heat_kernel_field(k["t"], grid, 1.0) - closed_form_kernel(k["t"], grid, 1.0)
        summary["gauss_kernel_max_error"] = lm_norm(d, math.inf)
        checks.add("gauss_kernel_match", summary["gauss_kernel_max_error"] <= k["gauss_tolerance"])
    if 0.5 in k["sigmas"]:
        d = heat_kernel_field(k["t"], grid, 0.5) - closed_form_kernel(k["t"], grid, 0.5)
        central = np.all([np.abs(c) <= grid.half_length / 2 for c in grid.coordinates()], axis=0)
        err = float(np.max(np.abs(np.broadcast_to(d.values, grid.shape)[np.broadcast_to(central, grid.shape)])))
        summary["poisson_kernel_max_error_central"] = err
        checks.add("poisson_kernel_match", err <= k["poisson_tolerance"])
    if cfg["output"]["emit_svg"] and not args.no_svg:
        lines = []
        for lab, pts in fig.items():
            pts = sorted(pts)
            lines.append((lab, [a for a, _ in pts], [b for _, b in pts]))
        lo = min(min(x[1]) for x in lines)
        reports.svg_plot(out / "kernel_scaling.svg", lines, title="kernel scaling ratios",
                         xlabel="predicted", ylabel="measured", ref_slopes=[("identity", 1.0, (lo, lo))])
    return _finish(cfg, "kernel-scaling", out, summary, checks)


COMMANDS = {
    "linear-verify": (cmd_linear_verify, ("model", "grid", "time")),
    "simulate": (cmd_simulate, ("model", "grid", "time")),
    "decay": (cmd_decay, ("model", "grid", "time")),
    "profile": (cmd_profile, ("model", "grid", "time")),
    "lifespan-sweep": (cmd_lifespan_sweep, ("model", "grid", "time")),
    "kernel-scaling": (cmd_kernel_scaling, ("grid",)),
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fracexchange", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, type=Path)
    ap.add_argument("--out", type=Path, default=None, help="output directory (overrides [output] directory)")
    ap.add_argument("--workers", type=int, default=None, help="sweep worker processes")
    ap.add_argument("--no-svg", action="store_true", help="skip SVG figures")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    fn, need = COMMANDS[args.command]
    try:
        cfg = parse_config(args.config, require=need)
    except ConfigError as exc:
        print(f"config error in {args.config}:", file=sys.stderr)
        for e in exc.errors:
            print(f"  {e}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read {args.config}: {exc}", file=sys.stderr)
        return 2
    if args.workers is not None and args.workers < 1:
        print("--workers must be >= 1", file=sys.stderr)
        return 2
    out = args.out if args.out is not None else cfg.output_dir()
    out.mkdir(parents=True, exist_ok=True)
    try:
        return fn(cfg, out, args)
    except (FracExchangeError, ValueError) as exc:
        print(f"{args.command} failed for {cfg.source}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
