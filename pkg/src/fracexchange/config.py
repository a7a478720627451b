"""
Experiment configuration files.

The format is line oriented: ``[section]`` headers, one ``key = value`` per
line, ``#`` starts a comment.  Every key can be overridden from the
environment as ``FRACX_<SECTION>__<KEY>`` (e.g. ``FRACX_MODEL__SIGMA=0.5``).

Sections and keys (defaults in parentheses, no default = required)::

    [model]    dim (1), sigma, mu, nu, p, q, epsilon (1.0), nonlin (signed)
    [grid]     points, half_length
    [time]     dt, t_max, snapshot_stride (1), dealias (false)
    [initial]  u0_kind (gaussian), u0_amplitude (1), u0_center (0), u0_width (1),
               u0_radius (1), u0_mode (1), u0_value (1), u0_path; same for v0_*
    [lifespan] eps_list | eps_max, eps_min, count; blowup_threshold (1e6),
               workers (1), cap_factor (50)
    [output]   directory (out), emit_svg (true)
    [kernel]   sigmas (0.5, 1, 1.5), orders (1, 2, inf), s_multiples (0, 1),
               t (1), factor (4), tolerance (0.02), gauss_tolerance (1e-6),
               poisson_tolerance (1e-4)
    [checks]   profile_norm (inf), profile_early (t_max/20, t_max/4),
               profile_late (t_max/4, t_max), profile_ratio (0.5),
               l2_from (t_max/5), l2_band (0.1), slope_tolerance (0.1),
               l1_slope_tolerance (0.05), expected_lifespan, lifespan_tolerance (0.02)
"""

from __future__ import annotations

import configparser
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .initial_data import KINDS, DataSpec, make_field
from .linear import ExchangerParams
from .solver import PLAIN, SIGNED, SemilinearParams, SolverConfig
from .spectral import GridSpec

ENV_PREFIX = "FRACX_"
REQUIRED = object()


def _float(s):
    s = s.strip().lower()
    if s in ("inf", "+inf", "infinity"):
        return math.inf
    return float(s)


def _int(s):
    v = float(s)
    if not v.is_integer():
        raise ValueError(f"{s!r} is not an integer")
    return int(v)


def _bool(s):
    s = s.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"{s!r} is not a boolean")


def _floats(s):
    return tuple(_float(x) for x in s.replace(";", ",").split(",") if x.strip())


def _ints(s):
    return tuple(_int(x) for x in s.replace(";", ",").split(",") if x.strip())


def _str(s):
    return s.strip()


_DATA_KEYS = {
    "kind": (_str, "gaussian"),
    "amplitude": (_float, 1.0),
    "center": (_floats, (0.0,)),
    "width": (_float, 1.0),
    "radius": (_float, 1.0),
    "mode": (_ints, (1,)),
    "value": (_float, 1.0),
    "path": (_str, None),
}

SCHEMA = {
    "model": {
        "dim": (_int, 1),
        "sigma": (_float, REQUIRED),
        "mu": (_float, REQUIRED),
        "nu": (_float, REQUIRED),
        "p": (_float, REQUIRED),
        "q": (_float, REQUIRED),
        "epsilon": (_float, 1.0),
        "nonlin": (_str, "signed"),
    },
    "grid": {"points": (_int, REQUIRED), "half_length": (_float, REQUIRED)},
    "time": {
        "dt": (_float, REQUIRED),
        "t_max": (_float, REQUIRED),
        "snapshot_stride": (_int, 1),
        "dealias": (_bool, False),
    },
    "initial": {f"{w}_{k}": spec for w in ("u0", "v0") for k, spec in _DATA_KEYS.items()},
    "lifespan": {
        "eps_list": (_floats, None),
        "eps_max": (_float, None),
        "eps_min": (_float, None),
        "count": (_int, None),
        "blowup_threshold": (_float, 1e6),
        "workers": (_int, 1),
        "cap_factor": (_float, 50.0),
    },
    "output": {"directory": (_str, "out"), "emit_svg": (_bool, True)},
    "kernel": {
        "sigmas": (_floats, (0.5, 1.0, 1.5)),
        "orders": (_floats, (1.0, 2.0, math.inf)),
        "s_multiples": (_floats, (0.0, 1.0)),
        "t": (_float, 1.0),
        "factor": (_float, 4.0),
        "tolerance": (_float, 0.02),
        "gauss_tolerance": (_float, 1e-6),
        "poisson_tolerance": (_float, 1e-4),
    },
    "checks": {
        "profile_norm": (_float, math.inf),
        "profile_early": (_floats, None),
        "profile_late": (_floats, None),
        "profile_ratio": (_float, 0.5),
        "l2_from": (_float, None),
        "l2_band": (_float, 0.1),
        "slope_tolerance": (_float, 0.1),
        "l1_slope_tolerance": (_float, 0.05),
        "expected_lifespan": (_float, None),
        "lifespan_tolerance": (_float, 0.02),
    },
}


@dataclass
class ExperimentConfig:
    """Validated configuration; ``values[section][key]`` holds typed values."""

    values: dict
    source: str = "<text>"
    base_dir: Path = field(default_factory=Path.cwd)

    def __getitem__(self, section):
        return self.values[section]

    def grid(self) -> GridSpec:
        g = self.values["grid"]
        return GridSpec(self.values["model"]["dim"], g["points"], g["half_length"])

    def exchanger(self) -> ExchangerParams:
        m = self.values["model"]
        return ExchangerParams(m["sigma"], m["mu"], m["nu"])

    def semilinear(self) -> SemilinearParams:
        m = self.values["model"]
        conv = SIGNED if m["nonlin"] == "signed" else PLAIN
        return SemilinearParams(self.exchanger(), m["p"], m["q"], m["epsilon"], conv)

    def solver(self, **overrides) -> SolverConfig:
        t = self.values["time"]
        kw = dict(dt=t["dt"], t_max=t["t_max"], snapshot_stride=t["snapshot_stride"],
                  dealias=t["dealias"],
                  blowup_threshold=self.values["lifespan"]["blowup_threshold"])
        kw.update(overrides)
        return SolverConfig(**kw)

    def data_spec(self, which: str) -> DataSpec:
        ini = self.values["initial"]
        kw = {k: ini[f"{which}_{k}"] for k in _DATA_KEYS}
        if kw["path"] is not None and not Path(kw["path"]).is_absolute():
            kw["path"] = str(self.base_dir / kw["path"])
        return DataSpec(**kw)

    def initial_fields(self):
        g = self.grid()
        return make_field(g, self.data_spec("u0")), make_field(g, self.data_spec("v0"))

    def epsilons(self) -> list:
        ls = self.values["lifespan"]
        if ls["eps_list"]:
            return list(ls["eps_list"])
        hi, lo, n = ls["eps_max"], ls["eps_min"], ls["count"]
        return list(np.geomspace(hi, lo, n))

    def output_dir(self) -> Path:
        d = Path(self.values["output"]["directory"])
        return d if d.is_absolute() else self.base_dir / d


def _check_constraints(v, errors):
    def need(cond, path, msg):
        if not cond:
            errors.append(f"{path}: {msg}")

    m, g, t = v["model"], v["grid"], v["time"]
    if m.get("dim") is not None:
        need(m["dim"] in (1, 2, 3), "model.dim", "must be 1, 2 or 3")
    for key in ("sigma", "mu", "nu"):
        if m.get(key) is not None:
            need(m[key] > 0 and math.isfinite(m[key]), f"model.{key}", "must be positive")
    for key in ("p", "q"):
        if m.get(key) is not None:
            need(m[key] > 1 and math.isfinite(m[key]), f"model.{key}", "must exceed 1")
    if m.get("epsilon") is not None:
        need(m["epsilon"] >= 0 and math.isfinite(m["epsilon"]), "model.epsilon", "must be nonnegative")
    if m.get("nonlin") is not None:
        need(m["nonlin"] in ("signed", "plain"), "model.nonlin", "must be 'signed' or 'plain'")
    if g.get("points") is not None:
        need(g["points"] >= 8 and g["points"] % 2 == 0, "grid.points", "must be an even integer >= 8")
    if g.get("half_length") is not None:
        need(g["half_length"] > 0 and math.isfinite(g["half_length"]), "grid.half_length", "must be positive")
    if t.get("dt") is not None:
        need(t["dt"] > 0, "time.dt", "must be positive")
    if t.get("t_max") is not None:
        need(t["t_max"] > 0, "time.t_max", "must be positive")
        if t.get("dt") is not None and t["dt"] > 0:
            need(t["dt"] < t["t_max"], "time.dt", "must be below time.t_max")
    if t.get("snapshot_stride") is not None:
        need(t["snapshot_stride"] >= 1, "time.snapshot_stride", "must be >= 1")
    ini = v["initial"]
    for w in ("u0", "v0"):
        kind = ini.get(f"{w}_kind")
        if kind is not None:
            need(kind in KINDS, f"initial.{w}_kind", f"must be one of {', '.join(KINDS)}")
            if kind == "file":
                need(ini.get(f"{w}_path"), f"initial.{w}_path", "required for kind=file")
        for key in ("width", "radius"):
            val = ini.get(f"{w}_{key}")
            if val is not None:
                need(val > 0, f"initial.{w}_{key}", "must be positive")
    ls = v["lifespan"]
    if ls.get("eps_list"):
        e = ls["eps_list"]
        need(all(x > 0 for x in e), "lifespan.eps_list", "entries must be positive")
        need(all(b < a for a, b in zip(e, e[1:])), "lifespan.eps_list", "must be strictly decreasing")
    elif any(ls.get(k) is not None for k in ("eps_max", "eps_min", "count")):
        for k in ("eps_max", "eps_min", "count"):
            need(ls.get(k) is not None, f"lifespan.{k}", "required when eps_list is absent")
        if all(ls.get(k) is not None for k in ("eps_max", "eps_min", "count")):
            need(0 < ls["eps_min"] < ls["eps_max"], "lifespan.eps_min", "need 0 < eps_min < eps_max")
            need(ls["count"] >= 2, "lifespan.count", "must be >= 2")
    if ls.get("blowup_threshold") is not None:
        need(ls["blowup_threshold"] > 1, "lifespan.blowup_threshold", "must exceed 1")
    if ls.get("workers") is not None:
        need(ls["workers"] >= 1, "lifespan.workers", "must be >= 1")
    k = v["kernel"]
    if k.get("factor") is not None:
        need(k["factor"] > 1, "kernel.factor", "must exceed 1")
    if k.get("t") is not None:
        need(k["t"] > 0, "kernel.t", "must be positive")
    if k.get("orders"):
        need(all(o >= 1 for o in k["orders"]), "kernel.orders", "norm orders must be >= 1")


def _read_text(text: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(
        delimiters=("=",), comment_prefixes=("#",), inline_comment_prefixes=("#",),
        interpolation=None, strict=True,
    )
    cp.optionxform = str
    cp.read_string(text)
    return cp


def parse_config(source, env=None, require=("model", "grid", "time")) -> ExperimentConfig:
    """Parse and validate a configuration from a path or from text.

    Keys without a default are mandatory only inside the sections named in
    ``require``.  All problems found are reported together in a
    :class:`ConfigError`.
    """
    base = Path.cwd()
    name = "<text>"
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source
                                    and "[" not in source and Path(source).exists()):
        path = Path(source)
        text = path.read_text(encoding="utf-8")
        base, name = path.resolve().parent, str(path)
    else:
        text = str(source)
    try:
        cp = _read_text(text)
    except configparser.Error as exc:
        raise ConfigError([f"syntax: {exc}"]) from exc

    raw = {s: dict(cp[s]) for s in cp.sections()}
    errors = []
    env = os.environ if env is None else env
    for var, val in env.items():
        if not var.startswith(ENV_PREFIX) or "__" not in var:
            continue
        sec, _, key = var[len(ENV_PREFIX):].partition("__")
        raw.setdefault(sec.lower(), {})[key.lower()] = val

    values = {}
    for sec in raw:
        if sec not in SCHEMA:
            errors.append(f"{sec}: unknown section")
    for sec, keys in SCHEMA.items():
        given = raw.get(sec, {})
        for key in given:
            if key not in keys:
                errors.append(f"{sec}.{key}: unknown key")
        out = {}
        for key, (conv, default) in keys.items():
            if key in given:
                try:
                    out[key] = conv(given[key])
                except (ValueError, TypeError) as exc:
                    errors.append(f"{sec}.{key}: type mismatch ({exc})")
                    out[key] = None
            elif default is REQUIRED:
                if sec in require:
                    errors.append(f"{sec}.{key}: missing required key")
                out[key] = None
            else:
                out[key] = default
        values[sec] = out
    _check_constraints(values, errors)
    if errors:
        raise ConfigError(errors)
    _fill_check_defaults(values)
    return ExperimentConfig(values, name, base)


def _fill_check_defaults(v):
    tm = v["time"]["t_max"]
    c = v["checks"]
    if tm is None:
        return
    if c["profile_early"] is None:
        c["profile_early"] = (tm / 20.0, tm / 4.0)
    if c["profile_late"] is None:
        c["profile_late"] = (tm / 4.0, tm)
    if c["l2_from"] is None:
        c["l2_from"] = tm / 5.0
