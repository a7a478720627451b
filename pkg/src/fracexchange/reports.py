"""CSV tables, key=value summaries and a small self-contained SVG plot writer."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

SCHEMA_VERSION = 1

SCHEMAS = {
    "norms": ("t", "l1_u", "l2_u", "linf_u", "l1_v", "l2_v", "linf_v"),
    "profile": ("t", "scaled_err", "main_term", "tail_bound"),
    "lifespan": ("epsilon", "lifespan", "status", "dt_used"),
    "kernel_scaling": ("sigma", "s", "m", "t", "factor", "ratio", "predicted"),
    "linear_norms": ("t", "l1_u", "l2_u", "linf_u", "l1_v", "l2_v", "linf_v",
                     "mass_total", "skew_mass", "skew_mass_predicted"),
    "linear_profile": ("t", "m", "err_u", "err_v", "envelope_u", "envelope_v"),
}


def fmt(x) -> str:
    """17 significant digits, '.' decimal separator; strings pass through."""
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def write_csv(path, schema: str, rows) -> Path:
    """Write ``rows`` (iterables matching ``SCHEMAS[schema]``) with a versioned header comment."""
    cols = SCHEMAS[schema]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(f"# schema={schema} version={SCHEMA_VERSION}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in rows:
            row = list(row)
            if len(row) != len(cols):
                raise ValueError(f"{schema}: row has {len(row)} fields, schema has {len(cols)}")
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path):
    """Inverse of :func:`write_csv`: (schema name, columns, list of string rows)."""
    with Path(path).open(encoding="utf-8") as fh:
        head = fh.readline().strip()
        schema = dict(kv.split("=") for kv in head.lstrip("# ").split())["schema"]
        r = csv.reader(fh)
        cols = next(r)
        return schema, cols, list(r)


def norm_rows(series):
    keys = [(f, m) for f in ("u", "v") for m in (1, 2, math.inf)]
    cols = [series[k] for k in keys]
    for i, t in enumerate(series.times):
        yield [t] + [c[i] for c in cols]


def write_summary(path, items: dict) -> Path:
    """One ``key=value`` per line, keys in insertion order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    for k, v in items.items():
        if isinstance(v, bool):
            v = "pass" if v else "fail"
        elif isinstance(v, (int, float, np.floating, np.integer)):
            v = fmt(v)
        lines.append(f"{k}={v}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_summary(path) -> dict:
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if "=" in line:
            k, _, v = line.partition("=")
            out[k] = v
    return out


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _nice_decades(lo, hi):
    a, b = math.floor(math.log10(lo)), math.ceil(math.log10(hi))
    if a == b:
        b += 1
    return a, b


def svg_plot(path, series, title="", xlabel="", ylabel="", ref_slopes=(), logx=True, logy=True,
             width=640, height=440) -> Path:
    """Line plot of ``series`` = [(label, x, y), ...].

    ``ref_slopes`` = [(label, slope, (x0, y0)), ...] adds dashed power-law
    reference lines through (x0, y0).  Non-positive values are dropped on log
    axes.
    """
    ml, mr, mt, mb = 70, 150, 40, 50
    pw, ph = width - ml - mr, height - mt - mb
    clean = []
    for label, x, y in series:
        x, y = np.asarray(x, float), np.asarray(y, float)
        ok = np.isfinite(x) & np.isfinite(y)
        if logx:
            ok &= x > 0
        if logy:
            ok &= y > 0
        if ok.sum() >= 1:
            clean.append((label, x[ok], y[ok]))
    if not clean:
        raise ValueError("nothing to plot")
    allx = np.concatenate([c[1] for c in clean])
    ally = np.concatenate([c[2] for c in clean])

    def bounds(v, log):
        lo, hi = float(v.min()), float(v.max())
        if log:
            a, b = _nice_decades(lo, hi)
            return 10.0 ** a, 10.0 ** b
        if hi == lo:
            hi, lo = hi + 1.0, lo - 1.0
        pad = 0.05 * (hi - lo)
        return lo - pad, hi + pad

    x0, x1 = bounds(allx, logx)
    y0, y1 = bounds(ally, logy)
    tx = (lambda v: math.log10(v)) if logx else (lambda v: v)
    ty = (lambda v: math.log10(v)) if logy else (lambda v: v)

    def px(v):
        return ml + pw * (tx(v) - tx(x0)) / (tx(x1) - tx(x0))

    def py(v):
        return mt + ph * (1 - (ty(v) - ty(y0)) / (ty(y1) - ty(y0)))

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="12">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
           f'<text x="{ml + pw / 2}" y="{mt - 14}" text-anchor="middle" font-size="14">{escape(title)}</text>',
           f'<text x="{ml + pw / 2}" y="{height - 10}" text-anchor="middle">{escape(xlabel)}</text>',
           f'<text x="16" y="{mt + ph / 2}" text-anchor="middle" '
           f'transform="rotate(-90 16 {mt + ph / 2})">{escape(ylabel)}</text>']

    def ticks(lo, hi, log):
        if log:
            a, b = round(math.log10(lo)), round(math.log10(hi))
            step = max(1, (b - a) // 8)
            return [10.0 ** k for k in range(a, b + 1, step)]
        return list(np.linspace(lo, hi, 6))

    def label(v, log):
        return f"1e{round(math.log10(v))}" if log else f"{v:.3g}"

    for v in ticks(x0, x1, logx):
        X = px(v)
        out.append(f'<line x1="{X:.2f}" y1="{mt + ph}" x2="{X:.2f}" y2="{mt + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X:.2f}" y="{mt + ph + 18}" text-anchor="middle">{label(v, logx)}</text>')
    for v in ticks(y0, y1, logy):
        Y = py(v)
        out.append(f'<line x1="{ml - 5}" y1="{Y:.2f}" x2="{ml}" y2="{Y:.2f}" stroke="black"/>')
        out.append(f'<text x="{ml - 8}" y="{Y + 4:.2f}" text-anchor="end">{label(v, logy)}</text>')

    out.append(f'<clipPath id="plot"><rect x="{ml}" y="{mt}" width="{pw}" height="{ph}"/></clipPath>')
    legend = []
    for i, (lab, x, y) in enumerate(clean):
        col = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        if len(x) == 1:
            out.append(f'<circle cx="{px(x[0]):.2f}" cy="{py(y[0]):.2f}" r="3" fill="{col}"/>')
        else:
            out.append(f'<polyline clip-path="url(#plot)" fill="none" stroke="{col}" '
                       f'stroke-width="1.5" points="{pts}"/>')
        legend.append((lab, col, ""))
    for i, (lab, slope, (xr, yr)) in enumerate(ref_slopes):
        col = "#777777"
        xs = np.array([x0, x1])
        ys = yr * (xs / xr) ** slope if (logx and logy) else yr + slope * (xs - xr)
        out.append(f'<line clip-path="url(#plot)" x1="{px(xs[0]):.2f}" y1="{py(ys[0]) if ys[0] > 0 or not logy else mt + ph:.2f}" '
                   f'x2="{px(xs[1]):.2f}" y2="{py(ys[1]) if ys[1] > 0 or not logy else mt + ph:.2f}" '
                   f'stroke="{col}" stroke-dasharray="5,4"/>')
        legend.append((lab, col, "5,4"))
    for i, (lab, col, dash) in enumerate(legend):
        Y = mt + 12 + 18 * i
        X = ml + pw + 12
        out.append(f'<line x1="{X}" y1="{Y}" x2="{X + 24}" y2="{Y}" stroke="{col}" stroke-width="2" '
                   f'stroke-dasharray="{dash}"/>')
        out.append(f'<text x="{X + 30}" y="{Y + 4}">{escape(str(lab))}</text>')
    out.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(out) + "\n", encoding="utf-8")
    return path
