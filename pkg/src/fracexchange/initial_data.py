"""Initial data shapes used by experiment configurations."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError
from .spectral import GridSpec, RealField

KINDS = ("gaussian", "bump", "mode", "constant", "file")


@dataclass(frozen=True)
class DataSpec:
    """One initial datum.

    gaussian: amplitude * exp(-|x - center|^2 / width^2)
    bump:     amplitude * exp(1 - 1 / (1 - |x - center|^2 / radius^2)) inside the ball
    mode:     amplitude * cos(xi(m) . x) for integer wave index ``mode``
    constant: ``value`` everywhere
    file:     samples read from ``path`` (.npy or whitespace text, row-major)
    """

    kind: str = "gaussian"
    amplitude: float = 1.0
    center: tuple = (0.0,)
    width: float = 1.0
    radius: float = 1.0
    mode: tuple = (1,)
    value: float = 1.0
    path: str | None = None


def _vector(values, dim, name):
    v = tuple(values)
    if len(v) == 1:
        v = v * dim
    if len(v) != dim:
        raise DomainError(f"{name} needs {dim} components, got {len(v)}")
    return v


def make_field(grid: GridSpec, spec: DataSpec) -> RealField:
    coords = grid.coordinates()
    if spec.kind == "gaussian":
        c = _vector(spec.center, grid.dim, "center")
        r2 = sum((x - cj) ** 2 for x, cj in zip(coords, c))
        values = spec.amplitude * np.exp(-r2 / spec.width ** 2)
    elif spec.kind == "bump":
        c = _vector(spec.center, grid.dim, "center")
        s = sum((x - cj) ** 2 for x, cj in zip(coords, c)) / spec.radius ** 2
        with np.errstate(divide="ignore", over="ignore"):
            values = np.where(s < 1, spec.amplitude * np.exp(1.0 - 1.0 / (1.0 - np.minimum(s, 1 - 1e-300))), 0.0)
    elif spec.kind == "mode":
        m = _vector(spec.mode, grid.dim, "mode")
        if any(abs(k) >= grid.points_per_axis // 2 for k in m):
            raise DomainError(f"wave index {m} not representable on N={grid.points_per_axis}")
        scale = np.pi / grid.half_length
        values = spec.amplitude * np.cos(sum(scale * k * x for k, x in zip(m, coords)))
    elif spec.kind == "constant":
        values = np.full(grid.shape, float(spec.value))
    elif spec.kind == "file":
        p = Path(spec.path)
        raw = np.load(p) if p.suffix == ".npy" else np.loadtxt(p)
        raw = np.asarray(raw, dtype=float).ravel()
        if raw.size != grid.size:
            raise DomainError(f"{p} holds {raw.size} samples, grid needs {grid.size}")
        values = raw.reshape(grid.shape)
    else:
        raise DomainError(f"unknown initial data kind {spec.kind!r}")
    return RealField(grid, np.broadcast_to(values, grid.shape).copy())
