"""
Periodic grids, Fourier transforms and Fourier multipliers.

The whole space is replaced by the periodic box [-L, L)^n sampled at
x_j = -L + j*dx.  Coefficients approximate the continuous transform

    F f(xi) = int exp(-i x.xi) f(x) dx,    xi = (pi / L) m,   m in [-N/2, N/2)^n,

so the zero mode of a field equals its mass.  Coefficient arrays are kept in
FFT storage order (the order of ``numpy.fft.fftfreq``); use
:meth:`GridSpec.wave_indices` to map storage positions to wave indices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .errors import (
    DivergedInputError,
    DomainError,
    ResolutionError,
    ShapeError,
    SymbolEvaluationError,
    SymmetryViolationError,
)

IMAG_RESIDUE_TOL = 1e-10


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on [-half_length, half_length)^dim."""

    dim: int
    points_per_axis: int
    half_length: float

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise DomainError(f"dim must be 1, 2 or 3, got {self.dim}")
        N = self.points_per_axis
        if int(N) != N or N < 8 or N % 2:
            raise DomainError(f"points_per_axis must be an even integer >= 8, got {N}")
        if not (self.half_length > 0 and np.isfinite(self.half_length)):
            raise DomainError(f"half_length must be positive, got {self.half_length}")
        if N ** self.dim > np.iinfo(np.intp).max:
            raise DomainError("total point count overflows the index type")
        object.__setattr__(self, "points_per_axis", int(N))
        object.__setattr__(self, "half_length", float(self.half_length))

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_length / self.points_per_axis

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def size(self) -> int:
        return self.points_per_axis ** self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dim

    def axis(self) -> np.ndarray:
        """Sample positions along one axis."""
        return -self.half_length + self.spacing * np.arange(self.points_per_axis)

    def coordinates(self) -> tuple[np.ndarray, ...]:
        """Broadcastable coordinate arrays, one per axis (``indexing='ij'``)."""
        x = self.axis()
        return tuple(
            x.reshape([-1 if k == j else 1 for k in range(self.dim)])
            for j in range(self.dim)
        )

    def radius(self) -> np.ndarray:
        return np.sqrt(sum(c ** 2 for c in self.coordinates())) * np.ones(self.shape)

    def wave_indices(self) -> tuple[np.ndarray, ...]:
        """Integer wave index per axis, broadcastable, in FFT storage order."""
        N = self.points_per_axis
        m = (np.fft.fftfreq(N) * N).round().astype(np.int64)
        return tuple(
            m.reshape([-1 if k == j else 1 for k in range(self.dim)])
            for j in range(self.dim)
        )

    def wavenumbers(self) -> np.ndarray:
        """Wavenumber vectors, shape ``(dim, *shape)``."""
        scale = np.pi / self.half_length
        return np.stack(
            [np.broadcast_to(scale * m, self.shape) for m in self.wave_indices()]
        ).astype(float)

    def wavenumber_modulus(self) -> np.ndarray:
        scale = np.pi / self.half_length
        return scale * np.sqrt(sum(m.astype(float) ** 2 for m in self.wave_indices()))

    def rfft_modulus(self) -> np.ndarray:
        """|xi| on the half-spectrum layout of ``scipy.fft.rfftn``."""
        N = self.points_per_axis
        scale = np.pi / self.half_length
        axes = []
        for j in range(self.dim):
            if j == self.dim - 1:
                m = np.arange(N // 2 + 1, dtype=float)
            else:
                m = np.fft.fftfreq(N) * N
            axes.append(m.reshape([-1 if k == j else 1 for k in range(self.dim)]))
        return scale * np.sqrt(sum(a ** 2 for a in axes))

    def rfft_max_index(self) -> np.ndarray:
        """max_j |m_j| on the half-spectrum layout (used for dealiasing masks)."""
        N = self.points_per_axis
        axes = []
        for j in range(self.dim):
            if j == self.dim - 1:
                m = np.arange(N // 2 + 1)
            else:
                m = np.abs(np.fft.fftfreq(N) * N).round().astype(int)
            axes.append(m.reshape([-1 if k == j else 1 for k in range(self.dim)]))
        return np.maximum.reduce(np.broadcast_arrays(*axes))

    def _phase(self) -> np.ndarray:
        # exp(-i xi_m x_0) with x_0 = -L equals (-1)^(sum m)
        total = sum(self.wave_indices())
        return np.where(np.asarray(total) % 2 == 0, 1.0, -1.0) * np.ones(self.shape)


@dataclass
class RealField:
    """Samples of a real function on a grid; ``values`` has shape ``grid.shape``."""

    grid: GridSpec
    values: np.ndarray
    diverged: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.size != self.grid.size:
            raise DomainError(
                f"expected {self.grid.size} values, got {values.size}"
            )
        self.values = values.reshape(self.grid.shape)
        if not self.diverged and not np.all(np.isfinite(self.values)):
            self.diverged = True

    @property
    def flat(self) -> np.ndarray:
        """Row-major flattened samples."""
        return self.values.reshape(-1)

    def is_finite(self) -> bool:
        return not self.diverged and bool(np.all(np.isfinite(self.values)))

    def __add__(self, other):
        _same_grid(self, other)
        return RealField(self.grid, self.values + other.values)

    def __sub__(self, other):
        _same_grid(self, other)
        return RealField(self.grid, self.values - other.values)

    def __mul__(self, c):
        return RealField(self.grid, self.values * c)

    __rmul__ = __mul__

    def __neg__(self):
        return RealField(self.grid, -self.values)


@dataclass
class SpectralFieldData:
    """Fourier coefficients of a field, stored in FFT order."""

    grid: GridSpec
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if c.size != self.grid.size:
            raise DomainError(f"expected {self.grid.size} coefficients, got {c.size}")
        self.coefficients = c.reshape(self.grid.shape)

    def coeff(self, m) -> complex:
        """Coefficient at integer wave index ``m`` (int in 1D, or a sequence)."""
        m = np.atleast_1d(m)
        if m.size != self.grid.dim:
            raise DomainError("wave index has wrong dimension")
        N = self.grid.points_per_axis
        idx = tuple(int(k) % N for k in m)
        return complex(self.coefficients[idx])


def _same_grid(a, b):
    if a.grid != b.grid:
        raise ShapeError(f"grid mismatch: {a.grid} vs {b.grid}")


def zeros(grid: GridSpec) -> RealField:
    return RealField(grid, np.zeros(grid.shape))


def from_function(grid: GridSpec, fn) -> RealField:
    """Sample ``fn(*coords)`` on the grid."""
    values = np.broadcast_to(fn(*grid.coordinates()), grid.shape)
    return RealField(grid, np.array(values, dtype=float))


def forward_transform(f: RealField) -> SpectralFieldData:
    if not f.is_finite():
        raise DivergedInputError("cannot transform a non-finite field")
    g = f.grid
    coeffs = g.cell_volume * g._phase() * sfft.fftn(f.values)
    return SpectralFieldData(g, coeffs)


def inverse_transform(F: SpectralFieldData) -> RealField:
    c = F.coefficients
    if not np.all(np.isfinite(c)):
        raise DivergedInputError("cannot invert non-finite coefficients")
    g = F.grid
    scale = (g.points_per_axis / (2.0 * g.half_length)) ** g.dim
    out = scale * sfft.ifftn(c * g._phase())
    real_size = np.max(np.abs(out.real)) if out.size else 0.0
    residue = np.max(np.abs(out.imag)) if out.size else 0.0
    if residue > IMAG_RESIDUE_TOL * max(real_size, np.finfo(float).tiny):
        raise SymmetryViolationError(
            f"imaginary residue {residue:.3e} relative to {real_size:.3e}; "
            "coefficients are not conjugate symmetric"
        )
    return RealField(g, out.real.copy())


def _symbol_values(grid: GridSpec, symbol) -> np.ndarray:
    if callable(symbol):
        with np.errstate(all="ignore"):
            values = symbol(grid.wavenumbers())
    else:
        values = symbol
    values = np.broadcast_to(np.asarray(values), grid.shape)
    bad = ~np.isfinite(values)
    if np.any(bad):
        pos = np.unravel_index(np.argmax(bad), grid.shape)
        m = tuple(int(np.broadcast_to(w, grid.shape)[pos]) for w in grid.wave_indices())
        raise SymbolEvaluationError(f"symbol is not finite at wave index {m}")
    return values


def apply_multiplier(F: SpectralFieldData, symbol) -> SpectralFieldData:
    """Multiply coefficients by ``symbol``.

    ``symbol`` is either an array broadcastable to the grid shape (FFT order) or
    a callable receiving the wavenumber vectors as an array of shape
    ``(dim, *shape)``.
    """
    values = _symbol_values(F.grid, symbol)
    return SpectralFieldData(F.grid, F.coefficients * values)


def fractional_symbol(sigma: float, s: float | None = None):
    """Symbol xi -> |xi|^(2 sigma) (or |xi|^s when ``s`` is given), 0 at xi = 0."""
    power = 2.0 * sigma if s is None else s

    def symbol(xi):
        r = np.sqrt(np.sum(xi ** 2, axis=0))
        if power == 0:
            return np.ones_like(r)
        return r ** power

    return symbol


def heat_symbol(t: float, sigma: float):
    """Symbol of the fractional heat semigroup, exp(-|xi|^(2 sigma) t)."""

    def symbol(xi):
        r = np.sqrt(np.sum(xi ** 2, axis=0))
        return np.exp(-(r ** (2.0 * sigma)) * t)

    return symbol


def heat_kernel_field(t: float, grid: GridSpec, sigma: float) -> RealField:
    """Discrete fractional heat kernel G(t, .) on ``grid``."""
    if not t > 0:
        raise DomainError(f"heat kernel needs t > 0, got {t}")
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    lam = grid.wavenumber_modulus() ** (2.0 * sigma)
    return inverse_transform(SpectralFieldData(grid, np.exp(-lam * t)))


def closed_form_kernel(t: float, grid: GridSpec, sigma: float) -> RealField:
    """Whole-space kernel sampled on ``grid`` where it is elementary.

    sigma = 1 gives the Gauss-Weierstrass kernel, sigma = 1/2 the Poisson
    kernel.  Periodic images are not added.
    """
    if not t > 0:
        raise DomainError(f"heat kernel needs t > 0, got {t}")
    n = grid.dim
    r2 = grid.radius() ** 2
    if sigma == 1:
        values = (4 * np.pi * t) ** (-n / 2) * np.exp(-r2 / (4 * t))
    elif sigma == 0.5:
        c = math.gamma((n + 1) / 2) / np.pi ** ((n + 1) / 2)
        values = c * t / (t * t + r2) ** ((n + 1) / 2)
    else:
        raise DomainError(f"no elementary kernel for sigma={sigma}")
    return RealField(grid, np.broadcast_to(values, grid.shape).copy())


def lm_norm(f: RealField, m: float) -> float:
    """Discrete L^m norm (Riemann sum with cell weight dx^n)."""
    if not m >= 1:
        raise DomainError(f"norm order must be >= 1, got {m}")
    if not f.is_finite():
        raise DivergedInputError("norm of a non-finite field")
    a = np.abs(f.values)
    if np.isinf(m):
        return float(a.max())
    if m == 1:
        return float(f.grid.cell_volume * a.sum())
    scale = a.max()
    if scale == 0:
        return 0.0
    # scaled so that tiny or huge samples neither underflow nor overflow
    if m == 2:
        b = a / scale
        return float(scale * np.sqrt(f.grid.cell_volume * np.dot(b.ravel(), b.ravel())))
    return float(scale * (f.grid.cell_volume * np.sum((a / scale) ** m)) ** (1.0 / m))


def mass(f: RealField) -> float:
    if not f.is_finite():
        raise DivergedInputError("mass of a non-finite field")
    return float(f.grid.cell_volume * np.sum(f.values))


def kernel_width(t: float, sigma: float) -> float:
    """Intrinsic length scale t^(1/(2 sigma)) of the fractional heat kernel."""
    return t ** (1.0 / (2.0 * sigma))


def predicted_scaling_exponent(s, sigma, m, dim) -> float:
    inv_m = 0.0 if np.isinf(m) else 1.0 / m
    return -dim / (2.0 * sigma) * (1.0 - inv_m) - s / (2.0 * sigma)


@dataclass(frozen=True)
class KernelScaling:
    ratio: float
    norm_t: float
    norm_scaled: float
    predicted: float


def kernel_scaling_ratio(s, sigma, m, t, factor, grid: GridSpec) -> KernelScaling:
    """Compare ||F^-1(|xi|^s exp(-|xi|^(2 sigma) tau))||_m at tau = t and factor*t."""
    if not factor > 1:
        raise DomainError(f"factor must exceed 1, got {factor}")
    if not (t > 0 and sigma > 0 and s >= 0):
        raise DomainError("need t > 0, sigma > 0, s >= 0")
    w_lo = kernel_width(t, sigma)
    w_hi = kernel_width(factor * t, sigma)
    if w_lo < 4 * grid.spacing:
        raise ResolutionError(
            f"kernel width {w_lo:.4g} below 4 grid cells ({4 * grid.spacing:.4g})"
        )
    if w_hi > grid.half_length / 4:
        raise ResolutionError(
            f"kernel width {w_hi:.4g} exceeds a quarter box ({grid.half_length / 4:.4g})"
        )
    r = grid.wavenumber_modulus()
    weight = np.ones_like(r) if s == 0 else r ** s

    def norm_at(tau):
        F = SpectralFieldData(grid, weight * np.exp(-(r ** (2.0 * sigma)) * tau))
        return lm_norm(inverse_transform(F), m)

    n_lo, n_hi = norm_at(t), norm_at(factor * t)
    predicted = factor ** predicted_scaling_exponent(s, sigma, m, grid.dim)
    return KernelScaling(n_hi / n_lo, n_lo, n_hi, predicted)
