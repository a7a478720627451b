import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracexchange import spectral as sp
from fracexchange.errors import (DivergedInputError, DomainError, ResolutionError, ShapeError,
                                 SymbolEvaluationError, SymmetryViolationError)
from fracexchange.spectral import GridSpec, RealField, SpectralFieldData

from oracles import gauss_kernel, naive_forward_1d, poisson_kernel


def test_grid_validation():
    for bad in [(0, 16, 1.0), (4, 16, 1.0), (1, 7, 1.0), (1, 6, 1.0), (1, 15, 1.0), (1, 16, 0.0), (1, 16, -2.0)]:
        with pytest.raises(DomainError):
            GridSpec(*bad)


def test_grid_spacing_and_samples():
    g = GridSpec(1, 64, 3.0)
    assert abs(g.spacing * g.points_per_axis - 2 * g.half_length) <= 2 * np.finfo(float).eps * 6
    x = g.axis()
    assert x[0] == -3.0 and abs(x[-1] - (3.0 - g.spacing)) < 1e-15
    g3 = GridSpec(3, 8, 1.0)
    assert g3.size == 512 and g3.shape == (8, 8, 8)
    assert g3.wavenumbers().shape == (3, 8, 8, 8)


def test_realfield_shape_and_divergence():
    g = GridSpec(2, 8, 1.0)
    f = RealField(g, np.arange(64.0))
    assert f.values.shape == (8, 8)
    assert f.values[1, 0] == 8.0  # row-major order
    with pytest.raises(DomainError):
        RealField(g, np.zeros(10))
    assert RealField(g, np.full(64, np.inf)).diverged
    with pytest.raises(ShapeError):
        f + RealField(GridSpec(2, 8, 2.0), np.zeros(64))


def test_forward_zero_and_constant():
    g = GridSpec(2, 16, 1.5)
    F = sp.forward_transform(sp.zeros(g))
    assert np.all(F.coefficients == 0)
    F = sp.forward_transform(RealField(g, np.ones(g.shape)))
    assert abs(F.coeff((0, 0)) - (2 * 1.5) ** 2) < 1e-12
    rest = F.coefficients.copy()
    rest[0, 0] = 0
    assert np.max(np.abs(rest)) < 1e-12


def test_forward_single_cosine():
    L = 2.0
    g = GridSpec(1, 32, L)
    F = sp.forward_transform(RealField(g, np.cos(np.pi * g.axis() / L)))
    assert abs(F.coeff(1) - L) < 1e-12 and abs(F.coeff(-1) - L) < 1e-12
    c = F.coefficients.copy()
    c[[1, -1]] = 0
    assert np.max(np.abs(c)) < 1e-12


def test_forward_matches_direct_sum():
    rng = np.random.default_rng(3)
    g = GridSpec(1, 24, 1.7)
    f = rng.normal(size=24)
    F = sp.forward_transform(RealField(g, f))
    assert np.allclose(F.coefficients, naive_forward_1d(f, 1.7), atol=1e-12, rtol=0)


def test_forward_rejects_nonfinite():
    g = GridSpec(1, 8, 1.0)
    with pytest.raises(DivergedInputError):
        sp.forward_transform(RealField(g, [0, 1, np.nan, 0, 0, 0, 0, 0]))


def test_inverse_constant_and_symmetry_violation():
    g = GridSpec(1, 16, 1.0)
    c = np.zeros(16, complex)
    c[0] = 2.0
    assert np.allclose(sp.inverse_transform(SpectralFieldData(g, c)).values, 1.0, atol=1e-14)
    c[3] = 1e-3 * 1j
    with pytest.raises(SymmetryViolationError):
        sp.inverse_transform(SpectralFieldData(g, c))


@settings(max_examples=30, deadline=None)
@given(dim=st.integers(1, 3), seed=st.integers(0, 2 ** 31 - 1), L=st.floats(0.5, 50.0))
def test_round_trip_and_parseval(dim, seed, L):
    N = {1: 32, 2: 16, 3: 8}[dim]
    g = GridSpec(dim, N, L)
    f = RealField(g, np.random.default_rng(seed).normal(size=g.size))
    F = sp.forward_transform(f)
    back = sp.inverse_transform(F)
    assert np.max(np.abs(back.values - f.values)) <= 1e-12 * np.max(np.abs(f.values))
    lhs = g.cell_volume * np.sum(f.values ** 2)
    rhs = (2 * L) ** (-dim) * np.sum(np.abs(F.coefficients) ** 2)
    assert abs(lhs - rhs) <= 1e-10 * lhs


def test_conjugate_symmetry_of_real_field():
    g = GridSpec(1, 32, 1.0)
    F = sp.forward_transform(RealField(g, np.random.default_rng(0).normal(size=32)))
    for m in range(1, 16):
        assert abs(F.coeff(-m) - np.conj(F.coeff(m))) <= 1e-12 * np.max(np.abs(F.coefficients))


def test_multiplier_identity_and_laplacian_eigenfunction():
    g = GridSpec(1, 32, math.pi)
    F = sp.forward_transform(RealField(g, np.cos(g.axis())))
    same = sp.apply_multiplier(F, lambda xi: np.ones(xi.shape[1:]))
    assert np.array_equal(same.coefficients, F.coefficients)
    lap = sp.apply_multiplier(F, sp.fractional_symbol(1.0))
    assert abs(lap.coeff(1) - F.coeff(1)) < 1e-12 and abs(lap.coeff(-1) - F.coeff(-1)) < 1e-12
    semigroup0 = sp.apply_multiplier(F, sp.heat_symbol(0.0, 0.7))
    assert np.allclose(semigroup0.coefficients, F.coefficients, rtol=0, atol=1e-15)


def test_multiplier_nonfinite_symbol_names_index():
    g = GridSpec(1, 16, 1.0)
    F = sp.forward_transform(RealField(g, np.ones(16)))
    with pytest.raises(SymbolEvaluationError, match=r"\(0"):
        sp.apply_multiplier(F, lambda xi: 1.0 / np.abs(xi[0]))


def test_fractional_symbol_zero_at_origin():
    g = GridSpec(2, 8, 1.0)
    vals = sp.fractional_symbol(0.3)(g.wavenumbers())
    assert vals[0, 0] == 0.0 and np.all(vals.ravel()[1:] > 0)


@pytest.mark.parametrize("sigma", [0.25, 0.5, 1.0, 1.5])
def test_heat_kernel_mass_and_semigroup(sigma):
    g = GridSpec(1, 512, 40.0)
    G = sp.heat_kernel_field(0.5, g, sigma)
    assert abs(sp.mass(G) - 1) < 1e-10
    G2 = sp.inverse_transform(sp.apply_multiplier(sp.forward_transform(G), sp.heat_symbol(0.7, sigma)))
    assert np.max(np.abs(G2.values - sp.heat_kernel_field(1.2, g, sigma).values)) < 1e-10


def test_heat_kernel_rejects_nonpositive_time():
    with pytest.raises(DomainError):
        sp.heat_kernel_field(0.0, GridSpec(1, 8, 1.0), 1.0)


def test_heat_kernel_matches_gauss_and_poisson():
    g = GridSpec(1, 4096, 60.0)
    x = g.axis()
    assert np.max(np.abs(sp.heat_kernel_field(1.0, g, 1.0).values - gauss_kernel(x, 1.0))) < 1e-6
    central = np.abs(x) <= 30.0
    diff = sp.heat_kernel_field(1.0, g, 0.5).values - poisson_kernel(x, 1.0)
    assert np.max(np.abs(diff[central])) < 1e-4


def test_closed_form_kernel_in_2d_matches_spectral():
    g = GridSpec(2, 128, 12.0)
    d = sp.heat_kernel_field(0.5, g, 1.0) - sp.closed_form_kernel(0.5, g, 1.0)
    assert sp.lm_norm(d, math.inf) < 1e-8
    with pytest.raises(DomainError):
        sp.closed_form_kernel(1.0, g, 0.75)


def test_lm_norm_examples():
    L = 1.0
    g = GridSpec(1, 64, L)
    c = RealField(g, np.full(64, -3.0))
    assert abs(sp.lm_norm(c, 1) - 3 * 2 * L) < 1e-12
    assert sp.lm_norm(c, math.inf) == 3.0
    for m in (1, 2, 3.5, math.inf):
        assert sp.lm_norm(sp.zeros(g), m) == 0.0
    half = RealField(g, (g.axis() >= 0).astype(float))
    assert abs(sp.lm_norm(half, 2) - 1.0) <= g.spacing
    with pytest.raises(DomainError):
        sp.lm_norm(c, 0.5)


@settings(max_examples=40, deadline=None)
@given(c=st.floats(-1e6, 1e6), m=st.sampled_from([1.0, 2.0, 3.0, 7.5, math.inf]), seed=st.integers(0, 1000))
def test_lm_norm_homogeneous(c, m, seed):
    g = GridSpec(1, 32, 2.0)
    f = RealField(g, np.random.default_rng(seed).normal(size=32))
    assert math.isclose(sp.lm_norm(c * f, m), abs(c) * sp.lm_norm(f, m), rel_tol=1e-12, abs_tol=1e-300)


def test_lm_norm_large_order_does_not_overflow():
    g = GridSpec(1, 16, 1.0)
    f = RealField(g, np.full(16, 1e200))
    assert math.isclose(sp.lm_norm(f, 4), 1e200 * 2 ** 0.25, rel_tol=1e-12)


def test_mass_examples():
    assert abs(sp.mass(RealField(GridSpec(1, 16, 1.0), np.ones(16))) - 2) < 1e-14
    g = GridSpec(1, 256, 5.0)
    x = g.axis()
    odd = RealField(g, np.where(x == -5.0, 0.0, x * np.exp(-x * x)))
    assert abs(sp.mass(odd)) < 1e-12
    g20 = GridSpec(1, 1024, 20.0)
    assert abs(sp.mass(RealField(g20, np.exp(-g20.axis() ** 2))) - math.sqrt(math.pi)) < 1e-8


def test_kernel_scaling_examples():
    g = GridSpec(1, 16384, 256.0)
    r = sp.kernel_scaling_ratio(0, 1.0, math.inf, 1.0, 4.0, g)
    assert abs(r.ratio - 0.5) < 0.005 and r.predicted == 0.5
    r = sp.kernel_scaling_ratio(0, 1.0, 1, 1.0, 4.0, g)
    assert abs(r.ratio - 1) < 0.01
    # exponent -(n/2 sigma)(1 - 1/m) - s/(2 sigma) = -1/2 - 1; Plancherel: ||xi e^{-|xi| t}||_2^2 ~ t^-3
    r = sp.kernel_scaling_ratio(1.0, 0.5, 2, 1.0, 4.0, g)
    assert abs(r.ratio / 4 ** -1.5 - 1) < 0.02
    assert r.norm_t > 0 and r.norm_scaled > 0


def test_kernel_scaling_resolution_errors():
    g = GridSpec(1, 64, 4.0)
    with pytest.raises(ResolutionError, match="width"):
        sp.kernel_scaling_ratio(0, 1.0, 2, 0.01, 4.0, g)
    with pytest.raises(ResolutionError):
        sp.kernel_scaling_ratio(0, 1.0, 2, 4.0, 4.0, g)
    with pytest.raises(DomainError):
        sp.kernel_scaling_ratio(0, 1.0, 2, 1.0, 1.0, g)
