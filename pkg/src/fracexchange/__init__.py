"""Pseudo-spectral toolkit for a fractional-diffusion two-component exchange system.

The unknowns u, v solve, on a periodic box approximating R^n,

    u_t + (-Laplace)^sigma u + mu u - nu v = |u|^(p-1) u
    v_t + (-Laplace)^sigma v - mu u + nu v = |v|^(q-1) v

with data (eps u0, eps v0).  Submodules:

``spectral``    grids, transforms, multipliers, heat kernel, L^m norms
``linear``      exact linear propagator and profile diagnostics
``solver``      exponential Heun integrator, blow-up detection, Duhamel residual
``analysis``    decay fits, space-time nonlinear mass, profile and L^2 checks
``lifespan``    epsilon sweeps and lifespan scaling fits
``config``, ``reports``, ``cli``  experiment files, CSV/SVG output, commands
"""

from .errors import (ConfigError, DataWarning, DegenerateWarning, DivergedInputError, DomainError,
                     FracExchangeError, InsufficientDataError, PreconditionError, ResolutionError,
                     ShapeError, SignDomainError, SymbolEvaluationError, SymmetryViolationError)
from .spectral import (GridSpec, KernelScaling, RealField, SpectralFieldData, apply_multiplier,
                       forward_transform, fractional_symbol, from_function, heat_kernel_field,
                       heat_symbol, inverse_transform, kernel_scaling_ratio, kernel_width, lm_norm,
                       mass, predicted_scaling_exponent, zeros)
from .linear import (ExchangerParams, L2Bounds, ProfileErrorSeries, StatePair, error_vs_profile,
                     kernel_factors, l2_lower_upper, linear_profile, linear_propagate,
                     linear_solution, linear_trajectory)
from .series import FitResult, NormSeries
from .solver import (PLAIN, SIGNED, SemilinearParams, SolverConfig, Trajectory, duhamel_residual,
                     nonlinearity, simulate, step)
from .analysis import (L2TwoSided, ProfileReport, fit_decay_rate, fit_line, l2_two_sided,
                       nonlinear_mass, profile_error, space_time_mass)
from .lifespan import (LifespanEntry, LifespanTable, Regime, fit_lifespan_critical,
                       fit_lifespan_subcritical, fujita_exponent, regime, sweep, theory_exponent)
from .initial_data import DataSpec, make_field
from .config import ExperimentConfig, parse_config

__version__ = "0.1.0"
