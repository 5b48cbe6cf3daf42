"""Master equations on Q_p^n driven by radial landscape kernels.

Symbols, heat kernels, radial Cauchy solutions, survival in the unit ball
with incomplete-gamma bounds, first passage, and an exact Monte Carlo
simulator on the quotient group Q_p^n / Z_p^n.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigurationError,
    DivergenceError,
    LandscapeError,
    NonMonotoneSymbolError,
    PreconditionError,
)
from .padic import INSIDE_UNIT_BALL, PAdicCoset, coset_add, coset_negate, coset_norm, sample_sphere_coset, sphere_volume
from .radial import (
    RadialFunction,
    Tail,
    apply_generator,
    indicator,
    integrate_radial,
    radial_convolve,
    radial_fourier,
)
from .kernels import (
    LandscapeKernel,
    check_symbol_monotone,
    classify_recurrence,
    custom_table,
    jump_radius_weights,
    normalize,
    regularized_linear,
    regularized_log,
    symbol,
    synthetic_power_symbol,
)
from .evolution import (
    HeatKernelRepr,
    RadialSolution,
    comparison_check,
    compound_poisson_oracle,
    fourier_of_Z,
    heat_kernel,
    heat_kernel_density,
    solve_radial,
)
from .survival import (
    SurvivalReport,
    g_density,
    lower_incomplete_gamma,
    return_probability,
    survival_bounds,
    survival_series,
    volterra_solve,
)
from .montecarlo import SimConfig, TrialResult, sample_jump, simulate_first_passage, simulate_survival
