"""Defocusing cubic wave equation on radial three-dimensional hyperbolic space.

Spectral radial grids, Morawetz weights, a split-step solver, the
frequency-truncation experiment and numerical checks of the supporting
inequalities.
"""
__version__ = "0.1.0"

from .grid import (
    FOUR_PI,
    GridMismatchError,
    RadialField,
    RadialGrid,
    RegionGridMismatch,
    WaveState,
    WeightedRegionNorm,
    integrate_measure,
    power_weight,
    radial_derivative,
    weighted_norm,
)
from .spectral import (
    HeatMode,
    SpectralField,
    bernstein_ratio,
    eigenvalues,
    forward,
    heat_project,
    inverse,
    sobolev_norm,
    wave_propagate_linear,
)
from .morawetz import (
    Convention,
    MorawetzWeight,
    WeightFamily,
    absorption_threshold,
    build_weight,
    modified_derivative_claimed,
    modified_potential,
    morawetz_derivative_claimed,
    morawetz_potential,
    validate_conditions,
)
from .data import DataSpec, make_initial_data
from .solver import (
    BlowUpError,
    BoundaryGuardError,
    ConfigError,
    IntegratorConfig,
    TimeSeries,
    energy,
    evolve,
    step,
    trajectory,
)
from .truncation import GrowthLedger, TruncationConfig, run_experiment, split_data
from .inequalities import (
    Admissibility,
    EnsembleSpec,
    StrichartzTriple,
    SuiteConfig,
    run_suite,
    strichartz_admissible,
)
