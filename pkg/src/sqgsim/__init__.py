"""Pseudo-spectral simulator for the 2D dissipative quasi-geostrophic equation
on the unit torus, with a discrete Littlewood-Paley calculus and a harness
that measures smoothing rates, decay rates, and inequality constants."""

from .grid import PhysicalField, SpectralField, TorusGrid
from .spectral import (
    analyticity_diagnostics,
    apply_fractional_power,
    forward_transform,
    inverse_transform,
    lp_norm,
    riesz_velocity,
    sobolev_norm,
)
from .lp import (
    BandRange,
    DyadicBump,
    active_bands,
    bony_paraproducts,
    commutator,
    dealiased_product,
    lp_project,
)
from .solver import (
    NormTrajectory,
    SimulationState,
    SolverConfig,
    cfl_dt,
    integrate,
    nonlinear_term,
    semigroup_apply,
    step,
)
from .inequalities import (
    ConstantReport,
    InequalityTrial,
    verify_bernstein,
    verify_commutator_estimate,
    verify_linear_smoothing,
    verify_product_estimates,
    verify_semigroup_block,
)
from .estimates import (
    EstimateReport,
    ExperimentSpec,
    RateFit,
    gen_rough_data,
    measure_global_decay,
    measure_smoothing,
    measure_time_integrability,
    run_suite,
)

__version__ = "0.1.0"
