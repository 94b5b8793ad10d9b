"""Simulation and numerical verification of redistribution particle systems.

N particles move on a finite site set following jump rates Q; a particle
killed at rate p0 is instantly reborn on a uniformly chosen survivor.
The package simulates the system and its contractive two-copy coupling,
computes conditioned semigroups and quasi-stationary laws, evaluates the
closed-form bounds, and cross-checks everything against dense
linear-algebra oracles on enumerable state spaces.
"""

from ._kernels import BACKEND
from .bounds import (
    BoundConstants,
    bound_constants,
    chaos_bound,
    coalescence_tv_bound,
    covariance_bound,
    uniform_bound,
)
from .complete_graph import (
    CompleteGraphParams,
    cg_dynamic_covariance,
    cg_invariant,
    cg_marginal_law,
    cg_model,
    cg_printed_formula_report,
    cg_spectrum,
    cg_spectrum_inclusion,
    cg_stationary_moments,
)
from .coupling import (
    CoupledPair,
    DecayCurve,
    coupled_rates,
    coupling_consistency_check,
    simulate_pair,
    wasserstein_decay,
)
from .model import (
    Configuration,
    ErgodicCoefficients,
    Model,
    ModelError,
    d1_distance,
    ergodic_coefficients,
    total_variation,
    validate_model,
)
from .oracle import (
    EnumeratedSpace,
    carre_du_champ,
    coupled_generator_matrix,
    enumerate_configurations,
    generator_matrix,
    semigroup_apply,
    spectrum,
    stationary_exact,
    transient_covariance,
    transient_mean,
)
from .semigroup import (
    QsdResult,
    conditioned_evolution,
    killed_generator,
    qsd,
    two_point_spectral,
)
from .simulate import (
    EnsembleStatistics,
    SimulationSpec,
    covariances_to_csv,
    ensemble_statistics,
    sample_paths,
    simulate,
    statistics_to_csv,
    total_rate,
    transition_rates,
)
from .two_point import (
    BirthDeathChain,
    HardyReport,
    bd_gap_exact,
    bd_invariant,
    bd_marginal,
    gap_report,
    hardy_quantities,
    lambda_u,
    ratio_monotone_regime,
    tp_model,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
