"""Energy-efficient uplink for distributed massive MIMO.

A numpy library modeling a cell-free network of multi-antenna access
points that jointly serve single-antenna users: random layouts with
toroidal wrap-around and three-slope path loss, linear channel
estimation quality, a closed-form uplink spectral-efficiency lower
bound under partial zero-forcing fusion, a network power model, and a
fractional-programming alternating optimizer for joint per-user power
control and AP-user association under a sum-rate constraint.
"""

from .geometry import (
    ASSOCIATION_SCHEMES,
    Deployment,
    GeometryConfig,
    PilotAssignment,
    assign_pilots,
    compute_lsfc,
    initial_association,
    place_network,
    three_slope_pathloss_db,
    wrap_distance,
    wrap_distance_matrix,
)
from .se_model import (
    Grouping,
    GroupingInfeasible,
    PowerVector,
    SINRBreakdown,
    classify_users,
    estimation_quality,
    lsfd_weights,
    prelog_factor,
    sinr_terms,
    sum_se,
    thermal_noise_w,
)
from .energy import (
    EnergyConstants,
    circuit_power,
    energy_efficiency,
    fixed_power,
    total_power,
)
from .optimizer import (
    DegenerateInterference,
    Evaluation,
    ProblemSpec,
    QoSInfeasible,
    RoundingInfeasible,
    Solution,
    SolveTrace,
    SolverParams,
    evaluate_configuration,
    optimize,
    round_association,
)
from .oracle import (
    MCConfig,
    brute_force_small,
    mc_validate_mr_terms,
    simulate_estimation,
)
from .configio import ConfigBundle, ConfigError, ExperimentConfig, RadioConfig, load_config
from .experiments import (
    build_problem,
    convergence_trace,
    robustness_study,
    run_single,
    run_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "ASSOCIATION_SCHEMES",
    "Deployment",
    "GeometryConfig",
    "PilotAssignment",
    "assign_pilots",
    "compute_lsfc",
    "initial_association",
    "place_network",
    "three_slope_pathloss_db",
    "wrap_distance",
    "wrap_distance_matrix",
    "Grouping",
    "GroupingInfeasible",
    "PowerVector",
    "SINRBreakdown",
    "classify_users",
    "estimation_quality",
    "lsfd_weights",
    "prelog_factor",
    "sinr_terms",
    "sum_se",
    "thermal_noise_w",
    "EnergyConstants",
    "circuit_power",
    "energy_efficiency",
    "fixed_power",
    "total_power",
    "DegenerateInterference",
    "Evaluation",
    "ProblemSpec",
    "QoSInfeasible",
    "RoundingInfeasible",
    "Solution",
    "SolveTrace",
    "SolverParams",
    "evaluate_configuration",
    "optimize",
    "round_association",
    "MCConfig",
    "brute_force_small",
    "mc_validate_mr_terms",
    "simulate_estimation",
    "ConfigBundle",
    "ConfigError",
    "ExperimentConfig",
    "RadioConfig",
    "load_config",
    "build_problem",
    "convergence_trace",
    "robustness_study",
    "run_single",
    "run_sweep",
    "__version__",
]
