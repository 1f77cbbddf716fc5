"""Correlation-decay approximation for two-spin systems on bounded-degree graphs."""

__version__ = "0.1.0"

from ._accel import NUMBA_ENABLED
from .errors import (
    CorrDecayError,
    DomainError,
    HardConstraintError,
    InvalidInputError,
    NonContractiveError,
    NumericError,
    TooLargeError,
    UncertifiedError,
    UnsupportedRegimeError,
)
from .model import (
    MINUS,
    PLUS,
    Configuration,
    EnergyTranslation,
    Graph,
    IsingView,
    Regime,
    SpinSystem,
    classify,
    energy_log_weight,
    energy_to_activities,
    iter_configurations,
    to_ising,
    weight,
    weight_ising,
)
from .graphio import format_graph, load_graph, parse_graph, save_graph
from .oracle import ExactResult, exact_marginal, exact_marginals, exact_partition
from .recursion import (
    MessageConstants,
    TreeParams,
    critical_lambda,
    critical_log_lambda,
    f_fn,
    fixed_point,
    g_double_prime,
    g_prime,
    h_fn,
    message_constants,
    phi,
    psi,
    uniqueness_check,
)
from .sawtree import MarginalInterval, build_saw_tree, eval_marginal_interval, required_depth, saw_interval
from .fptas import (
    Certificate,
    MarginalEstimate,
    ZEstimate,
    approx_marginal,
    approx_partition,
    certify,
    width_bound,
)
from .phase import decay_rate_estimate, lambda_c_curve, two_step_fixed_points, zero_crossing
