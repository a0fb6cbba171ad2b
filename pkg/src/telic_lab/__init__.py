"""Exact discretized dynamics, telic reachability problems, reductions and entropy estimates."""

from .algebraic import QuadraticIrrational
from .discretize import (
    Counters,
    FunctionSpec,
    OrbitRequest,
    PrecisionTrace,
    discretize_function,
    discretize_orbit,
    validate_inverse_pair,
    working_precision,
)
from .dyadic import LOWER, Dyadic, GridPoint, SpaceSpec, TieRule, round_to_grid
from .entropy import bowen_distance, entropy_estimate, exact_max_separated, greedy_separated_set
from .errors import (
    ConfigError,
    DomainError,
    InvariantViolation,
    NotApplicable,
    NotExact,
    ParseError,
    ResourceLimit,
    TelicError,
    ValidationError,
)
from .harness import ExperimentPlan, load_instance, run_bench, run_checks
from .reductions import (
    ConjugacySpec,
    check_reduction,
    conjugate_instance,
    logistic_quadratic,
    shift_instance,
    validate_conjugacy,
)
from .solvers import Decision, auto_decide, brute_force_decide, kary_search, pullback_decide, verify_certificate
from .systems import SystemSpec, affine_quadratic, doubling, logistic, rotation, tent
from .telic import SeedFamily, TargetFamily, TelicInstance, check_neighborhood_preservation, seed_eval, target_member

__version__ = "0.1.0"
