"""Finite-termination solvers for convex minimization over fixed-point sets.

The library minimizes a convex objective over the fixed-point set of a
nonexpansive operator built from metric projections, and certifies each
run with a two-sided data-compatibility test — distance to the solution
set and objective gap, both within a user tolerance — rather than an
asymptotic convergence claim.  A brute-force grid oracle supplies the
ground truth the certificate is measured against.
"""

from .compatibility import (
    CompatCriteria,
    CompatReport,
    gamma_compatible,
    out_index,
    prox_value,
    tau_L_compatible,
)
from .config import InstanceConfig, load_config, parse_config
from .errors import ConfigError, InfeasibleReferenceError, PreconditionError
from .objectives import (
    AffineMax,
    Linear,
    NormDistance,
    Quadratic,
    SubgradientResult,
    objective_from_dict,
)
from .operators import (
    ClampToBox,
    ProjectionOperator,
    SimultaneousProjection,
    StringAverageOperator,
    StringOperator,
    check_fit,
    inexact_orbit,
    power_orbit,
    residual,
)
from .oracle import (
    GridSpec,
    OracleCache,
    build_criteria,
    content_key,
    default_grid_h,
    grid_minimize,
    grid_prox_min,
    lipschitz_estimate,
)
from .sets import Ball, Box, ConstraintFamily, Halfspace, Hyperplane, set_from_dict
from .solvers import (
    ExplicitSchedule,
    PowerSchedule,
    ProblemInstance,
    RunResult,
    TraceRow,
    descent_check,
    hsasm_run,
    hsm_run,
    hsm_step,
    hspsm_run,
)
from .tracefile import TraceFooter, read_trace, write_trace

__version__ = "0.1.0"

__all__ = [
    "AffineMax",
    "Ball",
    "Box",
    "ClampToBox",
    "CompatCriteria",
    "CompatReport",
    "ConfigError",
    "ConstraintFamily",
    "ExplicitSchedule",
    "GridSpec",
    "Halfspace",
    "Hyperplane",
    "InfeasibleReferenceError",
    "InstanceConfig",
    "Linear",
    "NormDistance",
    "OracleCache",
    "PowerSchedule",
    "PreconditionError",
    "ProblemInstance",
    "ProjectionOperator",
    "Quadratic",
    "RunResult",
    "SimultaneousProjection",
    "StringAverageOperator",
    "StringOperator",
    "SubgradientResult",
    "TraceFooter",
    "TraceRow",
    "build_criteria",
    "check_fit",
    "content_key",
    "default_grid_h",
    "descent_check",
    "gamma_compatible",
    "grid_minimize",
    "grid_prox_min",
    "hsasm_run",
    "hsm_run",
    "hsm_step",
    "hspsm_run",
    "inexact_orbit",
    "lipschitz_estimate",
    "load_config",
    "objective_from_dict",
    "out_index",
    "parse_config",
    "power_orbit",
    "prox_value",
    "read_trace",
    "residual",
    "set_from_dict",
    "tau_L_compatible",
    "write_trace",
]
