"""Stabilized explicit time-stepping for stiff ODEs.

Makes explicit methods viable on stiff problems by adaptively injecting
short sequences of small stabilizing Euler steps (simple, dyadic, or
Chebyshev damping) between large accuracy-limited steps, with divergence
of the implicit-midpoint fixed point iteration acting as the stiffness
detector.
"""

from .controller import (
    CostReport,
    IntegrationFailure,
    SolverConfig,
    adaptive_solve,
    baseline_cost,
    proposed_step,
    regulated_step,
    stabilization_plan,
)
from .damping import (
    ChebyshevParams,
    DampingSequence,
    DyadicParams,
    SimpleDampingParams,
    chebyshev_degree,
    chebyshev_sequence,
    dyadic_sequence,
    eval_chebyshev_poly,
    eval_dyadic_poly,
    eval_region_poly,
    eval_simple_poly,
    min_damping_steps,
    min_q_for_p,
)
from .problems import PROBLEM_NAMES, BenchmarkProblem, get_problem
from .solver import (
    FixedPointOutcome,
    OdeProblem,
    Trajectory,
    cg1_fixed_point_step,
    continuous_residual,
    discrete_residual,
    divergence_rate,
    explicit_euler_step,
)

__version__ = "0.1.0"

__all__ = [
    "SolverConfig",
    "CostReport",
    "IntegrationFailure",
    "adaptive_solve",
    "baseline_cost",
    "regulated_step",
    "proposed_step",
    "stabilization_plan",
    "SimpleDampingParams",
    "ChebyshevParams",
    "DyadicParams",
    "DampingSequence",
    "min_damping_steps",
    "eval_simple_poly",
    "chebyshev_sequence",
    "chebyshev_degree",
    "eval_chebyshev_poly",
    "min_q_for_p",
    "eval_dyadic_poly",
    "dyadic_sequence",
    "eval_region_poly",
    "OdeProblem",
    "FixedPointOutcome",
    "Trajectory",
    "explicit_euler_step",
    "cg1_fixed_point_step",
    "discrete_residual",
    "continuous_residual",
    "divergence_rate",
    "BenchmarkProblem",
    "PROBLEM_NAMES",
    "get_problem",
    "__version__",
]
