"""Single-interval integrators and the residuals that drive adaptivity.

Provides the explicit Euler step, the implicit midpoint step (continuous
piecewise-linear Galerkin with midpoint quadrature) solved by fixed point
iteration, and the discrete/continuous residual measurements.  The fixed
point iteration contracts or expands by k*J/2 per sweep, so its residual
history doubles as a probe of the locally dominant eigenvalue.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "OdeProblem",
    "FixedPointOutcome",
    "TrajectoryNode",
    "Trajectory",
    "DegenerateResidualHistory",
    "max_norm",
    "explicit_euler_step",
    "cg1_fixed_point_step",
    "discrete_residual",
    "continuous_residual",
    "divergence_rate",
]


def max_norm(v) -> float:
    """Max-norm; dimension-independent thresholds across 1- to 99-dim problems."""
    return float(np.max(np.abs(v)))


# Iterate excursions beyond this multiple of the state scale are treated as
# blow-up during the fixed point sweep.
_TRUST_FACTOR = 100.0


class DegenerateResidualHistory(ValueError):
    """Residual history too short or degenerate to calibrate stabilization."""


@dataclass(frozen=True)
class OdeProblem:
    """An initial value problem u' = f(u, t), u(0) = u0, on [0, T].

    rhs maps (state, time) -> derivative and must be safely callable from
    any thread.  jacobian, if supplied, maps (state, time) -> (N, N) matrix;
    the solver never requires it, but tests and spectral estimates use it.
    spectral_hint is an a priori bound on the dominant eigenvalue magnitude.
    """

    dimension: int
    rhs: Callable[[np.ndarray, float], np.ndarray]
    u0: np.ndarray
    t_end: float
    jacobian: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    spectral_hint: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "u0", np.atleast_1d(np.asarray(self.u0, dtype=float)))
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if self.u0.shape != (self.dimension,):
            raise ValueError(f"u0 must have shape ({self.dimension},)")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")

    def f(self, u, t=0.0) -> np.ndarray:
        return np.asarray(self.rhs(np.asarray(u, dtype=float), float(t)), dtype=float)


@dataclass(frozen=True)
class FixedPointOutcome:
    """Result of one fixed point solve: final iterate, residual history, status."""

    final_state: np.ndarray
    residual_norms: tuple
    converged: bool
    iterations: int


@dataclass(frozen=True)
class TrajectoryNode:
    t: float
    state: np.ndarray
    k: float
    kind: str  # "regular" | "stabilizing"
    iterations: int
    residual_norm: float  # continuous residual of the interval ending here


@dataclass
class Trajectory:
    """Accepted nodes (t_n, U^n) with step sizes and per-step diagnostics."""

    nodes: list = field(default_factory=list)

    def append(self, node: TrajectoryNode):
        if self.nodes and node.t <= self.nodes[-1].t:
            raise ValueError("node times must be strictly increasing")
        self.nodes.append(node)

    def __len__(self):
        return len(self.nodes)

    def __iter__(self):
        return iter(self.nodes)

    @property
    def times(self) -> np.ndarray:
        return np.array([n.t for n in self.nodes])

    @property
    def states(self) -> np.ndarray:
        return np.array([n.state for n in self.nodes])

    @property
    def final_state(self) -> np.ndarray:
        return self.nodes[-1].state

    @property
    def final_time(self) -> float:
        return self.nodes[-1].t

    def count(self, kind: str) -> int:
        return sum(1 for n in self.nodes if n.kind == kind and n.k > 0)


def explicit_euler_step(u, t: float, k: float, problem: OdeProblem) -> np.ndarray:
    """u + k*f(u, t); the identity at k = 0.  Nonfinite output signals
    blow-up; callers treat it as a step failure."""
    if k < 0:
        raise ValueError("step size must be nonnegative")
    return np.asarray(u, dtype=float) + k * problem.f(u, t)


def discrete_residual(u_prev, u_cand, t_prev: float, k: float, problem: OdeProblem) -> np.ndarray:
    """(u_cand - u_prev)/k - f((u_prev + u_cand)/2); zero for the exact
    midpoint-rule solution."""
    if not k > 0:
        raise ValueError("step size must be positive")
    u_prev = np.asarray(u_prev, dtype=float)
    u_cand = np.asarray(u_cand, dtype=float)
    mid = 0.5 * (u_prev + u_cand)
    return (u_cand - u_prev) / k - problem.f(mid, t_prev + 0.5 * k)


def continuous_residual(u_prev, u_new, t_new: float, k: float, problem: OdeProblem) -> float:
    """Max-norm defect of the piecewise-linear interpolant at the right endpoint.

    The midpoint defect is zero at convergence by construction, so accuracy
    control evaluates the interpolant residual at t_new instead.
    """
    if not k > 0:
        raise ValueError("step size must be positive")
    u_prev = np.asarray(u_prev, dtype=float)
    u_new = np.asarray(u_new, dtype=float)
    return max_norm((u_new - u_prev) / k - problem.f(u_new, t_new))


def cg1_fixed_point_step(
    u_prev,
    t_prev: float,
    k: float,
    problem: OdeProblem,
    tol: float,
    max_iter: int = 10,
    f_prev: Optional[np.ndarray] = None,
    trust_factor: float = _TRUST_FACTOR,
) -> FixedPointOutcome:
    """One implicit midpoint step solved by fixed point iteration.

    Iterates U^l = U^(n-1) + k*f((U^(n-1) + U^(l-1))/2) from U^0 = U^(n-1),
    measuring after each sweep the discrete residual of the new iterate.
    One rhs evaluation per sweep: the midpoint evaluation that closes the
    residual of iterate l is exactly the one that produces iterate l+1.

    Stops as converged when the residual max-norm falls to tol; stops early
    as diverged after the norm grows on two consecutive sweeps (the growth
    ratio recovers the dominant unstable eigenvalue via divergence_rate) or
    when an iterate goes nonfinite.  f_prev, if given, is a previously
    computed f(u_prev, .) reused as the zeroth midpoint evaluation.

    trust_factor bounds how far (in multiples of the state scale) an
    iterate may wander from u_prev before the sweep is cut off: for
    nonlinear problems, residual ratios measured beyond the neighborhood
    where f is well approximated by its Jacobian at u_prev no longer
    estimate the local divergence rate.  Smaller values suit strongly
    curved right-hand sides; the default is safe for linear ones.

    For k*lambda/2 < 1 on a linear mode the sweep contracts and the iterate
    tends to the midpoint update (1 - k*lambda/2)/(1 + k*lambda/2).
    """
    if not k > 0:
        raise ValueError("step size must be positive")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if max_iter < 2:
        raise ValueError("max_iter must be >= 2")

    u_prev = np.asarray(u_prev, dtype=float)
    t_mid = t_prev + 0.5 * k
    g = np.asarray(f_prev, dtype=float) if f_prev is not None else problem.f(u_prev, t_mid)
    # The first sweep is exempt from the trust cutoff: its midpoint
    # excursion is the smallest of the whole iteration and its residual
    # alone still yields a usable rate estimate.
    trust = trust_factor * (1.0 + max_norm(u_prev))

    norms: list[float] = []
    u_iter = u_prev
    for l in range(1, max_iter + 1):
        u_next = u_prev + k * g
        if not np.all(np.isfinite(u_next)):
            return FixedPointOutcome(u_iter, tuple(norms), False, l - 1)
        if l >= 2 and max_norm(u_next - u_prev) > trust:
            return FixedPointOutcome(u_iter, tuple(norms), False, l - 1)
        g_next = problem.f(0.5 * (u_prev + u_next), t_mid)
        r = g - g_next  # == (u_next - u_prev)/k - f(midpoint of u_next)
        r_norm = max_norm(r)
        if not np.isfinite(r_norm):
            return FixedPointOutcome(u_next, tuple(norms), False, l)
        norms.append(r_norm)
        u_iter, g = u_next, g_next
        if r_norm <= tol:
            return FixedPointOutcome(u_iter, tuple(norms), True, l)
        if l >= 3 and norms[-1] > norms[-2] > norms[-3]:
            return FixedPointOutcome(u_iter, tuple(norms), False, l)
    return FixedPointOutcome(u_iter, tuple(norms), False, max_iter)


def divergence_rate(residual_norms: Sequence[float], k: float) -> float:
    """L = (2/k) * (last residual norm / previous residual norm).

    Estimates the dominant unstable eigenvalue magnitude of the fixed point
    sweep, which multiplies residuals by k*J/2.
    """
    if not k > 0:
        raise ValueError("step size must be positive")
    if len(residual_norms) < 2:
        raise DegenerateResidualHistory(
            f"need at least two residual norms, got {len(residual_norms)}"
        )
    last, prev = residual_norms[-1], residual_norms[-2]
    if prev <= 0 or not np.isfinite(prev) or not np.isfinite(last):
        raise DegenerateResidualHistory("residual history is degenerate")
    return 2.0 / k * (last / prev)
