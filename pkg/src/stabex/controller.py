"""Adaptive outer loop: residual-regulated steps plus stabilizing bursts.

One macro step attempts the implicit midpoint update by fixed point
iteration.  When the iteration diverges, the divergence rate L of the
residual history sizes a short burst of explicit Euler damping steps
(k = c/L), either m = ceil(ln(k_n*L)) equal steps ("gap" spectra) or a
dyadic ramp ("parabolic" spectra), after which the regulated stepping
resumes.  Step selection follows the continuous residual of the previous
interval through a step regulator that caps growth at 2x per step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .damping import DampingSequence, certified_min_q, dyadic_steps_for_levels
from .solver import (
    DegenerateResidualHistory,
    OdeProblem,
    Trajectory,
    TrajectoryNode,
    cg1_fixed_point_step,
    divergence_rate,
    explicit_euler_step,
    max_norm,
)

__all__ = [
    "SolverConfig",
    "CostReport",
    "IntegrationFailure",
    "regulated_step",
    "proposed_step",
    "stabilization_plan",
    "adaptive_solve",
    "baseline_cost",
]

# Steps below this fraction of T indicate a stalled integration.
_MIN_STEP_FRACTION = 1e-12
# Consecutive failed attempts (halvings / empty plans) tolerated per interval.
_MAX_RETRIES = 80
# Dyadic ramps beyond this many levels amplify mid-ramp float64 roundoff
# catastrophically: noise injected after the small damping steps sees only
# the tail of the stability product, whose partial factors reach ~1e12 at
# p = 8 and ~1e19 at p = 9.
_MAX_RAMP_LEVELS = 8


class IntegrationFailure(RuntimeError):
    """Failure to advance; carries the partial trajectory for diagnosis."""

    def __init__(self, message: str, trajectory: Optional[Trajectory] = None):
        super().__init__(message)
        self.trajectory = trajectory


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances, step bounds and damping parameters of the adaptive loop.

    TOL is the target final-time error scale steering accuracy-based step
    selection; tol is the discrete-residual stop of the fixed point solve
    and defaults to TOL.  S and S0 are fixed stability factors standing in
    for computed ones.  c in (0, 1] sizes damping steps as k = c/L.
    """

    TOL: float = 1e-3
    tol: Optional[float] = None
    k_max: float = 1.0
    k_init: Optional[float] = None
    c: float = 0.9
    mode: str = "gap"  # "gap" | "parabolic"
    stability_factor: float = 1.0
    stability_factor_0: float = 1.0
    max_fp_iterations: int = 10
    trust_factor: float = 100.0

    def __post_init__(self):
        if not self.TOL > 0:
            raise ValueError("TOL must be positive")
        if self.tol is not None and not self.tol > 0:
            raise ValueError("tol must be positive")
        if not self.k_max > 0:
            raise ValueError("k_max must be positive")
        if self.k_init is not None and not 0 < self.k_init <= self.k_max:
            raise ValueError("k_init must satisfy 0 < k_init <= k_max")
        if not 0 < self.c <= 1:
            raise ValueError("c must lie in (0, 1]")
        if self.mode not in ("gap", "parabolic"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.max_fp_iterations < 2:
            raise ValueError("max_fp_iterations must be >= 2")
        if not self.trust_factor > 0:
            raise ValueError("trust_factor must be positive")

    @property
    def discrete_tol(self) -> float:
        return self.TOL if self.tol is None else self.tol

    def initial_step(self, t_end: float) -> float:
        if self.k_init is not None:
            return self.k_init
        return min(self.k_max, t_end / 1000.0)


@dataclass(frozen=True)
class CostReport:
    """Function-evaluation cost of a run against the classical explicit baseline.

    alpha counts every rhs evaluation (fixed point sweeps, damping steps and
    continuous-residual evaluations alike) per unit time; alpha0 is the
    classical stability-limited cost lambda_max/2.  A run that never needed
    stabilization *is* the standard method, so its ratio is exactly 1.
    """

    alpha: float
    alpha0: float
    ratio: float
    regular_steps: int
    stabilizing_steps: int
    total_fp_iterations: int
    total_f_evals: int
    lambda_max_estimate: Optional[float] = None

    @staticmethod
    def from_run(
        *,
        f_evals: int,
        t_end: float,
        regular_steps: int,
        stabilizing_steps: int,
        total_fp_iterations: int,
        lambda_max: Optional[float],
    ) -> "CostReport":
        alpha = f_evals / t_end
        if stabilizing_steps == 0 or lambda_max is None:
            alpha0 = alpha  # no stabilization: the run coincides with the baseline
        else:
            alpha0 = lambda_max / 2.0
        return CostReport(
            alpha=alpha,
            alpha0=alpha0,
            ratio=alpha / alpha0,
            regular_steps=regular_steps,
            stabilizing_steps=stabilizing_steps,
            total_fp_iterations=total_fp_iterations,
            total_f_evals=f_evals,
            lambda_max_estimate=lambda_max,
        )


def regulated_step(k_tilde: float, k_prev: float, k_max: float = math.inf) -> float:
    """Harmonic-style mean 2*kt*kp/(kt + kp), clamped to k_max.

    Damps the oscillation of raw residual-based selection and caps growth
    at k <= 2*k_prev.
    """
    if not (k_tilde > 0 and k_prev > 0):
        raise ValueError("step sizes must be positive")
    return min(2.0 * k_tilde * k_prev / (k_tilde + k_prev), k_max)


def proposed_step(TOL: float, S: float, R_norm: float, k_max: float = math.inf) -> float:
    """Accuracy-based proposal TOL/(S*R); k_max when the residual vanishes."""
    if R_norm < 0:
        raise ValueError("residual norm must be nonnegative")
    if R_norm == 0.0:
        return k_max
    return min(TOL / (S * R_norm), k_max)


def stabilization_plan(L: float, k_n: float, c: float, mode: str = "gap") -> DampingSequence | None:
    """Damping steps for divergence rate L detected at step size k_n.

    Gap mode: m = ceil(ln(k_n*L)) explicit Euler steps of size c/L.
    Parabolic mode: a dyadic ramp with p = ceil(log2(k_n*L)) levels scaled
    so the smallest step is c/L.  Returns None when k_n*L <= 1 (nothing to
    stabilize; the caller retries with a smaller step).
    """
    if not L > 0:
        raise ValueError("divergence rate must be positive")
    if not k_n > 0:
        raise ValueError("step size must be positive")
    if k_n * L <= 1.0:
        return None
    if mode == "gap":
        m = math.ceil(math.log(k_n * L))
        steps = (c / L,) * m
        return DampingSequence(steps=steps, method="simple")
    if mode == "parabolic":
        p = math.ceil(math.log2(k_n * L))
        return dyadic_steps_for_levels(L / c, p, certified_min_q(p))
    raise ValueError(f"unknown mode {mode!r}")


def _estimate_rate(residual_norms, k: float) -> float:
    """Divergence rate, smoothing over the last two ratios when available.

    A history shorter than two norms (the sweep left its trust region
    immediately) is degenerate; the caller walks the step size down until
    the measurement happens inside the trust region.
    """
    if len(residual_norms) >= 4 and residual_norms[-3] > 0:
        ratio2 = residual_norms[-1] / residual_norms[-3]
        if np.isfinite(ratio2) and ratio2 > 0:
            return 2.0 / k * math.sqrt(ratio2)
    return divergence_rate(residual_norms, k)


class _CountingProblem:
    """Wraps an OdeProblem so every rhs evaluation is tallied."""

    def __init__(self, problem: OdeProblem):
        self._problem = problem
        self.evals = 0

    def __getattr__(self, name):
        return getattr(self._problem, name)

    def f(self, u, t=0.0):
        self.evals += 1
        return self._problem.f(u, t)


def adaptive_solve(problem: OdeProblem, config: SolverConfig) -> tuple[Trajectory, CostReport]:
    """Integrate problem over [0, t_end] with stabilized explicit stepping.

    Per interval: evaluate the continuous residual of the previous interval,
    select k_n by the regulated accuracy proposal, and attempt the fixed
    point midpoint step.  On divergence, estimate L from the residual
    history, execute the stabilization plan as explicit Euler steps
    (recorded as "stabilizing" nodes), and resume regulated stepping from
    the last converged step size.  Terminates on reaching t_end; the last
    step is shortened to land on it exactly.

    Raises IntegrationFailure when the step size collapses to the floor
    without progress; the partial trajectory rides on the exception.
    """
    counting = _CountingProblem(problem)
    t_end = problem.t_end
    tol = config.discrete_tol
    k_floor = _MIN_STEP_FRACTION * t_end

    trajectory = Trajectory()
    u = problem.u0.copy()
    t = 0.0
    trajectory.append(TrajectoryNode(t, u.copy(), 0.0, "regular", 0, math.nan))

    f_right = counting.f(u, t)  # reused as the zeroth midpoint evaluation
    R_prev: Optional[float] = None
    k_last_regular: Optional[float] = None  # regulator memory, survives bursts
    total_fp_iterations = 0
    max_L_observed: Optional[float] = None

    while t < t_end - 1e-14 * t_end:
        if R_prev is None:
            k_n = min(config.initial_step(t_end), config.k_max)
        else:
            k_tilde = proposed_step(config.TOL, config.stability_factor, R_prev, config.k_max)
            k_n = regulated_step(k_tilde, k_last_regular, config.k_max)
        k_n = min(k_n, t_end - t)
        # The step this interval is aiming for.  Divergence-rate probing may
        # walk k_n down to keep the measurement local, but the stabilization
        # plan is sized for the step the solver actually wants to take.
        k_intended = k_n

        for _retry in range(_MAX_RETRIES):
            if k_n < k_floor:
                raise IntegrationFailure(
                    f"step size collapsed below floor at t = {t:.6g}", trajectory
                )
            outcome = cg1_fixed_point_step(
                u,
                t,
                k_n,
                counting,
                tol,
                config.max_fp_iterations,
                f_prev=f_right,
                trust_factor=config.trust_factor,
            )
            if outcome.converged:
                u_new = outcome.final_state
                t_new = t + k_n
                f_new = counting.f(u_new, t_new)
                R_norm = max_norm((u_new - u) / k_n - f_new)
                if not np.isfinite(R_norm):
                    raise IntegrationFailure(
                        f"rhs became nonfinite at t = {t_new:.6g}", trajectory
                    )
                trajectory.append(
                    TrajectoryNode(t_new, u_new, k_n, "regular", outcome.iterations, R_norm)
                )
                total_fp_iterations += outcome.iterations
                u, t, f_right = u_new, t_new, f_new
                R_prev = R_norm
                k_last_regular = k_n
                break

            # Divergence (or stagnation): calibrate and execute damping steps.
            try:
                L = _estimate_rate(outcome.residual_norms, k_n)
            except DegenerateResidualHistory:
                k_n = 0.5 * k_n
                continue
            max_L_observed = L if max_L_observed is None else max(max_L_observed, L)
            k_plan = k_intended
            if config.mode == "parabolic":
                if problem.spectral_hint is not None:
                    # A dyadic ramp must cover the whole spectrum: the
                    # damping polynomial has no stability margin above its
                    # design band, so a known spectral bound trumps a low
                    # rate measurement.  (Gap-mode bursts stay mode-targeted
                    # on the measured L.)
                    L = max(L, problem.spectral_hint)
                k_plan = min(k_plan, 2.0**_MAX_RAMP_LEVELS / L)
            plan = stabilization_plan(L, k_plan, config.c, config.mode)
            if plan is None:
                k_n = 0.5 * k_n
                k_intended = k_n
                continue

            u_burst, t_burst = u, t
            k_s_last = None
            for k_s in plan.steps:
                k_s = min(k_s, t_end - t_burst)
                if k_s <= 0:
                    break
                u_next = explicit_euler_step(u_burst, t_burst, k_s, counting)
                if not np.all(np.isfinite(u_next)):
                    raise IntegrationFailure(
                        f"explicit damping step blew up at t = {t_burst:.6g}", trajectory
                    )
                t_burst = t_burst + k_s
                trajectory.append(
                    TrajectoryNode(t_burst, u_next, k_s, "stabilizing", 0, math.nan)
                )
                u_burst, k_s_last = u_next, k_s
                if t_burst >= t_end:
                    break
            if k_s_last is None:
                k_n = 0.5 * k_n
                continue

            # Resume at 2(a): residual of the last damping interval feeds
            # the next step selection.  In gap mode ambition restarts from
            # the last converged regular step (the failed k_n before any
            # step has converged); a dyadic ramp has already grown the step
            # back carefully, so the regulator takes over from its top step.
            f_right = counting.f(u_burst, t_burst)
            R_prev = max_norm((u_burst - trajectory.nodes[-2].state) / k_s_last - f_right)
            if not np.isfinite(R_prev):
                raise IntegrationFailure(
                    f"rhs became nonfinite at t = {t_burst:.6g}", trajectory
                )
            trajectory.nodes[-1] = replace(trajectory.nodes[-1], residual_norm=R_prev)
            u, t = u_burst, t_burst
            if config.mode == "parabolic":
                k_last_regular = max(k_s_last, k_last_regular or 0.0)
            elif k_last_regular is None:
                k_last_regular = k_intended
            break
        else:
            raise IntegrationFailure(
                f"no convergent step found after {_MAX_RETRIES} retries at t = {t:.6g}",
                trajectory,
            )

    lambda_max = problem.spectral_hint if problem.spectral_hint is not None else max_L_observed
    report = CostReport.from_run(
        f_evals=counting.evals,
        t_end=t_end,
        regular_steps=trajectory.count("regular"),
        stabilizing_steps=trajectory.count("stabilizing"),
        total_fp_iterations=total_fp_iterations,
        lambda_max=lambda_max,
    )
    return trajectory, report


def baseline_cost(
    problem: OdeProblem,
    config: SolverConfig,
    lambda_max: Optional[float] = None,
) -> float:
    """Classical explicit cost lambda_max/2: one step per 2/lambda_max of time.

    lambda_max falls back to the problem's spectral hint; one of the two
    must be available.
    """
    if lambda_max is None:
        lambda_max = problem.spectral_hint
    if lambda_max is None:
        raise ValueError("baseline cost needs a dominant-eigenvalue estimate")
    return lambda_max / 2.0
