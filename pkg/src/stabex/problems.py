"""The eight benchmark problems, with analytic solutions and Jacobians.

Every constructor returns a BenchmarkProblem wrapping an OdeProblem with
the exact published parameters.  Analytic solutions are attached wherever
closed forms exist (all four linear problems, the oscillator, and the
spatially discretized heat equation via its exact eigenexpansion), so the
reference solver can bypass numerical integration there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .solver import OdeProblem

__all__ = [
    "BenchmarkProblem",
    "test_equation",
    "test_system",
    "nonnormal_system",
    "hires",
    "akzo_nobel",
    "van_der_pol",
    "heat_equation",
    "nonstiff_oscillator",
    "PROBLEM_NAMES",
    "get_problem",
]


@dataclass(frozen=True)
class BenchmarkProblem:
    """A named benchmark: the ODE, its reference data and the published cost ratio."""

    name: str
    problem: OdeProblem
    analytic_solution: Optional[Callable[[float], np.ndarray]] = None
    paper_cost_ratio: Optional[float] = None
    preferred_mode: str = "gap"

    @property
    def t_end(self) -> float:
        return self.problem.t_end


def test_equation() -> BenchmarkProblem:
    """Scalar decay u' + 1000*u = 0, u(0) = 1, on [0, 10]."""
    lam = 1000.0

    def rhs(u, t=0.0):
        return -lam * u

    def jac(u, t=0.0):
        return np.array([[-lam]])

    return BenchmarkProblem(
        name="test-eq",
        problem=OdeProblem(1, rhs, np.array([1.0]), 10.0, jacobian=jac, spectral_hint=lam),
        analytic_solution=lambda t: np.array([math.exp(-lam * t)]),
        paper_cost_ratio=1.0 / 310.0,
    )


def test_system() -> BenchmarkProblem:
    """Diagonal system u' + diag(100, 1000)u = 0, u(0) = (1, 1), on [0, 10]."""
    A = np.diag([100.0, 1000.0])

    def rhs(u, t=0.0):
        return -A @ u

    def jac(u, t=0.0):
        return -A

    return BenchmarkProblem(
        name="test-sys",
        problem=OdeProblem(2, rhs, np.array([1.0, 1.0]), 10.0, jacobian=jac, spectral_hint=1000.0),
        analytic_solution=lambda t: np.array([math.exp(-100.0 * t), math.exp(-1000.0 * t)]),
        paper_cost_ratio=1.0 / 104.0,
    )


def nonnormal_system() -> BenchmarkProblem:
    """Highly nonnormal 2x2 system with eigenvalues 1000 and 100, on [0, 10].

    u' + [[1000, -10000], [0, 100]] u = 0, u(0) = (1, 1).  The closed form
    mixes the modes with weight 100/9 from the off-diagonal coupling.
    """
    A = np.array([[1000.0, -10000.0], [0.0, 100.0]])

    def rhs(u, t=0.0):
        return -A @ u

    def jac(u, t=0.0):
        return -A

    b = 100.0 / 9.0  # coefficient of the slow mode in u1

    def solution(t):
        slow = math.exp(-100.0 * t)
        fast = math.exp(-1000.0 * t)
        return np.array([(1.0 - b) * fast + b * slow, slow])

    return BenchmarkProblem(
        name="nonnormal",
        problem=OdeProblem(2, rhs, np.array([1.0, 1.0]), 10.0, jacobian=jac, spectral_hint=1000.0),
        analytic_solution=solution,
        paper_cost_ratio=1.0 / 180.0,
    )


def hires() -> BenchmarkProblem:
    """High Irradiance RESponse kinetics, 8 equations, on [0, 321.8122].

    The only nonlinearity is the u6*u8 reaction; the last two equations are
    negatives of each other, so u7 + u8 is conserved.
    """

    def rhs(u, t=0.0):
        u1, u2, u3, u4, u5, u6, u7, u8 = u
        rxn = 280.0 * u6 * u8
        return np.array(
            [
                -1.71 * u1 + 0.43 * u2 + 8.32 * u3 + 0.0007,
                1.71 * u1 - 8.75 * u2,
                -10.03 * u3 + 0.43 * u4 + 0.035 * u5,
                8.32 * u2 + 1.71 * u3 - 1.12 * u4,
                -1.745 * u5 + 0.43 * u6 + 0.43 * u7,
                -rxn + 0.69 * u4 + 1.71 * u5 - 0.43 * u6 + 0.69 * u7,
                rxn - 1.81 * u7,
                -rxn + 1.81 * u7,
            ]
        )

    def jac(u, t=0.0):
        u6, u8 = u[5], u[7]
        J = np.zeros((8, 8))
        J[0, 0], J[0, 1], J[0, 2] = -1.71, 0.43, 8.32
        J[1, 0], J[1, 1] = 1.71, -8.75
        J[2, 2], J[2, 3], J[2, 4] = -10.03, 0.43, 0.035
        J[3, 1], J[3, 2], J[3, 3] = 8.32, 1.71, -1.12
        J[4, 4], J[4, 5], J[4, 6] = -1.745, 0.43, 0.43
        J[5, 3], J[5, 4], J[5, 6] = 0.69, 1.71, 0.69
        J[5, 5], J[5, 7] = -280.0 * u8 - 0.43, -280.0 * u6
        J[6, 5], J[6, 6], J[6, 7] = 280.0 * u8, -1.81, 280.0 * u6
        J[7, 5], J[7, 6], J[7, 7] = -280.0 * u8, 1.81, -280.0 * u6
        return J

    u0 = np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0057])
    return BenchmarkProblem(
        name="hires",
        problem=OdeProblem(8, rhs, u0, 321.8122, jacobian=jac),
        paper_cost_ratio=1.0 / 33.0,
    )


def akzo_nobel() -> BenchmarkProblem:
    """Chemical reaction kinetics with five rates and an inflow term, on [0, 180].

    sqrt(u2) is clamped at zero to survive transient negative round-off.
    """

    def _rates(u):
        u1, u2, u3, u4, u5, u6 = u
        s2 = math.sqrt(u2) if u2 > 0 else 0.0
        r1 = 18.7 * u1**4 * s2
        r2 = 0.58 * u3 * u4
        r3 = 0.58 / 34.4 * u1 * u5
        r4 = 0.09 * u1 * u4**2
        r5 = 0.42 * u6**2 * s2
        F = 3.3 * (0.9 / 737.0 - u2)
        return r1, r2, r3, r4, r5, F

    def rhs(u, t=0.0):
        r1, r2, r3, r4, r5, F = _rates(u)
        return np.array(
            [
                -2.0 * r1 + r2 - r3 - r4,
                -0.5 * r1 - r4 - 0.5 * r5 + F,
                r1 - r2 + r3,
                -r2 + r3 - 2.0 * r4,
                r2 - r3 + r5,
                -r5,
            ]
        )

    def jac(u, t=0.0):
        u1, u2, u3, u4, u5, u6 = u
        s2 = math.sqrt(u2) if u2 > 0 else 0.0
        ds2 = 0.5 / s2 if u2 > 0 else 0.0
        d = np.zeros((5, 6))  # d[i] = grad of rate i+1
        d[0, 0] = 4 * 18.7 * u1**3 * s2
        d[0, 1] = 18.7 * u1**4 * ds2
        d[1, 2], d[1, 3] = 0.58 * u4, 0.58 * u3
        d[2, 0], d[2, 4] = 0.58 / 34.4 * u5, 0.58 / 34.4 * u1
        d[3, 0], d[3, 3] = 0.09 * u4**2, 2 * 0.09 * u1 * u4
        d[4, 1], d[4, 5] = 0.42 * u6**2 * ds2, 2 * 0.42 * u6 * s2
        J = np.zeros((6, 6))
        J[0] = -2 * d[0] + d[1] - d[2] - d[3]
        J[1] = -0.5 * d[0] - d[3] - 0.5 * d[4]
        J[1, 1] -= 3.3
        J[2] = d[0] - d[1] + d[2]
        J[3] = -d[1] + d[2] - 2 * d[3]
        J[4] = d[1] - d[2] + d[4]
        J[5] = -d[4]
        return J

    u0 = np.array([0.437, 0.00123, 0.0, 0.0, 0.0, 0.367])
    return BenchmarkProblem(
        name="akzo",
        problem=OdeProblem(6, rhs, u0, 180.0, jacobian=jac),
        paper_cost_ratio=1.0 / 9.0,
    )


def van_der_pol(mu: float = 1000.0) -> BenchmarkProblem:
    """Van der Pol relaxation oscillator with mu = 1000, u0 = (2, 0), on [0, 10]."""

    def rhs(u, t=0.0):
        u1, u2 = u
        return np.array([u2, -mu * (u1 * u1 - 1.0) * u2 - u1])

    def jac(u, t=0.0):
        u1, u2 = u
        return np.array([[0.0, 1.0], [-2.0 * mu * u1 * u2 - 1.0, -mu * (u1 * u1 - 1.0)]])

    return BenchmarkProblem(
        name="vdp",
        problem=OdeProblem(2, rhs, np.array([2.0, 0.0]), 10.0, jacobian=jac),
        paper_cost_ratio=1.0 / 75.0,
    )


def _heat_eigen(n: int, h: float):
    """Eigenvalues and orthonormal eigenvectors of (1/h^2) tridiag(-1, 2, -1)."""
    k = np.arange(1, n + 1)
    lam = (2.0 / h**2) * (1.0 - np.cos(k * np.pi * h))
    i = np.arange(1, n + 1)
    V = np.sin(np.outer(i, k) * np.pi * h) * math.sqrt(2.0 * h)
    return lam, V


def heat_equation(h: float = 0.01, t_end: float = 1.0) -> BenchmarkProblem:
    """Method-of-lines heat equation u' + Au = f on (0, 1), on [0, t_end].

    A is the Dirichlet stiffness matrix (1/h^2) tridiag(-1, 2, -1) on the
    n = 1/h - 1 interior nodes; f is a unit-integral hat approximating a
    point source at x = 0.5 (value 1/h at the nearest node).  With h = 0.01
    the spectrum fills [pi^2, ~4e4], so the parabolic (dyadic) stabilization
    mode applies.  The exact solution comes from the closed-form
    eigenexpansion of A.
    """
    n = round(1.0 / h) - 1
    if n < 3:
        raise ValueError("h must divide [0, 1] into at least 4 intervals")
    inv_h2 = 1.0 / h**2
    forcing = np.zeros(n)
    mid = int(round(0.5 / h)) - 1  # 0-based index of the node nearest x = 0.5
    forcing[mid] = 1.0 / h

    def rhs(u, t=0.0):
        au = 2.0 * u
        au[:-1] -= u[1:]
        au[1:] -= u[:-1]
        return forcing - inv_h2 * au

    A = inv_h2 * (
        2.0 * np.eye(n) - np.diag(np.ones(n - 1), 1) - np.diag(np.ones(n - 1), -1)
    )

    def jac(u, t=0.0):
        return -A

    lam, V = _heat_eigen(n, h)
    f_modes = V.T @ forcing

    def solution(t):
        return V @ (f_modes / lam * (1.0 - np.exp(-lam * t)))

    return BenchmarkProblem(
        name="heat",
        problem=OdeProblem(
            n, rhs, np.zeros(n), t_end, jacobian=jac, spectral_hint=float(lam[-1])
        ),
        analytic_solution=solution,
        paper_cost_ratio=1.0 / 31.0,
        preferred_mode="parabolic",
    )


def nonstiff_oscillator() -> BenchmarkProblem:
    """Nonstiff linear oscillator u1' = 5*u2, u2' = -u1, u0 = (0, 1), on [0, 10].

    Conserves u1^2/5 + u2^2; the solution is (sqrt(5) sin(sqrt(5) t),
    cos(sqrt(5) t)).
    """
    B = np.array([[0.0, 5.0], [-1.0, 0.0]])

    def rhs(u, t=0.0):
        return B @ u

    def jac(u, t=0.0):
        return B

    w = math.sqrt(5.0)

    def solution(t):
        return np.array([w * math.sin(w * t), math.cos(w * t)])

    return BenchmarkProblem(
        name="nonstiff",
        problem=OdeProblem(2, rhs, np.array([0.0, 1.0]), 10.0, jacobian=jac, spectral_hint=w),
        analytic_solution=solution,
        paper_cost_ratio=1.0,
    )


_CONSTRUCTORS = {
    "test-eq": test_equation,
    "test-sys": test_system,
    "nonnormal": nonnormal_system,
    "hires": hires,
    "akzo": akzo_nobel,
    "vdp": van_der_pol,
    "heat": heat_equation,
    "nonstiff": nonstiff_oscillator,
}

PROBLEM_NAMES = tuple(_CONSTRUCTORS)


def get_problem(name: str) -> BenchmarkProblem:
    """Look up a benchmark by its registry name."""
    try:
        return _CONSTRUCTORS[name]()
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; choose from {', '.join(PROBLEM_NAMES)}") from None
