"""
Quadrature rules on the reference interval [-1, 1].
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from layerfem.exceptions import TooFewPoints
from layerfem.stypes import FloatArray

NEWTON_TOL = 1e-15
NEWTON_MAXITER = 100


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    name: str
    points: FloatArray
    weights: FloatArray
    exactness_degree: int

    def __post_init__(self):
        self.points.setflags(write=False)
        self.weights.setflags(write=False)

    def __len__(self) -> int:
        return len(self.points)

    def integrate(self, func: Callable[[FloatArray], FloatArray]) -> float:
        return float(np.dot(self.weights, func(self.points)))

    def mapped(self, a: float, b: float) -> tuple[FloatArray, FloatArray]:
        """
        Points and weights of the rule transported to [a, b].
        """
        half = 0.5 * (b - a)
        return a + (self.points + 1.0) * half, self.weights * half


def _legendre_table(x: FloatArray, n: int) -> FloatArray:
    """
    P_0 .. P_n evaluated at x by the three-term recurrence, shape (len(x), n + 1).
    """
    table = np.zeros((len(x), n + 1))
    table[:, 0] = 1.0
    if n > 0:
        table[:, 1] = x
    for k in range(2, n + 1):
        table[:, k] = ((2 * k - 1) * x * table[:, k - 1] - (k - 1) * table[:, k - 2]) / k
    return table


@lru_cache(maxsize=None)
def gauss_lobatto(n_points: int) -> QuadratureRule:
    """
    Legendre-Gauss-Lobatto rule: the endpoints plus the roots of P'_{n-1}.
    Nodes by Newton iteration from the Chebyshev-Gauss-Lobatto points.
    """
    if n_points < 2:
        raise TooFewPoints(f"Gauss-Lobatto rules need at least 2 points, got {n_points}.")
    n = n_points - 1
    x = -np.cos(np.pi * np.arange(n + 1) / n)
    for _ in range(NEWTON_MAXITER):
        table = _legendre_table(x, n)
        x_old = x
        x = x_old - (x_old * table[:, n] - table[:, n - 1]) / ((n + 1) * table[:, n])
        if np.max(np.abs(x - x_old)) < NEWTON_TOL:
            break
    x = 0.5 * (x - x[::-1])
    x[0], x[-1] = -1.0, 1.0
    table = _legendre_table(x, n)
    weights = 2.0 / (n * (n + 1) * table[:, n] ** 2)
    weights = 0.5 * (weights + weights[::-1])
    return QuadratureRule("gauss-lobatto", x, weights, 2 * n_points - 3)


@lru_cache(maxsize=None)
def gauss_legendre(n_points: int) -> QuadratureRule:
    if n_points < 1:
        raise TooFewPoints(f"Gauss-Legendre rules need at least 1 point, got {n_points}.")
    points, weights = leggauss(n_points)
    return QuadratureRule("gauss-legendre", points, weights, 2 * n_points - 1)


def default_rule(p: int) -> QuadratureRule:
    """
    Rule used for assembly and norms with degree p elements.
    """
    return gauss_legendre(max(p + 2, 6))
