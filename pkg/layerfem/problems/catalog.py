"""
Catalog of reaction-diffusion and fourth-order problems with closed-form solutions and
their splitting into a smooth part, boundary layers and (in 2D) corner layers.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from layerfem.exceptions import BadEpsilon, InvalidProblem, UnknownProblem
from layerfem.problems.fields import (
    ConstantField,
    ExponentialLayer,
    Field,
    PolynomialField,
    ResidualField,
    Sinusoid,
    SumField,
    TensorField,
)

LOGGER = logging.getLogger(__name__)
LOGGER.setLevel(logging.INFO)

COEFFICIENT_SAMPLES = 1000
BOUNDARY_SAMPLES = 100
MAX_EPSILON = 0.25


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """
    eps^{2k} (D^m u, D^m v) + a~(u, v) = (f, v) on the unit interval or square, with
    a~(u, v) = (c D^{m-k} u, D^{m-k} v) and homogeneous H^m_0 boundary conditions.
    """

    problem_id: str
    m: int
    k: int
    epsilon: float
    c: Field
    gamma: float
    f: Field
    a_tilde: str
    dim: int = 1

    def __post_init__(self):
        if not 1 <= self.k <= self.m <= 2:
            raise InvalidProblem(f"need 1 <= k <= m <= 2, got m={self.m}, k={self.k}.")
        if self.dim == 2 and self.m != 1:
            raise InvalidProblem("2D problems are only supported for m = 1.")
        if self.dim not in (1, 2):
            raise InvalidProblem(f"dim must be 1 or 2, got {self.dim}.")
        c_min = float(np.min(self.c(*_sample_grid(self.dim))))
        if self.gamma <= 0 or c_min < self.gamma:
            raise InvalidProblem(f"reaction coefficient must satisfy c >= gamma > 0, got min c = {c_min}.")

    @property
    def r(self) -> int:
        """
        Derivative order of the lower-order form.
        """
        return self.m - self.k


@dataclass(frozen=True, eq=False)
class SolutionDecomposition:
    u_exact: Field
    v: Field
    w: Tuple[Field, ...] = ()
    corner: Tuple[Field, ...] = ()
    derivative_bounds: Dict[str, float] = field(default_factory=dict)

    @property
    def layers(self) -> Tuple[Field, ...]:
        return self.w + self.corner

    @cached_property
    def parts_sum(self) -> Field:
        return SumField([self.v, *self.layers])


def _sample_grid(dim: int) -> Tuple[np.ndarray, ...]:
    if dim == 1:
        return (np.linspace(0.0, 1.0, COEFFICIENT_SAMPLES),)
    side = int(np.ceil(np.sqrt(COEFFICIENT_SAMPLES)))
    x, y = np.meshgrid(np.linspace(0.0, 1.0, side), np.linspace(0.0, 1.0, side))
    return x.ravel(), y.ravel()


def _check_epsilon(epsilon: float):
    if not 0 < epsilon <= MAX_EPSILON:
        raise BadEpsilon(f"epsilon must lie in (0, {MAX_EPSILON}], got {epsilon!r}.")


def _layer_pair(amplitude: float, epsilon: float, rate: float = 1.0) -> Tuple[ExponentialLayer, ExponentialLayer]:
    return ExponentialLayer(amplitude, rate, epsilon, "left"), ExponentialLayer(amplitude, rate, epsilon, "right")


def problem_1d_reaction(epsilon: float, variant: str = "ConstantOne") -> Tuple[ProblemSpec, SolutionDecomposition]:
    """
    -eps^2 u'' + c u = f on (0, 1), u(0) = u(1) = 0.

    ConstantOne: c = f = 1, u = 1 - (exp(-x/eps) + exp(-(1-x)/eps)) / (1 + exp(-1/eps)).
    VariableC: c = 1 + x - x^2, u = sin(pi x) + (1 + exp(-1/eps)) - exp(-x/eps) - exp(-(1-x)/eps).
    """
    _check_epsilon(epsilon)
    damping = 1.0 + np.exp(-1.0 / epsilon)
    if variant == "ConstantOne":
        w1, w2 = _layer_pair(-1.0 / damping, epsilon)
        v: Field = ConstantField(1.0)
        u = SumField([v, w1, w2])
        problem = ProblemSpec("rd1d-const", 1, 1, epsilon, ConstantField(1.0), 1.0, ConstantField(1.0), "(c u, v)")
    elif variant == "VariableC":
        w1, w2 = _layer_pair(-1.0, epsilon)
        v = SumField([Sinusoid(1.0, np.pi), ConstantField(damping)])
        u = SumField([v, w1, w2])
        c = PolynomialField([1.0, 1.0, -1.0])
        problem = ProblemSpec("rd1d-varc", 1, 1, epsilon, c, 1.0, ResidualField(u, c, 1, 1, epsilon), "(c u, v)")
    else:
        raise UnknownProblem(f"unknown 1D reaction variant {variant!r}.")
    return problem, SolutionDecomposition(u_exact=u, v=v, w=(w1, w2), derivative_bounds={"layer": 1.0})


def problem_2d_reaction(epsilon: float) -> Tuple[ProblemSpec, SolutionDecomposition]:
    """
    -eps^2 Laplace(u) + u = f on the unit square with u = g(x) g(y), g the ConstantOne 1D solution.
    Then f = g(x) + g(y) - g(x) g(y).
    """
    _check_epsilon(epsilon)
    damping = 1.0 + np.exp(-1.0 / epsilon)
    one = ConstantField(1.0)
    left, right = _layer_pair(-1.0 / damping, epsilon)
    g = SumField([one, left, right])
    u = TensorField(g, g)
    edges = (TensorField(left, one), TensorField(right, one), TensorField(one, left), TensorField(one, right))
    corners = (TensorField(left, left), TensorField(right, left), TensorField(left, right), TensorField(right, right))
    c = ConstantField(1.0, dim=2)
    problem = ProblemSpec("rd2d-tensor", 1, 1, epsilon, c, 1.0, ResidualField(u, c, 1, 1, epsilon), "(c u, v)", dim=2)
    decomposition = SolutionDecomposition(
        u_exact=u,
        v=ConstantField(1.0, dim=2),
        w=edges,
        corner=corners,
        derivative_bounds={"layer": 1.0, "corner": 1.0},
    )
    return problem, decomposition


def fourth_order_k1_coefficients(epsilon: float) -> np.ndarray:
    """
    (A, B, C, D) of u = A + B x - x^2/2 + eps C exp(-x/eps) + eps D exp(-(1-x)/eps)
    solving eps^2 u'''' - u'' = 1 with clamped boundary conditions.
    """
    q = np.exp(-1.0 / epsilon)
    system = np.array(
        [
            [1.0, 0.0, epsilon, epsilon * q],
            [0.0, 1.0, -1.0, q],
            [1.0, 1.0, epsilon * q, epsilon],
            [0.0, 1.0, -q, 1.0],
        ]
    )
    return np.linalg.solve(system, np.array([0.0, 0.0, 0.5, 1.0]))


def _clamped_correction(values: np.ndarray) -> PolynomialField:
    """
    Cubic q with (q(0), q'(0), q(1), q'(1)) = values.
    """
    hermite = np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [1.0, 1.0, 1.0, 1.0],
            [0.0, 1.0, 2.0, 3.0],
        ]
    )
    return PolynomialField(np.linalg.solve(hermite, values))


def problem_1d_fourth_order(epsilon: float, k: int) -> Tuple[ProblemSpec, SolutionDecomposition]:
    """
    eps^{2k} (u'', v'') + a~(u, v) = (f, v) with clamped boundary conditions.

    k = 1: a~(u, v) = (u', v'), f = 1, closed-form solution.
    k = 2: a~(u, v) = (u, v), u = sin^2(pi x) + layers exp(-x/eps) (1 - exp(-x/eps))^2 mirrored,
    plus a cubic of size O(exp(-1/eps) / eps) restoring the boundary conditions.
    """
    _check_epsilon(epsilon)
    one = ConstantField(1.0)
    if k == 1:
        a, b, c_left, d_right = fourth_order_k1_coefficients(epsilon)
        v: Field = PolynomialField([a, b, -0.5])
        w1 = ExponentialLayer(epsilon * c_left, 1.0, epsilon, "left")
        w2 = ExponentialLayer(epsilon * d_right, 1.0, epsilon, "right")
        u = SumField([v, w1, w2])
        problem = ProblemSpec("fourth1d-k1", 2, 1, epsilon, one, 1.0, one, "(u', v')")
        bound = float(max(abs(c_left), abs(d_right)))
        return problem, SolutionDecomposition(u_exact=u, v=v, w=(w1, w2), derivative_bounds={"layer": bound})
    if k == 2:
        terms = ((1.0, 1.0), (-2.0, 2.0), (1.0, 3.0))
        w1 = SumField([ExponentialLayer(amp, rate, epsilon, "left") for amp, rate in terms])
        w2 = SumField([ExponentialLayer(amp, rate, epsilon, "right") for amp, rate in terms])
        layers = SumField([w1, w2])
        ends = np.array([0.0, 1.0])
        trace = np.array(
            [
                layers(ends[:1])[0],
                layers.evaluate((ends[:1],), (1,))[0],
                layers(ends[1:])[0],
                layers.evaluate((ends[1:],), (1,))[0],
            ]
        )
        correction = _clamped_correction(-trace)
        sine_squared = SumField([ConstantField(0.5), Sinusoid(-0.5, 2 * np.pi, np.pi / 2)])
        v = SumField([sine_squared, correction])
        u = SumField([v, w1, w2])
        problem = ProblemSpec("fourth1d-k2", 2, 2, epsilon, one, 1.0, ResidualField(u, one, 2, 2, epsilon), "(u, v)")
        # sup over i <= 4 of the amplitudes sum 1 + 2 * 2^i + 3^i
        return problem, SolutionDecomposition(u_exact=u, v=v, w=(w1, w2), derivative_bounds={"layer": 114.0})
    raise InvalidProblem(f"fourth-order problems need k in {{1, 2}}, got {k}.")


def problem_manufactured(
    u: Field,
    m: int,
    k: int,
    epsilon: float,
    c: Optional[Field] = None,
    gamma: float = 1.0,
    problem_id: str = "manufactured",
) -> Tuple[ProblemSpec, SolutionDecomposition]:
    """
    Problem whose right-hand side is obtained by applying the operator to u. The
    decomposition has no layer parts.
    """
    c = c or ConstantField(1.0, dim=u.dim)
    a_tilde = "(c u, v)" if m == k else "(c u', v')"
    problem = ProblemSpec(problem_id, m, k, epsilon, c, gamma, ResidualField(u, c, m, k, epsilon), a_tilde, u.dim)
    return problem, SolutionDecomposition(u_exact=u, v=u)


CATALOG: Dict[str, Callable[[float], Tuple[ProblemSpec, SolutionDecomposition]]] = {
    "rd1d-const": lambda eps: problem_1d_reaction(eps, "ConstantOne"),
    "rd1d-varc": lambda eps: problem_1d_reaction(eps, "VariableC"),
    "rd2d-tensor": problem_2d_reaction,
    "fourth1d-k1": lambda eps: problem_1d_fourth_order(eps, 1),
    "fourth1d-k2": lambda eps: problem_1d_fourth_order(eps, 2),
}


def get_problem(problem_id: str, epsilon: float) -> Tuple[ProblemSpec, SolutionDecomposition]:
    try:
        builder = CATALOG[problem_id]
    except KeyError:
        raise UnknownProblem(f"unknown problem {problem_id!r}, choose from {sorted(CATALOG)}.")
    return builder(epsilon)


def boundary_trace_error(problem: ProblemSpec, decomposition: SolutionDecomposition) -> float:
    """
    Largest |D^alpha u| on the boundary over |alpha| < m, sampled.
    """
    t = np.linspace(0.0, 1.0, BOUNDARY_SAMPLES)
    u = decomposition.u_exact
    worst = 0.0
    if problem.dim == 1:
        ends = (np.array([0.0, 1.0]),)
        for order in range(problem.m):
            worst = max(worst, float(np.max(np.abs(u.evaluate(ends, (order,))))))
        return worst
    zeros, ones = np.zeros_like(t), np.ones_like(t)
    edges = [(t, zeros), (t, ones), (zeros, t), (ones, t)]
    for order in range(problem.m):
        for ox in range(order + 1):
            for edge in edges:
                worst = max(worst, float(np.max(np.abs(u.evaluate(edge, (ox, order - ox))))))
    return worst


def layer_bound_ratio(problem: ProblemSpec, decomposition: SolutionDecomposition, samples: int = 1000) -> float:
    """
    sup over sampled x and i = 0..2m of |d^i w_1 / dx^i| / (eps^{m-k-i} exp(-x/eps)), the
    constant of the first boundary layer part.
    """
    eps, m, k = problem.epsilon, problem.m, problem.k
    w1 = decomposition.w[0]
    x = np.linspace(0.0, 1.0, samples)
    coords: Tuple[np.ndarray, ...] = (x,) if problem.dim == 1 else (x, np.full_like(x, 0.5))
    worst = 0.0
    for i in range(2 * m + 1):
        orders = (i,) if problem.dim == 1 else (i, 0)
        # compare in log scale, exp(-x/eps) underflows long before the ratio does
        values = np.abs(w1.evaluate(coords, orders))
        mask = values > 0
        log_ratio = np.log(values[mask]) - (m - k - i) * np.log(eps) + x[mask] / eps
        if log_ratio.size:
            worst = max(worst, float(np.exp(np.max(log_ratio))))
    return worst
