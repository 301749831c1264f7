"""
Closed-form functions with analytic derivatives of every order.

Fields evaluate on coordinate tuples, (x,) in 1D and (x, y) in 2D, for a derivative
multi-index with one entry per direction.
"""
import abc
from typing import TYPE_CHECKING, List, Literal, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from layerfem.exceptions import InvalidProblem, MissingDerivative
from layerfem.fem.space import derivative_multi_indices
from layerfem.stypes import Coords, FloatArray, IntArray, Orders

if TYPE_CHECKING:
    from layerfem.fem.space import FunctionSpace

Side = Literal["left", "right"]


class Field(abc.ABC):
    dim: int = 1

    @abc.abstractmethod
    def evaluate(self, coords: Coords, orders: Orders) -> FloatArray:
        ...

    def __call__(self, *coords: FloatArray) -> FloatArray:
        return self.evaluate(tuple(np.asarray(x, dtype=float) for x in coords), (0,) * self.dim)

    def on_cells(
        self, space: "FunctionSpace", ref_axes: Sequence[FloatArray], orders: Orders, cells: IntArray
    ) -> FloatArray:
        return self.evaluate(space.cell_points(ref_axes, cells), orders)

    def __add__(self, other: "Field") -> "Field":
        return SumField([self, other])

    def __sub__(self, other: "Field") -> "Field":
        return SumField([self, ScaledField(-1.0, other)])

    def __neg__(self) -> "Field":
        return ScaledField(-1.0, self)

    def __rmul__(self, factor: float) -> "Field":
        return ScaledField(factor, self)


class Field1D(Field):
    dim = 1

    @abc.abstractmethod
    def derivative(self, x: FloatArray, order: int) -> FloatArray:
        ...

    def evaluate(self, coords: Coords, orders: Orders) -> FloatArray:
        (x,), (order,) = coords, orders
        return self.derivative(np.asarray(x, dtype=float), order)


class ConstantField(Field):
    def __init__(self, value: float, dim: int = 1):
        self.value = value
        self.dim = dim

    def evaluate(self, coords: Coords, orders: Orders) -> FloatArray:
        shape = np.shape(coords[0])
        if any(orders):
            return np.zeros(shape)
        return np.full(shape, float(self.value))

    def __repr__(self):
        return f"ConstantField({self.value})"


class PolynomialField(Field1D):
    def __init__(self, coefficients: Sequence[float]):
        self.poly = Polynomial(coefficients)

    def derivative(self, x: FloatArray, order: int) -> FloatArray:
        return self.poly.deriv(order)(x) if order else self.poly(x)

    def __repr__(self):
        return f"PolynomialField({list(self.poly.coef)})"


class ExponentialLayer(Field1D):
    """
    amplitude * exp(-rate * x / eps) on the left side, exp(-rate * (1 - x) / eps) on the right.
    """

    def __init__(self, amplitude: float, rate: float, epsilon: float, side: Side = "left"):
        self.amplitude = amplitude
        self.rate = rate
        self.epsilon = epsilon
        self.side = side

    def derivative(self, x: FloatArray, order: int) -> FloatArray:
        distance = x if self.side == "left" else 1.0 - x
        slope = self.rate / self.epsilon
        sign = (-1.0) ** order if self.side == "left" else 1.0
        return self.amplitude * sign * slope**order * np.exp(-slope * distance)

    def __repr__(self):
        return f"ExponentialLayer({self.amplitude}, rate={self.rate}, eps={self.epsilon}, {self.side})"


class Sinusoid(Field1D):
    """
    amplitude * sin(frequency * x + phase)
    """

    def __init__(self, amplitude: float, frequency: float, phase: float = 0.0):
        self.amplitude = amplitude
        self.frequency = frequency
        self.phase = phase

    def derivative(self, x: FloatArray, order: int) -> FloatArray:
        return self.amplitude * self.frequency**order * np.sin(self.frequency * x + self.phase + order * np.pi / 2)

    def __repr__(self):
        return f"Sinusoid({self.amplitude}, {self.frequency}, {self.phase})"


class TensorField(Field):
    dim = 2

    def __init__(self, fx: Field, fy: Field):
        assert fx.dim == fy.dim == 1, "tensor products are built from 1D fields."
        self.fx = fx
        self.fy = fy

    def evaluate(self, coords: Coords, orders: Orders) -> FloatArray:
        x, y = coords
        return self.fx.evaluate((x,), (orders[0],)) * self.fy.evaluate((y,), (orders[1],))

    def __repr__(self):
        return f"TensorField({self.fx!r}, {self.fy!r})"


class SumField(Field):
    def __init__(self, terms: Sequence[Field]):
        dims = {term.dim for term in terms}
        assert len(dims) == 1, f"cannot sum fields of dimensions {dims}."
        self.terms: List[Field] = list(terms)
        self.dim = dims.pop()

    def evaluate(self, coords: Coords, orders: Orders) -> FloatArray:
        total = self.terms[0].evaluate(coords, orders)
        for term in self.terms[1:]:
            total = total + term.evaluate(coords, orders)
        return total

    def __repr__(self):
        return " + ".join(repr(t) for t in self.terms)


class ScaledField(Field):
    def __init__(self, factor: float, field: Field):
        self.factor = factor
        self.field = field
        self.dim = field.dim

    def evaluate(self, coords: Coords, orders: Orders) -> FloatArray:
        return self.factor * self.field.evaluate(coords, orders)

    def __repr__(self):
        return f"{self.factor} * {self.field!r}"


class ResidualField(Field):
    """
    Right-hand side obtained by applying the operator of

        eps^{2k} (D^m u, D^m v) + (c D^r u, D^r v),   r = m - k,

    to u in strong form. Only values are available, as needed for load vectors.
    """

    def __init__(self, u: Field, c: Field, m: int, k: int, epsilon: float):
        if k > m or m - k > 1:
            raise InvalidProblem(f"strong form available for m - k in {{0, 1}}, got m={m}, k={k}.")
        if u.dim == 2 and m - k != 0:
            raise InvalidProblem("2D problems need m = k.")
        self.u, self.c = u, c
        self.m, self.k, self.epsilon = m, k, epsilon
        self.dim = u.dim

    def evaluate(self, coords: Coords, orders: Orders) -> FloatArray:
        if any(orders):
            raise MissingDerivative("right-hand sides are only evaluated, not differentiated.")
        m, r = self.m, self.m - self.k
        principal = sum(
            mult * self.u.evaluate(coords, tuple(2 * a for a in alpha))
            for alpha, mult in derivative_multi_indices(self.dim, m)
        )
        result = (-1.0) ** m * self.epsilon ** (2 * self.k) * principal
        zero = (0,) * self.dim
        if r == 0:
            return result + self.c.evaluate(coords, zero) * self.u.evaluate(coords, zero)
        c, dc = self.c.evaluate(coords, (0,)), self.c.evaluate(coords, (1,))
        return result - dc * self.u.evaluate(coords, (1,)) - c * self.u.evaluate(coords, (2,))

    def __repr__(self):
        return f"ResidualField(m={self.m}, k={self.k}, eps={self.epsilon}, u={self.u!r})"
