"""
Reference bases on [-1, 1].

LagrangeGLBasis(p) is the nodal basis of degree p at the p + 1 Gauss-Lobatto points.
HermiteBasis(m) is the C^{m-1} Hermite basis of degree 2m - 1. Its local dofs are ordered
[left node orders 0..m-1, right node orders 0..m-1] and are defined with respect to the
reference coordinate; on a physical cell of width h the dof of derivative order n is
scaled by (h/2)^n so that physical derivatives interpolate.
"""
import abc
from functools import cached_property, lru_cache
from typing import List

import numpy as np
from numpy.polynomial import Polynomial

from layerfem.exceptions import LayerFemError, UnsupportedOrder
from layerfem.fem.quadrature import gauss_lobatto
from layerfem.stypes import BasisFamily, FloatArray

MAX_HERMITE_ORDER = 2
NORM_SAMPLES = 2001


class ReferenceBasis(abc.ABC):
    family: BasisFamily
    p: int
    continuity: int

    @property
    @abc.abstractmethod
    def polynomials(self) -> List[Polynomial]:
        ...

    @property
    def n_local(self) -> int:
        return len(self.polynomials)

    @property
    @abc.abstractmethod
    def local_orders(self) -> List[int]:
        """
        Derivative order each local dof interpolates.
        """

    @property
    @abc.abstractmethod
    def local_nodes(self) -> FloatArray:
        """
        Reference coordinate each local dof is attached to.
        """

    def tabulate(self, xi: FloatArray, derivative: int = 0) -> FloatArray:
        """
        Reference derivatives of every local function at xi, shape (n_local, len(xi)).
        """
        xi = np.asarray(xi, dtype=float)
        return np.array([poly.deriv(derivative)(xi) if derivative else poly(xi) for poly in self.polynomials])

    def dof_scaling(self, h: float | FloatArray) -> FloatArray:
        """
        Per local dof factor turning reference functions into physical ones on cells of width h.
        Shape (len(h), n_local) for array input.
        """
        orders = np.asarray(self.local_orders, dtype=float)
        return (0.5 * np.asarray(h, dtype=float))[..., None] ** orders

    def __repr__(self):
        return f"{self.__class__.__name__}(p={self.p})"


class LagrangeGLBasis(ReferenceBasis):
    family: BasisFamily = "lagrange-gl"
    continuity = 0

    def __init__(self, p: int):
        if p < 1:
            raise UnsupportedOrder(f"Lagrange elements need degree p >= 1, got {p}.")
        self.p = p

    @cached_property
    def local_nodes(self) -> FloatArray:
        return np.array(gauss_lobatto(self.p + 1).points)

    @property
    def local_orders(self) -> List[int]:
        return [0] * (self.p + 1)

    @cached_property
    def polynomials(self) -> List[Polynomial]:
        nodes = self.local_nodes
        polys = []
        for j, node in enumerate(nodes):
            others = np.delete(nodes, j)
            polys.append(Polynomial.fromroots(others) / np.prod(node - others))
        return polys


class HermiteBasis(ReferenceBasis):
    family: BasisFamily = "hermite"

    def __init__(self, m: int):
        if not 1 <= m <= MAX_HERMITE_ORDER:
            raise UnsupportedOrder(f"Hermite elements are available for m in 1..{MAX_HERMITE_ORDER}, got {m}.")
        self.m = m
        self.p = 2 * m - 1
        self.continuity = m - 1

    @property
    def local_nodes(self) -> FloatArray:
        return np.array([-1.0] * self.m + [1.0] * self.m)

    @property
    def local_orders(self) -> List[int]:
        return list(range(self.m)) * 2

    @cached_property
    def polynomials(self) -> List[Polynomial]:
        # confluent Vandermonde: row (node, order), column monomial power
        n = 2 * self.m
        monomials = [Polynomial.basis(j) for j in range(n)]
        vandermonde = np.array(
            [
                [monomial.deriv(order)(node) if order else monomial(node) for monomial in monomials]
                for node, order in zip(self.local_nodes, self.local_orders)
            ]
        )
        coefficients = np.linalg.solve(vandermonde, np.eye(n))
        return [Polynomial(coefficients[:, i]) for i in range(n)]

    def __repr__(self):
        return f"HermiteBasis(m={self.m})"


@lru_cache(maxsize=None)
def make_basis(family: BasisFamily, p: int) -> ReferenceBasis:
    """
    Basis by family name. For Hermite, p must be odd and is mapped to m = (p + 1) / 2.
    """
    if family == "lagrange-gl":
        return LagrangeGLBasis(p)
    if family == "hermite":
        if p % 2 == 0:
            raise UnsupportedOrder(f"Hermite elements have odd degree 2m - 1, got p={p}.")
        return HermiteBasis((p + 1) // 2)
    raise UnsupportedOrder(f"unknown basis family {family!r}.")


def hermite_transition_norms(m: int, k: int, h: float) -> FloatArray:
    """
    W^{m-k,inf} norms, on a cell of width h, of the Hermite functions attached to the
    transition node (the right end of the cell), one per derivative order n = 0..m-1.

    Each norm is the largest sampled |d^j phi_n / dx^j| over j = 0..m-k.
    """
    if m > MAX_HERMITE_ORDER:
        raise UnsupportedOrder(f"Hermite transition norms are available for m <= {MAX_HERMITE_ORDER}, got {m}.")
    if not 1 <= k <= m:
        raise UnsupportedOrder(f"need 1 <= k <= m, got m={m}, k={k}.")
    if h <= 0:
        raise LayerFemError(f"cell width must be positive, got {h}.")
    basis = HermiteBasis(m)
    xi = np.linspace(-1.0, 1.0, NORM_SAMPLES)
    scaling = basis.dof_scaling(h)
    norms = np.zeros(m)
    for n in range(m):
        local = m + n
        for j in range(m - k + 1):
            values = basis.tabulate(xi, j)[local] * scaling[local] * (2.0 / h) ** j
            norms[n] = max(norms[n], float(np.max(np.abs(values))))
    return norms
