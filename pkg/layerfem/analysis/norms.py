"""
Energy, balanced and Sobolev norms of differences of closed-form and discrete functions,
by composite Gauss-Legendre quadrature on the cells of a mesh region.

    energy:   eps^k |e|_{H^m} + ||e||_{H^{m-k}}
    balanced: eps^{k-1/2} |e|_{H^m} + ||e||_{H^{m-k}}
"""
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from layerfem.config import LAYERFEM_LINF_EXTRA_POINTS
from layerfem.exceptions import RegionMeshMismatch
from layerfem.fem.discrete import CellEvaluable
from layerfem.fem.quadrature import QuadratureRule, default_rule, gauss_lobatto
from layerfem.fem.space import FunctionSpace, derivative_multi_indices
from layerfem.stypes import REGIONS, FloatArray, IntArray, Orders, Region

LOGGER = logging.getLogger(__name__)
LOGGER.setLevel(logging.INFO)


class Difference:
    """
    a - b evaluated cell by cell; b may be omitted.
    """

    def __init__(self, a: CellEvaluable, b: Optional[CellEvaluable] = None):
        if b is not None and a.dim != b.dim:
            raise RegionMeshMismatch(f"cannot subtract a {b.dim}D function from a {a.dim}D one.")
        self.a, self.b = a, b
        self.dim = a.dim

    def on_cells(
        self, space: FunctionSpace, ref_axes: Sequence[FloatArray], orders: Orders, cells: IntArray
    ) -> FloatArray:
        values = self.a.on_cells(space, ref_axes, orders, cells)
        if self.b is not None:
            values = values - self.b.on_cells(space, ref_axes, orders, cells)
        return values


@dataclass(frozen=True)
class NormReport:
    region: Region
    m: int
    k: int
    epsilon: float
    l2: float
    h_semi: Tuple[float, ...]
    linf: float

    def seminorm(self, order: int) -> float:
        return self.l2 if order == 0 else self.h_semi[order - 1]

    def sobolev(self, order: int) -> float:
        """
        Full H^order norm.
        """
        return float(np.sqrt(sum(self.seminorm(s) ** 2 for s in range(order + 1))))

    @property
    def energy(self) -> float:
        return self.epsilon**self.k * self.seminorm(self.m) + self.sobolev(self.m - self.k)

    @property
    def balanced(self) -> float:
        return self.epsilon ** (self.k - 0.5) * self.seminorm(self.m) + self.sobolev(self.m - self.k)

    def as_dict(self) -> Dict[str, float]:
        values = {"l2": self.l2, "linf": self.linf, "energy": self.energy, "balanced": self.balanced}
        for order, value in enumerate(self.h_semi, start=1):
            values[f"h{order}"] = value
        return values


def region_cells(space: FunctionSpace, region: Region) -> IntArray:
    kinds = np.array(space.mesh.cell_kinds)
    if region == "all":
        return space.all_cells()
    if region == "coarse":
        return np.flatnonzero(kinds == "coarse")
    if region == "complement":
        return np.flatnonzero(kinds != "coarse")
    if region == "ply":
        return np.flatnonzero(kinds == "ply")
    raise RegionMeshMismatch(f"unknown region {region!r}, choose from {REGIONS}.")


def linf_reference_points(space: FunctionSpace, rule: QuadratureRule) -> FloatArray:
    """
    Quadrature points, the element's Gauss-Lobatto nodes and uniformly spaced interior points.
    """
    nodes = gauss_lobatto(max(space.basis.p + 1, 2)).points
    extra = np.linspace(-1.0, 1.0, LAYERFEM_LINF_EXTRA_POINTS + 2)[1:-1]
    return np.unique(np.concatenate([rule.points, nodes, extra]))


def sup_norm(
    e: CellEvaluable,
    space: FunctionSpace,
    cells: IntArray,
    orders: Optional[Orders] = None,
    rule: Optional[QuadratureRule] = None,
) -> float:
    """
    Sampled sup of |D^orders e| over the cells; a lower bound of the true norm.
    """
    if len(cells) == 0:
        return 0.0
    rule = rule or default_rule(space.basis.p)
    points = linf_reference_points(space, rule)
    values = e.on_cells(space, (points,) * space.dim, orders or (0,) * space.dim, cells)
    return float(np.max(np.abs(values)))


def seminorm_squared(
    e: CellEvaluable, space: FunctionSpace, order: int, cells: IntArray, rule: QuadratureRule
) -> float:
    if len(cells) == 0:
        return 0.0
    axes = space.rule_axes(rule)
    weights = space.cell_weights(rule, cells)
    total = 0.0
    for orders, mult in derivative_multi_indices(space.dim, order):
        values = e.on_cells(space, axes, orders, cells)
        total += mult * float(np.sum(weights * values**2))
    return total


def bilinear_value(
    a: CellEvaluable,
    b: CellEvaluable,
    space: FunctionSpace,
    order: int,
    coefficient: Optional[CellEvaluable] = None,
    cells: Optional[IntArray] = None,
    rule: Optional[QuadratureRule] = None,
) -> float:
    """
    sum over |alpha| = order of mult * (coefficient D^alpha a, D^alpha b).
    """
    cells = space.all_cells() if cells is None else cells
    rule = rule or default_rule(space.basis.p)
    axes = space.rule_axes(rule)
    weights = space.cell_weights(rule, cells)
    if coefficient is not None:
        weights = weights * coefficient.on_cells(space, axes, (0,) * space.dim, cells)
    total = 0.0
    for orders, mult in derivative_multi_indices(space.dim, order):
        values = a.on_cells(space, axes, orders, cells) * b.on_cells(space, axes, orders, cells)
        total += mult * float(np.sum(weights * values))
    return total


def norm_of_difference(
    a: CellEvaluable,
    b: Optional[CellEvaluable],
    space: FunctionSpace,
    region: Region,
    m: int,
    k: int,
    epsilon: float,
    rule: Optional[QuadratureRule] = None,
) -> NormReport:
    """
    All norms of a - b on a region of the mesh of `space`.
    """
    rule = rule or default_rule(space.basis.p)
    cells = region_cells(space, region)
    e = Difference(a, b)
    squares = [seminorm_squared(e, space, order, cells, rule) for order in range(m + 1)]
    norms = [float(np.sqrt(max(s, 0.0))) for s in squares]
    linf = sup_norm(e, space, cells, rule=rule)
    LOGGER.debug(
        f"L-infinity on region {region} sampled at {len(linf_reference_points(space, rule))} points "
        f"per cell and direction."
    )
    return NormReport(region=region, m=m, k=k, epsilon=epsilon, l2=norms[0], h_semi=tuple(norms[1:]), linf=linf)
