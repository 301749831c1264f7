"""
Operators of the balanced-norm error analysis:

    I       piecewise Gauss-Lobatto (or Hermite) interpolation
    pi      projection onto V^N restricted to the closed coarse region, either c-weighted L2
            (second-order problems) or Ritz in the lower-order form a~ (fourth-order problems)
    chi     nodal indicator of the coarse-region boundary on a ply cell
    P       hybrid operator: pi on the coarse region, I in the layer region, blended on ply cells

Projections are solved with the band Cholesky solver on the dofs of the closed coarse region.
"""
import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from layerfem.analysis.norms import Difference, bilinear_value, norm_of_difference, sup_norm
from layerfem.exceptions import IncompatibleBasis, MissingDecomposition, MissingDerivative, NotPlyCell, UnsupportedOrder
from layerfem.fem.assembly import a_tilde_form, assemble_load, seminorm_form
from layerfem.fem.banded import BandedSystem, solve
from layerfem.fem.basis import HermiteBasis, LagrangeGLBasis
from layerfem.fem.discrete import CellEvaluable, CellFunction, DiscreteFunction
from layerfem.fem.space import FunctionSpace, derivative_multi_indices
from layerfem.problems.catalog import ProblemSpec, SolutionDecomposition
from layerfem.problems.fields import ConstantField, Field, Sinusoid, SumField, TensorField
from layerfem.stypes import BoolArray, CellKind, FloatArray, IntArray

LOGGER = logging.getLogger(__name__)
LOGGER.setLevel(logging.INFO)

STABILITY_SAMPLES = 20


def _dof_values(u: Any, space: FunctionSpace, dofs: Optional[IntArray] = None) -> FloatArray:
    """
    Values (or derivatives, for Hermite dofs) of u at the given dofs.
    """
    dofmap = space.dofmap
    dofs = np.arange(space.n_dofs) if dofs is None else np.asarray(dofs, dtype=np.int64)
    coords, orders = dofmap.dof_coords[dofs], dofmap.dof_order[dofs]
    if not hasattr(u, "evaluate"):
        if np.any(orders):
            raise MissingDerivative(f"{u!r} is only evaluable pointwise, derivative dofs need a Field.")
        return np.asarray(u(*coords.T), dtype=float)
    values = np.empty(len(dofs))
    for order in np.unique(orders, axis=0):
        selected = np.all(orders == order, axis=1)
        values[selected] = u.evaluate(tuple(coords[selected].T), tuple(int(o) for o in order))
    return values


def interpolate_gl(u: Any, space: FunctionSpace) -> DiscreteFunction:
    """
    Piecewise Gauss-Lobatto interpolant of u; u is a Field or a plain callable of the coordinates.
    """
    if not isinstance(space.basis, LagrangeGLBasis):
        raise IncompatibleBasis(f"Gauss-Lobatto interpolation needs a Lagrange basis, got {space.basis!r}.")
    return DiscreteFunction(space, _dof_values(u, space), name=f"I[{u!r}]")


def interpolate_hermite(u: Any, space: FunctionSpace) -> DiscreteFunction:
    if not isinstance(space.basis, HermiteBasis):
        raise IncompatibleBasis(f"Hermite interpolation needs a Hermite basis, got {space.basis!r}.")
    return DiscreteFunction(space, _dof_values(u, space), name=f"I[{u!r}]")


def interpolate(u: Any, space: FunctionSpace) -> DiscreteFunction:
    if isinstance(space.basis, HermiteBasis):
        return interpolate_hermite(u, space)
    return interpolate_gl(u, space)


def coarse_cells(space: FunctionSpace) -> IntArray:
    return np.fromiter(space.mesh.cells("coarse"), dtype=np.int64)


def _project_on_coarse(
    v: CellEvaluable,
    space: FunctionSpace,
    order: int,
    coefficient: Optional[CellEvaluable],
    fixed_below: int,
    name: str,
) -> DiscreteFunction:
    """
    Solves (coefficient D^order (v - pi v), D^order chi)_{Omega_c} = 0 for chi in V^N supported in
    the closed coarse region, with the dofs of derivative order < fixed_below on its boundary
    taken from v. Coefficients outside the closed coarse region are zero.
    """
    cells = coarse_cells(space)
    mask = space.coarse_dof_mask
    matrix = seminorm_form(space, order, coefficient, cells)
    load = assemble_load(space, v, derivative_multi_indices(space.dim, order), coefficient, cells)
    fixed = space.boundary_dofs_of_region(mask, max_order=fixed_below) if fixed_below > 0 else np.zeros(0, np.int64)
    values = np.zeros(space.n_dofs)
    values[fixed] = _dof_values(v, space, fixed)
    system = BandedSystem.from_matrix(matrix, load - matrix @ values, free=np.setdiff1d(np.flatnonzero(mask), fixed))
    coeffs = system.expand(solve(system), values)
    LOGGER.debug(f"Projected {v!r} on {len(cells)} coarse cells: {system.size} unknowns, {len(fixed)} fixed.")
    return DiscreteFunction(space, coeffs, name=name)


def weighted_l2_projection(
    u: CellEvaluable, space: FunctionSpace, c: Optional[CellEvaluable] = None
) -> DiscreteFunction:
    """
    (c (u - pi u), w)_{Omega_c} = 0 for all w in V^N supported in the closed coarse region.
    """
    return _project_on_coarse(u, space, 0, c, 0, name=f"pi[{u!r}]")


def ritz_projection(
    v: CellEvaluable, space: FunctionSpace, m: int, k: int, c: Optional[CellEvaluable] = None
) -> DiscreteFunction:
    """
    a~(v - pi v, chi)_{Omega_c} = 0 with a~ = (c D^{m-k}., D^{m-k}.), and D^n (v - pi v) = 0 on the
    boundary of the coarse region for n < m - k. For k = m this is the c-weighted L2 projection.
    """
    if (m, k) not in ((2, 1), (2, 2)):
        raise UnsupportedOrder(f"Ritz projection is defined for (m, k) in {{(2, 1), (2, 2)}}, got ({m}, {k}).")
    if not isinstance(space.basis, HermiteBasis) or space.basis.m != m:
        raise IncompatibleBasis(f"Ritz projection for m={m} needs C^{m - 1} Hermite elements, got {space.basis!r}.")
    return _project_on_coarse(v, space, m - k, c, m - k, name=f"pi[{v!r}]")


def region_tags_from_mask(space: FunctionSpace, mask: BoolArray) -> Tuple[CellKind, ...]:
    """
    Which branch of P fills each cell: all its dofs from the coarse side, none, or both.
    """
    local = mask[space.dofmap.cell_dofs]
    tags: list[CellKind] = []
    for row in local:
        if row.all():
            tags.append("coarse")
        elif row.any():
            tags.append("ply")
        else:
            tags.append("layer")
    return tuple(tags)


def chi_tau(space: FunctionSpace, cell: int) -> CellFunction:
    """
    chi_tau = 1 at the nodes of a ply cell lying on the boundary of the coarse region, 0 at the others.
    """
    if not isinstance(space.basis, LagrangeGLBasis):
        raise IncompatibleBasis(f"the ply indicator is a nodal function, got {space.basis!r}.")
    space.mesh.cell_axes(cell)  # range check
    kind = space.mesh.cell_kinds[cell]
    if kind != "ply":
        raise NotPlyCell(f"cell {cell} is a {kind} cell.")
    local = space.coarse_dof_mask[space.dofmap.cell_dofs[cell]].astype(float)
    return CellFunction(space, cell, local)


@dataclass(frozen=True, eq=False)
class OperatorOutput:
    """
    Pu together with its parts: P applied to the smooth part and to each layer part,
    and the coarse-region projection of the smooth part.
    """

    result: DiscreteFunction
    region_tags: Tuple[CellKind, ...]
    smooth: DiscreteFunction
    layers: Tuple[DiscreteFunction, ...]
    projection: DiscreteFunction

    def matches_mesh(self) -> bool:
        return self.region_tags == self.result.space.mesh.cell_kinds


def smooth_projection(
    v: CellEvaluable, space: FunctionSpace, m: int, k: int, c: Optional[CellEvaluable] = None
) -> DiscreteFunction:
    if m == 1:
        return weighted_l2_projection(v, space, c)
    return ritz_projection(v, space, m, k, c)


def hybrid_P(
    decomposition: Optional[SolutionDecomposition],
    space: FunctionSpace,
    m: int,
    k: int,
    c: Optional[CellEvaluable] = None,
) -> OperatorOutput:
    """
    P = pi v on the closed coarse region and I on the layer region for the smooth part v, and
    0 / I for each layer part. On ply cells this is the interpolant of (1 - chi) v + chi pi v
    (resp. (1 - chi) w) for m = 1 and the conforming Hermite completion for m = 2.
    """
    if decomposition is None:
        raise MissingDecomposition("the hybrid operator needs the splitting of u into smooth and layer parts.")
    if m == 2 and not isinstance(space.basis, HermiteBasis):
        raise IncompatibleBasis(f"the fourth-order operator needs Hermite elements, got {space.basis!r}.")
    if m == 1 and not isinstance(space.basis, LagrangeGLBasis):
        raise IncompatibleBasis(f"the second-order operator needs Lagrange elements, got {space.basis!r}.")
    mask = space.coarse_dof_mask
    projection = smooth_projection(decomposition.v, space, m, k, c)
    Iv = interpolate(decomposition.v, space)
    smooth = DiscreteFunction(space, np.where(mask, projection.coeffs, Iv.coeffs), name="Pv")
    layers = tuple(
        DiscreteFunction(space, np.where(mask, 0.0, interpolate(w, space).coeffs), name=f"P[{w!r}]")
        for w in decomposition.layers
    )
    total = smooth.coeffs + sum((w.coeffs for w in layers), np.zeros(space.n_dofs))
    output = OperatorOutput(
        result=DiscreteFunction(space, total, name="Pu"),
        region_tags=region_tags_from_mask(space, mask),
        smooth=smooth,
        layers=layers,
        projection=projection,
    )
    assert output.matches_mesh(), "branches of P disagree with the mesh cell classification."
    return output


def interface_gap(v: Any, projection: DiscreteFunction) -> float:
    """
    max |Iv - pi v| over the value dofs on the boundary of the coarse region.
    """
    space = projection.space
    dofs = space.boundary_dofs_of_region(space.coarse_dof_mask, max_order=1)
    return float(np.max(np.abs(_dof_values(v, space, dofs) - projection.coeffs[dofs])))


def _random_field(rng: np.random.Generator, dim: int, max_frequency: float, terms: int = 4) -> Field:
    def line() -> Field:
        return SumField(
            [ConstantField(rng.normal())]
            + [
                Sinusoid(rng.normal(), rng.uniform(0.0, max_frequency), rng.uniform(0.0, 2 * np.pi))
                for _ in range(terms)
            ]
        )

    return line() if dim == 1 else TensorField(line(), line())


def linf_stability_estimate(
    space: FunctionSpace, c: Optional[CellEvaluable] = None, samples: int = STABILITY_SAMPLES, seed: int = 0
) -> float:
    """
    Lower estimate of the L-infinity operator norm of the weighted coarse-region projection,
    max of ||pi g|| / ||g|| over random oscillating g, both norms on the coarse region.
    """
    rng = np.random.default_rng(seed)
    cells = coarse_cells(space)
    worst = 0.0
    for _ in range(samples):
        g = _random_field(rng, space.dim, np.pi * space.mesh.N)
        ratio = sup_norm(weighted_l2_projection(g, space, c), space, cells) / sup_norm(g, space, cells)
        worst = max(worst, ratio)
    LOGGER.info(f"L-infinity stability of the coarse projection on {space!r}: {worst:.4g} over {samples} samples.")
    return worst


def reaction_coupling(
    problem: ProblemSpec, space: FunctionSpace, eta: CellEvaluable, xi: DiscreteFunction
) -> Dict[str, float]:
    """
    |(c eta, xi)| relative to the energy norm of xi. When a~ carries derivatives (k < m),
    |a~(eta, xi)| is added. It is taken from the assembled a~ block when eta lives on `space`.
    """
    keys = ["c_eta_xi", "a_tilde_eta_xi"] if problem.r else ["c_eta_xi"]
    energy = norm_of_difference(xi, None, space, "all", problem.m, problem.k, problem.epsilon).energy
    if energy == 0:
        return dict.fromkeys(keys, 0.0)
    coupling = {"c_eta_xi": abs(bilinear_value(eta, xi, space, 0, problem.c)) / energy}
    if problem.r:
        if isinstance(eta, DiscreteFunction) and eta.space is space:
            value = float(xi.coeffs @ (a_tilde_form(problem, space) @ eta.coeffs))
        else:
            value = bilinear_value(eta, xi, space, problem.r, problem.c)
        coupling["a_tilde_eta_xi"] = abs(value) / energy
    return coupling


def w1inf_on_ply(a: CellEvaluable, b: CellEvaluable, space: FunctionSpace) -> float:
    """
    max over derivative orders 0 and 1 of sup |D(a - b)| on the ply cells.
    """
    cells = np.fromiter(space.mesh.cells("ply"), dtype=np.int64)
    e = Difference(a, b)
    orders = [(0,) * space.dim] + [tuple(int(d == i) for d in range(space.dim)) for i in range(space.dim)]
    return max(sup_norm(e, space, cells, o) for o in orders)
