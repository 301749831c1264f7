"""
Cell-wise quadrature assembly of bilinear forms and load vectors.

Local matrices are computed for all requested cells at once and summed into a sparse
global matrix in cell-index order, so results do not depend on how cells are batched.
"""
import logging
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix

from layerfem.exceptions import IncompatibleBasis
from layerfem.fem.banded import BandedSystem
from layerfem.fem.basis import ReferenceBasis
from layerfem.fem.discrete import CellEvaluable
from layerfem.fem.quadrature import QuadratureRule, default_rule
from layerfem.fem.space import FunctionSpace, derivative_multi_indices
from layerfem.meshes.stype import STypeMesh
from layerfem.problems.catalog import ProblemSpec
from layerfem.stypes import FloatArray, IntArray, Orders

LOGGER = logging.getLogger(__name__)
LOGGER.setLevel(logging.INFO)


def _cells_and_rule(
    space: FunctionSpace, cells: Optional[IntArray], rule: Optional[QuadratureRule]
) -> Tuple[IntArray, QuadratureRule]:
    if cells is None:
        cells = space.all_cells()
    return np.asarray(cells, dtype=np.int64), rule or default_rule(space.basis.p)


def assemble_form(
    space: FunctionSpace,
    terms: Sequence[Tuple[Orders, int]],
    coefficient: Optional[CellEvaluable] = None,
    cells: Optional[IntArray] = None,
    rule: Optional[QuadratureRule] = None,
) -> csr_matrix:
    """
    Matrix of sum over terms of mult * (coefficient D^alpha u, D^alpha v), restricted to cells.
    """
    cells, rule = _cells_and_rule(space, cells, rule)
    axes = space.rule_axes(rule)
    weights = space.cell_weights(rule, cells)
    if coefficient is not None:
        weights = weights * coefficient.on_cells(space, axes, (0,) * space.dim, cells)
    local = np.zeros((len(cells), space.n_local, space.n_local))
    for orders, mult in terms:
        table = space.physical_table(axes, orders, cells)
        local += mult * np.einsum("cq,ciq,cjq->cij", weights, table, table)
    dofs = space.dofmap.cell_dofs[cells]
    rows = np.broadcast_to(dofs[:, :, None], local.shape).ravel()
    cols = np.broadcast_to(dofs[:, None, :], local.shape).ravel()
    return coo_matrix((local.ravel(), (rows, cols)), shape=(space.n_dofs, space.n_dofs)).tocsr()


def seminorm_form(
    space: FunctionSpace,
    order: int,
    coefficient: Optional[CellEvaluable] = None,
    cells: Optional[IntArray] = None,
    rule: Optional[QuadratureRule] = None,
) -> csr_matrix:
    return assemble_form(space, derivative_multi_indices(space.dim, order), coefficient, cells, rule)


def assemble_load(
    space: FunctionSpace,
    f: CellEvaluable,
    terms: Optional[Sequence[Tuple[Orders, int]]] = None,
    coefficient: Optional[CellEvaluable] = None,
    cells: Optional[IntArray] = None,
    rule: Optional[QuadratureRule] = None,
) -> FloatArray:
    """
    Vector of sum over terms of mult * (coefficient D^alpha f, D^alpha v); by default (f, v).
    """
    cells, rule = _cells_and_rule(space, cells, rule)
    terms = terms or [((0,) * space.dim, 1)]
    axes = space.rule_axes(rule)
    weights = space.cell_weights(rule, cells)
    if coefficient is not None:
        weights = weights * coefficient.on_cells(space, axes, (0,) * space.dim, cells)
    local = np.zeros((len(cells), space.n_local))
    for orders, mult in terms:
        values = f.on_cells(space, axes, orders, cells)
        table = space.physical_table(axes, orders, cells)
        local += mult * np.einsum("cq,cq,ciq->ci", weights, values, table)
    return np.bincount(space.dofmap.cell_dofs[cells].ravel(), weights=local.ravel(), minlength=space.n_dofs)


def a_tilde_form(
    problem: ProblemSpec,
    space: FunctionSpace,
    cells: Optional[IntArray] = None,
    rule: Optional[QuadratureRule] = None,
) -> csr_matrix:
    return seminorm_form(space, problem.r, problem.c, cells, rule)


def check_compatible(problem: ProblemSpec, space: FunctionSpace):
    if space.dim != problem.dim:
        raise IncompatibleBasis(f"{problem.problem_id} is {problem.dim}D, mesh is {space.dim}D.")
    if space.basis.continuity < problem.m - 1:
        raise IncompatibleBasis(
            f"{problem.problem_id} needs C^{problem.m - 1} elements, "
            f"{space.basis!r} is only C^{space.basis.continuity}."
        )


def assemble_on_space(
    problem: ProblemSpec, space: FunctionSpace, rule: Optional[QuadratureRule] = None
) -> BandedSystem:
    check_compatible(problem, space)
    stiffness = seminorm_form(space, problem.m, rule=rule)
    lower = a_tilde_form(problem, space, rule=rule)
    matrix = problem.epsilon ** (2 * problem.k) * stiffness + lower
    load = assemble_load(space, problem.f, rule=rule)
    system = BandedSystem.from_matrix(
        matrix, load, free=space.dofmap.free, blocks={"stiffness": stiffness, "a_tilde": lower}
    )
    LOGGER.debug(
        f"Assembled {problem.problem_id} on {space!r}: {system.size} free dofs, bandwidth {system.bandwidth}."
    )
    return system


def assemble(
    problem: ProblemSpec, mesh: STypeMesh, basis: ReferenceBasis, rule: Optional[QuadratureRule] = None
) -> BandedSystem:
    return assemble_on_space(problem, FunctionSpace(mesh, basis), rule)
