"""
Conforming finite element spaces on S-type meshes: degree-p Gauss-Lobatto Lagrange elements
in 1D and 2D (tensor product), C^{m-1} Hermite elements in 1D.

Global numbering is lexicographic so that system matrices are banded:
  - 1D Lagrange: dof c*p + a for local node a of cell c (N*p + 1 dofs);
  - 1D Hermite: dof i*m + n for derivative order n at mesh node i (m*(N + 1) dofs);
  - 2D Lagrange: dof (cy*p + b)*(N*p + 1) + cx*p + a for local dof l = b*(p + 1) + a of
    cell c = cy*N + cx.
"""
from dataclasses import dataclass
from functools import cached_property
from math import comb
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from layerfem.exceptions import IncompatibleBasis, QuadratureUnderflow
from layerfem.fem.basis import HermiteBasis, ReferenceBasis
from layerfem.fem.quadrature import QuadratureRule
from layerfem.meshes.stype import STypeMesh
from layerfem.stypes import BoolArray, Coords, FloatArray, IntArray, Orders

MIN_CELL_WIDTH = 1e-300


def derivative_multi_indices(dim: int, order: int) -> List[Tuple[Orders, int]]:
    """
    Multi-indices of total order `order` with their multiplicity in |D^order u|^2.
    """
    if dim == 1:
        return [((order,), 1)]
    return [((a, order - a), comb(order, a)) for a in range(order + 1)]


@dataclass(frozen=True, eq=False)
class DofMap:
    n_dofs: int
    cell_dofs: IntArray
    constrained: IntArray
    dof_coords: FloatArray
    dof_order: IntArray

    @cached_property
    def free(self) -> IntArray:
        mask = np.ones(self.n_dofs, dtype=bool)
        mask[self.constrained] = False
        return np.flatnonzero(mask)


def _dofmap_lagrange_1d(mesh: STypeMesh, p: int, local_nodes: FloatArray) -> DofMap:
    N, nodes = mesh.N, mesh.nodes_x
    cell_dofs = np.arange(N)[:, None] * p + np.arange(p + 1)[None, :]
    n_dofs = N * p + 1
    coords = np.zeros(n_dofs)
    widths = np.diff(nodes)
    coords[cell_dofs] = nodes[:-1, None] + 0.5 * (local_nodes[None, :] + 1.0) * widths[:, None]
    coords[::p] = nodes
    return DofMap(
        n_dofs=n_dofs,
        cell_dofs=cell_dofs,
        constrained=np.array([0, n_dofs - 1]),
        dof_coords=coords[:, None],
        dof_order=np.zeros((n_dofs, 1), dtype=np.int64),
    )


def _dofmap_hermite_1d(mesh: STypeMesh, m: int) -> DofMap:
    N = mesh.N
    cell_dofs = np.hstack([np.arange(N)[:, None] * m + np.arange(m), (np.arange(N)[:, None] + 1) * m + np.arange(m)])
    n_dofs = m * (N + 1)
    return DofMap(
        n_dofs=n_dofs,
        cell_dofs=cell_dofs,
        constrained=np.concatenate([np.arange(m), N * m + np.arange(m)]),
        dof_coords=np.repeat(mesh.nodes_x, m)[:, None],
        dof_order=np.tile(np.arange(m), N + 1)[:, None],
    )


def _dofmap_lagrange_2d(mesh: STypeMesh, p: int, local_nodes: FloatArray) -> DofMap:
    line = _dofmap_lagrange_1d(mesh, p, local_nodes)
    n_line = line.n_dofs
    N = mesh.N
    # cell c = cy*N + cx, local l = b*(p+1) + a
    gx = line.cell_dofs[None, :, None, :]
    gy = line.cell_dofs[:, None, :, None]
    cell_dofs = (gy * n_line + gx).reshape(N * N, (p + 1) ** 2)
    xs = line.dof_coords[:, 0]
    X, Y = np.meshgrid(xs, xs)
    on_boundary = np.zeros((n_line, n_line), dtype=bool)
    on_boundary[[0, -1], :] = True
    on_boundary[:, [0, -1]] = True
    return DofMap(
        n_dofs=n_line * n_line,
        cell_dofs=cell_dofs,
        constrained=np.flatnonzero(on_boundary.ravel()),
        dof_coords=np.column_stack([X.ravel(), Y.ravel()]),
        dof_order=np.zeros((n_line * n_line, 2), dtype=np.int64),
    )


class FunctionSpace:
    """
    The space V^N of a basis on a mesh, with the H^m_0 boundary dofs marked as constrained.
    """

    def __init__(self, mesh: STypeMesh, basis: ReferenceBasis):
        self.mesh = mesh
        self.basis = basis
        if np.min(mesh.steps) < MIN_CELL_WIDTH:
            raise QuadratureUnderflow(f"mesh has a cell of width {np.min(mesh.steps):.3g}.")
        if isinstance(basis, HermiteBasis):
            if mesh.dim != 1:
                raise IncompatibleBasis("Hermite elements are only available in 1D.")
            self.dofmap = _dofmap_hermite_1d(mesh, basis.m)
        elif mesh.dim == 1:
            self.dofmap = _dofmap_lagrange_1d(mesh, basis.p, basis.local_nodes)
        else:
            self.dofmap = _dofmap_lagrange_2d(mesh, basis.p, basis.local_nodes)

    def __repr__(self):
        return f"FunctionSpace({self.basis!r}, {self.mesh.kind}, N={self.mesh.N}, dim={self.mesh.dim})"

    @property
    def dim(self) -> int:
        return self.mesh.dim

    @property
    def n_dofs(self) -> int:
        return self.dofmap.n_dofs

    @property
    def n_local(self) -> int:
        return self.basis.n_local**self.dim

    def all_cells(self) -> IntArray:
        return np.arange(self.mesh.n_cells)

    @cached_property
    def cell_widths(self) -> FloatArray:
        """
        Shape (n_cells, dim).
        """
        steps = self.mesh.steps
        if self.dim == 1:
            return steps[:, None]
        hx = np.tile(steps, self.mesh.N)
        hy = np.repeat(steps, self.mesh.N)
        return np.column_stack([hx, hy])

    @cached_property
    def cell_origins(self) -> FloatArray:
        nodes = self.mesh.nodes_x[:-1]
        if self.dim == 1:
            return nodes[:, None]
        return np.column_stack([np.tile(nodes, self.mesh.N), np.repeat(nodes, self.mesh.N)])

    def reference_table(self, ref_axes: Sequence[FloatArray], orders: Orders) -> FloatArray:
        """
        Reference derivatives of the local basis at the tensor grid of ref_axes,
        shape (n_local, n_points) with point index j*len(ref_axes[0]) + i.
        """
        if self.dim == 1:
            return self.basis.tabulate(ref_axes[0], orders[0])
        tx = self.basis.tabulate(ref_axes[0], orders[0])
        ty = self.basis.tabulate(ref_axes[1], orders[1])
        table = np.einsum("ai,bj->baji", tx, ty)
        return table.reshape(self.n_local, len(ref_axes[0]) * len(ref_axes[1]))

    def dof_scaling(self, cells: IntArray) -> FloatArray:
        if isinstance(self.basis, HermiteBasis):
            return self.basis.dof_scaling(self.cell_widths[cells, 0])
        return np.ones((len(cells), self.n_local))

    def physical_table(self, ref_axes: Sequence[FloatArray], orders: Orders, cells: IntArray) -> FloatArray:
        """
        Physical derivatives of the local basis of each cell, shape (len(cells), n_local, n_points).
        """
        ref = self.reference_table(ref_axes, orders)
        geometry = np.prod((2.0 / self.cell_widths[cells]) ** np.asarray(orders, dtype=float), axis=1)
        return ref[None, :, :] * geometry[:, None, None] * self.dof_scaling(cells)[:, :, None]

    def cell_points(self, ref_axes: Sequence[FloatArray], cells: IntArray) -> Coords:
        """
        Physical coordinates of the tensor grid of ref_axes in each cell, one (len(cells), n_points)
        array per direction.
        """
        origins, widths = self.cell_origins[cells], self.cell_widths[cells]
        if self.dim == 1:
            return (origins[:, :1] + 0.5 * (ref_axes[0][None, :] + 1.0) * widths[:, :1],)
        rx, ry = np.meshgrid(ref_axes[0], ref_axes[1])
        x = origins[:, :1] + 0.5 * (rx.ravel()[None, :] + 1.0) * widths[:, :1]
        y = origins[:, 1:] + 0.5 * (ry.ravel()[None, :] + 1.0) * widths[:, 1:]
        return x, y

    def cell_weights(self, rule: QuadratureRule, cells: IntArray) -> FloatArray:
        weights = rule.weights
        if self.dim == 2:
            weights = np.outer(rule.weights, rule.weights).ravel()
        jacobian = np.prod(0.5 * self.cell_widths[cells], axis=1)
        return jacobian[:, None] * weights[None, :]

    def rule_axes(self, rule: QuadratureRule) -> Tuple[FloatArray, ...]:
        return (rule.points,) * self.dim

    def dofs_in_closed_region(self, lo: float, hi: float) -> BoolArray:
        coords = self.dofmap.dof_coords
        return np.all((coords >= lo) & (coords <= hi), axis=1)

    @cached_property
    def coarse_dof_mask(self) -> BoolArray:
        """
        Dofs attached to the closure of the coarse region.
        """
        return self.dofs_in_closed_region(*self.mesh.omega_c)

    def dofs_of_cells(self, cells: Iterable[int]) -> IntArray:
        return np.unique(self.dofmap.cell_dofs[np.asarray(list(cells), dtype=np.int64)])

    def boundary_dofs_of_region(self, mask: BoolArray, max_order: Optional[int] = None) -> IntArray:
        """
        Dofs of the masked closed region that sit on its boundary, optionally only those
        interpolating derivative orders below max_order.
        """
        coords = self.dofmap.dof_coords[mask]
        lo, hi = coords.min(axis=0), coords.max(axis=0)
        on_edge = np.zeros(self.n_dofs, dtype=bool)
        on_edge[mask] = np.any((coords == lo) | (coords == hi), axis=1)
        if max_order is not None:
            on_edge &= self.dofmap.dof_order.sum(axis=1) < max_order
        return np.flatnonzero(on_edge)
