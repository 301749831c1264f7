"""
Members of a finite element space, and functions living on a single cell.
"""
from typing import Literal, Optional, Protocol, Sequence

import numpy as np

from layerfem.exceptions import RegionMeshMismatch
from layerfem.fem.space import FunctionSpace
from layerfem.stypes import Coords, FloatArray, IntArray, Orders

Side = Literal["left", "right"]


class CellEvaluable(Protocol):
    """
    Anything that can be evaluated cell by cell on the tensor grid of reference points:
    closed-form fields and discrete functions alike.
    """

    dim: int

    def on_cells(
        self, space: FunctionSpace, ref_axes: Sequence[FloatArray], orders: Orders, cells: IntArray
    ) -> FloatArray:
        ...


def same_mesh(space_a: FunctionSpace, space_b: FunctionSpace) -> bool:
    mesh_a, mesh_b = space_a.mesh, space_b.mesh
    return mesh_a is mesh_b or (mesh_a.dim == mesh_b.dim and np.array_equal(mesh_a.nodes_x, mesh_b.nodes_x))


class DiscreteFunction:
    def __init__(self, space: FunctionSpace, coeffs: FloatArray, name: str = ""):
        coeffs = np.asarray(coeffs, dtype=float)
        assert coeffs.shape == (space.n_dofs,), f"expected {space.n_dofs} coefficients, got {coeffs.shape}."
        self.space = space
        self.coeffs = coeffs
        self.name = name

    def __repr__(self):
        return f"DiscreteFunction({self.name or 'unnamed'}, {self.space!r})"

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def mesh(self):
        return self.space.mesh

    @classmethod
    def zeros(cls, space: FunctionSpace, name: str = "") -> "DiscreteFunction":
        return cls(space, np.zeros(space.n_dofs), name)

    def _check_space(self, other: "DiscreteFunction"):
        if other.space is not self.space and not (
            same_mesh(self.space, other.space) and repr(self.space.basis) == repr(other.space.basis)
        ):
            raise RegionMeshMismatch(f"{self!r} and {other!r} live in different spaces.")

    def __add__(self, other: "DiscreteFunction") -> "DiscreteFunction":
        self._check_space(other)
        return DiscreteFunction(self.space, self.coeffs + other.coeffs)

    def __sub__(self, other: "DiscreteFunction") -> "DiscreteFunction":
        self._check_space(other)
        return DiscreteFunction(self.space, self.coeffs - other.coeffs)

    def __rmul__(self, factor: float) -> "DiscreteFunction":
        return DiscreteFunction(self.space, factor * self.coeffs)

    def local_coeffs(self, cells: IntArray) -> FloatArray:
        return self.coeffs[self.space.dofmap.cell_dofs[cells]]

    def on_cells(
        self, space: FunctionSpace, ref_axes: Sequence[FloatArray], orders: Orders, cells: IntArray
    ) -> FloatArray:
        if not same_mesh(space, self.space):
            raise RegionMeshMismatch(f"{self!r} is not defined on the mesh of {space!r}.")
        table = self.space.physical_table(ref_axes, orders, cells)
        return np.einsum("cl,clq->cq", self.local_coeffs(cells), table)

    def _locate(self, x: FloatArray, side: Side) -> tuple[IntArray, FloatArray]:
        nodes = self.space.mesh.nodes_x
        idx = np.clip(np.searchsorted(nodes, x, side=side) - 1, 0, len(nodes) - 2)
        xi = 2.0 * (x - nodes[idx]) / (nodes[idx + 1] - nodes[idx]) - 1.0
        return idx, xi

    def evaluate(self, coords: Coords, orders: Optional[Orders] = None, side: Side = "right") -> FloatArray:
        """
        Point values (or derivatives) at arbitrary coordinates. At cell interfaces the cell
        to the right of the point is used unless side="left".
        """
        space = self.space
        orders = orders or (0,) * self.dim
        axes = [np.atleast_1d(np.asarray(c, dtype=float)) for c in coords]
        shape = axes[0].shape
        located = [self._locate(a.ravel(), side) for a in axes]
        if self.dim == 1:
            (cx, xi), = located
            cells = cx
        else:
            (cx, xi), (cy, eta) = located
            cells = cy * space.mesh.N + cx
        widths = space.cell_widths[cells]
        coeffs = self.local_coeffs(cells) * space.dof_scaling(cells)
        geometry = np.prod((2.0 / widths) ** np.asarray(orders, dtype=float), axis=1)
        tx = space.basis.tabulate(xi, orders[0])
        if self.dim == 1:
            values = np.einsum("pl,lp->p", coeffs, tx)
        else:
            n = space.basis.n_local
            ty = space.basis.tabulate(eta, orders[1])
            values = np.einsum("pba,ap,bp->p", coeffs.reshape(len(cells), n, n), tx, ty)
        return (values * geometry).reshape(shape)

    def nodal_values(self) -> FloatArray:
        """
        Coefficients of value dofs, ordered by dof.
        """
        mask = np.all(self.space.dofmap.dof_order == 0, axis=1)
        return self.coeffs[mask]


class CellFunction:
    """
    A polynomial living on one cell, given by its local coefficients in the cell's basis.
    """

    def __init__(self, space: FunctionSpace, cell: int, local_coeffs: FloatArray):
        assert len(local_coeffs) == space.n_local, "one coefficient per local dof expected."
        self.space = space
        self.cell = cell
        self.local_coeffs = np.asarray(local_coeffs, dtype=float)

    @property
    def local_dof_coords(self) -> FloatArray:
        return self.space.dofmap.dof_coords[self.space.dofmap.cell_dofs[self.cell]]

    def on_reference(self, ref_axes: Sequence[FloatArray], orders: Orders) -> FloatArray:
        cells = np.array([self.cell])
        table = self.space.physical_table(ref_axes, orders, cells)[0]
        return self.local_coeffs @ table
