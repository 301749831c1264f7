"""
S-type layer-adapted meshes on the unit interval and the unit square.

With q = N/4 cells per layer strip, the left half of the node vector is

    x_i = sigma * eps * phi(2i/N)                     for 0 <= i <= q
    x_i = lambda + (2i/N - 1/2) * (1 - 2 lambda)      for q <= i <= N/2

and the right half is its mirror image x_{N-i} = 1 - x_i. 2D meshes are tensor products
of the same node vector in both directions.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, List, Optional, Tuple

import numpy as np

from layerfem.exceptions import BadCellCount, BadEpsilon, IndexOutOfRange, MeshError, TransitionTooLarge
from layerfem.files import JsonFilename, NodesFilename
from layerfem.meshes.generating import MeshGeneratingFunction
from layerfem.stypes import CellKind, FloatArray, MeshDescriptor, MeshKind

LOGGER = logging.getLogger(__name__)
LOGGER.setLevel(logging.INFO)

# relative slack when comparing lambda with 1/4 and h with its bounds
BOUND_RTOL = 1e-12


@dataclass(frozen=True)
class TransitionParams:
    epsilon: float
    sigma: float
    N: int

    def __post_init__(self):
        if not (self.epsilon > 0 and np.isfinite(self.epsilon)):
            raise BadEpsilon(f"epsilon must be positive, got {self.epsilon!r}.")
        if self.sigma <= 0:
            raise MeshError(f"sigma must be positive, got {self.sigma!r}.")
        if self.N < 4 or self.N % 4 != 0:
            raise BadCellCount(f"N must be a positive multiple of 4, got {self.N}.")
        if self.lam > 0.25 * (1 + BOUND_RTOL):
            raise TransitionTooLarge(
                f"lambda = sigma * eps * ln N = {self.lam:.6g} exceeds 1/4 "
                f"(sigma={self.sigma}, eps={self.epsilon}, N={self.N})."
            )

    @property
    def lam(self) -> float:
        return float(self.sigma * self.epsilon * np.log(self.N))


@dataclass(frozen=True, eq=False)
class STypeMesh:
    kind: MeshKind
    dim: int
    params: TransitionParams
    nodes_x: FloatArray
    psi_prime_max: float
    gen: Optional[MeshGeneratingFunction] = field(default=None, repr=False)

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise MeshError(f"only 1D and 2D meshes are supported, got dim={self.dim}.")
        self.nodes_x.setflags(write=False)

    @property
    def N(self) -> int:
        return self.params.N

    @property
    def epsilon(self) -> float:
        return self.params.epsilon

    @property
    def sigma(self) -> float:
        return self.params.sigma

    @property
    def nodes_y(self) -> Optional[FloatArray]:
        return self.nodes_x if self.dim == 2 else None

    @property
    def lam(self) -> float:
        return float(self.nodes_x[self.N // 4])

    @property
    def h(self) -> float:
        """
        Width of the fine cell adjacent to the transition point.
        """
        q = self.N // 4
        return float(self.nodes_x[q] - self.nodes_x[q - 1])

    @property
    def omega_c(self) -> Tuple[float, float]:
        return self.lam, 1.0 - self.lam

    @property
    def omega_c_star(self) -> Tuple[float, float]:
        return self.lam - self.h, 1.0 - (self.lam - self.h)

    @property
    def rate_factor(self) -> float:
        return self.h + self.psi_prime_max / self.N

    @cached_property
    def steps(self) -> FloatArray:
        return np.diff(self.nodes_x)

    @property
    def min_step(self) -> float:
        return float(self.steps.min())

    @property
    def max_step(self) -> float:
        return float(self.steps.max())

    @property
    def n_cells(self) -> int:
        return self.N**self.dim

    def satisfies_hbound(self) -> bool:
        """
        Lower bound h >= 4 sigma eps ln(N) / N, and the upper bound
        h <= sigma eps (phi(1/2) - phi(1/2 - 2/N)) when a mesh-generating function is known.
        """
        eps, sigma, N = self.epsilon, self.sigma, self.N
        lower = 4 * sigma * eps * np.log(N) / N
        if self.h < lower * (1 - BOUND_RTOL):
            return False
        if self.gen is not None:
            ends = self.gen.phi(np.array([0.5, 0.5 - 2.0 / N]))
            upper = sigma * eps * float(ends[0] - ends[1])
            if self.h > upper * (1 + BOUND_RTOL):
                return False
        return True

    @cached_property
    def axis_kinds(self) -> Tuple[CellKind, ...]:
        q = self.N // 4
        kinds: List[CellKind] = []
        for i in range(self.N):
            if q <= i < 3 * q:
                kinds.append("coarse")
            elif i == q - 1 or i == 3 * q:
                kinds.append("ply")
            else:
                kinds.append("layer")
        return tuple(kinds)

    @cached_property
    def cell_kinds(self) -> Tuple[CellKind, ...]:
        return tuple(classify_cell(self, c) for c in range(self.n_cells))

    def cell_axes(self, cell_index: int) -> Tuple[int, ...]:
        """
        Per-direction cell indices of a flat cell index, (cx,) in 1D and (cx, cy) in 2D.
        """
        if not 0 <= cell_index < self.n_cells:
            raise IndexOutOfRange(f"cell index {cell_index} outside [0, {self.n_cells}).")
        if self.dim == 1:
            return (cell_index,)
        cy, cx = divmod(cell_index, self.N)
        return cx, cy

    def cell_bounds(self, cell_index: int) -> Tuple[Tuple[float, float], ...]:
        return tuple((float(self.nodes_x[i]), float(self.nodes_x[i + 1])) for i in self.cell_axes(cell_index))

    def cells(self, kind: Optional[CellKind] = None) -> Iterator[int]:
        for c, k in enumerate(self.cell_kinds):
            if kind is None or k == kind:
                yield c

    def descriptor(self) -> MeshDescriptor:
        descriptor: MeshDescriptor = {
            "kind": self.kind,
            "N": self.N,
            "sigma": self.sigma,
            "epsilon": self.epsilon,
            "lambda": self.lam,
            "h": self.h,
            "max_psi_prime": self.psi_prime_max,
            "dim": self.dim,
            "nodes": [float(x) for x in self.nodes_x],
        }
        if self.gen is not None:
            descriptor["minimal_step_condition"] = self.gen.satisfies_minimal_step()
        return descriptor

    def export(self, basepath: str) -> Tuple[NodesFilename, JsonFilename]:
        """
        Writes <basepath>.nodes.txt and <basepath>.json.
        """
        nodes_file = NodesFilename(f"{basepath}.nodes.txt")
        json_file = JsonFilename(f"{basepath}.json")
        nodes_file.write_nodes(self.nodes_x)
        json_file.write_json(self.descriptor())
        LOGGER.info(f"Mesh written to {nodes_file} and {json_file}.")
        return nodes_file, json_file


def _mirror(left: FloatArray) -> FloatArray:
    """
    left holds x_0 .. x_{N/2 - 1}; returns the full symmetric node vector.
    """
    return np.concatenate([left, [0.5], 1.0 - left[::-1]])


def build_mesh(gen: MeshGeneratingFunction, params: TransitionParams, dim: int = 1) -> STypeMesh:
    if gen.N != params.N:
        raise MeshError(f"mesh-generating function was built for N={gen.N}, transition parameters use N={params.N}.")
    if params.sigma < 1:
        raise MeshError(f"S-type meshes need sigma >= 1, got {params.sigma}.")
    N, q = params.N, params.N // 4
    lam, scale = params.lam, params.sigma * params.epsilon

    fine = scale * gen.phi(2.0 * np.arange(q) / N)
    fine[0] = 0.0
    coarse = lam + (2.0 * np.arange(q, N // 2) / N - 0.5) * (1.0 - 2.0 * lam)
    nodes = _mirror(np.concatenate([fine, coarse]))
    if np.any(np.diff(nodes) <= 0):
        raise MeshError(f"{gen.kind} mesh nodes are not strictly increasing (N={N}, lambda={lam}).")

    mesh = STypeMesh(kind=gen.kind, dim=dim, params=params, nodes_x=nodes, psi_prime_max=gen.psi_prime_max, gen=gen)
    LOGGER.info(f"Built {dim}D {gen.kind} mesh: N={N}, lambda={mesh.lam:.6g}, h={mesh.h:.6g}.")
    return mesh


def build_stype_mesh(kind: MeshKind, N: int, sigma: float, epsilon: float, dim: int = 1) -> STypeMesh:
    """
    Convenience constructor from a mesh kind name.
    """
    if kind == "uniform":
        return uniform_mesh(N, epsilon, dim)
    params = TransitionParams(epsilon=epsilon, sigma=sigma, N=N)
    return build_mesh(MeshGeneratingFunction.by_kind(kind, N), params, dim)


def uniform_mesh(N: int, epsilon: float, dim: int = 1) -> STypeMesh:
    """
    Equidistant mesh, seen as an S-type mesh whose transition point sits at 1/4.
    """
    params = TransitionParams(epsilon=epsilon, sigma=0.25 / (epsilon * np.log(N)), N=N)
    return STypeMesh(kind="uniform", dim=dim, params=params, nodes_x=np.arange(N + 1) / N, psi_prime_max=0.0)


def classify_cell(mesh: STypeMesh, cell_index: int) -> CellKind:
    kinds = [mesh.axis_kinds[i] for i in mesh.cell_axes(cell_index)]
    if "layer" in kinds:
        return "layer"
    if "ply" in kinds:
        return "ply"
    return "coarse"
