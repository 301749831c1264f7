"""
Symmetric positive definite band systems and their Cholesky solve.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
from numpy.linalg import LinAlgError
from scipy.linalg import cho_solve_banded, cholesky_banded
from scipy.sparse import csr_matrix, spmatrix

from layerfem.config import LAYERFEM_SOLVER_RTOL
from layerfem.exceptions import NotSPD, ResidualTooLarge
from layerfem.stypes import FloatArray, IntArray

LOGGER = logging.getLogger(__name__)
LOGGER.setLevel(logging.INFO)


def bandwidth(matrix: spmatrix) -> int:
    coo = matrix.tocoo()
    if coo.nnz == 0:
        return 0
    return int(np.max(np.abs(coo.row - coo.col)))


def to_upper_band(matrix: spmatrix, bw: int) -> FloatArray:
    """
    Upper band storage as read by scipy.linalg.cholesky_banded: ab[bw + i - j, j] = a[i, j].
    """
    csr = csr_matrix(matrix)
    n = csr.shape[0]
    band = np.zeros((bw + 1, n))
    for k in range(bw + 1):
        band[bw - k, k:] = csr.diagonal(k)
    return band


@dataclass(frozen=True, eq=False)
class BandedSystem:
    """
    A system restricted to its free dofs. `matrix` keeps the sparse form for residual checks,
    `blocks` the separately assembled parts of the full (unrestricted) operator.
    """

    matrix: csr_matrix
    rhs: FloatArray
    band: FloatArray
    bandwidth: int
    free: IntArray
    n_dofs: int
    blocks: Dict[str, csr_matrix] = field(default_factory=dict)

    @classmethod
    def from_matrix(
        cls,
        matrix: spmatrix,
        rhs: FloatArray,
        free: Optional[IntArray] = None,
        blocks: Optional[Dict[str, csr_matrix]] = None,
    ) -> "BandedSystem":
        """
        Restricts to the free dofs by symmetric elimination. Constrained values are zero.
        """
        csr = csr_matrix(matrix)
        n_dofs = csr.shape[0]
        if free is None:
            free = np.arange(n_dofs)
        reduced = csr[free][:, free]
        bw = bandwidth(reduced)
        return cls(
            matrix=reduced,
            rhs=np.asarray(rhs, dtype=float)[free],
            band=to_upper_band(reduced, bw),
            bandwidth=bw,
            free=free,
            n_dofs=n_dofs,
            blocks=blocks or {},
        )

    @property
    def size(self) -> int:
        return len(self.free)

    def expand(self, x: FloatArray, constrained_values: Optional[FloatArray] = None) -> FloatArray:
        full = np.zeros(self.n_dofs) if constrained_values is None else np.array(constrained_values, dtype=float)
        full[self.free] = x
        return full


def solve(system: BandedSystem, rtol: float = LAYERFEM_SOLVER_RTOL) -> FloatArray:
    """
    Banded Cholesky solve of the reduced system, with a relative residual check.
    """
    if system.size == 0:
        return np.zeros(0)
    try:
        factor = cholesky_banded(system.band, lower=False)
    except LinAlgError as e:
        raise NotSPD(f"band Cholesky factorization failed on a system of size {system.size}: {e}") from e
    x = cho_solve_banded((factor, False), system.rhs)
    # normwise backward error, ||Ax - b|| relative to ||A|| ||x|| + ||b||
    scale = abs(system.matrix).sum(axis=1).max() * np.max(np.abs(x)) + np.max(np.abs(system.rhs))
    residual = np.max(np.abs(system.matrix @ x - system.rhs))
    if residual > rtol * scale:
        raise ResidualTooLarge(f"relative residual {residual / max(scale, 1e-300):.3e} exceeds {rtol:.1e}.")
    LOGGER.debug(f"Solved band system: size={system.size}, bandwidth={system.bandwidth}.")
    return x
