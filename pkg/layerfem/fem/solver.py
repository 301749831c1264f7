import logging
from typing import Optional

from layerfem.fem.assembly import assemble_on_space
from layerfem.fem.banded import solve
from layerfem.fem.basis import ReferenceBasis
from layerfem.fem.discrete import DiscreteFunction
from layerfem.fem.quadrature import QuadratureRule
from layerfem.fem.space import FunctionSpace
from layerfem.meshes.stype import STypeMesh
from layerfem.problems.catalog import ProblemSpec

LOGGER = logging.getLogger(__name__)
LOGGER.setLevel(logging.INFO)


def galerkin_solve_on_space(
    problem: ProblemSpec, space: FunctionSpace, rule: Optional[QuadratureRule] = None
) -> DiscreteFunction:
    system = assemble_on_space(problem, space, rule)
    coeffs = system.expand(solve(system))
    LOGGER.info(
        f"Solved {problem.problem_id} (eps={problem.epsilon:g}) on {space!r}: "
        f"{system.size} unknowns, bandwidth {system.bandwidth}."
    )
    return DiscreteFunction(space, coeffs, name=f"{problem.problem_id}:uN")


def galerkin_solve(
    problem: ProblemSpec, mesh: STypeMesh, basis: ReferenceBasis, rule: Optional[QuadratureRule] = None
) -> DiscreteFunction:
    """
    The Galerkin approximation u^N in V^N.
    """
    return galerkin_solve_on_space(problem, FunctionSpace(mesh, basis), rule)
