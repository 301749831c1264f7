"""
Convergence studies, operator checks and the energy-vs-balanced comparison.

Every (N, epsilon) case is independent; cases run through joblib and are collected in
(N, epsilon) order so reports do not depend on scheduling.
"""
import dataclasses
import logging
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from layerfem.analysis.norms import Difference, norm_of_difference, sup_norm
from layerfem.analysis.operators import (
    chi_tau,
    hybrid_P,
    interface_gap,
    interpolate,
    linf_stability_estimate,
    reaction_coupling,
    ritz_projection,
    w1inf_on_ply,
    weighted_l2_projection,
)
from layerfem.analysis.rates import rate_fit
from layerfem.exceptions import LayerFemError
from layerfem.fem.basis import HermiteBasis, make_basis
from layerfem.fem.discrete import DiscreteFunction
from layerfem.fem.quadrature import QuadratureRule, gauss_legendre
from layerfem.fem.solver import galerkin_solve_on_space
from layerfem.fem.space import FunctionSpace
from layerfem.files import CsvFilename
from layerfem.harness.config import StudyConfig
from layerfem.harness.report import CaseResult, ConvergenceReport, make_verdict
from layerfem.meshes.stype import STypeMesh, build_stype_mesh
from layerfem.problems.catalog import ProblemSpec, SolutionDecomposition, get_problem
from layerfem.stypes import NORM_KINDS, VerdictDict

LOGGER = logging.getLogger(__name__)
LOGGER.setLevel(logging.INFO)

OPERATOR_NS = (16, 32, 64, 128)
PLY_LAYER_NS = (16, 32, 64)
ENERGY_RATE_MIN = 1.75
ENERGY_RATIO_FACTOR = 3.0
BALANCED_RATIO_RANGE = (0.8, 1.25)


def mesh_metadata(mesh: STypeMesh) -> Dict[str, float]:
    return {
        "lambda": mesh.lam,
        "h": mesh.h,
        "max_psi_prime": float(mesh.psi_prime_max),
        "rate_factor": mesh.rate_factor,
    }


def _rule(config: StudyConfig) -> Optional[QuadratureRule]:
    return gauss_legendre(config.quadrature_points) if config.quadrature_points else None


def case_setup(
    config: StudyConfig, N: int, epsilon: float
) -> Tuple[ProblemSpec, SolutionDecomposition, FunctionSpace]:
    problem, decomposition = get_problem(config.problem, epsilon)
    mesh = build_stype_mesh(config.mesh, N, config.sigma, epsilon, dim=problem.dim)
    return problem, decomposition, FunctionSpace(mesh, config.basis)


def run_case(config: StudyConfig, N: int, epsilon: float) -> CaseResult:
    """
    Solves one case and measures u - uN, eta = u - Pu and xi = Pu - uN on every requested region.
    """
    result = CaseResult(N=N, epsilon=epsilon)
    try:
        problem, decomposition, space = case_setup(config, N, epsilon)
        result.mesh = mesh_metadata(space.mesh)
        rule = _rule(config)
        uN = galerkin_solve_on_space(problem, space, rule)
        u = decomposition.u_exact
        pairs: Dict[str, Tuple[Any, Any]] = {"total": (u, uN)}
        if {"eta", "xi"} & set(config.components):
            Pu = hybrid_P(decomposition, space, problem.m, problem.k, problem.c).result
            pairs.update(eta=(u, Pu), xi=(Pu, uN))
        for component in config.components:
            a, b = pairs[component]
            result.norms[component] = {}
            for region in config.regions:
                report = norm_of_difference(a, b, space, region, problem.m, problem.k, epsilon, rule)
                values = report.as_dict()
                result.norms[component][region] = {kind: values[kind] for kind in config.norms if kind in values}
    except LayerFemError as e:
        LOGGER.warning(f"Case N={N}, eps={epsilon:g} of {config.problem} failed: {e}")
        result.status = f"error: {e}"
    return result


def run_study(config: StudyConfig) -> ConvergenceReport:
    cases = Parallel(n_jobs=config.n_jobs)(
        delayed(run_case)(config, N, epsilon) for N in config.N for epsilon in config.epsilon
    )
    report = ConvergenceReport(
        config=config.as_dict(),
        problem={"m": config.m, "k": config.k, "dim": config.dim},
        target_rate=config.target_rate,
        cases=list(cases),
    )
    report.finalize()
    return report


def solve_single(config: StudyConfig, N: int, epsilon: float) -> Tuple[DiscreteFunction, SolutionDecomposition]:
    problem, decomposition, space = case_setup(config, N, epsilon)
    return galerkin_solve_on_space(problem, space, _rule(config)), decomposition


def export_solution(uN: DiscreteFunction, decomposition: SolutionDecomposition, path: str) -> CsvFilename:
    """
    Writes uN and u at the nodal dofs, one row per node.
    """
    dofmap = uN.space.dofmap
    value_dofs = np.flatnonzero(np.all(dofmap.dof_order == 0, axis=1))
    coords = dofmap.dof_coords[value_dofs]
    columns = ["x", "y"][: uN.dim]
    frame = pd.DataFrame(coords, columns=columns)
    frame["uN"] = uN.coeffs[value_dofs]
    frame["u"] = decomposition.u_exact.evaluate(tuple(coords.T), (0,) * uN.dim)
    output = CsvFilename(path)
    output.write_frame(frame)
    LOGGER.info(f"Solution written to {output}.")
    return output


def min_rate_verdict(name: str, Ns: List[int], errors: List[float], scale: Any, minimum: float) -> VerdictDict:
    try:
        fit = rate_fit(Ns, errors, scale)
    except LayerFemError as e:
        return make_verdict(name, False, None, minimum, f"no rate: {e}")
    return make_verdict(
        name,
        fit.exponent >= minimum,
        fit.exponent,
        minimum,
        f"rate {fit.exponent:.3f} vs {fit.scale}, required at least {minimum:g}",
        N=Ns,
        errors=errors,
    )


def _interface_gap_check(config: StudyConfig, epsilon: float, diagnostics: Dict[str, Any]) -> VerdictDict:
    problem, decomposition = get_problem("rd1d-varc", epsilon)
    basis = make_basis("lagrange-gl", config.p)
    gaps, stability = [], []
    for N in OPERATOR_NS:
        space = FunctionSpace(build_stype_mesh(config.mesh, N, config.sigma, epsilon), basis)
        gaps.append(interface_gap(decomposition.v, weighted_l2_projection(decomposition.v, space, problem.c)))
        stability.append(linf_stability_estimate(space, problem.c))
    diagnostics["linf_stability"] = dict(zip(map(str, OPERATOR_NS), stability))
    return min_rate_verdict("interface-gap", list(OPERATOR_NS), gaps, "N_inv", config.p + 0.7)


def _ritz_check(config: StudyConfig, epsilon: float) -> VerdictDict:
    _, decomposition = get_problem("fourth1d-k2", epsilon)
    v = decomposition.v
    errors = []
    for N in OPERATOR_NS:
        space = FunctionSpace(build_stype_mesh(config.mesh, N, config.sigma, epsilon), HermiteBasis(2))
        projection = ritz_projection(v, space, 2, 1)
        cells = np.fromiter(space.mesh.cells("coarse"), dtype=np.int64)
        errors.append(sup_norm(Difference(v, projection), space, cells))
    return min_rate_verdict("ritz-linf", list(OPERATOR_NS), errors, "N_inv", config.p + 0.7)


def _ply_layer_check(config: StudyConfig, epsilon: float) -> VerdictDict:
    problem, decomposition = get_problem("fourth1d-k1", epsilon)
    errors = []
    for N in PLY_LAYER_NS:
        space = FunctionSpace(build_stype_mesh(config.mesh, N, config.sigma, epsilon), HermiteBasis(2))
        output = hybrid_P(decomposition, space, problem.m, problem.k, problem.c)
        Iw = interpolate(decomposition.w[0], space)
        errors.append(w1inf_on_ply(Iw, output.layers[0], space))
    return min_rate_verdict("ply-layer-w1inf", list(PLY_LAYER_NS), errors, "N_inv", config.sigma - 1 - 0.3)


def _interpolation_check(config: StudyConfig, epsilon: float) -> VerdictDict:
    errors, factors = [], []
    for N in config.N:
        problem, decomposition, space = case_setup(config, N, epsilon)
        Pu = hybrid_P(decomposition, space, problem.m, problem.k, problem.c).result
        report = norm_of_difference(decomposition.u_exact, Pu, space, "all", problem.m, problem.k, epsilon)
        errors.append(report.balanced)
        factors.append(space.mesh.rate_factor)
    minimum = (config.p if config.m == 1 else config.m) - 0.25
    return min_rate_verdict("interpolation-balanced", list(config.N), errors, factors, minimum)


def _chi_check(config: StudyConfig, epsilon: float) -> VerdictDict:
    basis = make_basis("lagrange-gl", config.p if config.m == 1 else 1)
    counts: Dict[int, int] = {}
    wrong = 0
    for dim in (1, 2):
        mesh = build_stype_mesh(config.mesh, min(config.N[0], 64), config.sigma, epsilon, dim=dim)
        space = FunctionSpace(mesh, basis)
        lo, hi = space.mesh.omega_c
        for cell in space.mesh.cells("ply"):
            chi = chi_tau(space, cell)
            coords = chi.local_dof_coords
            inside = np.all((coords >= lo) & (coords <= hi), axis=1)
            on_boundary = inside & np.any((coords == lo) | (coords == hi), axis=1)
            wrong += int(np.any(chi.local_coeffs != on_boundary))
            ones = int(chi.local_coeffs.sum())
            counts[ones] = counts.get(ones, 0) + 1
    allowed = {1, basis.p + 1}
    passed = wrong == 0 and set(counts) <= allowed
    return make_verdict(
        "chi-tau", passed, wrong, 0, f"{wrong} ply cells with a wrong indicator, ones per cell {sorted(counts)}"
    )


def _branch_check(config: StudyConfig, epsilon: float, diagnostics: Dict[str, Any]) -> VerdictDict:
    problem, decomposition, space = case_setup(config, config.N[0], epsilon)
    output = hybrid_P(decomposition, space, problem.m, problem.k, problem.c)
    uN = galerkin_solve_on_space(problem, space, _rule(config))
    diagnostics["reaction_coupling"] = reaction_coupling(
        problem, space, Difference(decomposition.u_exact, output.result), output.result - uN
    )
    detail = "cell branches of P follow the mesh classification"
    return make_verdict("branches", output.matches_mesh(), None, None, detail)


def run_operator_verification(config: StudyConfig) -> Dict[str, Any]:
    epsilon = config.epsilon[0]
    diagnostics: Dict[str, Any] = {}
    checks: List[VerdictDict] = []
    if config.m == 1:
        checks.append(_interface_gap_check(config, epsilon, diagnostics))
    else:
        checks.append(_ritz_check(config, epsilon))
        checks.append(_ply_layer_check(config, epsilon))
    checks.append(_interpolation_check(config, epsilon))
    checks.append(_chi_check(config, epsilon))
    checks.append(_branch_check(config, epsilon, diagnostics))
    return {"config": config.as_dict(), "verdicts": checks, "diagnostics": diagnostics}


def compare_energy_vs_balanced(config: StudyConfig) -> Dict[str, Any]:
    """
    Energy and balanced errors at the finest N for every epsilon: the energy error shrinks
    like eps^{1/2} while the balanced error stays put.
    """
    full = dataclasses.replace(config, norms=list(NORM_KINDS), regions=["all"], components=["total"])
    N = config.N[-1]
    table = []
    for epsilon in config.epsilon:
        case = run_case(full, N, epsilon)
        if not case.ok:
            raise LayerFemError(f"compare-norms case N={N}, eps={epsilon:g} failed: {case.status}")
        values = case.norms["total"]["all"]
        table.append({"N": N, "epsilon": epsilon, "energy": values["energy"], "balanced": values["balanced"]})
    verdicts = []
    if len(table) > 1:
        by_eps = sorted(table, key=lambda row: row["epsilon"])
        small, large = by_eps[0], by_eps[-1]
        expected = (small["epsilon"] / large["epsilon"]) ** 0.5
        ratio = small["energy"] / large["energy"]
        verdicts.append(
            make_verdict(
                "energy-scaling",
                expected / ENERGY_RATIO_FACTOR <= ratio <= expected * ENERGY_RATIO_FACTOR,
                ratio,
                expected,
                f"energy error ratio {ratio:.4g} against eps ratio^(1/2) = {expected:.4g}",
            )
        )
        balanced_ratio = small["balanced"] / large["balanced"]
        lo, hi = BALANCED_RATIO_RANGE
        verdicts.append(
            make_verdict(
                "balanced-flat",
                lo <= balanced_ratio <= hi,
                balanced_ratio,
                1.0,
                f"balanced error ratio {balanced_ratio:.4g}, accepted in [{lo}, {hi}]",
            )
        )
    if config.m == 2:
        epsilon = config.epsilon[0]
        cases = [run_case(full, n, epsilon) for n in config.N]
        errors = [c.norms["total"]["all"]["energy"] if c.ok else 0.0 for c in cases]
        verdicts.append(min_rate_verdict("energy-rate", list(config.N), errors, "N_inv_logN", ENERGY_RATE_MIN))
    return {"config": config.as_dict(), "table": table, "verdicts": verdicts}
