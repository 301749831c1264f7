"""
layerfem command line.

    layerfem mesh --kind shishkin --N 64 --sigma 2 --epsilon 1e-6 --output /tmp/shishkin64
    layerfem solve --problem rd1d-const --N 64 --epsilon 1e-6 --output /tmp/rd1d.csv
    layerfem converge --config study.toml --epsilon 1e-4 1e-6 1e-8
    layerfem verify-operators --problem rd1d-varc --p 1 --N 16 32 64 128 --epsilon 1e-6
    layerfem compare-norms --problem rd1d-const --N 64 --epsilon 1e-4 1e-8

The exit code is 0 when every verdict passes.
"""
import argparse
import logging
import os
import sys
from typing import List, Optional

from layerfem.config import LAYERFEM_LOG_LEVEL
from layerfem.exceptions import LayerFemError
from layerfem.files import JsonFilename
from layerfem.harness.config import MESH_KINDS, StudyConfig
from layerfem.harness.study import (
    compare_energy_vs_balanced,
    export_solution,
    run_operator_verification,
    run_study,
    solve_single,
)
from layerfem.meshes.stype import build_stype_mesh

LOGGER = logging.getLogger(__name__)
LOGGER.setLevel(logging.INFO)


def _add_study_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="TOML or JSON study configuration file.")
    parser.add_argument("--problem", help="Catalog problem id.")
    parser.add_argument("--mesh", choices=MESH_KINDS, help="Mesh kind.")
    parser.add_argument("--sigma", type=float, help="Transition parameter factor, default p + 1.")
    parser.add_argument("--p", type=int, help="Polynomial degree.")
    parser.add_argument("--N", type=int, nargs="+", help="Numbers of cells per direction, ascending.")
    parser.add_argument("--epsilon", type=float, nargs="+", help="Perturbation parameters.")
    parser.add_argument("--norms", nargs="+", help="Norm kinds to report.")
    parser.add_argument("--regions", nargs="+", help="Regions to report.")
    parser.add_argument("--components", nargs="+", help="Error components: total, eta = u - Pu, xi = Pu - uN.")
    parser.add_argument("--output-dir", help="Directory for report files.")
    parser.add_argument("--name", help="Basename of report files.")
    parser.add_argument("--quadrature-points", type=int, help="Gauss-Legendre points per cell and direction.")
    parser.add_argument("--n-jobs", type=int, help="Concurrent cases.")
    parser.add_argument("--allow-small-sigma", action="store_true", default=None, help="Accept sigma < p + 1.")
    parser.add_argument("--allow-large-2d", action="store_true", default=None, help="Accept 2D studies with N > 64.")


def _config_from(args: argparse.Namespace) -> StudyConfig:
    return StudyConfig.from_file(
        args.config,
        problem=args.problem,
        mesh=args.mesh,
        sigma=args.sigma,
        p=args.p,
        N=args.N,
        epsilon=args.epsilon,
        norms=args.norms,
        regions=args.regions,
        components=args.components,
        output_dir=args.output_dir,
        name=args.name,
        quadrature_points=args.quadrature_points,
        n_jobs=args.n_jobs,
        allow_small_sigma=args.allow_small_sigma,
        allow_large_2d=args.allow_large_2d,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="layerfem", description=__doc__, formatter_class=argparse.RawTextHelpFormatter
    )
    verbs = parser.add_subparsers(dest="verb", required=True)

    mesh = verbs.add_parser("mesh", help="Build an S-type mesh and write its nodes and descriptor.")
    mesh.add_argument("--kind", choices=MESH_KINDS, default="shishkin")
    mesh.add_argument("--N", type=int, required=True)
    mesh.add_argument("--sigma", type=float, default=2.0)
    mesh.add_argument("--epsilon", type=float, required=True)
    mesh.add_argument("--dim", type=int, choices=(1, 2), default=1)
    mesh.add_argument("--output", required=True, help="Base path, .nodes.txt and .json are appended.")

    solve = verbs.add_parser("solve", help="Solve one case and write the nodal solution as CSV.")
    _add_study_arguments(solve)
    solve.add_argument("--output", required=True, help="CSV file.")

    for verb, help_text in (
        ("converge", "Convergence study with fitted rates and verdicts."),
        ("verify-operators", "Numerical checks of the analysis operators."),
        ("compare-norms", "Energy against balanced norm errors across epsilon."),
    ):
        _add_study_arguments(verbs.add_parser(verb, help=help_text))
    return parser


def _write_verdict_file(data: dict, config: StudyConfig, suffix: str) -> bool:
    output = JsonFilename(os.path.join(config.output_dir, f"{config.name}.{suffix}.json"))
    output.write_json(data)
    LOGGER.info(f"Verdicts written to {output}.")
    return all(v["status"] == "PASS" for v in data["verdicts"])


def run(args: argparse.Namespace) -> bool:
    if args.verb == "mesh":
        build_stype_mesh(args.kind, args.N, args.sigma, args.epsilon, dim=args.dim).export(args.output)
        return True
    config = _config_from(args)
    if args.verb == "solve":
        uN, decomposition = solve_single(config, config.N[0], config.epsilon[0])
        export_solution(uN, decomposition, args.output)
        return True
    if args.verb == "converge":
        report = run_study(config)
        report.write(config.output_dir, config.name)
        return report.all_pass
    if args.verb == "verify-operators":
        return _write_verdict_file(run_operator_verification(config), config, "operators")
    if args.verb == "compare-norms":
        return _write_verdict_file(compare_energy_vs_balanced(config), config, "norms")
    raise AssertionError(f"unhandled verb {args.verb}")


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=LAYERFEM_LOG_LEVEL, format="%(asctime)s [%(name)s] %(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        passed = run(args)
    except LayerFemError as e:
        LOGGER.error(str(e))
        return 2
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
