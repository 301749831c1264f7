"""
Convergence reports, their CSV/JSON files and the verdict logic.

Verdicts are computed from the JSON form of a report only, so a saved report reproduces
its verdicts exactly.
"""
import logging
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from layerfem.analysis.rates import rate_fit
from layerfem.exceptions import LayerFemError
from layerfem.files import CsvFilename, JsonFilename
from layerfem.stypes import VerdictDict

LOGGER = logging.getLogger(__name__)
LOGGER.setLevel(logging.INFO)

CSV_COLUMNS = (
    "problem",
    "mesh",
    "p",
    "sigma",
    "N",
    "epsilon",
    "lambda",
    "h",
    "max_psi_prime",
    "norm_kind",
    "region",
    "component",
    "value",
)
RATE_TOLERANCE = 0.25
PAIRWISE_TOLERANCE = 0.35
EPS_UNIFORMITY_RATIO = 1.2
TRIANGLE_SLACK = 1e-9
OK = "ok"

# component -> region -> norm kind -> value
NormTable = Dict[str, Dict[str, Dict[str, float]]]


def make_verdict(
    name: str, passed: bool, value: Optional[float], target: Optional[float], detail: str, **data: List[float]
) -> VerdictDict:
    verdict: VerdictDict = {
        "name": name,
        "status": "PASS" if passed else "FAIL",
        "value": None if value is None else float(value),
        "target": None if target is None else float(target),
        "detail": detail,
    }
    if data:
        verdict["data"] = {key: [float(x) for x in values] for key, values in data.items()}
    LOGGER.info(f"{verdict['status']} {name}: {detail}")
    return verdict


@dataclass
class CaseResult:
    N: int
    epsilon: float
    status: str = OK
    mesh: Dict[str, float] = field(default_factory=dict)
    norms: NormTable = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == OK

    def value(self, component: str, region: str, norm_kind: str) -> Optional[float]:
        return self.norms.get(component, {}).get(region, {}).get(norm_kind)


@dataclass
class ConvergenceReport:
    config: Dict[str, Any]
    problem: Dict[str, int]
    target_rate: float
    cases: List[CaseResult] = field(default_factory=list)
    rates: List[Dict[str, Any]] = field(default_factory=list)
    verdicts: List[VerdictDict] = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return all(v["status"] == "PASS" for v in self.verdicts)

    def to_json(self) -> Dict[str, Any]:
        return {
            "config": self.config,
            "problem": self.problem,
            "target_rate": self.target_rate,
            "cases": [asdict(case) for case in self.cases],
            "rates": self.rates,
            "verdicts": self.verdicts,
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "ConvergenceReport":
        return cls(
            config=data["config"],
            problem=data["problem"],
            target_rate=data["target_rate"],
            cases=[CaseResult(**case) for case in data["cases"]],
            rates=data.get("rates", []),
            verdicts=data.get("verdicts", []),
        )

    def to_frame(self) -> pd.DataFrame:
        cfg = self.config
        rows = []
        for case in self.cases:
            if not case.ok:
                continue
            for component in cfg["components"]:
                for region in cfg["regions"]:
                    for norm_kind in cfg["norms"]:
                        value = case.value(component, region, norm_kind)
                        if value is None:
                            continue
                        rows.append(
                            (
                                cfg["problem"],
                                cfg["mesh"],
                                cfg["p"],
                                cfg["sigma"],
                                case.N,
                                case.epsilon,
                                case.mesh["lambda"],
                                case.mesh["h"],
                                case.mesh["max_psi_prime"],
                                norm_kind,
                                region,
                                component,
                                value,
                            )
                        )
        return pd.DataFrame(rows, columns=list(CSV_COLUMNS))

    def finalize(self):
        """
        Fills in rates and verdicts from the cases.
        """
        data = self.to_json()
        self.rates = rates_from_report(data)
        self.verdicts = verdicts_from_report(data)

    def write(self, output_dir: Optional[str] = None, name: Optional[str] = None) -> Tuple[CsvFilename, JsonFilename]:
        output_dir = output_dir or self.config["output_dir"]
        name = name or self.config["name"]
        csv_file = CsvFilename(os.path.join(output_dir, f"{name}.csv"))
        json_file = JsonFilename(os.path.join(output_dir, f"{name}.json"))
        csv_file.write_frame(self.to_frame())
        json_file.write_json(self.to_json())
        LOGGER.info(f"Report written to {csv_file} and {json_file}.")
        return csv_file, json_file


def _ok_cases(data: Dict[str, Any]) -> List[Dict[str, Any]]:
    return sorted((c for c in data["cases"] if c["status"] == OK), key=lambda c: (c["N"], c["epsilon"]))


def _series(
    data: Dict[str, Any], epsilon: float, component: str, region: str, norm_kind: str
) -> Tuple[List[int], List[float], List[float]]:
    Ns, errors, factors = [], [], []
    for case in _ok_cases(data):
        if case["epsilon"] != epsilon:
            continue
        value = case["norms"].get(component, {}).get(region, {}).get(norm_kind)
        if value is None:
            continue
        Ns.append(case["N"])
        errors.append(value)
        factors.append(case["mesh"]["rate_factor"])
    return Ns, errors, factors


def rates_from_report(data: Dict[str, Any]) -> List[Dict[str, Any]]:
    """
    Fitted rates of every (epsilon, component, region, norm) series against N^-1,
    N^-1 ln N and the mesh factor h + N^-1 max|psi'|.
    """
    cfg = data["config"]
    rates = []
    for epsilon in cfg["epsilon"]:
        for component in cfg["components"]:
            for region in cfg["regions"]:
                for norm_kind in cfg["norms"]:
                    Ns, errors, factors = _series(data, epsilon, component, region, norm_kind)
                    try:
                        fits = [rate_fit(Ns, errors, scale).to_dict() for scale in ("N_inv", "N_inv_logN", factors)]
                    except LayerFemError:
                        continue
                    rates.append(
                        {
                            "epsilon": epsilon,
                            "component": component,
                            "region": region,
                            "norm_kind": norm_kind,
                            "fits": fits,
                        }
                    )
    return rates


def rate_verdict(name: str, Ns: List[int], errors: List[float], scale: Any, target: float) -> VerdictDict:
    try:
        fit = rate_fit(Ns, errors, scale)
    except LayerFemError as e:
        return make_verdict(name, False, None, target, f"no rate: {e}")
    passed = abs(fit.exponent - target) <= RATE_TOLERANCE and abs(fit.last_pairwise - target) <= PAIRWISE_TOLERANCE
    return make_verdict(
        name,
        passed,
        fit.exponent,
        target,
        f"rate {fit.exponent:.3f} vs {fit.scale} (last pairwise {fit.last_pairwise:.3f}), target {target:g}",
        N=Ns,
        errors=errors,
        pairwise=list(fit.pairwise),
    )


def verdicts_from_report(data: Dict[str, Any]) -> List[VerdictDict]:
    cfg = data["config"]
    target = data["target_rate"]
    verdicts = []
    failed = [c for c in data["cases"] if c["status"] != OK]
    verdicts.append(
        make_verdict(
            "cases",
            not failed,
            len(failed),
            0,
            "; ".join(f"N={c['N']}, eps={c['epsilon']:g}: {c['status']}" for c in failed) or "all cases solved",
        )
    )
    has_balanced = "balanced" in cfg["norms"] and "all" in cfg["regions"] and "total" in cfg["components"]
    if has_balanced:
        for epsilon in cfg["epsilon"]:
            Ns, errors, factors = _series(data, epsilon, "total", "all", "balanced")
            verdicts.append(rate_verdict(f"balanced-rate eps={epsilon:g}", Ns, errors, factors, target))
    if has_balanced and len(cfg["epsilon"]) > 1:
        worst, per_N = 1.0, []
        for N in cfg["N"]:
            values = [
                c["norms"]["total"]["all"]["balanced"] for c in _ok_cases(data) if c["N"] == N and c["norms"]
            ]
            if len(values) > 1:
                ratio = max(values) / min(values) if min(values) > 0 else np.inf
                per_N.append(ratio)
                worst = max(worst, ratio)
        verdicts.append(
            make_verdict(
                "eps-uniformity",
                worst <= EPS_UNIFORMITY_RATIO,
                worst,
                EPS_UNIFORMITY_RATIO,
                f"largest max/min balanced error ratio across epsilon at fixed N is {worst:.4f}",
                ratios=per_N,
            )
        )
    if {"total", "eta", "xi"} <= set(cfg["components"]) and "balanced" in cfg["norms"]:
        worst_excess = -np.inf
        for case in _ok_cases(data):
            for region in cfg["regions"]:
                norms = case["norms"]
                total, eta, xi = (norms[c][region]["balanced"] for c in ("total", "eta", "xi"))
                excess = total - eta - xi
                worst_excess = max(worst_excess, excess)
        if np.isfinite(worst_excess):
            verdicts.append(
                make_verdict(
                    "triangle",
                    worst_excess <= TRIANGLE_SLACK,
                    worst_excess,
                    TRIANGLE_SLACK,
                    f"largest excess of |u - uN|_b over |eta|_b + |xi|_b is {worst_excess:.3e}",
                )
            )
    return verdicts
