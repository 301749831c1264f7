"""
Study configuration: one TOML or JSON file per study whose keys are the StudyConfig field
names, with command line values taking precedence.
"""
import json
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from functools import cached_property
from typing import Any, Dict, List, Optional, Tuple

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from layerfem.config import LAYERFEM_N_JOBS, LAYERFEM_REPORTS_DIR
from layerfem.exceptions import ConfigError
from layerfem.fem.basis import ReferenceBasis, make_basis
from layerfem.problems.catalog import CATALOG, ProblemSpec, get_problem
from layerfem.stypes import COMPONENTS, NORM_KINDS, REGIONS, BasisFamily, Component, MeshKind, NormKind, Region

MESH_KINDS: Tuple[MeshKind, ...] = ("shishkin", "bakhvalov-s", "uniform")
MAX_2D_N = 64


@dataclass(frozen=True, eq=False)
class StudyConfig:
    problem: str
    N: List[int]
    epsilon: List[float]
    p: int = 1
    mesh: MeshKind = "shishkin"
    sigma: Optional[float] = None
    norms: List[NormKind] = field(default_factory=lambda: list(NORM_KINDS))
    regions: List[Region] = field(default_factory=lambda: ["all"])
    components: List[Component] = field(default_factory=lambda: list(COMPONENTS))
    output_dir: str = LAYERFEM_REPORTS_DIR
    name: str = "study"
    quadrature_points: Optional[int] = None
    allow_small_sigma: bool = False
    allow_large_2d: bool = False
    n_jobs: int = LAYERFEM_N_JOBS

    def __post_init__(self):
        if self.problem not in CATALOG:
            raise ConfigError(f"unknown problem {self.problem!r}, choose from {sorted(CATALOG)}.")
        if self.mesh not in MESH_KINDS:
            raise ConfigError(f"unknown mesh kind {self.mesh!r}, choose from {MESH_KINDS}.")
        if not self.N:
            raise ConfigError("the list of N is empty.")
        if any(n % 4 or n < 4 for n in self.N):
            raise ConfigError(f"every N must be a positive multiple of 4, got {self.N}.")
        if list(self.N) != sorted(set(self.N)):
            raise ConfigError(f"N must be strictly ascending, got {self.N}.")
        if not self.epsilon:
            raise ConfigError("the list of epsilon is empty.")
        if self.sigma is None:
            object.__setattr__(self, "sigma", float(self.p + 1))
        if self.sigma < self.p + 1 and not self.allow_small_sigma:
            raise ConfigError(
                f"balanced-norm estimates assume sigma >= p + 1 = {self.p + 1}, got {self.sigma}; "
                "pass allow_small_sigma to run anyway."
            )
        for name, values, allowed in (
            ("norms", self.norms, NORM_KINDS),
            ("regions", self.regions, REGIONS),
            ("components", self.components, COMPONENTS),
        ):
            unknown = set(values) - set(allowed)
            if unknown:
                raise ConfigError(f"unknown {name} {sorted(unknown)}, choose from {allowed}.")
        if self.m == 2 and self.p != 3:
            raise ConfigError(f"{self.problem} is fourth order and runs on Hermite cubics, p must be 3.")
        if self.m == 1 and self.p > 8:
            raise ConfigError(f"degree {self.p} is out of range for Lagrange elements.")
        if self.dim == 2 and self.N[-1] > MAX_2D_N and not self.allow_large_2d:
            raise ConfigError(f"2D studies are capped at N={MAX_2D_N}, pass allow_large_2d to go beyond.")

    @cached_property
    def problem_spec(self) -> ProblemSpec:
        return get_problem(self.problem, self.epsilon[0])[0]

    @property
    def m(self) -> int:
        return self.problem_spec.m

    @property
    def k(self) -> int:
        return self.problem_spec.k

    @property
    def dim(self) -> int:
        return self.problem_spec.dim

    @property
    def family(self) -> BasisFamily:
        return "hermite" if self.m == 2 else "lagrange-gl"

    @property
    def basis(self) -> ReferenceBasis:
        return make_basis(self.family, self.p)

    @property
    def target_rate(self) -> float:
        """
        Balanced-norm rate against h + N^-1 max|psi'|: p for m = 1, p + 1 - m for m = 2.
        """
        return float(self.p if self.m == 1 else self.p + 1 - self.m)

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "StudyConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys {sorted(unknown)}.")
        for key in ("problem", "N", "epsilon"):
            if data.get(key) is None:
                raise ConfigError(f"configuration key {key!r} is required.")
        return cls(**data)

    @classmethod
    def from_file(cls, path: Optional[str] = None, **overrides: Any) -> "StudyConfig":
        """
        Reads a TOML or JSON file, then applies the overrides that are not None.
        """
        data = read_config_file(path) if path else {}
        data.update({key: value for key, value in overrides.items() if value is not None})
        return cls.from_dict(data)


def read_config_file(path: str) -> Dict[str, Any]:
    ext = os.path.splitext(path)[1].lower()
    try:
        if ext == ".toml":
            with open(path, "rb") as f:
                return tomllib.load(f)
        if ext == ".json":
            with open(path) as f:
                return json.load(f)
    except (OSError, ValueError) as e:
        raise ConfigError(f"cannot read configuration {path}: {e}") from e
    raise ConfigError(f"configuration files are .toml or .json, got {path}.")
