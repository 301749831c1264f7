from typing import Dict, List, Literal, Tuple, TypedDict

import numpy as np
import numpy.typing as npt
from typing_extensions import NotRequired

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]
BoolArray = npt.NDArray[np.bool_]

# derivative multi-index, one entry per space direction
Orders = Tuple[int, ...]
Coords = Tuple[FloatArray, ...]

MeshKind = Literal["shishkin", "bakhvalov-s", "custom", "uniform"]
CellKind = Literal["coarse", "ply", "layer"]
Region = Literal["all", "coarse", "complement", "ply"]
NormKind = Literal["l2", "h1", "h2", "linf", "energy", "balanced"]
Component = Literal["total", "eta", "xi"]
RateScale = Literal["N_inv", "N_inv_logN", "mesh"]
BasisFamily = Literal["lagrange-gl", "hermite"]
VerdictStatus = Literal["PASS", "FAIL"]

CELL_KINDS: Tuple[CellKind, ...] = ("coarse", "ply", "layer")
REGIONS: Tuple[Region, ...] = ("all", "coarse", "complement", "ply")
NORM_KINDS: Tuple[NormKind, ...] = ("l2", "h1", "h2", "linf", "energy", "balanced")
COMPONENTS: Tuple[Component, ...] = ("total", "eta", "xi")
RATE_SCALES: Tuple[RateScale, ...] = ("N_inv", "N_inv_logN", "mesh")


MeshDescriptor = TypedDict(
    "MeshDescriptor",
    {
        "kind": str,
        "N": int,
        "sigma": float,
        "epsilon": float,
        "lambda": float,
        "h": float,
        "max_psi_prime": float,
        "dim": int,
        "nodes": List[float],
        "minimal_step_condition": NotRequired[bool],
    },
)


class VerdictDict(TypedDict):
    name: str
    status: VerdictStatus
    value: float | None
    target: float | None
    detail: str
    data: NotRequired[Dict[str, List[float]]]
