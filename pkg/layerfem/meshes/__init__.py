from layerfem.meshes.generating import MeshGeneratingFunction, max_psi_prime
from layerfem.meshes.stype import (
    STypeMesh,
    TransitionParams,
    build_mesh,
    build_stype_mesh,
    classify_cell,
    uniform_mesh,
)

__all__ = [
    "MeshGeneratingFunction",
    "STypeMesh",
    "TransitionParams",
    "build_mesh",
    "build_stype_mesh",
    "classify_cell",
    "max_psi_prime",
    "uniform_mesh",
]
