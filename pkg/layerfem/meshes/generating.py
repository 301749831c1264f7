"""
Mesh-generating functions of S-type meshes.

A mesh-generating function phi maps [0, 1/2] monotonically onto [0, ln N]. The associated
mesh characterising function is psi = exp(-phi), and N^-1 max|psi'| is the factor the layer
interpolation errors are measured in.
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from layerfem.exceptions import MeshError, NonConvexPhi, NonMonotonePhi
from layerfem.stypes import FloatArray, MeshKind

LOGGER = logging.getLogger(__name__)
LOGGER.setLevel(logging.INFO)

PhiCallable = Callable[[FloatArray], FloatArray]

CHECK_SAMPLES = 1000
PSI_SAMPLES = 10_000
ENDPOINT_RTOL = 1e-12
CONVEXITY_TOL = 1e-10


@dataclass(frozen=True)
class MeshGeneratingFunction:
    kind: MeshKind
    N: int
    phi: PhiCallable
    phi_prime: PhiCallable
    convex: bool = True

    def __post_init__(self):
        if self.N < 2:
            raise MeshError(f"mesh-generating function needs N >= 2, got {self.N}.")
        log_n = np.log(self.N)
        phi0 = float(self.phi(np.array([0.0]))[0])
        phi_half = float(self.phi(np.array([0.5]))[0])
        if abs(phi0) > ENDPOINT_RTOL * log_n:
            raise MeshError(f"phi(0) must be 0, got {phi0!r}.")
        if abs(phi_half - log_n) > ENDPOINT_RTOL * log_n:
            raise MeshError(f"phi(1/2) must be ln N = {log_n!r}, got {phi_half!r}.")
        samples = self.phi(np.linspace(0.0, 0.5, CHECK_SAMPLES))
        if np.any(np.diff(samples) < 0):
            raise NonMonotonePhi(f"{self.kind} mesh-generating function decreases on [0, 1/2].")
        if self.convex and np.any(np.diff(samples, 2) < -CONVEXITY_TOL):
            raise NonConvexPhi(f"{self.kind} mesh-generating function claims convexity but is not convex.")

    @classmethod
    def shishkin(cls, N: int) -> "MeshGeneratingFunction":
        log_n = np.log(N)
        return cls(
            kind="shishkin",
            N=N,
            phi=lambda t: 2.0 * np.asarray(t, dtype=float) * log_n,
            phi_prime=lambda t: np.full_like(np.asarray(t, dtype=float), 2.0 * log_n),
        )

    @classmethod
    def bakhvalov_s(cls, N: int) -> "MeshGeneratingFunction":
        q = 1.0 - 1.0 / N
        return cls(
            kind="bakhvalov-s",
            N=N,
            phi=lambda t: -np.log1p(-2.0 * q * np.asarray(t, dtype=float)),
            phi_prime=lambda t: 2.0 * q / (1.0 - 2.0 * q * np.asarray(t, dtype=float)),
        )

    @classmethod
    def custom(cls, N: int, phi: PhiCallable, phi_prime: PhiCallable, convex: bool = False) -> "MeshGeneratingFunction":
        """
        A user supplied phi. Its derivative must be given too, max|psi'| is then found by
        dense sampling followed by a bounded local refinement.
        """
        return cls(kind="custom", N=N, phi=phi, phi_prime=phi_prime, convex=convex)

    @classmethod
    def by_kind(cls, kind: MeshKind, N: int) -> "MeshGeneratingFunction":
        if kind == "shishkin":
            return cls.shishkin(N)
        if kind == "bakhvalov-s":
            return cls.bakhvalov_s(N)
        raise MeshError(f"no built-in mesh-generating function of kind {kind!r}.")

    def psi(self, t: FloatArray) -> FloatArray:
        return np.exp(-self.phi(t))

    def psi_prime(self, t: FloatArray) -> FloatArray:
        return -self.phi_prime(t) * np.exp(-self.phi(t))

    @cached_property
    def psi_prime_max(self) -> float:
        return max_psi_prime(self, self.N)

    def satisfies_minimal_step(self) -> bool:
        """
        N^-1 <= phi(1/N): the minimal mesh size of the layer region is not too small.
        """
        return bool(self.phi(np.array([1.0 / self.N]))[0] >= 1.0 / self.N)


def max_psi_prime(gen: MeshGeneratingFunction, N: int) -> float:
    """
    sup of |psi'| on [0, 1/2]. Closed form for the built-in kinds, sampling plus local
    refinement otherwise.
    """
    if N != gen.N:
        raise MeshError(f"mesh-generating function was built for N={gen.N}, not N={N}.")
    if gen.kind == "shishkin":
        return 2.0 * float(np.log(N))
    if gen.kind == "bakhvalov-s":
        return 2.0 * (1.0 - 1.0 / N)

    t = np.linspace(0.0, 0.5, PSI_SAMPLES)
    values = np.abs(gen.psi_prime(t))
    idx = int(np.argmax(values))
    best = float(values[idx])
    lower, upper = t[max(idx - 1, 0)], t[min(idx + 1, len(t) - 1)]
    refined = minimize_scalar(
        lambda s: -float(np.abs(gen.psi_prime(np.array([s])))[0]),
        bounds=(lower, upper),
        method="bounded",
        options={"xatol": 1e-14},
    )
    if refined.success:
        best = max(best, -float(refined.fun))
    LOGGER.debug(f"max|psi'| of custom mesh-generating function sampled at {PSI_SAMPLES} points: {best}")
    return best
