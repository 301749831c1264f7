"""
Convergence rates from sequences of (N, error) pairs.
"""
from dataclasses import asdict, dataclass
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from layerfem.exceptions import ConfigError, NonPositiveError, NotEnoughPoints
from layerfem.stypes import RATE_SCALES, FloatArray

ScaleSpec = Union[str, Sequence[float]]


@dataclass(frozen=True)
class RateFit:
    scale: str
    exponent: float
    pairwise: Tuple[float, ...]

    @property
    def last_pairwise(self) -> float:
        return self.pairwise[-1]

    def to_dict(self) -> Dict[str, object]:
        data = asdict(self)
        data["pairwise"] = list(self.pairwise)
        return data


def scale_factors(Ns: Sequence[int], scale: ScaleSpec) -> Tuple[str, FloatArray]:
    """
    Abscissae of the fit: N^-1, N^-1 ln N, or explicit factors given per N.
    """
    n = np.asarray(Ns, dtype=float)
    if isinstance(scale, str):
        if scale == "N_inv":
            return scale, 1.0 / n
        if scale == "N_inv_logN":
            return scale, np.log(n) / n
        raise ConfigError(f"unknown rate scale {scale!r}; named scales are {RATE_SCALES[:2]}, pass factors otherwise.")
    factors = np.asarray(scale, dtype=float)
    if factors.shape != n.shape:
        raise ConfigError(f"{len(factors)} scale factors given for {len(n)} values of N.")
    return "mesh", factors


def rate_fit(Ns: Sequence[int], errors: Sequence[float], scale: ScaleSpec = "N_inv") -> RateFit:
    """
    Least-squares slope of ln(error) against ln(scale(N)), plus the rates between
    consecutive N.
    """
    errs = np.asarray(errors, dtype=float)
    if len(errs) != len(Ns):
        raise ConfigError(f"{len(Ns)} values of N for {len(errs)} errors.")
    if len(errs) < 2:
        raise NotEnoughPoints(f"a rate needs at least 2 (N, error) pairs, got {len(errs)}.")
    if not np.all(errs > 0) or not np.all(np.isfinite(errs)):
        raise NonPositiveError(f"errors must be positive and finite, got {errs.tolist()}.")
    name, factors = scale_factors(Ns, scale)
    if not np.all(factors > 0):
        raise NonPositiveError(f"scale factors must be positive, got {factors.tolist()}.")
    log_f, log_e = np.log(factors), np.log(errs)
    slope = np.polyfit(log_f, log_e, 1)[0]
    pairwise = np.diff(log_e) / np.diff(log_f)
    return RateFit(scale=name, exponent=float(slope), pairwise=tuple(float(r) for r in pairwise))


def rate_table(Ns: Sequence[int], errors: Sequence[float], mesh_factors: Sequence[float]) -> List[RateFit]:
    return [rate_fit(Ns, errors, scale) for scale in ("N_inv", "N_inv_logN", mesh_factors)]
