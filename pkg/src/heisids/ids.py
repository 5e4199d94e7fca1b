"""Integrated density of states for the magnetic Laplacian and the sub-Laplacian.

Magnetic Laplacian on C^n (unit field): the staircase

    N(lam) = (floor(lam) + n)! / (pi^n floor(lam)! n!),   lam >= 0,

right-continuous at the Landau levels m = 0, 1, 2, ...; its jumps are the
DOS weights pi^-n L_m^(n-1)(0).

Sub-Laplacian on H_n: N(lam) = gamma_n lam^n with

    gamma_n = pi^(-n-1/2) / Gamma(n) * sum_j Gamma(j+n) / (j! (2j+n)^(n+1)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import special as sc

from .kernels import density_sub_reduced
from .numerics import (
    DEFAULT_SERIES,
    EvalResult,
    NonConvergence,
    SeriesSpec,
    richardson_inverse_power,
)

__all__ = [
    "Route",
    "IdsValue",
    "DosJump",
    "ids_magnetic",
    "dos_magnetic_jumps",
    "gamma_coefficient",
    "gamma_partial_sum",
    "gamma_tail_bound",
    "ids_sub",
    "ids_sub_via_kernel",
]


class Route(str, Enum):
    CLOSED_FORM = "closed_form"
    KERNEL_DIAGONAL = "kernel_diagonal"


@dataclass(frozen=True)
class IdsValue:
    lam: float
    n: int
    value: float
    route: Route = Route.CLOSED_FORM
    error_estimate: float = 0.0

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("an IDS value is non-negative")


@dataclass(frozen=True)
class DosJump:
    level: int
    weight: float


def _check_n(n):
    if int(n) != n or n < 1:
        raise ValueError(f"dimension n must be a positive integer, got {n}")
    return int(n)


def ids_magnetic(lam: float, n: int) -> IdsValue:
    """Closed-form magnetic IDS; 0 below the spectrum, right-continuous at levels."""
    n = _check_n(n)
    if lam < 0:
        return IdsValue(lam, n, 0.0)
    m = int(math.floor(lam))
    # exact binomial while it fits a float, log-gamma beyond
    count = math.comb(m + n, n)
    if count < 2 ** 1000:
        value = count / math.pi ** n
    else:
        value = math.exp(math.lgamma(m + n + 1) - math.lgamma(m + 1) - math.lgamma(n + 1)
                         - n * math.log(math.pi))
    return IdsValue(lam, n, value)


def dos_magnetic_jumps(lam_max: float, n: int) -> list[DosJump]:
    """Jumps of the magnetic IDS at m = 0..floor(lam_max): pi^-n L_m^(n-1)(0)."""
    n = _check_n(n)
    if lam_max < 0:
        raise ValueError("lam_max must be >= 0")
    return [DosJump(m, math.comb(m + n - 1, m) / math.pi ** n)
            for m in range(int(math.floor(lam_max)) + 1)]


# --- gamma_n ----------------------------------------------------------------------

_GAMMA_COUNTS = (1250, 2500, 5000, 10000)
_gamma_memo: dict = {}


def _raw_terms(n: int, count: int) -> np.ndarray:
    j = np.arange(count, dtype=float)
    # Gamma(j+n)/j! as a ratio of log-gammas keeps large j finite
    return np.exp(sc.gammaln(j + n) - sc.gammaln(j + 1)) / (2.0 * j + n) ** (n + 1)


def gamma_tail_bound(n: int, J: int) -> float:
    """Upper bound on the gamma_n remainder sum_{j >= J} (same normalization as gamma_n).

    Gamma(j+n)/j! is a product of n-1 factors with mean j + n/2, so by AM-GM
    each term is at most 2^-(n+1) (j + n/2)^-2; comparing with an integral
    from J - 1 gives 2^-(n+1) / (J - 1 + n/2).
    """
    n = _check_n(n)
    if J < 1:
        raise ValueError("J must be >= 1")
    return 2.0 ** (-(n + 1)) / (J - 1 + n / 2.0) / (math.pi ** (n + 0.5) * math.gamma(n))


def gamma_partial_sum(n: int, J: int) -> float:
    """First J terms of the gamma_n series, normalization included."""
    n = _check_n(n)
    return float(np.sum(_raw_terms(n, J))) / (math.pi ** (n + 0.5) * math.gamma(n))


def gamma_coefficient(n: int, spec: SeriesSpec | None = None) -> EvalResult:
    """gamma_n from partial sums plus a tail estimate, then Richardson.

    The tail after J is estimated by the midpoint integral of the large-j
    form 2^-(n+1) (j + n/2)^-2, which leaves an O(J^-2) remainder; the
    corrected sums at J = 1250 ... 10^4 are extrapolated in 1/J from the
    second power on.  Results are memoized per (n, tol).
    """
    n = _check_n(n)
    spec = spec or DEFAULT_SERIES
    key = (n, spec.tol)
    if key in _gamma_memo:
        return _gamma_memo[key]
    norm = math.pi ** (n + 0.5) * math.gamma(n)
    csum = np.cumsum(_raw_terms(n, _GAMMA_COUNTS[-1]))
    corrected = [(csum[J - 1] + 2.0 ** (-(n + 1)) / (J - 0.5 + n / 2.0)) / norm
                 for J in _GAMMA_COUNTS]
    value, err = richardson_inverse_power(corrected, _GAMMA_COUNTS, start_power=2)
    # rounding in 10^4-term running sums is not visible in the extrapolation gap
    err += 100.0 * np.finfo(float).eps * abs(value)
    ok = bool(err <= spec.tolerance(value))
    res = EvalResult(float(value), float(err), _GAMMA_COUNTS[-1], ok)
    if not ok:
        raise NonConvergence(f"gamma_{n} extrapolation error {err:.3e} above tolerance", res)
    _gamma_memo[key] = res
    return res


def ids_sub(lam: float, n: int, spec: SeriesSpec | None = None) -> IdsValue:
    """gamma_n lam^n; zero for lam <= 0."""
    n = _check_n(n)
    if lam <= 0:
        return IdsValue(lam, n, 0.0)
    g = gamma_coefficient(n, spec)
    return IdsValue(lam, n, g.value * lam ** n, Route.CLOSED_FORM, g.error_estimate * lam ** n)


def ids_sub_via_kernel(lam: float, n: int, spec: SeriesSpec | None = None) -> IdsValue:
    """Diagonal value of the spectral density kernel at rho = 0, theta = 0."""
    n = _check_n(n)
    if lam <= 0:
        return IdsValue(lam, n, 0.0, Route.KERNEL_DIAGONAL)
    r = density_sub_reduced(lam, n, 0.0, 0.0, spec)
    return IdsValue(lam, n, r.value, Route.KERNEL_DIAGONAL, r.error_estimate)
