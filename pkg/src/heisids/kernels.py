"""Spectral kernels of the magnetic Laplacian on C^n and the Heisenberg sub-Laplacian.

Points of C^n are :class:`ComplexPoint`, points of the Heisenberg group
H_n = C^n x R are :class:`HeisenbergPoint` with the group law

    (z, t) (w, s) = (z + w, t + s + 2 Im <z, w>),   <z, w> = sum z_j conj(w_j).

Every sub-Laplacian kernel depends on a pair of points only through the
left-invariant :class:`ReducedCoordinates` rho = |z - w|^2 and
theta = (t - s) + 2 Im <z, w>.  Each kernel therefore has a point-based
entry and a ``*_reduced`` entry taking (n, rho, theta) directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import special as sc

from .numerics import (
    DEFAULT_QUAD,
    EvalResult,
    NonConvergence,
    QuadratureSpec,
    SeriesSpec,
    abel_sum,
    accelerate_alternating,
    integrate_semi_infinite_oscillatory,
    integrate_vector,
    richardson_inverse_power,
)
from .specfun import DomainError, gamma_psi, laguerre, laguerre_sequence

__all__ = [
    "DimensionMismatch",
    "SpectrumPole",
    "ComplexPoint",
    "HeisenbergPoint",
    "KernelRequest",
    "ReducedCoordinates",
    "hermitian_inner",
    "group_multiply",
    "group_inverse",
    "reduced_coordinates",
    "projection_kernel_magnetic",
    "resolvent_kernel_magnetic",
    "resolvent_series_magnetic",
    "laguerre_abel_sum",
    "spectral_density_kernel_sub",
    "density_sub_reduced",
    "resolvent_kernel_sub",
    "resolvent_sub_reduced",
    "resolvent_sub_via_spectral",
    "resolvent_sub_spectral_reduced",
    "ABEL_LAGUERRE_SPEC",
    "DENSITY_SERIES_SPEC",
]


class DimensionMismatch(ValueError):
    pass


class SpectrumPole(ValueError):
    """The resolvent parameter sits on a Landau level."""


# --- points ------------------------------------------------------------------

@dataclass(frozen=True)
class ComplexPoint:
    coordinates: tuple

    def __post_init__(self):
        coords = tuple(complex(c) for c in np.atleast_1d(np.asarray(self.coordinates, dtype=complex)))
        if not coords:
            raise ValueError("a point of C^n needs n >= 1 coordinates")
        if not all(math.isfinite(c.real) and math.isfinite(c.imag) for c in coords):
            raise ValueError("coordinates must be finite")
        object.__setattr__(self, "coordinates", coords)

    @property
    def n(self) -> int:
        return len(self.coordinates)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coordinates, dtype=complex)

    @classmethod
    def origin(cls, n: int) -> "ComplexPoint":
        return cls((0j,) * n)

    def __add__(self, other: "ComplexPoint") -> "ComplexPoint":
        _same_dim(self, other)
        return ComplexPoint(tuple(a + b for a, b in zip(self.coordinates, other.coordinates)))

    def __neg__(self) -> "ComplexPoint":
        return ComplexPoint(tuple(-a for a in self.coordinates))


def _as_point(z) -> ComplexPoint:
    return z if isinstance(z, ComplexPoint) else ComplexPoint(z)


def _same_dim(z: ComplexPoint, w: ComplexPoint):
    if z.n != w.n:
        raise DimensionMismatch(f"dimensions differ: {z.n} vs {w.n}")


@dataclass(frozen=True)
class HeisenbergPoint:
    z: ComplexPoint
    tau: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "z", _as_point(self.z))
        tau = float(self.tau)
        if not math.isfinite(tau):
            raise ValueError("tau must be finite")
        object.__setattr__(self, "tau", tau)

    @property
    def n(self) -> int:
        return self.z.n

    @classmethod
    def identity(cls, n: int) -> "HeisenbergPoint":
        return cls(ComplexPoint.origin(n), 0.0)


@dataclass(frozen=True)
class KernelRequest:
    """One kernel evaluation: a spectral lam >= 0 or a resolvent zeta with Re zeta < 0."""

    left: HeisenbergPoint
    right: HeisenbergPoint
    lam: float | None = None
    zeta: complex | None = None

    def __post_init__(self):
        if (self.lam is None) == (self.zeta is None):
            raise ValueError("give exactly one of lam or zeta")
        if self.lam is not None and not self.lam >= 0:
            raise ValueError("spectral parameter must be >= 0")
        if self.zeta is not None and not complex(self.zeta).real < 0:
            raise ValueError("resolvent parameter needs Re zeta < 0")
        _same_dim(self.left.z, self.right.z)

    @property
    def n(self) -> int:
        return self.left.n


@dataclass(frozen=True)
class ReducedCoordinates:
    rho: float
    theta: float

    def __post_init__(self):
        if not self.rho >= 0:
            raise ValueError("rho must be >= 0")

    @property
    def mu(self) -> float:
        return 2.0 * self.rho


def hermitian_inner(z, w) -> complex:
    z, w = _as_point(z), _as_point(w)
    _same_dim(z, w)
    return complex(np.sum(z.array * np.conj(w.array)))


def group_multiply(p: HeisenbergPoint, q: HeisenbergPoint) -> HeisenbergPoint:
    _same_dim(p.z, q.z)
    return HeisenbergPoint(p.z + q.z, p.tau + q.tau + 2.0 * hermitian_inner(p.z, q.z).imag)


def group_inverse(p: HeisenbergPoint) -> HeisenbergPoint:
    return HeisenbergPoint(-p.z, -p.tau)


def reduced_coordinates(p: HeisenbergPoint, q: HeisenbergPoint) -> ReducedCoordinates:
    """(rho, theta) of the pair; theta is the central coordinate of q^-1 p."""
    _same_dim(p.z, q.z)
    d = p.z.array - q.z.array
    rho = float(np.sum(np.abs(d) ** 2))
    theta = (p.tau - q.tau) + 2.0 * hermitian_inner(p.z, q.z).imag
    return ReducedCoordinates(rho, theta)


# --- magnetic Laplacian ---------------------------------------------------------

def _phase_and_rho(z, w):
    z, w = _as_point(z), _as_point(w)
    _same_dim(z, w)
    rho = float(np.sum(np.abs(z.array - w.array) ** 2))
    return z.n, np.exp(hermitian_inner(z, w)), rho


def projection_kernel_magnetic(lam: float, z, w) -> complex:
    """Kernel of the spectral projection E_lam: pi^-n e^<z,w> L_floor(lam)^(n)(|z-w|^2)."""
    n, phase, rho = _phase_and_rho(z, w)
    if lam < 0:
        return 0j
    return complex(math.pi ** (-n) * phase * laguerre(int(math.floor(lam)), float(n), rho))


def _check_spectrum(zeta: complex):
    if zeta.imag == 0 and zeta.real >= 0 and zeta.real == math.floor(zeta.real):
        raise SpectrumPole(f"zeta = {zeta.real:g} is a Landau level")


def resolvent_kernel_magnetic(zeta, z, w, spec: QuadratureSpec | None = None) -> complex:
    """Resolvent kernel -pi^-n e^<z,w> Gamma(-zeta) Psi(-zeta, n; |z-w|^2), Re zeta < 0."""
    zeta = complex(zeta)
    _check_spectrum(zeta)
    if zeta.real >= 0:
        raise DomainError("integral route needs Re zeta < 0; use resolvent_series_magnetic")
    n, phase, rho = _phase_and_rho(z, w)
    if rho == 0:
        raise DomainError("resolvent kernel is singular on the diagonal z = w")
    a = -zeta if zeta.imag else -zeta.real
    return complex(-math.pi ** (-n) * phase * gamma_psi(a, n, rho, spec or DEFAULT_QUAD))


# Damped sums of Laguerre series converge slowly near r = 1, and the Abel
# function has an essential singularity there; tolerances are looser.
ABEL_LAGUERRE_SPEC = SeriesSpec(tol=1e-8, max_terms=2_000_000, extrapolation_depth=5)


class _LaguerreTerms:
    """term(j) = L_j^(alpha)(u) / (j + a), extending the recurrence on demand."""

    def __init__(self, a, alpha: float, u: float):
        self.a = a
        self.alpha = alpha
        self.u = u
        self.values = laguerre_sequence(1024, alpha, u)

    def __call__(self, j: int):
        if j >= self.values.size:
            self.values = laguerre_sequence(2 * j, self.alpha, self.u)
        return self.values[j] / (j + self.a)


def laguerre_abel_sum(a, c: int, u: float, spec: SeriesSpec | None = None) -> EvalResult:
    """Abel sum of sum_j L_j^(c-1)(u) / (j + a), which equals Gamma(a) Psi(a, c; u).

    For u > 0 the radii are placed at 1 - h0 / 2^i with h0 = min(1/10, u/20):
    the damped sums vary on the scale u in (1 - r), so radii far from 1
    extrapolate poorly.  At u = 0 the user's schedule is taken as given.
    """
    spec = spec or ABEL_LAGUERRE_SPEC
    if u < 0:
        raise DomainError("u must be >= 0")
    if u > 0:
        depth = spec.extrapolation_depth
        h0 = min(0.1, u / 20.0)
        spec = replace(spec, abel_radii=tuple(1.0 - h0 / 2 ** i for i in range(depth + 1)))
    # damped sums are truncated well below the target so that extrapolation
    # does not amplify truncation noise
    inner = replace(spec, tol=spec.tol * 1e-2)
    res = abel_sum(_LaguerreTerms(a, float(c - 1), float(u)), inner, strict=False)
    ok = bool(res.error_estimate <= spec.tolerance(res.value))
    res = EvalResult(res.value, res.error_estimate, res.terms_or_nodes_used, ok)
    if not ok:
        raise NonConvergence(f"Abel-summed Laguerre series error {res.error_estimate:.3e} "
                             "above tolerance", res)
    return res


def resolvent_series_magnetic(zeta, z, w, spec: SeriesSpec | None = None) -> complex:
    """Resolvent kernel as pi^-n e^<z,w> sum_j L_j^(n-1)(rho) / (zeta - j), Abel-summed."""
    zeta = complex(zeta)
    _check_spectrum(zeta)
    n, phase, rho = _phase_and_rho(z, w)
    a = -zeta if zeta.imag else -zeta.real
    res = laguerre_abel_sum(a, n, rho, spec)
    return complex(-math.pi ** (-n) * phase * res.value)


# --- sub-Laplacian: spectral density -------------------------------------------------

DENSITY_SERIES_SPEC = SeriesSpec(tol=1e-10)
_DENSITY_COUNTS = (1250, 2500, 5000, 10000)
_DENSITY_COUNTS_OFF_DIAGONAL = (625, 1250, 2500, 5000)


def _laguerre_varying(alpha: float, x: np.ndarray) -> np.ndarray:
    """L_j^(alpha)(x_j) for j = 0..len(x)-1, one recurrence over a shrinking front."""
    J = x.size
    out = np.empty(J)
    out[0] = 1.0
    if J == 1:
        return out
    prev = np.ones(J - 1)
    cur = 1.0 + alpha - x[1:]
    out[1] = cur[0]
    for m in range(1, J - 1):
        # entries for indices m+1.. ; drop the finished head each step
        xm = x[m + 1:]
        nxt = ((2 * m + 1 + alpha - xm) * cur[1:] - (m + alpha) * prev[1:]) / (m + 1)
        prev, cur = cur[1:], nxt
        out[m + 1] = cur[0]
    return out


def _density_terms(lam: float, n: int, rho: float, theta: float, count: int) -> np.ndarray:
    j = np.arange(count, dtype=float)
    d = 2.0 * j + n
    if rho == 0:
        lag = np.exp(sc.gammaln(j + n) - sc.gammaln(j + 1) - sc.gammaln(n))
        damp = 1.0
    else:
        lag = _laguerre_varying(float(n - 1), lam * rho / d)
        damp = np.exp(-rho * lam / (2.0 * d))
    return damp * lag * np.cos(theta * lam / (2.0 * d)) / d ** (n + 1)


def density_sub_reduced(lam: float, n: int, rho: float, theta: float,
                        spec: SeriesSpec | None = None) -> EvalResult:
    """Phi_lam at reduced coordinates (rho, theta).

        lam^n pi^(-n-1/2) sum_j exp(-rho lam / 2d_j) L_j^(n-1)(lam rho / d_j)
                          cos(theta lam / 2d_j) / d_j^(n+1),   d_j = 2j + n.

    Terms decay like j^-2, so partial sums at J, 2J, 4J, 8J are extrapolated
    in 1/J (Richardson).
    """
    spec = spec or DENSITY_SERIES_SPEC
    if lam < 0:
        raise DomainError("lam must be >= 0")
    if rho < 0:
        raise DomainError("rho must be >= 0")
    if lam == 0:
        return EvalResult(0.0, 0.0, 0, True)
    counts = _DENSITY_COUNTS if rho == 0 else _DENSITY_COUNTS_OFF_DIAGONAL
    terms = _density_terms(lam, n, rho, theta, counts[-1])
    csum = np.cumsum(terms)
    partial = [csum[c - 1] for c in counts]
    est, err = richardson_inverse_power(partial, counts)
    scale = lam ** n * math.pi ** (-n - 0.5)
    value, err = scale * est, scale * err
    ok = bool(err <= spec.tolerance(value))
    res = EvalResult(float(value), float(err), counts[-1], ok)
    if not ok:
        raise NonConvergence(f"density series extrapolation error {err:.3e} above tolerance", res)
    return res


def spectral_density_kernel_sub(lam: float, p: HeisenbergPoint, q: HeisenbergPoint,
                                spec: SeriesSpec | None = None) -> float:
    rc = reduced_coordinates(p, q)
    return density_sub_reduced(lam, p.n, rc.rho, rc.theta, spec).value


# --- sub-Laplacian: resolvent ---------------------------------------------------------

_INNER_QUAD = QuadratureSpec(rel_tol=1e-12, abs_tol=0.0, max_subdivisions=4000)


def resolvent_sub_reduced(zeta, n: int, rho: float, theta: float,
                          spec: QuadratureSpec | None = None) -> EvalResult:
    """Sub-Laplacian resolvent kernel at reduced coordinates, Re zeta < 0.

        -2^n pi^(-n-1/2) int_0^inf x^(n-1) Gamma(a) Psi(a, n; 2 x rho) e^(-x rho) cos(x theta) dx,
        a = n/2 - zeta / (2x).

    The x-integral runs through the half-period oscillatory engine.
    """
    spec = spec or DEFAULT_QUAD
    zeta = complex(zeta)
    if not zeta.real < 0:
        raise DomainError("the resolvent kernel needs Re zeta < 0")
    if not rho > 0:
        raise DomainError("the resolvent kernel is singular at rho = 0")
    zarg = zeta if zeta.imag else zeta.real

    def g(x):
        x = np.asarray(x, dtype=float)
        a = n / 2.0 - zarg / (2.0 * x)
        return x ** (n - 1) * gamma_psi(a, n, 2.0 * x * rho, _INNER_QUAD) * np.exp(-x * rho)

    res = integrate_semi_infinite_oscillatory(g, abs(theta), spec)
    pref = -(2.0 ** n) * math.pi ** (-n - 0.5)
    value = pref * res.value
    value = complex(value) if isinstance(value, complex) else float(value)
    return EvalResult(value, abs(pref) * res.error_estimate, res.terms_or_nodes_used, res.converged)


def resolvent_kernel_sub(zeta, p: HeisenbergPoint, q: HeisenbergPoint,
                         qspec: QuadratureSpec | None = None) -> complex:
    rc = reduced_coordinates(p, q)
    return complex(resolvent_sub_reduced(zeta, p.n, rc.rho, rc.theta, qspec).value)


def _scaled_laguerre_sequence(k_max: int, alpha: float, x: np.ndarray) -> np.ndarray:
    """e^(-x/2) L_j^(alpha)(x) for j = 0..k_max; shape (len(x), k_max + 1).

    Seeding the recurrence with the exponential keeps it free of overflow
    for x far beyond the oscillatory region.
    """
    out = np.empty((x.size, k_max + 1))
    out[:, 0] = np.exp(-x / 2.0)
    if k_max >= 1:
        out[:, 1] = (1.0 + alpha - x) * out[:, 0]
    for m in range(1, k_max):
        out[:, m + 1] = ((2 * m + 1 + alpha - x) * out[:, m] - (m + alpha) * out[:, m - 1]) / (m + 1)
    return out


def _spectral_terms(zeta, n: int, rho: float, theta: float, count: int,
                    spec: QuadratureSpec) -> np.ndarray:
    """T_j = int_0^inf s^n e^(-rho s/2) L_j^(n-1)(rho s) cos(theta s/2) / (zeta - d_j s) ds.

    This is the lam-integral of Phi_lam / (zeta - lam) restricted to the j-th
    term, after the substitution lam = d_j s.  All j share one subdivision.
    """
    d = 2.0 * np.arange(count) + n
    # e^(-x/2) L_j(x) is negligible beyond x ~ 4j + 2n + 80
    s_max = (4.0 * count + 2.0 * n + 160.0) / rho

    def f(s):
        lag = _scaled_laguerre_sequence(count - 1, float(n - 1), rho * s)  # (k, count)
        w = s ** n * np.cos(theta * s / 2.0)
        return w[:, None] * lag / (zeta - d[None, :] * s[:, None])

    val, err, nodes, ok = integrate_vector(f, 0.0, s_max, spec, initial_panels=max(8, count))
    if not ok:
        raise NonConvergence("term integrals of the spectral resolvent did not converge")
    return val


def resolvent_sub_spectral_reduced(zeta, n: int, rho: float, theta: float,
                                   sspec: SeriesSpec | None = None,
                                   qspec: QuadratureSpec | None = None) -> EvalResult:
    """int_0^inf Phi_lam / (zeta - lam) dlam, integrated term by term in j.

    Each term of the Phi_lam series is integrated in lam by adaptive
    quadrature in s = lam / d_j.  The j-series converges slowly (terms of
    size ~1/j with alternating and non-alternating parts): epsilon-algorithm
    estimates at J = 64, 128, 256 are combined by one Aitken step, and the
    size of that last correction is the error estimate.
    """
    sspec = sspec or SeriesSpec(tol=1e-3)
    qspec = qspec or QuadratureSpec(rel_tol=1e-9, abs_tol=1e-14, max_subdivisions=20000)
    zeta = complex(zeta)
    if not zeta.real < 0:
        raise DomainError("needs Re zeta < 0")
    if not rho > 0:
        raise DomainError("rho = 0: the lam-integrand decays only polynomially")
    zarg = zeta if zeta.imag else zeta.real
    counts = (64, 128, 256)
    t = _spectral_terms(zarg, n, rho, theta, counts[-1], qspec)
    partial = np.cumsum(t) * math.pi ** (-n - 0.5)
    est = [accelerate_alternating(partial[c - 40:c]).value for c in counts]
    d1, d2 = est[1] - est[0], est[2] - est[1]
    if d2 == 0 or d1 == d2:
        value, err = est[2], abs(d2)
    else:
        q = d2 / d1
        value = est[2] + d2 * q / (1.0 - q) if abs(q) < 1 else est[2]
        err = abs(value - est[2]) if abs(q) < 1 else abs(d2)
    value = complex(value) if isinstance(value, complex) and value.imag != 0 else float(np.real(value))
    ok = bool(err <= sspec.tolerance(value))
    res = EvalResult(value, float(err), counts[-1], ok)
    if not ok:
        raise NonConvergence(f"spectral resolvent series unsettled (gap {err:.3e})", res)
    return res


def resolvent_sub_via_spectral(zeta, p: HeisenbergPoint, q: HeisenbergPoint,
                               sspec: SeriesSpec | None = None,
                               qspec: QuadratureSpec | None = None) -> complex:
    rc = reduced_coordinates(p, q)
    return complex(resolvent_sub_spectral_reduced(zeta, p.n, rc.rho, rc.theta, sspec, qspec).value)
