"""Special functions: Laguerre, 1F1, Tricomi Psi, Ferrers-Legendre, log-Gamma.

Tricomi's Psi (the confluent hypergeometric U) is evaluated through its
Laplace-type integral

    Gamma(a) Psi(a, c; xi) = int_0^inf exp(-a t) exp(-xi / (e^t - 1)) (1 - e^-t)^-c dt,

valid for Re a > 0 and xi > 0, which covers every integer second parameter.
The integral is taken in the variable s = log t, where the integrand is
smooth and doubly-exponentially small at both ends.  An independent route
(the logarithmic series for integer c, switched to the asymptotic series
for large xi) is provided by :func:`tricomi_psi_series` and serves as the
oracle in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sc

from .numerics import (
    DEFAULT_QUAD,
    EvalResult,
    NonConvergence,
    QuadratureSpec,
    integrate_vector,
)

__all__ = [
    "SpecialFunctionError",
    "InvalidOrder",
    "PoleAtC",
    "PoleError",
    "DomainError",
    "LaguerreParams",
    "TricomiParams",
    "laguerre",
    "laguerre_sequence",
    "laguerre_at_zero",
    "hyp1f1",
    "hyp2f1_series",
    "gamma_psi",
    "tricomi_psi",
    "tricomi_psi_series",
    "gamma_psi_bessel",
    "log_gamma",
    "legendre_p",
]


class SpecialFunctionError(ValueError):
    pass


class InvalidOrder(SpecialFunctionError):
    pass


class PoleAtC(SpecialFunctionError):
    pass


class PoleError(SpecialFunctionError):
    pass


class DomainError(SpecialFunctionError):
    pass


@dataclass(frozen=True)
class LaguerreParams:
    k: int
    alpha: float
    x: float

    def __post_init__(self):
        _check_laguerre(self.k, self.alpha)


@dataclass(frozen=True)
class TricomiParams:
    a: complex
    c: int
    xi: float

    def __post_init__(self):
        if self.xi <= 0:
            raise DomainError("xi must be positive")
        if int(self.c) != self.c or self.c < 1:
            raise DomainError("c must be a positive integer")


def _check_laguerre(k, alpha):
    if int(k) != k or k < 0:
        raise InvalidOrder(f"degree must be a non-negative integer, got {k}")
    if not alpha > -1:
        raise InvalidOrder(f"order must exceed -1, got {alpha}")


def _is_nonpositive_int(z) -> bool:
    z = complex(z)
    return z.imag == 0 and z.real <= 0 and z.real == math.floor(z.real)


# --- Laguerre ---------------------------------------------------------------

def laguerre(k: int, alpha: float, x):
    """L_k^(alpha)(x) by the upward three-term recurrence.

    ``x`` may be an array; the recurrence then runs elementwise.
    """
    _check_laguerre(k, alpha)
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if k == 0:
        return prev if x.ndim else float(prev)
    cur = 1.0 + alpha - x
    for m in range(1, k):
        prev, cur = cur, ((2 * m + 1 + alpha - x) * cur - (m + alpha) * prev) / (m + 1)
    return cur if x.ndim else float(cur)


def laguerre_sequence(k_max: int, alpha: float, x) -> np.ndarray:
    """L_0 ... L_{k_max} at a shared (alpha, x); shape (k_max + 1,) + shape(x)."""
    _check_laguerre(k_max, alpha)
    x = np.asarray(x, dtype=float)
    out = np.empty((k_max + 1,) + x.shape)
    out[0] = 1.0
    if k_max >= 1:
        out[1] = 1.0 + alpha - x
    for m in range(1, k_max):
        out[m + 1] = ((2 * m + 1 + alpha - x) * out[m] - (m + alpha) * out[m - 1]) / (m + 1)
    return out


def laguerre_at_zero(j: int, alpha: float) -> float:
    """L_j^(alpha)(0) = Gamma(j + alpha + 1) / (j! Gamma(alpha + 1))."""
    _check_laguerre(j, alpha)
    if j <= 5000:
        value = 1.0
        for i in range(1, j + 1):
            value *= (alpha + i) / i
        return value
    return math.exp(math.lgamma(j + alpha + 1) - math.lgamma(j + 1) - math.lgamma(alpha + 1))


def _laguerre_at_zero_array(j: np.ndarray, alpha: float) -> np.ndarray:
    return np.exp(sc.gammaln(j + alpha + 1) - sc.gammaln(j + 1) - sc.gammaln(alpha + 1))


# --- Gamma -------------------------------------------------------------------

def log_gamma(x):
    """Principal branch of log Gamma.

    Real positive input gives a real result; complex input must avoid the
    non-positive real axis.  Poles raise :class:`PoleError`.
    """
    if np.iscomplexobj(x):
        z = complex(x)
        if z.imag == 0 and z.real <= 0:
            if z.real == math.floor(z.real):
                raise PoleError(f"Gamma has a pole at {z.real}")
            raise DomainError("log Gamma branch cut: non-positive real axis")
        return complex(sc.loggamma(z))
    xr = float(x)
    if xr <= 0:
        if xr == math.floor(xr):
            raise PoleError(f"Gamma has a pole at {xr}")
        raise DomainError("log Gamma branch cut: non-positive real axis")
    return float(sc.gammaln(xr))


# --- confluent hypergeometric ------------------------------------------------

def hyp1f1(a, c, xi, tol: float = 1e-16, max_terms: int = 100_000):
    """Kummer's 1F1(a; c; xi) from its Taylor series.

    Summation stops once two consecutive terms fall below tol |sum|.
    """
    if _is_nonpositive_int(c):
        raise PoleAtC(f"c = {c} is a non-positive integer")
    complex_in = any(np.iscomplexobj(v) for v in (a, c, xi))
    a, c, xi = complex(a), complex(c), complex(xi)
    term = 1.0 + 0j
    total = term
    small = 0
    for k in range(max_terms):
        term *= (a + k) / (c + k) * xi / (k + 1)
        total += term
        if term == 0:
            break
        if abs(term) < tol * abs(total):
            small += 1
            if small >= 2:
                break
        else:
            small = 0
    else:
        raise NonConvergence("1F1 series did not converge")
    return total if complex_in else total.real


def _hyp2f1_taylor(a, b, c, z, tol, max_terms):
    """Taylor sum of 2F1 and the sum of |terms| (a cancellation measure)."""
    term = 1.0
    total = 1.0
    mass = 1.0
    small = 0
    # the tail after a term t is at most about |t| / (1 - |z|)
    cut = tol * (1.0 - abs(z))
    for k in range(max_terms):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        total += term
        mass += abs(term)
        if term == 0:
            break
        if abs(term) < cut * abs(total):
            small += 1
            if small >= 2:
                break
        else:
            small = 0
    else:
        raise NonConvergence("2F1 series did not converge")
    return total, mass


def hyp2f1_series(a, b, c, z, tol: float = 1e-16, max_terms: int = 200_000) -> float:
    """Gauss 2F1(a, b; c; z) by its Taylor series, for |z| < 1 only.

    When the plain series cancels badly, Euler's transformation
    2F1(a, b; c; z) = (1 - z)^(c-a-b) 2F1(c-a, c-b; c; z) is tried and the
    better-conditioned of the two sums is kept.
    """
    if _is_nonpositive_int(c):
        raise PoleError(f"c = {c} is a non-positive integer")
    if not abs(z) < 1:
        raise DomainError("hyp2f1_series needs |z| < 1")
    total, mass = _hyp2f1_taylor(a, b, c, z, tol, max_terms)
    if mass > 10.0 * abs(total):
        alt, alt_mass = _hyp2f1_taylor(c - a, c - b, c, z, tol, max_terms)
        if alt_mass * abs(total) < mass * abs(alt):
            return (1.0 - z) ** (c - a - b) * alt
    return total


# --- Tricomi Psi: integral route ----------------------------------------------

_CUT = 80.0


def _a7_log_integrand(s, a, c, xi):
    t = np.exp(s)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        em1 = np.expm1(t)
        q = np.where(np.isinf(em1), 0.0, xi / em1)
        log_f = s - a * t - q - c * np.log(-np.expm1(-t))
    return log_f


def _gamma_psi_arrays(a, c: int, xi, spec: QuadratureSpec):
    a = np.atleast_1d(np.asarray(a))
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    a, xi = np.broadcast_arrays(a, xi)
    a = a.ravel()
    xi = xi.ravel()
    re_a = np.real(a)
    if np.any(re_a <= 0):
        raise DomainError("integral representation needs Re a > 0")
    if np.any(xi <= 0):
        raise DomainError("xi must be positive")
    cut = _CUT + 4.0 * c
    t_lo = np.log1p(xi / cut)
    t_hi = np.log1p(xi / re_a) + (cut + c * np.log1p(1.0 / re_a)) / re_a
    s_lo = float(np.min(np.log(t_lo)))
    s_hi = float(np.max(np.log(t_hi)))
    complex_a = np.iscomplexobj(a)

    def f(s):
        lf = _a7_log_integrand(s[:, None], a[None, :], c, xi[None, :])
        return np.exp(lf)

    val, err, nodes, ok = integrate_vector(f, s_lo, s_hi, spec, initial_panels=8)
    if not ok:
        raise NonConvergence(f"Psi integral did not converge (max estimate {np.max(err):.3e})",
                             EvalResult(complex(val[0]) if complex_a else float(val[0]),
                                        float(np.max(err)), nodes, False))
    return val, err, nodes


def gamma_psi(a, c: int, xi, spec: QuadratureSpec | None = None):
    """Gamma(a) Psi(a, c; xi) from the integral representation.

    Accepts arrays for ``a`` and ``xi`` (broadcast together); returns a float,
    complex or array accordingly.  Requires Re a > 0 and xi > 0.
    """
    spec = spec or DEFAULT_QUAD
    shape = np.broadcast(np.asarray(a), np.asarray(xi)).shape
    val, _, _ = _gamma_psi_arrays(a, int(c), xi, spec)
    if shape == ():
        v = val[0]
        return complex(v) if np.iscomplexobj(v) else float(v)
    return val.reshape(shape)


def tricomi_psi(a, c: int, xi, spec: QuadratureSpec | None = None):
    """Tricomi's Psi(a, c; xi) for Re a > 0, integer c >= 1, xi > 0."""
    if int(c) != c or c < 1:
        raise DomainError("c must be a positive integer")
    spec = spec or DEFAULT_QUAD
    gp = gamma_psi(a, int(c), xi, spec)
    lg = sc.loggamma(a) if np.iscomplexobj(a) else sc.gammaln(a)
    out = gp * np.exp(-lg)
    if np.ndim(out) == 0:
        return complex(out) if np.iscomplexobj(out) else float(out)
    return out


# --- Tricomi Psi: series route (oracle) ---------------------------------------

def _poch(x, n: int):
    out = 1.0 + 0j
    for i in range(n):
        out *= x + i
    return out


def _psi_asymptotic(a: complex, c: int, z: float):
    """z^-a sum_k (a)_k (a-c+1)_k / k! (-z)^-k, cut at the smallest term."""
    b = a - c + 1
    term = 1.0 + 0j
    total = term
    prev = abs(term)
    k = 0
    while True:
        nxt = term * (a + k) * (b + k) / ((k + 1) * (-z))
        k += 1
        if nxt == 0:
            return total * z ** (-a), 0.0
        if abs(nxt) >= prev or k > 400:
            return total * z ** (-a), abs(term * z ** (-a))
        total += nxt
        term = nxt
        prev = abs(nxt)
        if abs(nxt) < 1e-17 * abs(total):
            return total * z ** (-a), abs(nxt * z ** (-a))


def _psi_log_series(a: complex, c: int, z: float, max_terms: int = 5000):
    """Logarithmic series of Psi(a, m+1; z), m = c - 1 (limit form at integer c)."""
    m = c - 1
    lnz = math.log(z)
    pref = (-1) ** (m + 1) * complex(sc.rgamma(a - m)) / math.factorial(m)
    total = 0j
    abs_total = 0.0
    if pref != 0:
        coef = 1.0 + 0j  # (a)_k z^k / ((m+1)_k k!)
        small = 0
        for k in range(max_terms):
            bracket = lnz + complex(sc.psi(a + k)) - sc.psi(1 + k) - sc.psi(m + k + 1)
            term = coef * bracket
            total += term
            abs_total += abs(term)
            if abs(term) < 1e-17 * max(abs(total), 1e-300) and k > 2:
                small += 1
                if small >= 2:
                    break
            else:
                small = 0
            coef *= (a + k) * z / ((m + 1 + k) * (k + 1))
        else:
            raise NonConvergence("logarithmic Psi series did not converge")
        total *= pref
        abs_total *= abs(pref)
    finite = 0j
    if m >= 1:
        rg = complex(sc.rgamma(a))
        for k in range(1, m + 1):
            finite += math.factorial(k - 1) * _poch(1 - a + k, m - k) / math.factorial(m - k) * z ** (-k)
        finite *= rg
    value = total + finite
    err = 8 * np.finfo(float).eps * (abs_total + abs(finite))
    return value, err


def tricomi_psi_series(a, c: int, xi: float, switch: float = 30.0) -> EvalResult:
    """Psi(a, c; xi) for integer c >= 1 without any quadrature.

    Small xi: the logarithmic (limit) series with digamma terms; large xi
    (beyond ``switch``) or terminating cases: the asymptotic series cut at its
    smallest term.  The error estimate is a rounding bound for the convergent
    series and the first omitted term for the asymptotic one.
    """
    if int(c) != c or c < 1:
        raise DomainError("c must be a positive integer")
    if xi <= 0:
        raise DomainError("xi must be positive")
    c = int(c)
    real_a = not np.iscomplexobj(a) or complex(a).imag == 0
    a = complex(a)
    if _is_nonpositive_int(a):
        raise PoleError("a must not be a non-positive integer")
    terminating = _is_nonpositive_int(a - c + 1)
    if terminating or xi > switch:
        value, err = _psi_asymptotic(a, c, float(xi))
    else:
        value, err = _psi_log_series(a, c, float(xi))
    if real_a:
        value = value.real
    return EvalResult(value, float(err), 0, True)


def gamma_psi_bessel(n: int, xi):
    """Gamma(n/2) Psi(n/2, n; xi) through the modified Bessel function.

    With a = c/2 the confluent function collapses to
    Psi(n/2, n; xi) = pi^(-1/2) e^(xi/2) xi^((1-n)/2) K_((n-1)/2)(xi/2);
    the exponentially scaled K keeps large xi finite.
    """
    if int(n) != n or n < 1:
        raise DomainError("n must be a positive integer")
    xi = np.asarray(xi, dtype=float)
    if np.any(xi <= 0):
        raise DomainError("xi must be positive")
    out = (math.gamma(n / 2.0) / math.sqrt(math.pi) * xi ** ((1.0 - n) / 2.0)
           * sc.kve((n - 1) / 2.0, xi / 2.0))
    return out if out.ndim else float(out)


# --- Legendre ----------------------------------------------------------------

def legendre_p(degree: float, order: float, x: float) -> float:
    """Ferrers function of the first kind P_degree^order(x) on -1 < x < 1.

    P = ((1 + x) / (1 - x))^(order/2) 2F1(-degree, degree + 1; 1 - order; (1 - x)/2)
        / Gamma(1 - order)
    """
    if not -1.0 < x < 1.0:
        raise DomainError("legendre_p needs |x| < 1")
    if _is_nonpositive_int(1.0 - order):
        raise PoleError(f"Gamma(1 - order) has a pole at order = {order}")
    f = hyp2f1_series(-degree, degree + 1.0, 1.0 - order, (1.0 - x) / 2.0)
    return float(sc.rgamma(1.0 - order)) * ((1.0 + x) / (1.0 - x)) ** (order / 2.0) * f
