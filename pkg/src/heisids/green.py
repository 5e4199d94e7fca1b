"""Fundamental solution of the Heisenberg sub-Laplacian and the zeta = 0 chain.

The Green kernel obtained as minus the zeta -> 0 limit of the resolvent
kernel is

    R0 = 2^n pi^(-n-1/2) int_0^inf x^(n-1) [Gamma(n/2) Psi(n/2, n; mu x)] e^(-mu x/2) cos(theta x) dx
       = 2^(n-1) Gamma(n/2)^2 pi^(-n-1/2) (rho^2 + theta^2)^(-n/2),      mu = 2 rho.

:func:`verify_chain` re-derives the closed form step by step, evaluating
each intermediate expression independently and reporting the residual
between consecutive stages.

Folland's solution is c_n |(u, t)|^(-2n) with the homogeneous norm
(|u|^4 + t^2)^(1/4).  Two constants are available: the one defined by the
normalizing integral over H_n (``Route.INTEGRAL``), and the one for which
R0 = (sqrt(pi)/2) G (``Route.APPENDIX``), namely 2^n Gamma(n/2)^2 / pi^(n+1).
These differ; see the project notes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .kernels import (
    HeisenbergPoint,
    reduced_coordinates,
    resolvent_sub_reduced,
)
from .numerics import (
    DEFAULT_QUAD,
    EvalResult,
    NonConvergence,
    QuadratureSpec,
    integrate_adaptive,
    integrate_semi_infinite_oscillatory,
    integrate_vector,
)
from .specfun import DomainError, gamma_psi, gamma_psi_bessel, legendre_p

__all__ = [
    "OriginSingularity",
    "Route",
    "FollandConstant",
    "ChainReport",
    "homogeneous_norm",
    "folland_constant",
    "folland_constant_appendix",
    "folland_solution",
    "green_kernel_closed",
    "green_closed_reduced",
    "green_kernel_integral",
    "green_integral_reduced",
    "folland_integral_representation",
    "folland_repr_reduced",
    "verify_chain",
    "CHAIN_STEPS",
]


class OriginSingularity(ValueError):
    pass


class Route(str, Enum):
    INTEGRAL = "integral_3_9"
    APPENDIX = "appendix_consistency"


@dataclass(frozen=True)
class FollandConstant:
    n: int
    value: float
    route: Route
    error_estimate: float = 0.0

    def __post_init__(self):
        if not self.value > 0:
            raise ValueError("the Folland constant is positive")


def homogeneous_norm(p: HeisenbergPoint) -> float:
    u2 = float(np.sum(np.abs(p.z.array) ** 2))
    return (u2 * u2 + p.tau * p.tau) ** 0.25


# --- Folland constant --------------------------------------------------------------

def folland_constant(n: int, spec: QuadratureSpec | None = None) -> FollandConstant:
    """c_n = [n (n+1) int_{H_n} |u|^2 (|u|^4 + t^2 + 1)^(-(n+4)/2)]^-1.

    Radial symmetry in u reduces the integral to
    omega_{2n-1} int_0^inf r^(2n+1) int_R (r^4 + t^2 + 1)^(-(n+4)/2) dt dr with
    omega_{2n-1} = 2 pi^n / Gamma(n).  Both half-lines are mapped onto (0, 1)
    and integrated by nested adaptive quadrature (the inner t-integrals of
    all outer nodes share one subdivision).
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    n = int(n)
    spec = spec or QuadratureSpec(rel_tol=1e-11, abs_tol=1e-15)
    power = -(n + 4) / 2.0
    inner_spec = QuadratureSpec(spec.rel_tol, 0.0, spec.max_subdivisions, spec.max_halfperiods)

    def inner(r):
        base = r ** 4 + 1.0

        def f(s):
            t = s / (1.0 - s)
            return (base[None, :] + t[:, None] ** 2) ** power / (1.0 - s[:, None]) ** 2

        # inner values span many decades across the outer nodes: relative only
        val, err, _, ok = integrate_vector(f, 0.0, 1.0, inner_spec)
        if not ok:
            raise NonConvergence("inner t-integral of the Folland constant did not converge")
        return 2.0 * val

    def outer(u):
        r = u / (1.0 - u)
        return r ** (2 * n + 1) * inner(r) / (1.0 - u) ** 2

    res = integrate_adaptive(outer, 0.0, 1.0, spec)
    omega = 2.0 * math.pi ** n / math.gamma(n)
    integral = omega * res.value
    value = 1.0 / (n * (n + 1) * integral)
    return FollandConstant(n, value, Route.INTEGRAL, value * res.error_estimate / abs(res.value))


def folland_constant_appendix(n: int) -> FollandConstant:
    """The constant making R0 = (sqrt(pi)/2) G exact: 2^n Gamma(n/2)^2 / pi^(n+1)."""
    return FollandConstant(n, 2.0 ** n * math.gamma(n / 2.0) ** 2 / math.pi ** (n + 1), Route.APPENDIX)


def folland_solution(p: HeisenbergPoint, n: int, c: FollandConstant) -> float:
    if p.n != n or c.n != n:
        raise ValueError("dimension of point, constant and n must agree")
    norm = homogeneous_norm(p)
    if norm == 0:
        raise OriginSingularity("the fundamental solution is singular at the origin")
    return c.value * norm ** (-2 * n)


# --- Green kernel ----------------------------------------------------------------------

def green_closed_reduced(n: int, rho: float, theta: float) -> float:
    if rho == 0 and theta == 0:
        raise OriginSingularity("the Green kernel is singular on the diagonal")
    return (2.0 ** (n - 1) * math.gamma(n / 2.0) ** 2 * math.pi ** (-n - 0.5)
            * (rho * rho + theta * theta) ** (-n / 2.0))


def green_kernel_closed(p: HeisenbergPoint, q: HeisenbergPoint, n: int) -> float:
    rc = reduced_coordinates(p, q)
    return green_closed_reduced(n, rc.rho, rc.theta)


def green_integral_reduced(n: int, mu: float, theta: float, qspec: QuadratureSpec | None = None,
                           *, psi: str = "integral") -> EvalResult:
    """2^n pi^(-n-1/2) int_0^inf x^(n-1) Gamma(n/2) Psi(n/2, n; mu x) e^(-mu x/2) cos(theta x) dx.

    ``psi="integral"`` evaluates Gamma(a) Psi by its Laplace-type integral,
    ``psi="bessel"`` by its reduction to K_((n-1)/2).  For n = 1 the
    integrand has a logarithmic singularity at x = 0.
    """
    qspec = qspec or DEFAULT_QUAD
    if not mu > 0:
        raise DomainError("needs mu = 2 rho > 0")
    a = n / 2.0
    if psi == "integral":
        def gp(xi):
            return gamma_psi(a, n, xi)
    elif psi == "bessel":
        def gp(xi):
            return gamma_psi_bessel(n, xi)
    else:
        raise ValueError(f"unknown psi route {psi!r}")

    def g(x):
        x = np.asarray(x, dtype=float)
        return x ** (n - 1) * gp(mu * x) * np.exp(-mu * x / 2.0)

    res = integrate_semi_infinite_oscillatory(g, abs(theta), qspec, singular=(n == 1))
    pref = 2.0 ** n * math.pi ** (-n - 0.5)
    return EvalResult(pref * res.value, pref * res.error_estimate, res.terms_or_nodes_used, res.converged)


def green_kernel_integral(p: HeisenbergPoint, q: HeisenbergPoint, n: int,
                          qspec: QuadratureSpec | None = None) -> EvalResult:
    rc = reduced_coordinates(p, q)
    if rc.rho == 0:
        raise DomainError("green_kernel_integral needs rho > 0")
    return green_integral_reduced(n, 2.0 * rc.rho, rc.theta, qspec)


def folland_repr_reduced(n: int, z2: float, tau: float, qspec: QuadratureSpec | None = None) -> EvalResult:
    """pi^(-n-1) 2^(n+1) Gamma(n/2) int_0^inf x^(n-1) e^(-x z2) Psi(n/2, n; 2 x z2) cos(tau x) dx."""
    qspec = qspec or DEFAULT_QUAD
    if not z2 > 0:
        raise DomainError("needs |z| > 0")

    def g(x):
        x = np.asarray(x, dtype=float)
        return x ** (n - 1) * np.exp(-x * z2) * gamma_psi(n / 2.0, n, 2.0 * x * z2)

    res = integrate_semi_infinite_oscillatory(g, abs(tau), qspec, singular=(n == 1))
    pref = math.pi ** (-n - 1) * 2.0 ** (n + 1)
    return EvalResult(pref * res.value, pref * res.error_estimate, res.terms_or_nodes_used, res.converged)


def folland_integral_representation(p: HeisenbergPoint, n: int,
                                    qspec: QuadratureSpec | None = None) -> EvalResult:
    z2 = float(np.sum(np.abs(p.z.array) ** 2))
    return folland_repr_reduced(n, z2, p.tau, qspec)


# --- the chain ---------------------------------------------------------------------------

CHAIN_STEPS = ("A6", "A8(A7)", "A10(A9)", "A12", "A15", "A19(A17)", "A21(A20)", "A24(A25)")


@dataclass
class ChainReport:
    n: int
    mu: float
    theta: float
    residuals: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)
    final_residual: float = math.nan
    extras: dict = field(default_factory=dict)

    @property
    def max_residual(self) -> float:
        return max(list(self.residuals.values()) + [self.final_residual])

    @property
    def complete(self) -> bool:
        return all(s in self.residuals for s in CHAIN_STEPS) and not math.isnan(self.final_residual)

    def to_dict(self) -> dict:
        return {
            "n": self.n, "mu": self.mu, "theta": self.theta,
            "residuals": dict(self.residuals), "final_residual": self.final_residual,
            "values": dict(self.values), "extras": dict(self.extras),
        }


def _rel(a, b) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def _a9_closed(nu, alpha, theta):
    return math.gamma(nu) * (alpha ** 2 + theta ** 2) ** (-nu / 2.0) * math.cos(nu * math.atan(theta / alpha))


def verify_chain(n: int, mu: float, theta: float, qspec: QuadratureSpec | None = None,
                 zeta_limit: float = -1e-9) -> ChainReport:
    """Evaluate every stage of the zeta = 0 derivation and report residuals.

    Steps (relative residual between the named stage and the previous one):

    A6        minus the resolvent kernel at zeta = ``zeta_limit`` vs the zeta = 0 integral
    A8(A7)    x-integral with Gamma(a) Psi from its t-integral vs from Bessel K
    A10(A9)   x-integral done in closed form on a t-grid, then the t-integral
    A12       t -> rho = (2 theta/mu) tanh(t/2)
    A15       rho -> arctan, doubled angle kappa
    A19(A17)  the kappa-integral vs sqrt(pi/2) sin^nu Gamma P^-nu
    A21(A20)  the Legendre value vs its elementary form
    A24(A25)  assembled prefactors vs the Gamma(n)Gamma(n/2)/Gamma((n+1)/2) form,
              and that form vs 2^(n-1) Gamma(n/2)^2 (duplication)

    ``final_residual`` compares the closed form with the x-integral.
    """
    if not mu > 0:
        raise DomainError("mu must be positive")
    if not theta > 0:
        raise DomainError("the chain divides by theta; needs theta > 0")
    qspec = qspec or DEFAULT_QUAD
    rep = ChainReport(int(n), float(mu), float(theta))
    rho = mu / 2.0
    beta = (2.0 * theta / mu) ** 2
    eps = 2.0 * math.atan(2.0 * theta / mu)
    rep.extras["epsilon_two_ways"] = abs(math.acos((1.0 - beta) / (1.0 + beta)) - eps)
    odd = "right" if n % 2 == 1 else None
    gn, gh = math.gamma(n), math.gamma(n / 2.0)
    pi_pow = math.pi ** (n + 0.5)

    def step(name, fn):
        try:
            return fn()
        except (NonConvergence, DomainError) as exc:
            raise NonConvergence(f"chain step {name} failed: {exc}") from exc

    # A6 / A8
    v6 = step("A6", lambda: green_integral_reduced(n, mu, theta, qspec, psi="bessel").value)
    v_lim = step("A6", lambda: -resolvent_sub_reduced(zeta_limit, n, rho, theta, qspec).real)
    rep.residuals["A6"] = _rel(v_lim, v6)
    v8 = step("A8(A7)", lambda: green_integral_reduced(n, mu, theta, qspec, psi="integral").value)
    rep.residuals["A8(A7)"] = _rel(v8, v6)
    rep.values.update({"A2_limit": v_lim, "A6": v6, "A8": v8})

    # A10: inner x-integral in closed form; check the identity on a t-grid
    def alpha_of(t):
        return (mu / 2.0) / np.tanh(t / 2.0)

    def a9_check():
        worst = 0.0
        for t in np.geomspace(0.05, 20.0, 7):
            al = float(alpha_of(t))
            r = integrate_semi_infinite_oscillatory(
                lambda x, al=al: x ** (n - 1) * np.exp(-al * x), theta, qspec)
            worst = max(worst, _rel(r.value, _a9_closed(n, al, theta)))
        return worst

    def a10_integrand(t):
        t = np.asarray(t, dtype=float)
        al = alpha_of(t)
        return (np.exp(-n * t / 2.0) / (-np.expm1(-t)) ** n
                * (al * al + theta * theta) ** (-n / 2.0) * np.cos(n * np.arctan(theta / al)))

    a9 = step("A10(A9)", a9_check)
    v10 = step("A10(A9)", lambda: integrate_semi_infinite_oscillatory(a10_integrand, 0.0, qspec).value)
    v10 *= 2.0 ** n * gn / pi_pow
    rep.residuals["A10(A9)"] = max(a9, _rel(v10, v8))
    rep.values["A10"] = v10
    rep.extras["A9_grid_max_residual"] = a9

    # A12
    b = 2.0 * theta / mu
    pref12 = 2.0 ** n * gn / (mu ** (n - 1) * theta * pi_pow)

    def a12_integrand(r):
        inside = np.clip(1.0 - (r / b) ** 2, 0.0, None)
        return inside ** (n / 2.0 - 1) * (1.0 + r * r) ** (-n / 2.0) * np.cos(n * np.arctan(r))

    v12 = pref12 * step("A12", lambda: integrate_adaptive(a12_integrand, 0.0, b, qspec, singular=odd).value)
    rep.residuals["A12"] = _rel(v12, v10)
    rep.values["A12"] = v12

    # A15 and the left side of A19 (same integrand once cos(eps) is substituted)
    cos_eps = (1.0 - beta) / (1.0 + beta)

    def kappa_integrand(k):
        inside = np.clip(np.cos(k) - cos_eps, 0.0, None)
        return inside ** (n / 2.0 - 1) * np.cos(n * k / 2.0)

    kint = step("A15", lambda: integrate_adaptive(kappa_integrand, 0.0, eps, qspec, singular=odd).value)
    pref15 = 2.0 ** (n / 2.0) * gn / (mu ** (n - 1) * theta * pi_pow) * ((beta + 1.0) / beta) ** (n / 2.0 - 1)
    v15 = pref15 * kint
    rep.residuals["A15"] = _rel(v15, v12)
    rep.values["A15"] = v15

    # A19 right side through the Legendre function
    sigma = (n - 1) / 2.0
    leg = step("A19(A17)", lambda: legendre_p(sigma, -sigma, math.cos(eps)))
    rhs19 = math.sqrt(math.pi / 2.0) * math.sin(eps) ** sigma * gh * leg
    rep.residuals["A19(A17)"] = _rel(rhs19, kint)
    rep.values["A19_lhs"] = kint
    rep.values["A19_rhs"] = rhs19

    # A21: elementary form of the Legendre value
    v21 = 2.0 ** (-n / 2.0) * math.sqrt(math.pi) * gh / math.gamma((n + 1) / 2.0) * (1.0 - cos_eps ** 2) ** sigma
    rep.residuals["A21(A20)"] = _rel(v21, rhs19)
    rep.values["A21"] = v21

    # A22..A24
    assembled = pref15 * v21
    dist = (rho * rho + theta * theta) ** (-n / 2.0)
    v23 = gn * gh / (math.pi ** n * math.gamma((n + 1) / 2.0)) * dist
    v24 = green_closed_reduced(n, rho, theta)
    rep.residuals["A24(A25)"] = max(_rel(assembled, v23), _rel(v23, v24))
    rep.values.update({"assembled": assembled, "A23": v23, "A24": v24})

    # printed form of the assembled value; agrees with A23 only when beta = 1
    a22 = (2.0 ** (n - 1) / (mu ** (n - 1) * theta * math.pi ** n) * gn * gh / math.gamma((n + 1) / 2.0)
           * ((beta + 1.0) / beta) ** (-n / 2.0))
    rep.extras["A22_as_printed"] = _rel(a22, v23)

    rep.final_residual = _rel(v24, v8)
    return rep
