"""Reduced-size invariant checks behind ``heisids selftest``.

Every check is deterministic (no random draws), so repeated runs give
bit-identical reports.
"""

from __future__ import annotations

import math

import numpy as np

from . import green, ids, kernels, specfun, weylsim
from .numerics import SeriesSpec


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def _checks(tol):
    spec = SeriesSpec(tol=tol) if tol is not None else None

    def ids_level():
        return _rel(ids.ids_magnetic(0.5, 1).value, 1.0 / math.pi), 1e-15

    def gamma_1():
        return _rel(ids.gamma_coefficient(1, spec).value, math.sqrt(math.pi) / 8.0), 1e-8

    def ids_two_routes():
        a = ids.ids_sub(1.3, 2, spec).value
        b = ids.ids_sub_via_kernel(1.3, 2, spec).value
        return _rel(b, a), 1e-8

    def psi_two_routes():
        v = specfun.gamma_psi(1.5, 3, np.array([0.3, 2.0, 15.0]))
        w = specfun.gamma_psi_bessel(3, np.array([0.3, 2.0, 15.0]))
        return float(np.max(np.abs(v - w) / np.abs(w))), 1e-10

    def laguerre_duplication():
        # Legendre duplication inside the Folland prefactor
        n = 3
        lhs = math.gamma(n) * math.gamma(n / 2) / math.gamma((n + 1) / 2)
        rhs = 2 ** (n - 1) * math.gamma(n / 2) ** 2 / math.sqrt(math.pi)
        return _rel(lhs, rhs), 1e-14

    def abel_series():
        r = kernels.laguerre_abel_sum(1.3, 2, 1.7, spec)
        return _rel(r.value, complex(specfun.gamma_psi(1.3, 2, 1.7))), 1e-6

    def magnetic_two_routes():
        z, w = kernels.ComplexPoint([0.3 + 0.2j]), kernels.ComplexPoint([-0.4j])
        a = kernels.resolvent_kernel_magnetic(-0.7, z, w)
        b = kernels.resolvent_series_magnetic(-0.7, z, w)
        return _rel(b, a), 1e-6

    def green_two_routes():
        a = green.green_integral_reduced(2, 2.0, 1.0).value
        return _rel(a, green.green_closed_reduced(2, 1.0, 1.0)), 1e-6

    def chain():
        return green.verify_chain(2, 2.0, 1.0).max_residual, 1e-5

    def inertia_vs_dense():
        H = weylsim.discretize_magnetic_hamiltonian(weylsim.GridSpec(2.0, 10))
        M = H.to_dense()
        lam = 0.37
        a = weylsim.count_eigenvalues_below(H, lam)
        b = int(np.count_nonzero(np.linalg.eigvalsh(M) < lam))
        return float(abs(a - b)), 0.0

    def hermitian():
        M = weylsim.discretize_magnetic_hamiltonian(weylsim.GridSpec(2.0, 10)).to_dense()
        return float(np.max(np.abs(M - M.conj().T))), 0.0

    return [
        ("ids_magnetic_level_density", ids_level),
        ("gamma_1_sqrtpi_over_8", gamma_1),
        ("ids_sub_two_routes", ids_two_routes),
        ("gamma_psi_integral_vs_bessel", psi_two_routes),
        ("folland_prefactor_duplication", laguerre_duplication),
        ("abel_laguerre_vs_gamma_psi", abel_series),
        ("magnetic_resolvent_two_routes", magnetic_two_routes),
        ("green_integral_vs_closed", green_two_routes),
        ("zeta_zero_chain", chain),
        ("inertia_count_vs_dense", inertia_vs_dense),
        ("hamiltonian_hermitian", hermitian),
    ]


def run_selftest(tol: float | None = None) -> list[dict]:
    """Run every check; a NonConvergence propagates to the caller."""
    rows = []
    for name, fn in _checks(tol):
        residual, bound = fn()
        residual = float(residual)
        rows.append({"check": name, "residual": residual, "bound": bound,
                     "passed": bool(residual <= bound)})
    return rows
