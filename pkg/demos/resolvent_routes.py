"""Resolvent kernels by independent routes.

Magnetic Laplacian: Tricomi integral vs Abel-summed Laguerre series.
Sub-Laplacian: direct x-integral vs integrating the spectral kernel in lam;
the latter lands on (1/2) R(zeta/2).
"""

from heisids.kernels import (
    laguerre_abel_sum,
    resolvent_kernel_magnetic,
    resolvent_series_magnetic,
    resolvent_sub_reduced,
    resolvent_sub_spectral_reduced,
)
from heisids.specfun import gamma_psi

for a, c, u in [(1.3, 2, 1.7), (0.6, 1, 0.4), (2.2, 3, 4.0)]:
    r = laguerre_abel_sum(a, c, u)
    print(f"a={a} c={c} u={u}:  Abel {r.value:.12f}  integral {gamma_psi(a, c, u):.12f}")

z, w = [0.5 + 0.2j], [-0.3j]
for zeta in (-0.4, -1.5, -0.5 + 0.8j):
    print("zeta", zeta, resolvent_kernel_magnetic(zeta, z, w), resolvent_series_magnetic(zeta, z, w))

for zeta, n, rho, theta in [(-1.0, 1, 1.0, 0.0), (-2.0, 2, 0.5, 0.3)]:
    direct = resolvent_sub_reduced(zeta, n, rho, theta).value
    spec = resolvent_sub_spectral_reduced(zeta, n, rho, theta).value
    half = 0.5 * resolvent_sub_reduced(zeta / 2, n, rho, theta).value
    print(f"zeta={zeta} n={n}: direct {direct:.6f}  spectral {spec:.6f}  (1/2)R(zeta/2) {half:.6f}")
