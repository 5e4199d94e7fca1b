"""Landau staircase on C^n: closed-form IDS, its jumps, and the projection
kernel on the diagonal."""

import math

import numpy as np

from heisids import ids_magnetic, dos_magnetic_jumps, projection_kernel_magnetic

for n in (1, 2, 3):
    steps = [ids_magnetic(lam, n).value for lam in np.arange(0.0, 5.0, 1.0)]
    print(f"n={n}  N(m) for m=0..4:", np.round(steps, 6))

# jumps are the per-level densities; they add back up to N
jumps = dos_magnetic_jumps(4.5, 2)
print("n=2 level weights:", [round(j.weight, 6) for j in jumps])
print("sum vs N(4.5):", math.fsum(j.weight for j in jumps), ids_magnetic(4.5, 2).value)

# the projection kernel on the diagonal is N(lam) up to the Gaussian weight
z = [0.4 - 0.2j, 0.1j]
k = projection_kernel_magnetic(2.3, z, z)
print("diagonal kernel * e^-|z|^2:", k.real * math.exp(-sum(abs(c) ** 2 for c in z)))
