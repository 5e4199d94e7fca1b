"""gamma_n for the Heisenberg sub-Laplacian, two ways, with the tail bound."""

import math

from heisids import gamma_coefficient, ids_sub, ids_sub_via_kernel
from heisids.ids import gamma_partial_sum, gamma_tail_bound

g1 = gamma_coefficient(1)
print("gamma_1 =", g1.value, " sqrt(pi)/8 =", math.sqrt(math.pi) / 8, " est. error", g1.error_estimate)

for n in (1, 2, 3, 4):
    g = gamma_coefficient(n).value
    a, b = ids_sub(1.5, n).value, ids_sub_via_kernel(1.5, n).value
    print(f"n={n}  gamma={g:.15g}  N(1.5) closed={a:.15g} diagonal={b:.15g}")

# how much of gamma_2 is left after J terms, against the a-priori bound
g2 = gamma_coefficient(2).value
for J in (10, 100, 1000):
    print(f"J={J:5d} remainder {g2 - gamma_partial_sum(2, J):.3e}  bound {gamma_tail_bound(2, J):.3e}")
