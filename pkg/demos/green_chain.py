"""The zeta -> 0 limit of the sub-Laplacian resolvent, one stage at a time,
and the two candidate constants of the fundamental solution."""

from heisids import folland_constant, folland_constant_appendix, verify_chain

for n, mu, theta in [(1, 1.0, 0.5), (2, 2.0, 1.0), (3, 4.0, 2.0)]:
    rep = verify_chain(n, mu, theta)
    print(f"n={n} mu={mu} theta={theta}")
    for step, r in rep.residuals.items():
        print(f"   {step:10s} {r:.2e}")
    print(f"   final      {rep.final_residual:.2e}")

# the constant defined by the weighted integral vs the one the chain needs
for n in (1, 2, 3):
    q, a = folland_constant(n).value, folland_constant_appendix(n).value
    print(f"n={n}  integral {q:.12f}  chain {a:.12f}  ratio {q / a:.6f}")
