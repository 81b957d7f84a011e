"""Closed geodesics of the Picard orbifold, counted by length.

Enumerates every loxodromic conjugacy class of PSL(2, Z[i]) with norm up to
100, looks at a few special classes and compares the prime count with li(x^2).
"""

import numpy as np

from bianchi_pgt.algebra import GroupElement, mat_pow
from bianchi_pgt.chebyshev import log_integral
from bianchi_pgt.geodesics import enumerate_classes, pi_gamma_array, torsion_generator

ledger = enumerate_classes(1, 100.0)
print(f"{len(ledger)} classes with N <= 100, {int(ledger.primitive.sum())} primitive")
print(ledger.saturation_report)

# [[2, 1], [1, 1]] is primitive in PSL(2, Z) but a square over Z[i]
M = GroupElement.of(1, [[2, 1], [1, 1]])
Q = GroupElement.of(1, [[(0, 1), (0, 1)], [(0, 1), 0]])
i = ledger.index_of(M)
print(f"\n[[2,1],[1,1]]: N = {ledger.norm[i]:.6f}, primitive = {bool(ledger.primitive[i])}, "
      f"power = {ledger.power[i]}; Q^2 == M: {mat_pow(Q, 2) == M}")

print("\nclasses whose centralizer has torsion:")
for j in np.flatnonzero(ledger.torsion_m > 1):
    m, E = torsion_generator(ledger.element(j))
    print(f"  N = {ledger.norm[j]:.4f}  m = {m}  rotation {E}")

xs = np.array([10.0, 25.0, 50.0, 100.0])
pi = pi_gamma_array(ledger, xs)
for x, p, l in zip(xs, pi, log_integral(xs ** 2)):
    print(f"pi({x:5.0f}) = {p:5d}   li(x^2) = {l:9.2f}   ratio {p / l:.3f}")
