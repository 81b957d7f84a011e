"""Integrated Chebyshev functions and the finite-difference sandwich.

psi_3 is smooth enough for an explicit formula; third differences of it bound
the raw count psi_0 from both sides.  Smaller steps give tighter brackets.
"""

import numpy as np

from bianchi_pgt.chebyshev import ChebyshevSeries
from bianchi_pgt.geodesics import enumerate_classes
from bianchi_pgt.unsmooth import ParamPolicy, policy_params, sandwich_psi0

ledger = enumerate_classes(1, 1000.0)
S = ChebyshevSeries.from_ledger(ledger)
print(f"{len(S)} weights up to N = 1000")

print("\n     x      psi0/(x^2/2)   psi3/(x^5/120)")
for x in (50.0, 200.0, 1000.0):
    print(f"{x:6.0f}   {S.psi(x, 0) / (x * x / 2):12.5f}   {S.psi(x, 3) / (x ** 5 / 120):12.5f}")

policy = ParamPolicy("theorem1")
print("\n     x      h        lower      psi0      upper")
for x in np.geomspace(100, 500, 5):
    h, T, _ = policy_params(policy, x)
    for scale in (1.0, 0.25):
        lo, hi = sandwich_psi0(S, x, scale * h, 3)
        print(f"{x:6.1f} {scale * h:7.2f} {lo:10.1f} {S.psi(x, 0):9.1f} {hi:10.1f}")
