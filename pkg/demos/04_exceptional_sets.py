"""Exceptional sets for the second exponent on a synthetic congruence spectrum.

The block sum over Y < t <= T is compared with the threshold
x^(26/9) (log x)^(4/9) (log log x)^(4/9 + 2 eps).  At the threshold itself the
sets are empty on every block we can reach; scaling it down shows how the
logarithmic measure decays with n.
"""

from bianchi_pgt.gallagher import envelope, exceptional_measure
from bianchi_pgt.spectrum import WeylModel, synth_spectrum
from bianchi_pgt.unsmooth import ParamPolicy

# covolume of PSL(2, Z[i])
spec = synth_spectrum(WeylModel("congruence_T2", 0.30532186472, 0.1), 200.0, seed=0)

for scale in (1.0, 1e-3):
    policy = ParamPolicy("theorem2", threshold_scale=scale)
    rows = [exceptional_measure(spec, n, policy, 1024, lhs_points=1025) for n in range(5, 16)]
    print(f"\nthreshold x {scale:g}")
    print("  n      Y         mu_log   lhs/rhs")
    for r in rows:
        print(f"{r.n:3d} {r.Y:9.3f} {r.mu_log:10.5f} {r.ratio:8.4f}")
    print(f"envelope max mu_log n (log n)^(1+eps) = {envelope(rows):.4f}")
