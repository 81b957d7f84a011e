"""The truncated explicit formula on a synthetic spectrum.

With only the trivial zero s = 2 the formula collapses to x^5/120.  A synthetic
spectrum that obeys Weyl's law adds oscillating critical-line terms whose
size shrinks like x^4 / T as the cutoff T grows.
"""

import math

from bianchi_pgt.explicit import eval_psi3
from bianchi_pgt.spectrum import SpectrumSet, WeylModel, synth_spectrum

x = 100.0
bare = eval_psi3(SpectrumSet(), x=x, T=10.0)
print(f"bare: {bare.value:.6e}  vs x^5/120 = {x ** 5 / 120:.6e}")

spec = synth_spectrum(WeylModel(volume=6 * math.pi ** 2), 80.0)
print(f"\nsynthetic spectrum, {len(spec)} parameters up to t = 80")
prev = None
for T in (10.0, 20.0, 40.0, 80.0):
    e = eval_psi3(spec, x=x, T=T)
    step = "" if prev is None else f"   change {e.value - prev:+.4e}"
    print(f"T = {T:4.0f}: critical terms {e.parts.critical_terms:+.4e}, "
          f"bound x^4/T = {e.parts.truncation_bound:.3e}{step}")
    prev = e.value
