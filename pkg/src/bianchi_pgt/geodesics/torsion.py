"""Torsion in centralizers of loxodromic elements, solved exactly.

Everything commuting with a loxodromic M fixes its two fixed points, so it
has the form E = x I + y M.  With det E = 1 and tr E = tau,

    y^2 = (4 - tau^2) / (4 - t^2),      t = tr M,

and E has finite order only for tau in {0, +-1, +-sqrt 2, +-sqrt 3}.  The
last two never lie in O_K for the fields here, so the torsion subgroup is
cyclic of order 1, 2 or 3 and the search below is a complete decision.
"""

from __future__ import annotations

from ..algebra import GroupElement, QuadInt


def _candidate(M: GroupElement, tau: int) -> GroupElement | None:
    t = M.trace
    f = t.field
    d4 = 4 - t * t  # nonzero for loxodromic t
    r = ((4 - tau * tau) * d4).sqrt()
    if r is None:
        return None
    a, b, c, d = M.entries()
    # E = (tau*d4 I + r (2M - t I)) / (2 d4)
    num = (tau * d4 + r * (a - d), 2 * r * b, 2 * r * c, tau * d4 - r * (a - d))
    den = 2 * d4
    if not all(den.divides(x) for x in num):
        return None
    e = [x.exact_div(den) for x in num]
    return GroupElement(e[0], e[1], e[2], e[3])


def torsion_generator(M: GroupElement) -> tuple[int, GroupElement | None]:
    """(m, E): E generates the torsion of the centralizer of M and has order m."""
    for tau, m in ((1, 3), (0, 2)):
        E = _candidate(M, tau)
        if E is not None:
            return m, E
    return 1, None


def torsion_m(M: GroupElement) -> int:
    return torsion_generator(M)[0]


def special_traces(t: QuadInt) -> bool:
    """True when some class of trace t can have nontrivial torsion."""
    d4 = 4 - t * t
    return (4 * d4).sqrt() is not None or (3 * d4).sqrt() is not None
