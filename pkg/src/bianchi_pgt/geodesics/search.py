"""Height-bounded enumeration, conjugacy keys and root extraction."""

from __future__ import annotations

import cmath
import math
import warnings
from collections import Counter, deque

import numpy as np

from ..algebra import (FieldId, GroupElement, MotionType, QuadInt, classify,
                       inverse_mod, large_root, mat_conjugate, mat_pow,
                       standard_generators, trace_norm)
from ..errors import BudgetExceeded, HeightExhausted, NotLoxodromic
from . import picard
from .torsion import torsion_generator


def ring_elements(field: FieldId, H: int):
    """All a + b*omega with |.|^2 <= H, in a fixed order."""
    w = field.omega
    bmax = int(math.sqrt(H) / w.imag) + 1
    out = []
    for b in range(-bmax, bmax + 1):
        amax = int(math.sqrt(H)) + 2 + abs(b)
        for a in range(-amax, amax + 1):
            q = QuadInt(a, b, field)
            if q.norm() <= H:
                out.append(q)
    return out


def canonical_trace_key(t: QuadInt) -> tuple[int, int]:
    """Trace up to sign, as the lexicographically positive representative."""
    return max(t.key(), (-t).key())


def height_elements(field: FieldId, X: float, H: int, budget: int | None = None) -> dict:
    """Canonical key -> element, over loxodromic elements of height <= H and norm <= X."""
    elems = ring_elements(field, H)
    tlim = math.sqrt(X) + 1.5
    found = {}
    visited = 0
    for c in elems:
        if not c:
            continue
        cc = complex(c)
        for a in elems:
            d0 = inverse_mod(a, c)
            if d0 is None:
                continue
            # d = d0 + k c must lie near -a (|a + d| <= tlim) and satisfy |d|^2 <= H
            centre = (-complex(a) - complex(d0)) / cc
            rad = (tlim + 0.0) / abs(cc)
            kr = int(rad / field.omega.imag) + 2
            k0 = field.from_complex(centre)
            for kb in range(-kr, kr + 1):
                for ka in range(-kr - 1 - abs(kb), kr + 2 + abs(kb)):
                    k = k0 + QuadInt(ka, kb, field)
                    if abs(complex(k) - centre) > rad + 1e-9:
                        continue
                    d = d0 + k * c
                    if d.norm() > H:
                        continue
                    t = a + d
                    tc = complex(t)
                    if t.is_real and abs(t.a) <= 2:
                        continue
                    if trace_norm(tc) > X:
                        continue
                    b = (a * d - 1).exact_div(c)
                    if b.norm() > H:
                        continue
                    visited += 1
                    if budget is not None and visited > budget:
                        raise BudgetExceeded("element budget exhausted", partial=found)
                    M = GroupElement(a, b, c, d)
                    found.setdefault(M.key(), M)
    return found


def _conjugators(field: FieldId) -> list[tuple[GroupElement, GroupElement]]:
    gens = standard_generators(field)
    out = []
    for g in gens:
        out.append((g, g.inverse()))
        out.append((g.inverse(), g))
    return out


def _conj_fast(M: GroupElement, g: GroupElement, gi: GroupElement) -> GroupElement:
    return (g @ M) @ gi


def height_classes(field: FieldId, X: float, H: int, budget: int | None = None):
    """Group height-bounded elements into conjugacy components.

    Returns (reps, members) where reps maps component key -> representative
    (the lexicographically smallest canonical matrix)."""
    found = height_elements(field, X, H, budget)
    keys = sorted(found)
    index = {k: i for i, k in enumerate(keys)}
    par = list(range(len(keys)))

    def find(i):
        while par[i] != i:
            par[i] = par[par[i]]
            i = par[i]
        return i

    conj = _conjugators(field)
    for i, k in enumerate(keys):
        M = found[k]
        for g, gi in conj:
            j = index.get(_conj_fast(M, g, gi).key())
            if j is not None:
                ri, rj = find(i), find(j)
                if ri != rj:
                    par[max(ri, rj)] = min(ri, rj)
    reps = {}
    for i, k in enumerate(keys):
        r = find(i)
        if r == i:
            reps[k] = found[k]
    return reps, {k: keys[find(i)] for i, k in enumerate(keys)}


def trace_multiset(reps) -> Counter:
    return Counter(canonical_trace_key(M.trace) for M in reps.values())


# ---------------------------------------------------------------- keys


def _bfs_key(M: GroupElement, H: int, node_cap: int = 20000) -> tuple:
    conj = _conjugators(M.field)
    best = M.key()
    seen = {best}
    queue = deque([M])
    clipped = False
    while queue:
        P = queue.popleft()
        for g, gi in conj:
            Q = _conj_fast(P, g, gi)
            k = Q.key()
            if k in seen:
                continue
            if Q.height > H:
                clipped = True
                continue
            seen.add(k)
            if k < best:
                best = k
            if len(seen) >= node_cap:
                clipped = True
                queue.clear()
                break
            queue.append(Q)
    if clipped:
        warnings.warn(HeightExhausted(f"conjugation search clipped at height {H}; key is heuristic"))
    return best


def _reduce_gaussian(M: GroupElement) -> GroupElement:
    """Conjugate M so that the top of its axis lies in the Picard domain."""
    f = M.field
    one, zero, i = f(1), f(0), f(0, 1)
    z, r = picard.axis_point(M)
    g = GroupElement(one, zero, zero, one)
    for _ in range(10000):
        w = QuadInt(round(z.real), round(z.imag), f)
        if w:
            z -= complex(w)
            g = GroupElement(one, -w, zero, one) @ g
        if z.imag < 0:
            z = -z
            g = GroupElement(i, zero, zero, -i) @ g
        s = abs(z) ** 2 + r * r
        if s < 1 - 1e-12:
            z, r = -z.conjugate() / s, r / s
            g = GroupElement(zero, -one, one, zero) @ g
            continue
        break
    return mat_conjugate(M, g)


def _neighbours(tr, ti, cr, ci, ar, ai):
    br, bi, dr, di = picard.lower_right_and_b(tr, ti, cr, ci, ar, ai)
    return [
        (cr, ci, ar - cr, ai - ci),
        (cr, ci, ar + cr, ai + ci),
        (-cr, -ci, ar, ai),
        (-cr, -ci, ar + ci, ai - cr),
        (-br, -bi, dr, di),
    ]


def _reduced_ca(tr, ti, cr, ci, ar, ai) -> bool:
    # same floating-point recipe as the census kernel
    n = cr * cr + ci * ci
    if n == 0:
        return False
    dz = complex(tr * tr - ti * ti - 4, 2 * tr * ti)
    sq = np.sqrt(dz)
    rho = math.sqrt(abs(dz)) / (2.0 * math.sqrt(n))
    c = complex(cr, ci)
    u = sq / c
    u = u / abs(u)
    m = complex(2 * ar - tr, 2 * ai - ti) / (2.0 * c)
    return bool(picard.reduced_test(m.real, m.imag, u.real, u.imag, rho, picard.DELTA))


def gaussian_class_min(M: GroupElement) -> tuple[int, int, int, int, int, int]:
    """(tr, ti, cr, ci, ar, ai) of the packed-minimal reduced member of M's class."""
    R = _reduce_gaussian(M)
    t = R.trace
    tr, ti = t.a, t.b
    cr, ci, ar, ai = R.m21.a, R.m21.b, R.m11.a, R.m11.b
    if not picard.canonical_trace(tr, ti):
        tr, ti, cr, ci, ar, ai = -tr, -ti, -cr, -ci, -ar, -ai
    start = (cr, ci, ar, ai)
    if not _reduced_ca(tr, ti, *start):
        # float edge: step to a reduced neighbour
        cands = [n for n in _neighbours(tr, ti, *start) if _reduced_ca(tr, ti, *n)]
        if not cands:
            raise RuntimeError("axis reduction failed")
        start = cands[0]
    seen = {start}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        for nb in _neighbours(tr, ti, *node):
            if nb not in seen and _reduced_ca(tr, ti, *nb):
                seen.add(nb)
                queue.append(nb)
    best = min(seen, key=lambda n: int(picard.pack(*n)))
    return (tr, ti) + best


def gaussian_element(tr, ti, cr, ci, ar, ai) -> GroupElement:
    f = FieldId(1)
    br, bi, dr, di = picard.lower_right_and_b(tr, ti, cr, ci, ar, ai)
    return GroupElement(f(ar, ai), f(br, bi), f(cr, ci), f(dr, di))


def conjugacy_key(M: GroupElement, H: int = 10**6) -> tuple:
    """Canonical key of the conjugacy class of M.

    Over Z[i] the key is exact: M is moved so its axis meets the Picard
    domain and the finite set of such conjugates is searched.  Elsewhere it
    is the smallest canonical matrix reachable by generator conjugations
    without exceeding height H."""
    if classify(M) not in (MotionType.HYPERBOLIC, MotionType.LOXODROMIC):
        raise NotLoxodromic(repr(M))
    if M.field.D == 1:
        return gaussian_element(*gaussian_class_min(M)).key()
    return _bfs_key(M, H)


# ---------------------------------------------------------------- roots


def chebyshev_v(s: QuadInt, n: int) -> QuadInt:
    """tr(Q^n) for tr(Q) = s."""
    v0, v1 = s.field(2), s
    if n == 0:
        return v0
    for _ in range(n - 1):
        v0, v1 = v1, s * v1 - v0
    return v1


def _root_candidate(M: GroupElement, s: QuadInt, lam: complex, mu: complex) -> GroupElement | None:
    a, b, c, d = M.entries()
    f = M.field
    y = (lam - 1 / lam) / (mu - 1 / mu)
    # Q = x I + y M; loxodromic M has c != 0, and k = y c must be integral
    k = f.from_complex(y * complex(c))
    den = 2 * c
    num = (s * c + k * (a - d), 2 * k * b, 2 * k * c, s * c - k * (a - d))
    if not all(den.divides(x) for x in num):
        return None
    e = [x.exact_div(den) for x in num]
    if e[0] * e[3] - e[1] * e[2] != 1:
        return None
    return GroupElement(*e)


def literal_root(M: GroupElement, nmax: int | None = None) -> tuple[GroupElement, int]:
    """(Q, n) with Q^n = M projectively and n maximal."""
    t = M.trace
    mu = large_root(complex(t))
    N = abs(mu) ** 2
    if nmax is None:
        nmax = max(1, int(math.log(N) / math.log(1.2)) + 1)
    f = M.field
    for n in range(nmax, 1, -1):
        for sgn in (1, -1):
            base = cmath.log(sgn * mu)
            for j in range(n):
                lam = cmath.exp((base + 2j * math.pi * j) / n)
                if abs(lam) ** 2 <= 1 + 1e-12:
                    continue
                s = f.from_complex(lam + 1 / lam)
                v = chebyshev_v(s, n)
                if v != t and v != -t:
                    continue
                Q = _root_candidate(M, s, lam, mu)
                if Q is not None and mat_pow(Q, n) == M:
                    return Q, n
    return M, 1


def primitive_root(M: GroupElement) -> tuple[GroupElement, int, int]:
    """(P0, n, m): P0 generates the loxodromic part of the centralizer of M,
    N(M) = N(P0)^n, and m is the centralizer torsion order."""
    m, E = torsion_generator(M)
    best = (M, 1)
    X = M
    for _ in range(m):
        Q, n = literal_root(X)
        if n > best[1]:
            best = (Q, n)
        if E is not None:
            X = E @ X
    return best[0], best[1], m
