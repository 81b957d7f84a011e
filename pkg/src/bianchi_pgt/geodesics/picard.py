"""Structural census of loxodromic conjugacy classes of PSL(2, Z[i]).

Every loxodromic element has an invariant axis in H^3.  Call an element
*reduced* when its axis meets the Picard domain

    F = {(z, r): |Re z| <= 1/2, 0 <= Im z <= 1/2, |z|^2 + r^2 >= 1}.

Each class has finitely many reduced members.  For a fixed trace t these are
found by brute force over the lower-left entry c, using two facts:

* the axis of [[a, b], [c, d]] is the hemisphere with centre (2a - t)/(2c)
  and radius |sqrt(t^2 - 4)| / (2|c|), so reaching height >= 1/sqrt(2)
  forces |c|^2 <= |t^2 - 4| / 2;
* a is a root of a^2 - t a + 1 = 0 modulo c, and the centre lies within
  1/sqrt(2) + sqrt(radius^2 - 1/2) of the square, which bounds a.

Reduced members of one class are linked by conjugations with the side
pairings of F (translations, the rotation z -> -z, and the inversion).
The tiles around a point of the axis are face-connected, so the components
of this graph are exactly the conjugacy classes.  The class key is the
smallest packed (c, a) in the component.
"""

from __future__ import annotations

import math

import numba as nb
import numpy as np

DELTA = 1e-9
_CB = 2048  # |c| < _CB
_AB = 4096  # |a| < _AB


@nb.njit(cache=True)
def egcd(a, b):
    # g, u, v with u*a + v*b = g >= 0
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b != 0:
        q = a // b
        a, b = b, a - q * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


@nb.njit(cache=True)
def hnf(p, q):
    """Hermite basis {(n1, 0), (f, g)} of the lattice (p + qi) Z[i]."""
    g, u, v = egcd(q, p)
    n = p * p + q * q
    n1 = n // g
    f = (u * p - v * q) % n1
    return g, n1, f


@nb.njit(cache=True)
def res_index(x, y, g, n1, f):
    k = y // g
    yy = y - k * g
    xx = (x - k * f) % n1
    return yy * n1 + xx


@nb.njit(cache=True)
def gdivround(ar, ai, br, bi):
    n = br * br + bi * bi
    nr = ar * br + ai * bi
    ni = ai * br - ar * bi
    return (2 * nr + n) // (2 * n), (2 * ni + n) // (2 * n)


@nb.njit(cache=True)
def ginv_mod(xr, xi, cr, ci):
    r0r, r0i, r1r, r1i = cr, ci, xr, xi
    s0r, s0i, s1r, s1i = 0, 0, 1, 0
    while r1r != 0 or r1i != 0:
        qr, qi = gdivround(r0r, r0i, r1r, r1i)
        tr = r0r - (qr * r1r - qi * r1i)
        ti = r0i - (qr * r1i + qi * r1r)
        r0r, r0i, r1r, r1i = r1r, r1i, tr, ti
        ur = s0r - (qr * s1r - qi * s1i)
        ui = s0i - (qr * s1i + qi * s1r)
        s0r, s0i, s1r, s1i = s1r, s1i, ur, ui
    if r0r * r0r + r0i * r0i != 1:
        return 0, 0, False
    return s0r * r0r + s0i * r0i, s0i * r0r - s0r * r0i, True


@nb.njit(cache=True)
def build_tables(maxnorm):
    """For every ideal (c) with N(c) <= maxnorm, the units a mod c grouped by
    the residue of a + 1/a.  Returned as flat CSR-style arrays."""
    lim = int(math.sqrt(maxnorm)) + 1
    ideal_id = -np.ones((lim + 1, lim + 1), np.int64)
    nid = 0
    tot = 0
    for p in range(1, lim + 1):
        for q in range(0, lim + 1):
            n = p * p + q * q
            if n <= maxnorm:
                ideal_id[p, q] = nid
                nid += 1
                tot += n
    start = np.zeros(tot + nid, np.int64)
    a0 = np.zeros(tot, np.int32)
    sbase = np.zeros(nid + 1, np.int64)
    hg = np.zeros(nid, np.int64)
    hn1 = np.zeros(nid, np.int64)
    hf = np.zeros(nid, np.int64)
    off = 0
    soff = 0
    for p in range(1, lim + 1):
        for q in range(0, lim + 1):
            k = ideal_id[p, q]
            if k < 0:
                continue
            n = p * p + q * q
            g, n1, f = hnf(p, q)
            hg[k] = g
            hn1[k] = n1
            hf[k] = f
            tid = np.empty(n, np.int64)
            rid = np.empty(n, np.int64)
            m = 0
            for idx in range(n):
                yy = idx // n1
                xx = idx % n1
                ir, ii, ok = ginv_mod(xx, yy, p, q)
                if not ok:
                    continue
                tid[m] = res_index(xx + ir, yy + ii, g, n1, f)
                rid[m] = idx
                m += 1
            order = np.argsort(tid[:m], kind="mergesort")
            cnt = np.zeros(n + 1, np.int64)
            for j in range(m):
                cnt[tid[order[j]] + 1] += 1
            for j in range(n):
                cnt[j + 1] += cnt[j]
            for j in range(n + 1):
                start[soff + j] = off + cnt[j]
            for j in range(m):
                a0[off + j] = rid[order[j]]
            sbase[k] = soff
            off += m
            soff += n + 1
    return ideal_id, sbase, start, a0[:off], hg, hn1, hf


@nb.njit(cache=True)
def reduced_test(mr, mi, ur, ui, rho, delta):
    """Does the hemisphere (centre m, radius rho, direction u) meet F?

    Points of the geodesic are m + rho*tanh(s)*u at height rho/cosh(s); every
    face constraint is linear in tanh(s), so the test is an interval check."""
    lo = -1.0
    hi = 1.0
    for j in range(5):
        if j == 0:
            A = rho * ur
            B = 0.5 + delta - mr
        elif j == 1:
            A = -rho * ur
            B = 0.5 + delta + mr
        elif j == 2:
            A = -rho * ui
            B = delta + mi
        elif j == 3:
            A = rho * ui
            B = 0.5 + delta - mi
        else:
            A = -2.0 * rho * (mr * ur + mi * ui)
            B = mr * mr + mi * mi + rho * rho - 1.0 + delta
        if abs(A) < 1e-300:
            if B < 0:
                return False
        elif A > 0:
            v = B / A
            if v < hi:
                hi = v
        else:
            v = B / A
            if v > lo:
                lo = v
        if lo > hi:
            return False
    return True


@nb.njit(cache=True)
def census_trace(tr, ti, ideal_id, sbase, start, a0tab, hg, hn1, hf, delta, outc, outa):
    """All reduced (c, a) of trace tr + i*ti.  Returns the count; rows past the
    buffer length are counted but not stored."""
    dr = tr * tr - ti * ti - 4
    di = 2 * tr * ti
    sq = np.sqrt(complex(dr, di))
    absd = abs(complex(dr, di))
    cmax2 = absd / 2.0 * (1 + 1e-9) + 1e-9
    lim = int(math.sqrt(cmax2)) + 1
    cnt = 0
    for p in range(-lim, lim + 1):
        for q in range(-lim, lim + 1):
            n = p * p + q * q
            if n == 0 or n > cmax2:
                continue
            rho = math.sqrt(absd) / (2.0 * math.sqrt(n))
            if rho * rho < 0.5 - 1e-9:
                continue
            R = 0.70710678119 + math.sqrt(max(rho * rho - 0.5, 0.0)) + 1e-6
            cp, cq = p, q
            while not (cp > 0 and cq >= 0):
                cp, cq = -cq, cp
            k = ideal_id[cp, cq]
            g = hg[k]
            n1 = hn1[k]
            f = hf[k]
            tidx = res_index(tr, ti, g, n1, f)
            s = sbase[k]
            c = complex(p, q)
            u = sq / c
            u = u / abs(u)
            for j in range(start[s + tidx], start[s + tidx + 1]):
                idx = a0tab[j]
                a0r = idx % n1
                a0i = idx // n1
                kc = (complex(tr * 0.5, ti * 0.5) - complex(a0r, a0i)) / c
                for kx in range(int(math.floor(kc.real - R)), int(math.ceil(kc.real + R)) + 1):
                    for ky in range(int(math.floor(kc.imag - R)), int(math.ceil(kc.imag + R)) + 1):
                        if (kx - kc.real) ** 2 + (ky - kc.imag) ** 2 > R * R:
                            continue
                        ar = a0r + p * kx - q * ky
                        ai = a0i + p * ky + q * kx
                        m = complex(2 * ar - tr, 2 * ai - ti) / (2.0 * c)
                        if reduced_test(m.real, m.imag, u.real, u.imag, rho, delta):
                            if cnt < outc.shape[0]:
                                outc[cnt, 0] = p
                                outc[cnt, 1] = q
                                outa[cnt, 0] = ar
                                outa[cnt, 1] = ai
                            cnt += 1
    return cnt


@nb.njit(cache=True)
def pack(cr, ci, ar, ai):
    return (((cr + 2048) * 4096 + (ci + 2048)) * 8192 + (ar + 4096)) * 8192 + (ai + 4096)


@nb.njit(cache=True)
def unpack(key):
    ai = key % 8192 - 4096
    key //= 8192
    ar = key % 8192 - 4096
    key //= 8192
    ci = key % 4096 - 2048
    cr = key // 4096 - 2048
    return cr, ci, ar, ai


@nb.njit(cache=True)
def _find(par, i):
    r = i
    while par[r] != r:
        r = par[r]
    while par[i] != r:
        nx = par[i]
        par[i] = r
        i = nx
    return r


@nb.njit(cache=True)
def lower_right_and_b(tr, ti, cr, ci, ar, ai):
    dr = tr - ar
    di = ti - ai
    nr = ar * dr - ai * di - 1
    ni = ar * di + ai * dr
    cn = cr * cr + ci * ci
    br = (nr * cr + ni * ci) // cn
    bi = (ni * cr - nr * ci) // cn
    return br, bi, dr, di


@nb.njit(cache=True)
def classes_of_trace(tr, ti, outc, outa, n):
    """Union the reduced elements of one trace along side-pairing conjugations.

    Returns the sorted packed keys and, for each, the position of its
    component's smallest key."""
    keys = np.empty(n, np.int64)
    for j in range(n):
        keys[j] = pack(outc[j, 0], outc[j, 1], outa[j, 0], outa[j, 1])
    sk = np.sort(keys)
    par = np.arange(n)
    for j in range(n):
        cr, ci, ar, ai = unpack(sk[j])
        br, bi, dr, di = lower_right_and_b(tr, ti, cr, ci, ar, ai)
        for mv in range(5):
            if mv == 0:  # translation by 1
                c2r, c2i, a2r, a2i = cr, ci, ar - cr, ai - ci
            elif mv == 1:
                c2r, c2i, a2r, a2i = cr, ci, ar + cr, ai + ci
            elif mv == 2:  # rotation z -> -z
                c2r, c2i, a2r, a2i = -cr, -ci, ar, ai
            elif mv == 3:  # rotation composed with translation by i
                c2r, c2i, a2r, a2i = -cr, -ci, ar + ci, ai - cr
            else:  # inversion
                c2r, c2i, a2r, a2i = -br, -bi, dr, di
            if abs(c2r) >= _CB or abs(c2i) >= _CB or abs(a2r) >= _AB or abs(a2i) >= _AB:
                continue
            kk = pack(c2r, c2i, a2r, a2i)
            pos = np.searchsorted(sk, kk)
            if pos < n and sk[pos] == kk:
                r1 = _find(par, j)
                r2 = _find(par, pos)
                if r1 < r2:
                    par[r2] = r1
                elif r2 < r1:
                    par[r1] = r2
    root = np.empty(n, np.int64)
    for j in range(n):
        root[j] = _find(par, j)
    return sk, root


@nb.njit(cache=True)
def class_matrices(tr, ti, sk, root):
    """Entries (m11, m12, m21, m22 as re/im pairs) of each component's key element."""
    m = 0
    for j in range(sk.shape[0]):
        if root[j] == j:
            m += 1
    out = np.empty((m, 8), np.int64)
    pos = np.empty(m, np.int64)
    k = 0
    for j in range(sk.shape[0]):
        if root[j] == j:
            cr, ci, ar, ai = unpack(sk[j])
            br, bi, dr, di = lower_right_and_b(tr, ti, cr, ci, ar, ai)
            out[k, 0] = ar
            out[k, 1] = ai
            out[k, 2] = br
            out[k, 3] = bi
            out[k, 4] = cr
            out[k, 5] = ci
            out[k, 6] = dr
            out[k, 7] = di
            pos[k] = j
            k += 1
    return out, pos


def canonical_trace(tr: int, ti: int) -> bool:
    return tr > 0 or (tr == 0 and ti > 0)


def loxodromic_traces(X: float) -> list[tuple[float, int, int]]:
    """(norm, re t, im t) for canonical-sign traces with 1 < N <= X, sorted."""
    from ..algebra import trace_norm

    tmax = math.sqrt(X) + 1
    L = int(tmax) + 1
    out = []
    for tr in range(0, L + 1):
        for ti in range(-L, L + 1):
            if not canonical_trace(tr, ti):
                continue
            if ti == 0 and tr <= 2:
                continue
            N = trace_norm(complex(tr, ti))
            if N <= X:
                out.append((N, tr, ti))
    out.sort()
    return out


class Census:
    """Per-trace reduced-element census with lookup tables sized for norm X."""

    def __init__(self, X: float):
        tmax = math.sqrt(X) + 1
        if 1.6 * tmax >= _AB or tmax >= _CB:
            raise ValueError(f"norm bound {X} too large for the packed key layout")
        self.X = X
        maxnorm = int((tmax ** 2 + 4) / 2) + 2
        self.tables = build_tables(maxnorm)
        self._outc = np.zeros((1 << 16, 2), np.int64)
        self._outa = np.zeros((1 << 16, 2), np.int64)

    def reduced(self, tr: int, ti: int) -> tuple[np.ndarray, np.ndarray, int]:
        while True:
            n = census_trace(tr, ti, *self.tables, DELTA, self._outc, self._outa)
            if n <= self._outc.shape[0]:
                return self._outc, self._outa, n
            size = 1 << int(math.ceil(math.log2(n)))
            self._outc = np.zeros((size, 2), np.int64)
            self._outa = np.zeros((size, 2), np.int64)

    def classes(self, tr: int, ti: int):
        """(sorted keys, root positions, class matrices, class key positions, element count)."""
        outc, outa, n = self.reduced(tr, ti)
        sk, root = classes_of_trace(tr, ti, outc, outa, n)
        mats, pos = class_matrices(tr, ti, sk, root)
        return sk, root, mats, pos, n


def key_of(tr, ti, cr, ci, ar, ai) -> int:
    """Packed key of an element, after moving its trace to canonical sign."""
    if not canonical_trace(tr, ti):
        cr, ci, ar, ai = -cr, -ci, -ar, -ai
    return int(pack(cr, ci, ar, ai))


def axis_point(M) -> tuple[complex, float]:
    """Top of the axis hemisphere: (centre, radius)."""
    a, c = complex(M.m11), complex(M.m21)
    t = complex(M.trace)
    return (2 * a - t) / (2 * c), abs(np.sqrt(t * t - 4)) / (2 * abs(c))


def is_reduced(M) -> bool:
    t = complex(M.trace)
    c = complex(M.m21)
    if c == 0:
        return False
    m, rho = axis_point(M)
    u = np.sqrt(t * t - 4) / c
    u /= abs(u)
    return bool(reduced_test(m.real, m.imag, u.real, u.imag, rho, DELTA))
