"""Conjugacy-class ledgers: enumeration drivers, counting and CSV persistence."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field as dc_field
from typing import Iterator, Sequence

import numpy as np

from ..algebra import FieldId, GroupElement, QuadInt, eigen_data, trace_norm
from ..errors import (BudgetExceeded, InvariantViolation, OutOfRange,
                      ParseError)
from . import picard
from .search import (canonical_trace_key, conjugacy_key, height_classes,
                     primitive_root, trace_multiset)
from .torsion import special_traces, torsion_generator

COLUMNS = ("field_D", "m11a", "m11b", "m12a", "m12b", "m21a", "m21b", "m22a", "m22b",
           "norm", "re_a", "im_a", "primitive", "root_row", "power", "torsion_m",
           "torsion_certified")
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ConjClass:
    representative: GroupElement
    norm: float
    a_P: complex
    primitive: bool = True
    root_index: int | None = None
    power: int = 1
    torsion_m: int = 1
    torsion_certified: bool = False

    def __post_init__(self):
        if self.primitive and (self.power != 1 or self.root_index is not None):
            raise InvariantViolation("primitive class with a root or power")
        if self.power < 1 or self.torsion_m < 1:
            raise InvariantViolation("power and torsion order must be >= 1")

    @property
    def log_root_norm(self) -> float:
        """log N(P0)."""
        return math.log(self.norm) / self.power

    @classmethod
    def from_element(cls, M: GroupElement, **kw) -> "ConjClass":
        e = eigen_data(M)
        return cls(M, e.N_P, e.a_P, **kw)


def _embed(a, b, f: FieldId):
    w = f.omega
    return a + b * w


def large_root_array(t: np.ndarray) -> np.ndarray:
    w = np.sqrt(t * t - 4)
    flip = (np.conj(t) * w).real < 0
    w = np.where(flip, -w, w)
    return (t + w) / 2


def canonicalize_rows(E: np.ndarray) -> np.ndarray:
    """Apply the projective sign rule to an (n, 8) array of entries."""
    E = np.array(E, dtype=np.int64, copy=True)
    if len(E) == 0:
        return E
    nz = (E[:, 0::2] != 0) | (E[:, 1::2] != 0)
    first = np.argmax(nz, axis=1)
    rows = np.arange(len(E))
    a = E[rows, 2 * first]
    b = E[rows, 2 * first + 1]
    neg = (a < 0) | ((a == 0) & (b < 0))
    E[neg] = -E[neg]
    return E


@dataclass
class GeodesicLedger:
    """Sorted, array-backed collection of conjugacy classes.

    ``entries`` holds (m11a, m11b, m12a, m12b, m21a, m21b, m22a, m22b) in the
    ring basis {1, omega}; ``root`` is -1 for primitive classes."""

    field: FieldId
    X: float
    H: int
    entries: np.ndarray
    norm: np.ndarray
    a: np.ndarray
    primitive: np.ndarray
    root: np.ndarray
    power: np.ndarray
    torsion_m: np.ndarray
    torsion_certified: np.ndarray
    saturated: bool = False
    saturation_report: str = ""
    meta: dict = dc_field(default_factory=dict)

    def __len__(self):
        return len(self.norm)

    def __getitem__(self, i: int) -> ConjClass:
        return self.class_at(i)

    def __iter__(self) -> Iterator[ConjClass]:
        for i in range(len(self)):
            yield self.class_at(i)

    @property
    def classes(self) -> Sequence[ConjClass]:
        return _ClassView(self)

    def element(self, i: int) -> GroupElement:
        e = [int(v) for v in self.entries[i]]
        f = self.field
        return GroupElement(f(e[0], e[1]), f(e[2], e[3]), f(e[4], e[5]), f(e[6], e[7]))

    def class_at(self, i: int) -> ConjClass:
        r = int(self.root[i])
        return ConjClass(
            self.element(i), float(self.norm[i]), complex(self.a[i]), bool(self.primitive[i]),
            None if r < 0 else r, int(self.power[i]), int(self.torsion_m[i]),
            bool(self.torsion_certified[i]))

    @property
    def log_root_norm(self) -> np.ndarray:
        return np.log(self.norm) / self.power

    def index_of(self, M: GroupElement, H: int | None = None) -> int | None:
        """Ledger row of the class of M, if present."""
        key = conjugacy_key(M, H if H is not None else 4 * max(self.H, 1))
        N = eigen_data(M).N_P
        lo = np.searchsorted(self.norm, N * (1 - 1e-9))
        hi = np.searchsorted(self.norm, N * (1 + 1e-9), side="right")
        for i in range(lo, hi):
            if tuple(int(v) for v in self.entries[i]) == key:
                return i
        return None

    @classmethod
    def from_arrays(cls, field, X, H, entries, primitive=None, root=None, power=None,
                    torsion_m=None, torsion_certified=None, **kw) -> "GeodesicLedger":
        """Canonicalize, compute eigenvalues, sort by (norm, key) and remap roots."""
        if isinstance(field, int):
            field = FieldId(field)
        E = canonicalize_rows(np.asarray(entries, dtype=np.int64).reshape(-1, 8))
        n = len(E)
        ones = np.ones(n, np.int64)
        primitive = np.ones(n, bool) if primitive is None else np.asarray(primitive, bool)
        root = -ones if root is None else np.asarray(root, np.int64)
        power = ones.copy() if power is None else np.asarray(power, np.int64)
        torsion_m = ones.copy() if torsion_m is None else np.asarray(torsion_m, np.int64)
        torsion_certified = (np.zeros(n, bool) if torsion_certified is None
                             else np.asarray(torsion_certified, bool))
        t = _embed(E[:, 0] + E[:, 6], E[:, 1] + E[:, 7], field).astype(complex)
        a = large_root_array(t)
        norm = np.abs(a) ** 2
        order = np.lexsort(tuple(E[:, j] for j in range(7, -1, -1)) + (norm,))
        inv = np.empty(n, np.int64)
        inv[order] = np.arange(n)
        root = root[order]
        root = np.where(root >= 0, inv[np.maximum(root, 0)], -1)
        return cls(field, float(X), int(H), E[order], norm[order], a[order], primitive[order],
                   root, power[order], torsion_m[order], torsion_certified[order], **kw)

    def check(self):
        """Verify the structural invariants; raises InvariantViolation."""
        bad = []
        if np.any(np.diff(self.norm) < 0):
            bad.append("norms not sorted")
        prim = self.primitive
        if np.any(prim & ((self.root >= 0) | (self.power != 1))):
            bad.append("primitive rows with roots")
        nonp = np.flatnonzero(~prim)
        if len(nonp):
            r = self.root[nonp]
            if np.any(r < 0) or np.any(r >= nonp):
                bad.append("root does not precede its power")
            else:
                lhs = np.log(self.norm[nonp])
                rhs = self.power[nonp] * np.log(self.norm[r])
                if np.any(np.abs(lhs - rhs) > 1e-9 * np.abs(lhs)):
                    bad.append("power norm mismatch")
        if bad:
            raise InvariantViolation("; ".join(bad), rows=bad)


class _ClassView(Sequence):
    def __init__(self, ledger):
        self._l = ledger

    def __len__(self):
        return len(self._l)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self._l.class_at(j) for j in range(*i.indices(len(self)))]
        if i < 0:
            i += len(self)
        if not 0 <= i < len(self):
            raise IndexError(i)
        return self._l.class_at(i)


# ------------------------------------------------------------ Picard census


def _gauss(row) -> GroupElement:
    f = FieldId(1)
    r = [int(v) for v in row]
    return GroupElement(f(r[0], r[1]), f(r[2], r[3]), f(r[4], r[5]), f(r[6], r[7]))


def _register_powers(Q: GroupElement, E, m: int, gid: int, X: float, pending):
    P = Q
    n = 1
    while True:
        P = P @ Q
        n += 1
        t = P.trace
        if trace_norm(complex(t)) > X:
            return
        R = P
        for _ in range(m):
            tr, ti = R.trace.a, R.trace.b
            key = picard.key_of(tr, ti, R.m21.a, R.m21.b, R.m11.a, R.m11.b)
            tk = (tr, ti) if picard.canonical_trace(tr, ti) else (-tr, -ti)
            pending[tk].append((key, gid, n))
            if E is not None:
                R = E @ R


def _picard_enumerate(X: float, H: int, budget: int | None) -> GeodesicLedger:
    f = FieldId(1)
    census = picard.Census(X)
    traces = picard.loxodromic_traces(X)
    pending = defaultdict(list)
    blocks = []
    gid = 0
    elements = 0
    unresolved = 0
    special = 0

    def build(saturated, report):
        if blocks:
            cols = [np.concatenate(c) for c in zip(*blocks)]
        else:
            cols = [np.zeros((0, 8), np.int64)] + [np.zeros(0, np.int64)] * 4
        E, prim, rt, pw, tm = cols
        return GeodesicLedger.from_arrays(
            f, X, H, E, prim, rt, pw, tm, np.ones(len(tm), bool),
            saturated=saturated, saturation_report=report,
            meta={"method": "picard", "elements": elements, "unresolved_powers": unresolved})

    for N, tr, ti in traces:
        sk, root, mats, pos, n = census.classes(tr, ti)
        elements += n
        k = len(mats)
        local = np.full(n, -1, np.int64)
        local[pos] = np.arange(k)
        prim = np.ones(k, bool)
        rt = -np.ones(k, np.int64)
        pw = np.ones(k, np.int64)
        tm = np.ones(k, np.int64)
        for key, rgid, p in pending.pop((tr, ti), ()):
            j = int(np.searchsorted(sk, key))
            if j < n and sk[j] == key:
                li = local[root[j]]
                if prim[li]:
                    prim[li] = False
                    rt[li] = rgid
                    pw[li] = p
            else:
                unresolved += 1
        gens = [None] * k
        if special_traces(f(tr, ti)):
            special += 1
            for li in range(k):
                tm[li], gens[li] = torsion_generator(_gauss(mats[li]))
        if N * N <= X * (1 + 1e-9):
            for li in np.flatnonzero(prim):
                _register_powers(_gauss(mats[li]), gens[li], int(tm[li]), gid + li, X, pending)
        blocks.append((mats, prim, rt, pw, tm))
        gid += k
        if budget is not None and elements > budget:
            partial = build(False, f"element budget {budget} exhausted at norm {N:.6g}")
            raise BudgetExceeded("element budget exhausted", partial=partial)
    unresolved += sum(len(v) for v in pending.values())
    led = build(True, "")
    hmax = int(np.max(np.abs(led.entries))) if len(led) else 0
    led.saturation_report = (
        f"structural census over {len(traces)} traces: {elements} reduced elements, "
        f"{len(led)} classes, {int(led.primitive.sum())} primitive; "
        f"traces with possible torsion: {special}; unresolved power lookups: {unresolved}; "
        f"complete for every height bound (largest representative entry {hmax})")
    led.saturated = unresolved == 0
    return led


# ------------------------------------------------------------ height search


def _height_enumerate(field: FieldId, X: float, H: int, budget: int | None) -> GeodesicLedger:
    try:
        reps, members = height_classes(field, X, H, budget)
    except BudgetExceeded as exc:
        found = exc.partial or {}
        led = _ledger_from_reps(field, X, H, dict(found), {k: k for k in found})
        led.saturated = False
        led.saturation_report = "element budget exhausted"
        raise BudgetExceeded("element budget exhausted", partial=led)
    reps2, _ = height_classes(field, X, 2 * H, None if budget is None else 8 * budget)
    ms1, ms2 = trace_multiset(reps), trace_multiset(reps2)
    led = _ledger_from_reps(field, X, H, reps, members)
    shared = sum(v - 1 for v in ms1.values() if v > 1)
    led.saturated = ms1 == ms2
    diff = (ms2 - ms1) + (ms1 - ms2)
    led.saturation_report = (
        f"height search: {len(members)} elements, {len(reps)} classes at H={H}, "
        f"{len(reps2)} at H={2 * H}; multisets {'agree' if led.saturated else 'differ'}"
        f" ({sum(diff.values())} differing traces); possibly-merged pairs "
        f"(equal trace up to sign, distinct keys): {shared}")
    led.meta.update(method="height", elements=len(members), possibly_merged=shared)
    return led


def _ledger_from_reps(field, X, H, reps, members) -> GeodesicLedger:
    keys = sorted(reps)
    mats = [reps[k] for k in keys]
    n = len(mats)
    E = np.array([M.key() for M in mats], dtype=np.int64).reshape(n, 8)
    prim = np.ones(n, bool)
    rt = -np.ones(n, np.int64)
    pw = np.ones(n, np.int64)
    tm = np.ones(n, np.int64)
    by_trace = defaultdict(list)
    for i, M in enumerate(mats):
        by_trace[canonical_trace_key(M.trace)].append(i)
    for i, M in enumerate(mats):
        P0, p, m = primitive_root(M)
        tm[i] = m
        if p == 1:
            continue
        j = None
        k0 = members.get(P0.key())
        if k0 is not None:
            j = keys.index(k0)
        else:
            cands = by_trace.get(canonical_trace_key(P0.trace), [])
            if cands:
                j = cands[0]
        if j is not None:
            prim[i] = False
            rt[i] = j
            pw[i] = p
    return GeodesicLedger.from_arrays(field, X, H, E, prim, rt, pw, tm, np.ones(n, bool))


# ------------------------------------------------------------ public API


def enumerate_classes(field: FieldId | int, X: float, H: int = 64, method: str = "auto",
                      budget: int | None = None) -> GeodesicLedger:
    """Loxodromic and hyperbolic conjugacy classes with 1 < N <= X.

    ``method="picard"`` (default for D=1) is a complete structural census;
    ``method="height"`` enumerates elements of height <= H and certifies by
    rerunning at 2H."""
    if isinstance(field, int):
        field = FieldId(field)
    if not X > 1:
        raise ValueError("X must exceed 1")
    if H < 2:
        raise ValueError("H must be at least 2")
    if method == "auto":
        method = "picard" if field.D == 1 else "height"
    if method == "picard":
        if field.D != 1:
            raise ValueError("the structural census is implemented for D=1 only")
        return _picard_enumerate(X, H, budget)
    if method == "height":
        return _height_enumerate(field, X, H, budget)
    raise ValueError(f"unknown method {method!r}")


def torsion_order(C: ConjClass, H: int | None = None) -> tuple[int, bool]:
    """Order of the torsion of the centralizer; the algebraic solve is exact,
    so the result is always certified and H is not needed."""
    return torsion_generator(C.representative)[0], True


def pi_gamma(ledger: GeodesicLedger, x: float) -> int:
    if x > ledger.X:
        raise OutOfRange(f"x={x} beyond ledger bound {ledger.X}")
    k = np.searchsorted(ledger.norm, x, side="right")
    return int(np.count_nonzero(ledger.primitive[:k]))


def pi_gamma_array(ledger: GeodesicLedger, xs) -> np.ndarray:
    xs = np.asarray(xs, float)
    if np.any(xs > ledger.X):
        raise OutOfRange("grid beyond ledger bound")
    cum = np.concatenate([[0], np.cumsum(ledger.primitive)])
    return cum[np.searchsorted(ledger.norm, xs, side="right")]


# ------------------------------------------------------------ CSV


def write_ledger(ledger: GeodesicLedger, path, comments: Sequence[str] = ()) -> None:
    lines = [f"# {c}" for c in comments]
    lines.append(f"# schema={SCHEMA_VERSION} field_D={ledger.field.D} X={ledger.X!r} "
                 f"H={ledger.H} saturated={int(ledger.saturated)}")
    lines.append("# report: " + ledger.saturation_report.replace("\n", " "))
    lines.append(",".join(COLUMNS))
    D = ledger.field.D
    E = ledger.entries.tolist()
    for i in range(len(ledger)):
        a = ledger.a[i]
        lines.append(
            f"{D},{','.join(map(str, E[i]))},{ledger.norm[i]:.15g},{a.real:.15g},{a.imag:.15g},"
            f"{int(ledger.primitive[i])},{int(ledger.root[i])},{int(ledger.power[i])},"
            f"{int(ledger.torsion_m[i])},{int(ledger.torsion_certified[i])}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_ledger(path) -> GeodesicLedger:
    meta = {}
    report = ""
    rows = []
    header_seen = False
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("report:"):
                    report = body[len("report:"):].strip()
                elif body.startswith("schema="):
                    for tok in body.split():
                        k, _, v = tok.partition("=")
                        meta[k] = v
                continue
            if not header_seen:
                if tuple(s.strip() for s in line.split(",")) != COLUMNS:
                    raise ParseError("ledger header does not match the column schema", line=lineno)
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != len(COLUMNS):
                raise ParseError(f"expected {len(COLUMNS)} fields, got {len(parts)}", line=lineno)
            try:
                ints = [int(p) for p in parts[:9]]
                floats = [float(p) for p in parts[9:12]]
                tail = [int(p) for p in parts[12:]]
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from None
            rows.append((lineno, ints, floats, tail))
    if not header_seen:
        raise ParseError("missing header row", line=0)
    D = int(meta.get("field_D", rows[0][1][0] if rows else 1))
    f = FieldId(D)
    n = len(rows)
    E = np.array([r[1][1:] for r in rows], dtype=np.int64).reshape(n, 8)
    stored = np.array([r[2] for r in rows], float).reshape(n, 3)
    tail = np.array([r[3] for r in rows], np.int64).reshape(n, 5)
    bad = []
    for lineno, ints, _, _ in rows:
        if ints[0] != D:
            bad.append(f"line {lineno}: field_D {ints[0]} != {D}")
            continue
        m = [QuadInt(ints[1 + 2 * j], ints[2 + 2 * j], f) for j in range(4)]
        if m[0] * m[3] - m[1] * m[2] != 1:
            bad.append(f"line {lineno}: determinant is not 1")
    X = float(meta.get("X", "inf"))
    led = GeodesicLedger(
        f, X, int(meta.get("H", 0)), canonicalize_rows(E), np.zeros(n), np.zeros(n, complex),
        tail[:, 0].astype(bool), tail[:, 1], tail[:, 2], tail[:, 3], tail[:, 4].astype(bool),
        saturated=meta.get("saturated") == "1", saturation_report=report)
    if n:
        t = _embed(led.entries[:, 0] + led.entries[:, 6], led.entries[:, 1] + led.entries[:, 7], f)
        led.a = large_root_array(t.astype(complex))
        led.norm = np.abs(led.a) ** 2
        off = np.abs(led.norm - stored[:, 0]) > 1e-12 * led.norm
        off |= np.abs(led.a - (stored[:, 1] + 1j * stored[:, 2])) > 1e-12 * np.abs(led.a)
        for i in np.flatnonzero(off):
            bad.append(f"line {rows[i][0]}: stored norm/eigenvalue disagree with the matrix")
        if np.any(~np.equal(E, led.entries).all(axis=1)):
            bad.append("rows not in canonical projective form")
    if bad:
        raise InvariantViolation(f"{len(bad)} invalid ledger rows", rows=bad)
    led.check()
    return led
