"""Exact arithmetic in the rings of integers of Q(sqrt(-D)), D in {1, 2, 3, 7, 11},
and in PSL(2, O_K).

Integers are Python ints (arbitrary precision); floating point only appears
when eigenvalues are extracted in :func:`eigen_data`.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .errors import FieldMismatch, InvariantViolation, NotLoxodromic

VALID_D = (1, 2, 3, 7, 11)


@dataclass(frozen=True)
class FieldId:
    """K = Q(sqrt(-D)) of class number one, with ring basis {1, omega}."""

    D: int

    def __post_init__(self):
        if self.D not in VALID_D:
            raise ValueError(f"D must be one of {VALID_D}, got {self.D}")

    @property
    def half_integral(self) -> bool:
        # omega = (1 + sqrt(-D))/2 when D = 3 mod 4
        return self.D % 4 == 3

    @property
    def omega_trace(self) -> int:
        return 1 if self.half_integral else 0

    @property
    def omega_norm(self) -> int:
        return (1 + self.D) // 4 if self.half_integral else self.D

    @property
    def omega_sq(self) -> tuple[int, int]:
        """(p, q) with omega**2 = p + q*omega."""
        return -self.omega_norm, self.omega_trace

    @property
    def omega(self) -> complex:
        r = math.sqrt(self.D)
        return complex(0.5, r / 2) if self.half_integral else complex(0.0, r)

    def __call__(self, a: int = 0, b: int = 0) -> "QuadInt":
        return QuadInt(a, b, self)

    def from_complex(self, z: complex) -> "QuadInt":
        """Nearest ring element to ``z`` (search over the two nearest omega-rows)."""
        w = self.omega
        b0 = math.floor(z.imag / w.imag)
        best = None
        for b in (b0 - 1, b0, b0 + 1, b0 + 2):
            a = round(z.real - b * w.real)
            for aa in (a - 1, a, a + 1):
                d = abs(z - (aa + b * w))
                if best is None or d < best[0]:
                    best = (d, aa, b)
        return QuadInt(best[1], best[2], self)


def _coerce(x, field: FieldId) -> "QuadInt":
    if isinstance(x, QuadInt):
        if x.field != field:
            raise FieldMismatch(f"D={x.field.D} vs D={field.D}")
        return x
    if isinstance(x, int):
        return QuadInt(x, 0, field)
    if isinstance(x, tuple) and len(x) == 2:
        return QuadInt(int(x[0]), int(x[1]), field)
    raise TypeError(f"cannot interpret {x!r} as an element of O_K")


@dataclass(frozen=True)
class QuadInt:
    """a + b*omega in O_K."""

    a: int
    b: int
    field: FieldId

    def __add__(self, other):
        o = _coerce(other, self.field)
        return QuadInt(self.a + o.a, self.b + o.b, self.field)

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce(other, self.field)
        return QuadInt(self.a - o.a, self.b - o.b, self.field)

    def __rsub__(self, other):
        return _coerce(other, self.field) - self

    def __neg__(self):
        return QuadInt(-self.a, -self.b, self.field)

    def __mul__(self, other):
        o = _coerce(other, self.field)
        p, q = self.field.omega_sq
        bd = self.b * o.b
        return QuadInt(self.a * o.a + bd * p, self.a * o.b + self.b * o.a + bd * q, self.field)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, int):
            return self.a == other and self.b == 0
        if isinstance(other, QuadInt):
            return self.a == other.a and self.b == other.b and self.field == other.field
        return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b, self.field.D))

    def __complex__(self):
        return self.a + self.b * self.field.omega

    def __bool__(self):
        return self.a != 0 or self.b != 0

    def __repr__(self):
        return f"QuadInt({self.a}, {self.b}, D={self.field.D})"

    def key(self) -> tuple[int, int]:
        return self.a, self.b

    def conj(self) -> "QuadInt":
        if self.field.half_integral:
            return QuadInt(self.a + self.b, -self.b, self.field)
        return QuadInt(self.a, -self.b, self.field)

    def norm(self) -> int:
        """|a + b*omega|**2, an exact integer."""
        f = self.field
        return self.a * self.a + self.a * self.b * f.omega_trace + self.b * self.b * f.omega_norm

    @property
    def is_real(self) -> bool:
        return self.b == 0

    def is_unit(self) -> bool:
        return self.norm() == 1

    def _quotient(self, other: "QuadInt") -> tuple[Fraction, Fraction]:
        o = _coerce(other, self.field)
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in O_K")
        num = self * o.conj()
        return Fraction(num.a, n), Fraction(num.b, n)

    def divides(self, other) -> bool:
        """True if ``self`` divides ``other``."""
        x, y = _coerce(other, self.field)._quotient(self)
        return x.denominator == 1 and y.denominator == 1

    def exact_div(self, other) -> "QuadInt":
        x, y = self._quotient(other)
        if x.denominator != 1 or y.denominator != 1:
            raise ValueError(f"{other!r} does not divide {self!r}")
        return QuadInt(int(x), int(y), self.field)

    def divround(self, other) -> "QuadInt":
        """Nearest-lattice-point quotient; the remainder has norm < norm(other)
        for the five Euclidean fields."""
        x, y = self._quotient(other)
        w = self.field.omega
        best = None
        for b in (math.floor(y), math.ceil(y)):
            # real part of the leftover (y - b) omega shifts the best a
            a0 = x + (y - b) * Fraction(self.field.omega_trace, 2)
            for a in (math.floor(a0), math.ceil(a0)):
                ex, ey = x - a, y - b
                d = float(ex) ** 2 + float(ex) * float(ey) * 2 * w.real + float(ey) ** 2 * abs(w) ** 2
                if best is None or d < best[0]:
                    best = (d, a, b)
        return QuadInt(best[1], best[2], self.field)

    def sqrt(self) -> "QuadInt | None":
        """Exact square root in O_K, or None."""
        if not self:
            return self
        r = self.field.from_complex(cmath.sqrt(complex(self)))
        for cand in (r, -r):
            if cand * cand == self:
                return cand
        # large entries: the float guess may be a lattice step off
        for da in (-1, 0, 1):
            for db in (-1, 0, 1):
                cand = r + QuadInt(da, db, self.field)
                if cand * cand == self:
                    return cand
        return None


def xgcd(x: QuadInt, y: QuadInt) -> tuple[QuadInt, QuadInt, QuadInt]:
    """g, u, v with u*x + v*y = g, g a gcd of x and y."""
    f = x.field
    r0, r1 = x, _coerce(y, f)
    s0, s1 = f(1), f(0)
    t0, t1 = f(0), f(1)
    while r1:
        q = r0.divround(r1)
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    return r0, s0, t0


def inverse_mod(x: QuadInt, m: QuadInt) -> QuadInt | None:
    """x**-1 modulo m, or None when x is not a unit mod m."""
    g, u, _ = xgcd(x, m)
    if not g.is_unit():
        return None
    # g is a unit; u*x = g (mod m)
    return u * g.conj()


class MotionType(enum.Enum):
    IDENTITY = "identity"
    PARABOLIC = "parabolic"
    ELLIPTIC = "elliptic"
    HYPERBOLIC = "hyperbolic"
    LOXODROMIC = "loxodromic"


def _is_positive(q: QuadInt) -> bool:
    return q.a > 0 or (q.a == 0 and q.b > 0)


@dataclass(frozen=True)
class GroupElement:
    """A determinant-one matrix over O_K, stored as the canonical member of {M, -M}."""

    m11: QuadInt
    m12: QuadInt
    m21: QuadInt
    m22: QuadInt

    def __post_init__(self):
        f = self.m11.field
        for e in (self.m12, self.m21, self.m22):
            if e.field != f:
                raise FieldMismatch("matrix entries from different fields")
        if self.m11 * self.m22 - self.m12 * self.m21 != 1:
            raise InvariantViolation("determinant is not 1")
        for e in (self.m11, self.m12, self.m21, self.m22):
            if e:
                if not _is_positive(e):
                    for name in ("m11", "m12", "m21", "m22"):
                        object.__setattr__(self, name, -getattr(self, name))
                break

    @classmethod
    def of(cls, field: FieldId | int, rows) -> "GroupElement":
        """Build from nested rows whose entries are ints, (a, b) pairs or QuadInts."""
        if isinstance(field, int):
            field = FieldId(field)
        (p, q), (r, s) = rows
        return cls(*(_coerce(e, field) for e in (p, q, r, s)))

    @property
    def field(self) -> FieldId:
        return self.m11.field

    @property
    def trace(self) -> QuadInt:
        return self.m11 + self.m22

    def entries(self) -> tuple[QuadInt, QuadInt, QuadInt, QuadInt]:
        return self.m11, self.m12, self.m21, self.m22

    def key(self) -> tuple[int, ...]:
        """Flat integer tuple (m11a, m11b, ..., m22b); used for ordering and dedup."""
        return tuple(v for e in self.entries() for v in e.key())

    @property
    def height(self) -> int:
        return max(e.norm() for e in self.entries())

    def inverse(self) -> "GroupElement":
        return GroupElement(self.m22, -self.m12, -self.m21, self.m11)

    def is_identity(self) -> bool:
        return not self.m12 and not self.m21 and self.m11 == self.m22 and self.m11.is_unit() \
            and self.m11 * self.m11 == 1

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return mat_mul(self, other)

    def __repr__(self):
        rows = [[e.key() for e in self.entries()[:2]], [e.key() for e in self.entries()[2:]]]
        return f"GroupElement(D={self.field.D}, {rows})"


@dataclass(frozen=True)
class EigenData:
    a_P: complex
    N_P: float
    trace: QuadInt


def classify(M: GroupElement) -> MotionType:
    if M.is_identity():
        return MotionType.IDENTITY
    t = M.trace
    if t.is_real:
        if abs(t.a) > 2:
            return MotionType.HYPERBOLIC
        if abs(t.a) == 2:
            return MotionType.PARABOLIC
        return MotionType.ELLIPTIC
    return MotionType.LOXODROMIC


def large_root(t: complex) -> complex:
    """Root of z**2 - t z + 1 with |z| >= 1, computed without cancellation."""
    w = cmath.sqrt(t * t - 4)
    if (t.conjugate() * w).real < 0:
        w = -w
    return (t + w) / 2


def trace_norm(t: complex) -> float:
    """N = |a|**2 for an element of trace t."""
    return abs(large_root(t)) ** 2


def eigen_data(M: GroupElement) -> EigenData:
    if classify(M) not in (MotionType.HYPERBOLIC, MotionType.LOXODROMIC):
        raise NotLoxodromic(f"{M!r} is {classify(M).value}")
    t = M.trace
    a = large_root(complex(t))
    return EigenData(a, abs(a) ** 2, t)


def _check_same(A: GroupElement, B: GroupElement):
    if A.field != B.field:
        raise FieldMismatch(f"D={A.field.D} vs D={B.field.D}")


def mat_mul(A: GroupElement, B: GroupElement) -> GroupElement:
    _check_same(A, B)
    a, b, c, d = A.entries()
    e, f, g, h = B.entries()
    return GroupElement(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def mat_pow(M: GroupElement, n: int) -> GroupElement:
    if n < 1:
        raise ValueError("exponent must be >= 1")
    result = None
    base = M
    while n:
        if n & 1:
            result = base if result is None else mat_mul(result, base)
        n >>= 1
        if n:
            base = mat_mul(base, base)
    return result


def mat_conjugate(M: GroupElement, G: GroupElement) -> GroupElement:
    """G M G^-1."""
    _check_same(M, G)
    return mat_mul(mat_mul(G, M), G.inverse())


def standard_generators(field: FieldId) -> list[GroupElement]:
    """Translations by 1 and omega, and S = [[0, -1], [1, 0]]."""
    one, zero, w = field(1), field(0), field(0, 1)
    return [
        GroupElement(one, one, zero, one),
        GroupElement(one, w, zero, one),
        GroupElement(zero, -one, one, zero),
    ]


def elements(field: FieldId, rows: Iterable) -> list[GroupElement]:
    return [GroupElement.of(field, r) for r in rows]
