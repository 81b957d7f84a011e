"""Discrete spectra, scattering poles and Weyl-law diagnostics."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import ConfigError, InvariantViolation, ParseError

REMAINDERS = ("cocompact_T2_over_logT", "congruence_T2")


def s_from_lambda(lam):
    """s = 1 + sqrt(1 - lambda); exact when lambda is a rational with square 1 - lambda."""
    if isinstance(lam, Rational):
        r = 1 - Fraction(lam)
        if r < 0:
            raise ValueError("lambda must be <= 1")
        n, d = math.isqrt(r.numerator), math.isqrt(r.denominator)
        if n * n == r.numerator and d * d == r.denominator:
            return 1 + Fraction(n, d)
        lam = float(lam)
    return 1.0 + math.sqrt(1.0 - lam)


def lambda_from_s(s):
    return s * (2 - s)


@dataclass
class SpectrumSet:
    """Small zeros s in (1, 2] and critical-line parameters t > 0, with multiplicities.

    ``small`` always contains s = 2 (the constant eigenfunction).  Values may
    be Fractions, which keeps gap arithmetic exact."""

    small: tuple = ((2, 1),)
    critical: np.ndarray = None
    critical_mult: np.ndarray = None
    volume: float | None = None
    label: str = ""

    def __post_init__(self):
        small = {}
        for s, m in self.small:
            small[s] = small.get(s, 0) + int(m)
        if not any(s == 2 for s in small):
            small[2] = 1
        bad = [f"small s={s}" for s in small if not 1 < s <= 2]
        bad += [f"small s={s} multiplicity {m}" for s, m in small.items() if m < 1]
        self.small = tuple(sorted(small.items(), key=lambda p: -float(p[0])))
        t = np.zeros(0) if self.critical is None else np.asarray(self.critical, float).ravel()
        mult = (np.ones(len(t), np.int64) if self.critical_mult is None
                else np.asarray(self.critical_mult, np.int64).ravel())
        if len(mult) != len(t):
            raise InvariantViolation("critical values and multiplicities differ in length")
        bad += [f"critical t={v}" for v in t[~(t > 0) | ~np.isfinite(t)]]
        bad += [f"critical multiplicity {m}" for m in mult[mult < 1]]
        if self.volume is not None and not self.volume > 0:
            bad.append(f"volume={self.volume}")
        if bad:
            raise InvariantViolation("invalid spectrum", rows=bad)
        order = np.argsort(t, kind="stable")
        t, mult = t[order], mult[order]
        if len(t):
            # merge repeated values into multiplicities so the list is strictly sorted
            uniq, start = np.unique(t, return_index=True)
            if len(uniq) < len(t):
                mult = np.add.reduceat(mult, start)
                t = uniq
        self.critical = t
        self.critical_mult = mult

    @classmethod
    def from_lambdas(cls, lambdas, critical=None, **kw) -> "SpectrumSet":
        small = [(s_from_lambda(l), 1) for l in lambdas if l < 1]
        return cls(tuple(small), critical, **kw)

    @property
    def exceptional(self) -> list[tuple]:
        """Small zeros strictly below 2."""
        return [(s, m) for s, m in self.small if s < 2]

    @property
    def zero_multiplicity(self) -> int:
        return sum(m for s, m in self.small if s == 2)

    @property
    def lambdas(self) -> list:
        return [lambda_from_s(s) for s, _ in self.small]

    def count(self, T) -> np.ndarray:
        """N(T) = #{t_n <= T} with multiplicity."""
        cum = np.concatenate([[0], np.cumsum(self.critical_mult)])
        return cum[np.searchsorted(self.critical, T, side="right")]

    def __len__(self):
        return int(self.critical_mult.sum())


@dataclass
class ScatteringPoles:
    beta: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        self.beta = np.asarray(self.beta, float).ravel()
        self.gamma = np.asarray(self.gamma, float).ravel()
        if self.beta.shape != self.gamma.shape:
            raise InvariantViolation("beta and gamma differ in length")
        bad = [i for i in range(len(self.beta))
               if not (0 < self.beta[i] <= 1 and self.gamma[i] >= 0)]
        if bad:
            raise InvariantViolation("poles outside 0 < beta <= 1, gamma >= 0", rows=bad)

    @classmethod
    def empty(cls) -> "ScatteringPoles":
        return cls(np.zeros(0), np.zeros(0))

    def __len__(self):
        return len(self.beta)


@dataclass(frozen=True)
class WeylModel:
    remainder: str = "congruence_T2"
    volume: float = 6 * math.pi ** 2
    kappa: float = 0.0

    def __post_init__(self):
        if self.remainder not in REMAINDERS:
            raise ConfigError(f"remainder must be one of {REMAINDERS}")
        if not self.volume > 0:
            raise ConfigError("volume must be positive")
        if self.kappa < 0:
            raise ConfigError("kappa must be non-negative")

    @property
    def weyl_constant(self) -> float:
        return self.volume / (6 * math.pi ** 2)

    def envelope(self, T):
        T = np.asarray(T, float)
        if self.remainder == "congruence_T2":
            return T ** 2
        return T ** 2 / np.log(np.maximum(T, math.e))


# ---------------------------------------------------------------- files


def _rows(path):
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield lineno, next(csv.reader([line]))


def load_spectrum(path, volume: float | None = None, label: str | None = None) -> SpectrumSet:
    """Read a ``kind,value,multiplicity`` file (header row required)."""
    rows = _rows(path)
    try:
        lineno, header = next(rows)
    except StopIteration:
        raise ParseError("empty spectrum file", line=0) from None
    if [h.strip() for h in header] != ["kind", "value", "multiplicity"]:
        raise ParseError("expected header kind,value,multiplicity", line=lineno)
    small, crit, mult, bad = [], [], [], []
    for lineno, parts in rows:
        if len(parts) not in (2, 3):
            raise ParseError("expected kind,value[,multiplicity]", line=lineno)
        kind = parts[0].strip()
        try:
            value = float(parts[1])
            m = int(parts[2]) if len(parts) == 3 and parts[2].strip() else 1
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
        if kind == "small":
            if not 1 < value <= 2 or m < 1:
                bad.append(lineno)
            small.append((2 if value == 2.0 else value, m))
        elif kind == "critical":
            if not value > 0 or m < 1:
                bad.append(lineno)
            crit.append(value)
            mult.append(m)
        else:
            raise ParseError(f"unknown kind {kind!r}", line=lineno)
    if bad:
        raise InvariantViolation("spectrum rows out of range", rows=bad)
    return SpectrumSet(tuple(small) or ((2, 1),), np.array(crit), np.array(mult, np.int64),
                       volume, label if label is not None else str(path))


def write_spectrum(S: SpectrumSet, path, comments=()) -> None:
    lines = [f"# {c}" for c in comments] + ["kind,value,multiplicity"]
    lines += [f"small,{float(s)!r},{m}" for s, m in S.small]
    lines += [f"critical,{t!r},{m}" for t, m in zip(S.critical.tolist(), S.critical_mult.tolist())]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_poles(path) -> ScatteringPoles:
    rows = _rows(path)
    try:
        lineno, header = next(rows)
    except StopIteration:
        return ScatteringPoles.empty()
    if [h.strip() for h in header] != ["beta", "gamma"]:
        raise ParseError("expected header beta,gamma", line=lineno)
    beta, gamma = [], []
    for lineno, parts in rows:
        if len(parts) != 2:
            raise ParseError("expected beta,gamma", line=lineno)
        try:
            beta.append(float(parts[0]))
            gamma.append(float(parts[1]))
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
    return ScatteringPoles(np.array(beta), np.array(gamma))


def write_poles(P: ScatteringPoles, path) -> None:
    lines = ["beta,gamma"] + [f"{b!r},{g!r}" for b, g in zip(P.beta.tolist(), P.gamma.tolist())]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------- synthesis


def synth_spectrum(model: WeylModel, T_max: float, seed=0, step: float = 1 / 64) -> SpectrumSet:
    """Critical parameters whose counting function follows c T^3 + r(T).

    With kappa = 0 the n-th value is the exact inverse (n/c)^(1/3).  Otherwise
    r = kappa * envelope(T) * xi(T), xi a piecewise-linear interpolation of
    seeded uniform [-1, 1] knots at the integers, and the counting function is
    the running maximum of c T^3 + r(T), so it stays nondecreasing and within
    the envelope."""
    if not T_max > 1:
        raise ConfigError("T_max must exceed 1")
    c = model.weyl_constant
    label = f"synthetic {model.remainder} kappa={model.kappa} seed={seed}"
    if model.kappa == 0:
        nmax = int(math.floor(c * T_max ** 3 * (1 + 1e-12)))
        t = np.cbrt(np.arange(1, nmax + 1) / c)
        t = t[t <= T_max]
        return SpectrumSet(((2, 1),), t, None, model.volume, label)
    rng = np.random.default_rng(seed)
    knots = rng.uniform(-1.0, 1.0, int(math.ceil(T_max)) + 2)
    T = np.linspace(0.0, T_max, int(math.ceil(T_max / step)) + 1)
    xi = np.interp(T, np.arange(len(knots), dtype=float), knots)
    F = c * T ** 3 + model.kappa * model.envelope(T) * xi
    G = np.maximum.accumulate(np.maximum(F, 0.0))
    n = np.arange(1, int(math.floor(G[-1])) + 1, dtype=float)
    i = np.searchsorted(G, n, side="left")
    g0, g1 = G[i - 1], G[i]
    t = T[i - 1] + (n - g0) / (g1 - g0) * (T[i] - T[i - 1])
    return SpectrumSet(((2, 1),), t, None, model.volume, label)


# ---------------------------------------------------------------- diagnostics


def window_count(S: SpectrumSet, t: float) -> int:
    """#{t_n : t < t_n <= t + 1} with multiplicity."""
    if t < 0:
        raise ValueError("t must be non-negative")
    return int(S.count(t + 1) - S.count(t))


def window_bound(S: SpectrumSet, T: float, step: float = 1.0) -> tuple[float, float]:
    """max of window_count(t) / (1 + t^2) over t = 0, step, 2 step, ... <= T,
    returned with the maximizing t."""
    ts = np.arange(0.0, T + 1e-12, step)
    ratio = (S.count(ts + 1) - S.count(ts)) / (1 + ts ** 2)
    k = int(np.argmax(ratio))
    return float(ratio[k]), float(ts[k])


def weyl_fit(S: SpectrumSet, T_lo: float, T_hi: float, points: int = 64) -> tuple[float, float]:
    """Least-squares slope and intercept of log N(T) against log T."""
    T = np.geomspace(T_lo, T_hi, points)
    N = S.count(T).astype(float)
    if np.any(N <= 0):
        raise ValueError("N(T) vanishes on the fit range")
    slope, icpt = np.polyfit(np.log(T), np.log(N), 1)
    return float(slope), float(icpt)


def condition3_sum(P: ScatteringPoles, x: float) -> float:
    """Sum over poles with gamma > 0 of x^(beta - 1) / gamma^2."""
    if not x > 1:
        raise ValueError("x must exceed 1")
    keep = P.gamma > 0
    return float(np.sum(x ** (P.beta[keep] - 1) / P.gamma[keep] ** 2))


def condition3_ratio(P: ScatteringPoles, x: float) -> float:
    return condition3_sum(P, x) * (1 + math.log(x) ** 3)


@dataclass(frozen=True)
class GapExponent:
    s1: object
    lambda1: object
    at_least_160_169: bool
    at_least_171_196: bool


def spectral_gap_exponent(S: SpectrumSet) -> GapExponent:
    """Largest exceptional zero s1 < 2 (exponent 1 when there is none)."""
    exc = S.exceptional
    if not exc:
        return GapExponent(1, None, True, True)
    s1 = max(s for s, _ in exc)
    lam = lambda_from_s(s1)
    if isinstance(s1, Rational):
        lam = Fraction(lam)
    return GapExponent(s1, lam, lam >= Fraction(160, 169), lam >= Fraction(171, 196))
