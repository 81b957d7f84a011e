"""Truncated explicit formulas for psi_2 and psi_3 and the main-term fit."""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .chebyshev import ChebyshevSeries
from .errors import DomainError, IllConditioned
from .geodesics import GeodesicLedger
from .spectrum import ScatteringPoles, SpectrumSet

COND_LIMIT = 1e12


@dataclass(frozen=True)
class MainTermFit:
    """A_0 x^k + B_0 x^k log x + A_1 x^(k-1) + ... + A_k."""

    k: int
    A: tuple
    B0: float
    fit_window: tuple = (0.0, 0.0)
    residual_rms: float = 0.0

    def __post_init__(self):
        if self.k not in (2, 3):
            raise ValueError("order must be 2 or 3")
        if len(self.A) != self.k + 1:
            raise ValueError(f"need {self.k + 1} A coefficients")

    @classmethod
    def zero(cls, k: int) -> "MainTermFit":
        return cls(k, (0.0,) * (k + 1), 0.0)

    def __call__(self, x):
        x = np.asarray(x, float)
        k = self.k
        out = self.B0 * x ** k * np.log(x)
        for j, a in enumerate(self.A):
            out = out + a * x ** (k - j)
        return out


@dataclass(frozen=True)
class ExplicitParts:
    main_poly: float
    small_terms: float
    mirror_small_terms: float
    critical_terms: float
    truncation_bound: float
    pole_terms: float
    mirror_pole_terms: float

    def total(self) -> float:
        return float(np.sum([self.main_poly, self.small_terms, self.mirror_small_terms,
                             self.critical_terms, self.pole_terms, self.mirror_pole_terms]))


@dataclass(frozen=True)
class ExplicitEval:
    x: float
    T: float
    value: float
    parts: ExplicitParts

    def row(self) -> dict:
        return {"x": self.x, "T": self.T, "value": self.value, **asdict(self.parts)}


def term(s, x: float, k: int):
    """x^(s+k) / (s (s+1) ... (s+k)), vectorized over complex s."""
    s = np.asarray(s, complex)
    den = np.ones_like(s)
    for j in range(k + 1):
        den = den * (s + j)
    return np.exp((s + k) * math.log(x)) / den


def _pole_terms(poles: ScatteringPoles, x: float, k: int) -> tuple[float, float]:
    if poles is None or len(poles) == 0:
        return 0.0, 0.0
    rho = poles.beta + 1j * poles.gamma
    keep = np.ones(len(rho), bool)
    for j in range(k + 1):
        keep &= np.abs(rho + j) > 0
    if not keep.all():
        warnings.warn(f"{int((~keep).sum())} poles with a vanishing denominator were skipped")
    rho = rho[keep]
    direct = np.sum(term(rho, x, k))
    mirror = np.sum(term(np.conj(rho), x, k))
    return float(direct.real), float(mirror.real)


def spectral_parts(spectrum: SpectrumSet, poles: ScatteringPoles | None, x: float, T: float,
                   k: int, C: float = 1.0) -> dict:
    """Every term of the order-k formula except the fitted polynomial."""
    if not x > 1:
        raise DomainError("x must exceed 1")
    if not T > 0:
        raise DomainError("T must be positive")
    ss = np.array([complex(float(s)) for s, _ in spectrum.small])
    ms = np.array([m for _, m in spectrum.small], float)
    small = float(np.sum(ms * term(ss, x, k).real))
    # s = 2 has mirror 0, where the denominator vanishes; its contribution is the main term
    exc = [(float(s), m) for s, m in spectrum.small if s < 2]
    if exc:
        st = np.array([2 - s for s, _ in exc], complex)
        mirror = float(np.sum(np.array([m for _, m in exc], float) * term(st, x, k).real))
    else:
        mirror = 0.0
    sel = spectrum.critical <= T
    t = spectrum.critical[sel]
    if len(t):
        crit = 2.0 * float(np.sum(spectrum.critical_mult[sel] * term(1 + 1j * t, x, k)).real)
    else:
        crit = 0.0
    pole, mpole = _pole_terms(poles, x, k)
    bound = C * x ** (4 if k == 3 else 5) / T
    return dict(small_terms=small, mirror_small_terms=mirror, critical_terms=crit,
                truncation_bound=bound, pole_terms=pole, mirror_pole_terms=mpole)


def _evaluate(k, spectrum, poles, fit, x, T, C) -> ExplicitEval:
    fit = MainTermFit.zero(k) if fit is None else fit
    if fit.k != k:
        raise ValueError(f"fit is for order {fit.k}, formula needs {k}")
    p = spectral_parts(spectrum, poles, x, T, k, C)
    parts = ExplicitParts(main_poly=float(fit(x)), **p)
    return ExplicitEval(float(x), float(T), parts.total(), parts)


def eval_psi3(spectrum, poles=None, fit: MainTermFit | None = None, x: float = 2.0,
              T: float = 1.0, C: float = 1.0) -> ExplicitEval:
    """Truncated order-3 formula; truncation envelope C x^4 / T."""
    return _evaluate(3, spectrum, poles, fit, x, T, C)


def eval_psi2(spectrum, poles=None, fit: MainTermFit | None = None, x: float = 2.0,
              T: float = 1.0, C: float = 1.0) -> ExplicitEval:
    """Truncated order-2 formula; truncation envelope C x^5 / T."""
    return _evaluate(2, spectrum, poles, fit, x, T, C)


def _truth(source, k: int):
    if isinstance(source, GeodesicLedger):
        source = ChebyshevSeries.from_ledger(source)
    if isinstance(source, ChebyshevSeries):
        return lambda xs: source.psi(xs, k), source.X
    return source, math.inf


def fit_main_terms(ledger, spectrum: SpectrumSet, poles: ScatteringPoles | None, k: int,
                   window: tuple[float, float], T: float, points: int = 64) -> MainTermFit:
    """Least-squares fit of psi_k minus every spectral term on a log-uniform grid.

    ``ledger`` may be a GeodesicLedger, a ChebyshevSeries, or a callable giving
    psi_k on an array of x."""
    truth, X = _truth(ledger, k)
    lo, hi = window
    if not (1 < lo < hi <= X):
        raise ValueError("fit window must lie inside (1, X]")
    xs = np.geomspace(lo, hi, points)
    rest = np.array([sum(v for n, v in spectral_parts(spectrum, poles, x, T, k).items()
                         if n != "truncation_bound") for x in xs])
    y = np.asarray(truth(xs), float) - rest
    cols = [xs ** k * np.log(xs)] + [xs ** (k - j) for j in range(k + 1)]
    A = np.column_stack(cols)
    scale = np.linalg.norm(A, axis=0)
    As = A / scale
    cond = np.linalg.cond(As)
    if cond > COND_LIMIT:
        warnings.warn(IllConditioned(f"design matrix condition number {cond:.3g}"))
    coef, *_ = np.linalg.lstsq(As, y, rcond=None)
    coef = coef / scale
    resid = y - A @ coef
    rms = float(math.sqrt(np.mean(resid ** 2)))
    return MainTermFit(k, tuple(float(c) for c in coef[1:]), float(coef[0]), (lo, hi), rms)
