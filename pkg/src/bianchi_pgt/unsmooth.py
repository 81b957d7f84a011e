"""Finite differences, sandwich bounds for psi_0, parameter policies and the
error-exponent fit."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple

import numpy as np
from scipy import stats

from .chebyshev import ChebyshevSeries, error_term
from .errors import DegenerateGrid, DomainError

ZERO_FLOOR = 1e-12
# slopes closer than this to a reference count as equal whatever the interval
SLOPE_FLOOR = 1e-9


@dataclass(frozen=True)
class DifferenceSpec:
    k: int
    direction: str
    h: float

    def __post_init__(self):
        if self.k not in (2, 3):
            raise ValueError("k must be 2 or 3")
        if self.direction not in ("plus", "minus"):
            raise ValueError("direction must be 'plus' or 'minus'")
        if not self.h > 0:
            raise ValueError("h must be positive")

    def stencil(self, x: float) -> tuple[np.ndarray, np.ndarray]:
        """(points, weights) with delta = sum(weights * f(points))."""
        j = np.arange(self.k + 1)
        binom = np.array([math.comb(self.k, int(i)) for i in j], float)
        if self.direction == "plus":
            return x + j * self.h, binom * (-1.0) ** (self.k - j)
        return x - j * self.h, binom * (-1.0) ** j


def _domain(f):
    dom = getattr(f, "domain", None)
    if dom is not None:
        return dom
    if isinstance(getattr(f, "__self__", None), ChebyshevSeries):
        return (0.0, f.__self__.X)
    return None


def delta(spec: DifferenceSpec, f: Callable, x: float, domain=None) -> float:
    """k-th forward (plus) or backward (minus) difference with step h."""
    pts, w = spec.stencil(x)
    dom = domain if domain is not None else _domain(f)
    if dom is not None:
        lo, hi = dom
        if pts.min() <= lo or pts.max() > hi * (1 + 1e-12):
            raise DomainError(f"stencil [{pts.min()}, {pts.max()}] leaves ({lo}, {hi}]")
    vals = [float(f(float(p))) for p in pts]
    return math.fsum(wi * v for wi, v in zip(w, vals))


def sandwich_psi0(psi_eval, x: float, h: float, k: int) -> tuple[float, float]:
    """(h^-k Delta_k^- psi_k(x), h^-k Delta_k^+ psi_k(x)).

    ``psi_eval`` is a callable for psi_k or a ChebyshevSeries."""
    dom = None
    if isinstance(psi_eval, ChebyshevSeries):
        series = psi_eval
        dom = (0.0, series.X)
        psi_eval = lambda y: series.psi(y, k)  # noqa: E731
    lo = delta(DifferenceSpec(k, "minus", h), psi_eval, x, dom) / h ** k
    hi = delta(DifferenceSpec(k, "plus", h), psi_eval, x, dom) / h ** k
    return lo, hi


# ---------------------------------------------------------------- policies


class Exponent(NamedTuple):
    """const + eps_coef * epsilon, kept exact."""

    const: Fraction
    eps_coef: Fraction = Fraction(0)

    def value(self, eps: float) -> float:
        return float(self.const) + float(self.eps_coef) * eps

    def __str__(self):
        if self.eps_coef:
            return f"{self.const}+{self.eps_coef}*eps"
        return str(self.const)


@dataclass(frozen=True)
class PowerLog:
    """x^a (log x)^b (log log x)^c with exact exponents."""

    x: Exponent
    log: Exponent
    loglog: Exponent

    def __call__(self, x, eps: float):
        x = np.asarray(x, float)
        L = np.log(x)
        return x ** self.x.value(eps) * L ** self.log.value(eps) * np.log(L) ** self.loglog.value(eps)


def _E(c, e=0) -> Exponent:
    return Exponent(Fraction(c), Fraction(e))


@dataclass(frozen=True)
class ParamPolicy:
    name: str = "theorem1"
    c_h: float = 1.0
    c_T: float = 1.0
    c_Y: float = 1.0
    alpha: Fraction = Fraction(26, 9)
    beta: Fraction = Fraction(4, 9)
    eps: float = 0.05
    threshold_scale: float = 1.0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in ("theorem1", "theorem2"):
            raise ValueError("policy must be theorem1 or theorem2")
        for nm in ("c_h", "c_T", "c_Y"):
            if not getattr(self, nm) > 0:
                raise ValueError(f"{nm} must be positive")
        if self.name == "theorem2":
            object.__setattr__(self, "alpha", Fraction(self.alpha))
            object.__setattr__(self, "beta", Fraction(self.beta))

    # exact exponent bookkeeping -------------------------------------------

    def Y_shape(self) -> PowerLog:
        a, b = self.alpha, self.beta
        return PowerLog(_E(6 - 2 * a), _E(1 - 2 * b), _E(1 - 2 * b, Fraction(1, 2)))

    def h_shape(self) -> PowerLog:
        if self.name == "theorem1":
            return PowerLog(_E(Fraction(3, 4)), _E(0), _E(0))
        a, b = self.alpha, self.beta
        return PowerLog(_E(a / 4), _E(b / 4), _E(b / 4, Fraction(1, 2)))

    def threshold_shape(self) -> PowerLog:
        a, b = self.alpha, self.beta
        return PowerLog(_E(a), _E(b), _E(b, 2))

    def threshold(self, x):
        return self.threshold_scale * self.threshold_shape()(x, self.eps)


def policy_params(policy: ParamPolicy, x: float) -> tuple[float, float, float | None]:
    """(h, T, Y) at x; Y is None for the first policy."""
    if not x > math.e:
        raise DomainError("policies need x > e")
    if policy.name == "theorem1":
        return policy.c_h * x ** 0.75, policy.c_T * x ** 0.25, None
    Y = policy.c_Y * float(policy.Y_shape()(x, policy.eps))
    h = policy.c_h * float(policy.h_shape()(x, policy.eps))
    return h, policy.c_T * Y * x, Y


def balance_terms(policy: ParamPolicy, x: float) -> dict:
    """The three balanced summands h^2, x Y^2 and threshold / h^2 at x."""
    h, T, Y = policy_params(policy, x)
    out = {"h^2": h * h, "threshold/h^2": float(policy.threshold(x)) / (h * h)}
    if Y is not None:
        out["xY^2"] = x * Y * Y
    return out


# ---------------------------------------------------------------- exponent fit


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    half_width: float
    used: int
    dropped: int
    sign_changes: int
    verdicts: tuple

    def report(self) -> str:
        head = (f"slope {self.slope:.6f} +- {self.half_width:.3g} from {self.used} points "
                f"({self.dropped} near-zero points dropped, {self.sign_changes} sign changes)")
        return "\n".join((head,) + self.verdicts)


REFERENCE_EXPONENTS = (("5/3", 5 / 3), ("3/2", 1.5), ("13/9", 13 / 9))


def fit_power_law(x, E, confidence: float = 0.95) -> ExponentFit:
    """Least-squares fit of log|E| against log x."""
    x = np.asarray(x, float)
    E = np.asarray(E, float)
    if len(x) < 10 or len(x) != len(E):
        raise DegenerateGrid("need at least 10 grid points")
    sgn = np.sign(E[np.abs(E) > ZERO_FLOOR])
    changes = int(np.count_nonzero(sgn[1:] != sgn[:-1]))
    keep = np.abs(E) > ZERO_FLOOR
    if keep.sum() < 3:
        raise DegenerateGrid("fewer than 3 points with |E| above the floor")
    lx, ly = np.log(x[keep]), np.log(np.abs(E[keep]))
    n = len(lx)
    A = np.column_stack([lx, np.ones(n)])
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    dof = max(n - 2, 1)
    s2 = float(resid @ resid) / dof
    sxx = float(np.sum((lx - lx.mean()) ** 2))
    se = math.sqrt(s2 / sxx) if sxx > 0 else math.inf
    hw = float(stats.t.ppf(0.5 + confidence / 2, dof)) * se
    slope = float(coef[0])
    verdicts = []
    for name, ref in REFERENCE_EXPONENTS:
        if abs(slope - ref) <= max(hw, SLOPE_FLOOR):
            v = "consistent with"
        elif slope < ref:
            v = "below"
        else:
            v = "above"
        verdicts.append(f"verdict: slope {slope:.4f} is {v} {name}")
    return ExponentFit(slope, float(coef[1]), hw, n, int(len(x) - n), changes, tuple(verdicts))


def exponent_fit(ledger, spectrum, x_grid) -> ExponentFit:
    """Fit of log|E(x)| against log x with E from the ledger and small zeros."""
    x_grid = np.asarray(x_grid, float)
    if len(x_grid) < 10:
        raise DegenerateGrid("need at least 10 grid points")
    return fit_power_law(x_grid, error_term(ledger, spectrum, x_grid))
