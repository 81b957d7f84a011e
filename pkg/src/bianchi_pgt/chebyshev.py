"""Von Mangoldt weights, integrated Chebyshev functions, li and the Euler product."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import expi

from .errors import DomainError, OutOfRange, PoleAtOne, UncertifiedTorsion
from .geodesics import ConjClass, GeodesicLedger, pi_gamma_array


@dataclass(frozen=True)
class LambdaEntry:
    norm: float
    lam: float
    class_ref: int


def von_mangoldt(C: ConjClass) -> float:
    """N(P) log N(P0) / (m |a - 1/a|^2)."""
    if not C.torsion_certified:
        warnings.warn(UncertifiedTorsion(f"torsion order {C.torsion_m} is not certified"))
    a = C.a_P
    return C.norm * C.log_root_norm / (C.torsion_m * abs(a - 1 / a) ** 2)


class ChebyshevSeries:
    """Norms and weights sorted by norm, with closed-form psi_k evaluation."""

    def __init__(self, norms, lams, X: float, refs=None):
        norms = np.asarray(norms, float)
        lams = np.asarray(lams, float)
        order = np.argsort(norms, kind="stable")
        self.norms = norms[order]
        self.lams = lams[order]
        self.refs = np.arange(len(norms)) if refs is None else np.asarray(refs)[order]
        self.X = float(X)
        if len(self.norms) and self.norms[-1] > self.X:
            raise OutOfRange("norm beyond the series bound")
        self._cum = np.concatenate([[0.0], np.cumsum(self.lams)])

    @classmethod
    def from_ledger(cls, ledger: GeodesicLedger) -> "ChebyshevSeries":
        if len(ledger) and not ledger.torsion_certified.all():
            warnings.warn(UncertifiedTorsion(
                f"{int((~ledger.torsion_certified).sum())} classes use uncertified torsion orders"))
        a = ledger.a
        lam = ledger.norm * ledger.log_root_norm / (ledger.torsion_m * np.abs(a - 1 / a) ** 2)
        return cls(ledger.norm, lam, ledger.X, np.arange(len(ledger)))

    @property
    def entries(self) -> list[LambdaEntry]:
        return [LambdaEntry(float(n), float(l), int(r))
                for n, l, r in zip(self.norms, self.lams, self.refs)]

    def __len__(self):
        return len(self.norms)

    def psi(self, x, k: int = 0):
        """psi_k(x) = (1/k!) sum_{N <= x} Lambda (x - N)^k; x scalar or array."""
        if k not in (0, 1, 2, 3):
            raise ValueError("k must be 0..3")
        xa = np.asarray(x, float)
        if np.any(xa > self.X * (1 + 1e-12)) or np.any(xa <= 0):
            raise OutOfRange("psi evaluated outside (0, X]")
        flat = xa.ravel()
        idx = np.searchsorted(self.norms, flat, side="right")
        out = np.empty(len(flat))
        for j, (xv, i) in enumerate(zip(flat, idx)):
            if k == 0:
                out[j] = np.sum(self.lams[:i])
            else:
                out[j] = np.sum(self.lams[:i] * (xv - self.norms[:i]) ** k) / math.factorial(k)
        return out.reshape(xa.shape) if xa.ndim else float(out[0])


def psi_k(series: ChebyshevSeries, x, k: int):
    return series.psi(x, k)


def log_integral(y):
    """Principal-value li(y) = PV int_0^y dt / log t = Ei(log y)."""
    ya = np.asarray(y, float)
    if np.any(ya <= 0):
        raise DomainError("li needs y > 0")
    if np.any(ya == 1):
        raise PoleAtOne("li has a logarithmic pole at 1")
    out = expi(np.log(ya))
    return out if ya.ndim else float(out)


def error_term(ledger: GeodesicLedger, spectrum, x):
    """E(x) = pi(x) - li(x^2) - sum over exceptional zeros of li(x^s)."""
    xa = np.asarray(x, float)
    E = pi_gamma_array(ledger, xa.ravel()).astype(float) - log_integral(xa.ravel() ** 2)
    for s, m in spectrum.exceptional:
        E = E - m * log_integral(xa.ravel() ** float(s))
    return E.reshape(xa.shape) if xa.ndim else float(E[0])


@dataclass(frozen=True)
class EulerProduct:
    value: complex
    log_value: complex
    tail_bound: float
    factors: int


def selberg_euler_product(ledger: GeodesicLedger, s: complex, tail_tol: float = 1e-16,
                          max_order: int | None = None) -> EulerProduct:
    """Truncated double product over primitive classes with N(P0) <= X.

    Pairs (k, l) with k = l mod m are kept while N^(-Re s - k - l) >= tail_tol
    (and k + l <= max_order when given).  ``tail_bound`` estimates the omitted
    classes with N > X through pi(t) <= t^2 / log t:
    2 X^(2 - sigma) / ((sigma - 2) log X)."""
    s = complex(s)
    sigma = s.real
    if not sigma > 2:
        raise DomainError("the Euler product converges only for Re s > 2")
    prim = np.flatnonzero(ledger.primitive)
    N = ledger.norm[prim]
    loga = np.log(ledger.a[prim])
    m = ledger.torsion_m[prim]
    terms = []
    factors = 0
    j = 0
    while max_order is None or j <= max_order:
        live = N ** (-sigma - j) >= tail_tol
        if not live.any():
            break
        for k in range(j + 1):
            l = j - k
            sel = live & ((k - l) % m == 0)
            if not sel.any():
                continue
            z = np.exp(-2 * k * loga[sel] - 2 * l * np.conj(loga[sel]) - s * np.log(N[sel]))
            terms.append(np.log1p(-z))
            factors += int(sel.sum())
        j += 1
    logz = complex(np.sum(np.concatenate(terms))) if terms else 0j
    X = ledger.X
    tail = 2 * X ** (2 - sigma) / ((sigma - 2) * math.log(X)) if X > 1 else math.inf
    return EulerProduct(complex(np.exp(logz)), logz, tail, factors)


def psi_table(ledger: GeodesicLedger, spectrum, xs) -> list[tuple]:
    """Rows (x, psi0, psi1, psi2, psi3, pi, li(x^2), E(x))."""
    series = ChebyshevSeries.from_ledger(ledger)
    xs = np.asarray(xs, float)
    cols = [series.psi(xs, k) for k in range(4)]
    pis = pi_gamma_array(ledger, xs)
    lis = log_integral(xs ** 2)
    E = error_term(ledger, spectrum, xs)
    return [(float(x), *(float(c[i]) for c in cols), int(pis[i]), float(lis[i]), float(E[i]))
            for i, x in enumerate(xs)]
