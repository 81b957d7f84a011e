"""Exceptional sets E_n: block sums, logarithmic measure and the mean-square
comparison behind it."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numba as nb
import numpy as np
from scipy.integrate import simpson

from .errors import EmptyRange, ZeroDenominator
from .spectrum import SpectrumSet
from .unsmooth import ParamPolicy, policy_params


@dataclass(frozen=True)
class BlockResult:
    n: int
    mu_log: float
    grid_points: int
    exceed_fraction: float
    lhs_integral: float
    rhs_integral: float
    Y: float = 0.0
    T: float = 0.0

    @property
    def ratio(self) -> float:
        return self.lhs_integral / self.rhs_integral if self.rhs_integral > 0 else math.nan

    @property
    def cell_weight(self) -> float:
        return 1.0 / (self.grid_points - 1)


def _window(spectrum: SpectrumSet, Y: float, T: float):
    t = spectrum.critical
    sel = (t > Y) & (t <= T)
    return t[sel], spectrum.critical_mult[sel].astype(float)


def coefficients(t: np.ndarray) -> np.ndarray:
    """1 / (s (s+1) (s+2)) at s = 1 + it."""
    s = 1 + 1j * np.asarray(t, float)
    return 1.0 / (s * (s + 1) * (s + 2))


@nb.njit(cache=True)
def _dirichlet_grid(t, w, u0, du, m):
    """sum_j w_j exp(i t_j u) on u = u0 + k du, k < m, by phase stepping."""
    out = np.zeros(m, np.complex128)
    for j in range(t.shape[0]):
        z = np.exp(1j * t[j] * u0) * w[j]
        step = np.exp(1j * t[j] * du)
        for k in range(m):
            out[k] += z
            z *= step
    return out


@nb.njit(cache=True)
def _overlap_energy(t, w):
    """sum_{j,k} w_j w_k max(0, 1 - |t_j - t_k|) for sorted t."""
    n = t.shape[0]
    acc = 0.0
    for j in range(n):
        acc += w[j] * w[j]
        for k in range(j + 1, n):
            d = t[k] - t[j]
            if d >= 1.0:
                break
            acc += 2.0 * w[j] * w[k] * (1.0 - d)
    return acc


def block_sum(spectrum: SpectrumSet, x: float, Y: float, T: float) -> complex:
    """S(x) over Y < |t_n| <= T, both signs of t (twice the real part)."""
    if not 0 < Y < T:
        raise ValueError("need 0 < Y < T")
    t, m = _window(spectrum, Y, T)
    if len(t) == 0:
        warnings.warn(EmptyRange(f"no spectral parameters in ({Y}, {T}]"))
        return 0j
    s = 1 + 1j * t
    terms = m * np.exp((s + 2) * math.log(x)) / (s * (s + 1) * (s + 2))
    return complex(2.0 * np.sum(terms).real, 0.0)


def normalized_sum(spectrum: SpectrumSet, u: np.ndarray, Y: float, T: float) -> np.ndarray:
    """D(x) = S(x) / x^3 at x = exp(u) on a uniform u grid (real valued)."""
    t, m = _window(spectrum, Y, T)
    if len(t) == 0:
        return np.zeros(len(u))
    w = m * coefficients(t)
    du = (u[-1] - u[0]) / (len(u) - 1) if len(u) > 1 else 0.0
    return 2.0 * _dirichlet_grid(t, w.astype(np.complex128), float(u[0]), du, len(u)).real


def window_weight(spectrum: SpectrumSet, t: float, Y: float, T: float) -> float:
    """Sum over Y < t_n <= T with t < t_n <= t + 1 of |s (s+1) (s+2)|^-1."""
    if t < 0:
        raise ValueError("t must be non-negative")
    tt, m = _window(spectrum, Y, T)
    sel = (tt > t) & (tt <= t + 1)
    return float(np.sum(m[sel] * np.abs(coefficients(tt[sel]))))


def rhs_integral(spectrum: SpectrumSet, Y: float, T: float) -> float:
    """Integral over the real line of the squared window mass, both signs of t."""
    t, m = _window(spectrum, Y, T)
    if len(t) == 0:
        return 0.0
    return 2.0 * _overlap_energy(t, m * np.abs(coefficients(t)))


def lhs_integral(spectrum: SpectrumSet, n: int, Y: float, T: float, points: int = 4097) -> float:
    """Integral over [e^n, e^(n+1)) of D(x)^2 dx/x, Simpson in u = log x."""
    u = np.linspace(n, n + 1, points)
    D = normalized_sum(spectrum, u, Y, T)
    return float(simpson(D * D, x=u))


def gallagher_ratio(spectrum: SpectrumSet, n: int, Y: float, T: float, points: int = 4097) -> float:
    rhs = rhs_integral(spectrum, Y, T)
    if rhs == 0:
        raise ZeroDenominator(f"no spectral parameters in ({Y}, {T}]")
    return lhs_integral(spectrum, n, Y, T, points) / rhs


def _measure(f: np.ndarray) -> float:
    """Lebesgue measure of {f > 0} on [0, 1] from node values, linear in each cell."""
    f0, f1 = f[:-1], f[1:]
    frac = np.where((f0 > 0) & (f1 > 0), 1.0, 0.0)
    cross = (f0 > 0) != (f1 > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        part = np.where(f0 > 0, f0 / (f0 - f1), f1 / (f1 - f0))
    frac = np.where(cross, part, frac)
    return float(np.sum(frac)) / len(frac)


def exceptional_measure(spectrum: SpectrumSet, n: int, policy: ParamPolicy,
                        grid_density: int = 2048, T: float | None = None,
                        lhs_points: int = 4097) -> BlockResult:
    """Logarithmic measure of E_n inside [e^n, e^(n+1)).

    Y and the default T come from the policy at x = e^n so they are constant on
    the block.  The indicator of |S(x)| > threshold is integrated on a uniform
    grid in log x, with crossings located by linear interpolation."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if grid_density < 64:
        raise ValueError("grid_density must be at least 64")
    _, T_pol, Y = policy_params(policy, math.exp(n))
    T = T_pol if T is None else T
    u = np.linspace(n, n + 1, grid_density + 1)
    x = np.exp(u)
    t, _ = _window(spectrum, Y, T)
    if len(t):
        S = np.abs(normalized_sum(spectrum, u, Y, T)) * x ** 3
    else:
        S = np.zeros(len(u))
    f = S - policy.threshold(x)
    mu = _measure(f)
    exceed = float(np.count_nonzero(f[:-1] > 0)) / grid_density
    lhs = lhs_integral(spectrum, n, Y, T, lhs_points) if len(t) and lhs_points else 0.0
    rhs = rhs_integral(spectrum, Y, T)
    return BlockResult(n, mu, grid_density + 1, exceed, lhs, rhs, float(Y), float(T))


def envelope(results, eps: float = 0.05) -> float:
    """max over blocks of mu_log * n * (log n)^(1 + eps)."""
    return max(r.mu_log * r.n * math.log(r.n) ** (1 + eps) for r in results)
