import cmath
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bianchi_pgt.errors import EmptyRange, ZeroDenominator
from bianchi_pgt.gallagher import (BlockResult, _measure, block_sum, coefficients, envelope,
                                   exceptional_measure, gallagher_ratio, lhs_integral,
                                   normalized_sum, rhs_integral, window_weight)
from bianchi_pgt.spectrum import SpectrumSet, WeylModel, synth_spectrum
from bianchi_pgt.unsmooth import ParamPolicy, policy_params

UNIT = 6 * math.pi ** 2


@pytest.fixture(scope="module")
def unit_spectrum():
    return synth_spectrum(WeylModel(volume=UNIT), 60.0)


@pytest.fixture(scope="module")
def noisy_spectrum():
    return synth_spectrum(WeylModel("congruence_T2", 0.30532186472, 0.1), 200.0, seed=0)


def test_block_sum_empty():
    with pytest.warns(EmptyRange):
        assert block_sum(SpectrumSet(critical=[50.0]), 10.0, 1.0, 5.0) == 0


def test_single_term_modulus():
    t = 7.3
    S = SpectrumSet(critical=[t])
    c = coefficients(np.array([t]))[0]
    bound = 2 / abs(c ** -1)
    for x in np.geomspace(3, 300, 25):
        assert abs(block_sum(S, x, 1.0, 10.0)) <= bound * x ** 3 * (1 + 1e-12)
    # choose x so the phase of x^(it) c vanishes
    x = math.exp((2 * math.pi * 3 - cmath.phase(c)) / t)
    assert abs(block_sum(S, x, 1.0, 10.0)) == pytest.approx(bound * x ** 3, rel=1e-10)


def test_block_sum_naive(unit_spectrum):
    x, Y, T = 40.0, 5.0, 50.0
    total = 0.0
    for t in unit_spectrum.critical:
        if Y < t <= T:
            s = complex(1, t)
            total += 2 * (cmath.exp((s + 2) * math.log(x)) / (s * (s + 1) * (s + 2))).real
    assert block_sum(unit_spectrum, x, Y, T).real == pytest.approx(total, rel=1e-12)


def test_phase_stepping_matches_direct(unit_spectrum):
    u = np.linspace(3.0, 4.0, 257)
    D = normalized_sum(unit_spectrum, u, 5.0, 50.0)
    for j in (0, 100, 256):
        x = math.exp(u[j])
        assert D[j] == pytest.approx(block_sum(unit_spectrum, x, 5.0, 50.0).real / x ** 3,
                                     rel=1e-9, abs=1e-13)


def test_single_term_ratio():
    t, n = 4.2, 6
    S = SpectrumSet(critical=[t])
    c = coefficients(np.array([t]))[0]
    phi = cmath.phase(c)
    exact = 2 * abs(c) ** 2 * (1 + (math.sin(2 * t * (n + 1) + 2 * phi)
                                    - math.sin(2 * t * n + 2 * phi)) / (2 * t))
    assert lhs_integral(S, n, 1.0, 10.0) == pytest.approx(exact, rel=1e-9)
    assert rhs_integral(S, 1.0, 10.0) == pytest.approx(2 * abs(c) ** 2, rel=1e-14)
    assert gallagher_ratio(S, n, 1.0, 10.0) == pytest.approx(exact / (2 * abs(c) ** 2), rel=1e-9)


def test_ratio_zero_denominator():
    with pytest.raises(ZeroDenominator):
        gallagher_ratio(SpectrumSet(), 5, 1.0, 10.0)


def test_window_weight_partition(unit_spectrum):
    Y, T = 5.0, 45.0
    starts = np.arange(Y, T, 1.0)
    parts = [window_weight(unit_spectrum, t, Y, T) for t in starts]
    tt = unit_spectrum.critical
    sel = (tt > Y) & (tt <= T)
    full = math.fsum(np.abs(coefficients(tt[sel])))
    assert math.fsum(parts) == pytest.approx(full, rel=1e-13)
    assert window_weight(SpectrumSet(), 3.0, 1.0, 10.0) == 0.0


def test_window_weight_decay(unit_spectrum):
    ts = np.array([10.0, 20.0, 40.0])
    w = np.array([window_weight(unit_spectrum, t, 1.0, 60.0) for t in ts])
    scaled = w * ts
    print("t * window_weight(t):", np.round(scaled, 4).tolist())
    assert np.all(scaled > 1) and np.all(scaled < 5)
    assert np.all(np.diff(w) < 0)


@given(st.floats(-1, 1), st.floats(-1, 1))
def test_measure_linear(a, b):
    # exact on a piecewise-linear function sampled at the nodes
    f = np.linspace(a, b, 2)
    if a == b:
        assert _measure(f) == (1.0 if a > 0 else 0.0)
        return
    root = a / (a - b)
    if a > 0 and b > 0:
        exp = 1.0
    elif a > 0:
        exp = root
    elif b > 0:
        exp = 1 - root
    else:
        exp = 0.0
    assert _measure(f) == pytest.approx(exp, abs=1e-12)


def test_empty_block(unit_spectrum):
    r = exceptional_measure(SpectrumSet(), 6, ParamPolicy("theorem2"), 128)
    assert r.mu_log == 0 and r.rhs_integral == 0
    assert math.isnan(r.ratio)


def test_zero_threshold(noisy_spectrum):
    r = exceptional_measure(noisy_spectrum, 7, ParamPolicy("theorem2", threshold_scale=0.0), 256,
                            lhs_points=0)
    assert r.mu_log == 1.0 and r.exceed_fraction == 1.0


def test_block_parameters(noisy_spectrum):
    p = ParamPolicy("theorem2")
    r = exceptional_measure(noisy_spectrum, 8, p, 128, lhs_points=0)
    h, T, Y = policy_params(p, math.exp(8))
    assert r.Y == pytest.approx(Y) and r.T == pytest.approx(T)
    assert r.cell_weight == pytest.approx(1 / 128)


def test_measure_convergence(noisy_spectrum):
    # a diagnostic threshold small enough that E_n is non-empty
    p = ParamPolicy("theorem2", threshold_scale=2e-3)
    for n in (6, 9):
        a = exceptional_measure(noisy_spectrum, n, p, 1024, lhs_points=0)
        b = exceptional_measure(noisy_spectrum, n, p, 2048, lhs_points=0)
        assert 0 <= a.mu_log <= 1
        assert abs(a.mu_log - b.mu_log) <= a.cell_weight


def test_envelope():
    rs = [BlockResult(5, 0.1, 65, 0.1, 0, 0), BlockResult(6, 0.0, 65, 0.0, 0, 0)]
    assert envelope(rs, 0.05) == pytest.approx(0.1 * 5 * math.log(5) ** 1.05)


def test_ratio_bounded(noisy_spectrum):
    p = ParamPolicy("theorem2")
    ratios = []
    for n in (5, 10, 15):
        _, T, Y = policy_params(p, math.exp(n))
        ratios.append(gallagher_ratio(noisy_spectrum, n, Y, T))
    print("lhs/rhs for n = 5, 10, 15:", np.round(ratios, 4).tolist())
    assert max(ratios) < 10
