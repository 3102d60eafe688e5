"""Harmonic / digamma kernel tests."""

import math

import mpmath as mp
import numpy as np
import pytest

from divexp import EULER_GAMMA, NumericDomainError, digamma, euler_gamma, harmonic_int, harmonic_real
from divexp.selftest import hp_digamma


def test_harmonic_int_small_values():
    assert harmonic_int(0) == 0.0
    assert harmonic_int(1) == 1.0
    assert harmonic_int(2) == 1.5
    assert harmonic_int(6) == pytest.approx(49 / 20, rel=1e-15)


def test_harmonic_int_rejects_negative():
    with pytest.raises(NumericDomainError):
        harmonic_int(-1)


def test_harmonic_real_examples():
    assert harmonic_real(0.0) == pytest.approx(0.0, abs=1e-15)
    # h(1/2) = 2 - 2 log 2
    assert harmonic_real(0.5) == pytest.approx(2 - 2 * math.log(2), rel=1e-13)
    assert harmonic_real(3.0) == pytest.approx(11 / 6, rel=1e-13)


def test_harmonic_real_domain():
    with pytest.raises(NumericDomainError):
        harmonic_real(-1.0)
    with pytest.raises(NumericDomainError):
        harmonic_real(-1.5)


def test_digamma_reference_points():
    assert digamma(1.0) == pytest.approx(-EULER_GAMMA, rel=1e-14)
    assert digamma(2.0) == pytest.approx(1 - EULER_GAMMA, rel=1e-14)
    ref = float(hp_digamma(10.5))
    assert digamma(10.5) == pytest.approx(ref, rel=1e-13)


def test_digamma_domain_error():
    with pytest.raises(NumericDomainError):
        digamma(0.0)
    with pytest.raises(NumericDomainError):
        digamma(-2.5)


def test_high_precision_oracle_against_mpmath():
    # Sanity for the oracle itself: 30+ digits of agreement with mpmath.
    mp.mp.dps = 40
    for x in (1e-6, 0.37, 1.0, 1.4616, 7.25, 123.0, 1e6):
        ours = hp_digamma(x)
        ref = mp.digamma(mp.mpf(repr(x)))
        assert abs(float(mp.mpf(str(ours)) - ref)) < 1e-25 * max(1.0, abs(float(ref)))


def test_euler_gamma_value_and_limit():
    g = euler_gamma()
    assert g == pytest.approx(0.5772156649015329, abs=1e-16)
    # h(k) = log k + gamma + O(1/k)
    gap = harmonic_int(10 ** 6) - math.log(10 ** 6) - g
    assert 0 < gap < 1e-6
    assert 1 - g == pytest.approx(0.4228, abs=5e-5)


def test_harmonic_agreement_int_vs_real():
    ks = np.unique(np.geomspace(1, 10_000, 200).astype(int))
    for k in ks:
        hi = harmonic_int(int(k))
        hr = harmonic_real(float(k))
        assert abs(hr - hi) <= 1e-12 * hi


def test_harmonic_minus_log_monotone():
    ks = list(range(1, 2001)) + [5000, 9999, 10_000]
    vals = [harmonic_int(k) - math.log(k) for k in ks]
    assert all(v > 0 for v in vals)
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_harmonic_recurrence():
    zs = np.linspace(-0.9, 100.0, 500)
    lhs = harmonic_real(zs + 1.0) - harmonic_real(zs)
    rhs = 1.0 / (zs + 1.0)
    assert np.abs(lhs - rhs).max() <= 1e-11


def test_digamma_matches_lgamma_finite_difference():
    # Independent oracle: centered difference of the stdlib log-gamma.
    xs = np.linspace(0.5, 50.0, 100)
    h = 1e-5
    for x in xs:
        fd = (math.lgamma(x + h) - math.lgamma(x - h)) / (2 * h)
        assert abs(digamma(float(x)) - fd) <= 1e-6


def test_digamma_vectorized_matches_scalar():
    xs = np.array([1e-6, 0.3, 1.0, 2.5, 17.0, 1e8])
    vec = digamma(xs)
    for i, x in enumerate(xs):
        assert vec[i] == digamma(float(x))


def test_digamma_accuracy_sample_of_log_grid():
    # A light preview of the acceptance sweep (full 1000 points run there).
    for x in np.logspace(-6, 8, 29):
        ref = float(hp_digamma(float(x)))
        got = digamma(float(x))
        assert abs(got - ref) <= 1e-12 * abs(ref)
