import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from perispec.errors import DomainError, InvalidParameter, NonConvergence, PoleError
from perispec.specfun import digamma, euler_gamma, gamma_fn, pfq, rgamma


def exact_partial_sum(numer, denom, z, terms):
    """Rational partial sum of a pFq series with rational parameters."""
    numer = [Fraction(a) for a in numer]
    denom = [Fraction(b) for b in denom]
    z = Fraction(z)
    total = Fraction(0)
    term = Fraction(1)
    for m in range(terms):
        total += term
        ratio = z / (m + 1)
        for a in numer:
            ratio *= a + m
        for b in denom:
            ratio /= b + m
        term *= ratio
    return total


def test_pfq_at_zero_is_one():
    r = pfq([1, 1.5], [2, 2.5, 2.5], 0)
    assert r.value == 1.0
    assert r.converged


def test_pfq_sine_identity():
    # 1F2(a; a, 3/2; -z^2/4) = 0F1(; 3/2; -z^2/4) = sin(z)/z, zero at z = pi
    r = pfq([1.5], [1.5, 1.5], -math.pi**2 / 4)
    assert abs(r.value) < 1e-12


@pytest.mark.parametrize("z", [0.3, 1.7, 4.0, 9.5])
def test_pfq_sinc(z):
    assert pfq([], [1.5], -z * z / 4).value == pytest.approx(math.sin(z) / z, rel=1e-13)


def test_pfq_matches_exact_rational_sum():
    value = pfq([0.5], [2.5, 1.5], -1).value
    oracle = exact_partial_sum([Fraction(1, 2)], [Fraction(5, 2), Fraction(3, 2)], -1, 50)
    assert value == pytest.approx(float(oracle), rel=1e-15)


def test_pfq_exponential():
    assert pfq([], [], 1.0).value == pytest.approx(math.e, rel=1e-15)
    assert pfq([], [], -3.0).value == pytest.approx(math.exp(-3.0), rel=1e-12)


def test_pfq_bessel_j0():
    from scipy.special import j0
    for x in (0.5, 3.0, 7.0):
        assert pfq([], [1.0], -x * x / 4).value == pytest.approx(j0(x), rel=1e-12)


def test_pfq_rejects_bad_parameters():
    with pytest.raises(InvalidParameter):
        pfq([1, 2, 3], [1, 2], 0.5)
    with pytest.raises(InvalidParameter):
        pfq([1], [-2.0, 1.5], 0.5)
    with pytest.raises(InvalidParameter):
        pfq([1], [0.0], 0.5)


def test_pfq_term_cap():
    with pytest.raises(NonConvergence):
        pfq([1.0], [1.5], -2000.0, max_terms=10)


def test_pfq_flags_cancellation():
    r = pfq([0.5], [2.5, 1.5], -900.0, cancellation_limit=1e5)
    assert not r.converged
    assert r.diagnostic == "loss_of_precision"
    assert r.cancellation_ratio > 1e5


def test_series_result_invariants():
    r = pfq([0.5], [2.5, 1.5], -10.0)
    assert r.converged and r.terms_used < 20000
    assert r.max_term_magnitude >= abs(r.value)


params = st.floats(0.1, 6.0, allow_nan=False)


@given(st.lists(params, min_size=0, max_size=2), st.lists(params, min_size=2, max_size=3),
       st.floats(-20, 5), st.randoms(use_true_random=False))
def test_pfq_permutation_invariance(numer, denom, z, rnd):
    a = pfq(numer, denom, z).value
    numer2, denom2 = numer[:], denom[:]
    rnd.shuffle(numer2)
    rnd.shuffle(denom2)
    b = pfq(numer2, denom2, z).value
    assert b == pytest.approx(a, rel=1e-14, abs=1e-300)


@given(params, params, params, st.floats(-25, 5))
def test_pfq_order_reduction(a, b, c, z):
    reduced = pfq([a], [c, b], z, reduce_pairs=False)
    full = pfq([a, b], [b, c, b], z, reduce_pairs=False)
    if reduced.converged:
        scale = max(abs(reduced.value), reduced.max_term_magnitude * 1e-4)
        assert abs(full.value - reduced.value) <= 1e-12 * scale


@given(st.floats(-30, -0.01))
def test_alternating_value_bounded_by_max_term(z):
    r = pfq([0.7], [1.3, 2.1], z)
    assert abs(r.value) <= r.max_term_magnitude


def test_gamma_values():
    assert gamma_fn(1) == pytest.approx(1.0, rel=1e-15)
    assert gamma_fn(1.5) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-14)
    assert gamma_fn(5) == pytest.approx(24.0, rel=1e-14)
    assert gamma_fn(-0.5) == pytest.approx(-2 * math.sqrt(math.pi), rel=1e-13)


@given(st.floats(0.01, 0.99))
def test_gamma_reflection(x):
    assert gamma_fn(x) * gamma_fn(1 - x) == pytest.approx(math.pi / math.sin(math.pi * x), rel=1e-13)


def test_gamma_poles():
    for x in (0, -1, -7):
        with pytest.raises(PoleError):
            gamma_fn(x)
    assert rgamma(-3) == 0.0
    assert rgamma(4) == pytest.approx(1 / 6, rel=1e-14)


def test_digamma_values():
    g = euler_gamma()
    assert digamma(1) == pytest.approx(-g, rel=1e-14)
    assert digamma(2) - digamma(1) == pytest.approx(1.0, rel=1e-14)
    assert digamma(0.5) == pytest.approx(-g - 2 * math.log(2), rel=1e-13)


def test_digamma_against_scipy():
    from scipy.special import psi
    for x in np.geomspace(1e-3, 1e3, 200):
        assert digamma(x) == pytest.approx(psi(x), rel=1e-10, abs=1e-14)


@given(st.floats(0.1, 20))
def test_digamma_recurrence(x):
    assert digamma(x + 1) == pytest.approx(digamma(x) + 1 / x, rel=1e-12)


def test_digamma_domain():
    with pytest.raises(PoleError):
        digamma(0)
    with pytest.raises(PoleError):
        digamma(-2)
    with pytest.raises(DomainError):
        digamma(-0.5)


def test_euler_gamma():
    g = euler_gamma()
    assert g == pytest.approx(0.5772156649015329, rel=1e-15)
    assert abs(g + digamma(1)) < 1e-12
    assert 0.57 < g < 0.58
