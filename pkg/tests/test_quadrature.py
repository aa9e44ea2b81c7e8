import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from warpscatter.quadrature import adaptive_simpson, power_tail


def test_polynomial_exact():
    res = adaptive_simpson(lambda x: 3 * x**2 - x**3, [0.0, 2.0])
    assert res.value == pytest.approx(4.0, abs=1e-13)
    assert res.converged


@pytest.mark.parametrize("f, a, b", [
    (np.sin, 0.0, math.pi),
    (lambda x: np.exp(-x**2), -5.0, 5.0),
    (lambda x: 1.0 / (1.0 + x**2), -20.0, 20.0),
    (lambda x: np.sqrt(np.abs(x)), -1.0, 1.0),
])
def test_matches_scipy_quad(f, a, b):
    oracle = quad(f, a, b, points=[0.0] if a < 0 < b else None, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
    res = adaptive_simpson(f, [a, 0.0, b] if a < 0 < b else [a, b], rtol=1e-11)
    assert res.value == pytest.approx(oracle, rel=1e-9)


@settings(max_examples=200, deadline=None)
@given(c=st.floats(0.1, 5), w=st.floats(0.5, 4))
def test_error_estimate_is_honest(c, w):
    f = lambda x: np.exp(-c * (x - 0.3) ** 2) * np.cos(w * x)  # noqa: E731
    res = adaptive_simpson(f, np.linspace(-6, 6, 5), rtol=1e-8)
    exact = quad(f, -6, 6, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
    # either the estimate covers the error or the error is within the requested
    # tolerance measured against the size of the integrand, int |f| <= sqrt(pi / c)
    err = abs(res.value - exact)
    assert err <= 10 * res.error or err <= 1e-8 * math.sqrt(math.pi / c)


def test_power_tail_exact_for_pure_power():
    # int_10^inf x^-3 dx = 1 / 200
    t = power_tail(lambda x: np.abs(x) ** -3.0, 10.0, "right")
    assert t.finite
    assert t.exponent == pytest.approx(-3.0, abs=1e-10)
    assert t.value == pytest.approx(1 / 200, rel=1e-9)
    t = power_tail(lambda x: np.abs(x) ** -3.0, 10.0, "left")
    assert t.value == pytest.approx(1 / 200, rel=1e-9)


def test_power_tail_divergent():
    t = power_tail(lambda x: 1.0 / np.abs(x), 10.0, "right")
    assert not t.finite and t.value == math.inf


def test_power_tail_compact_support():
    t = power_tail(lambda x: np.zeros_like(x), 10.0, "right")
    assert t.finite and t.value == 0.0
