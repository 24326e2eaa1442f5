import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hpcalc.errors import InputError, ParameterError
from hpcalc.functions import HalfPlaneFunction as H, hinf_norm


def test_rational_evaluation_and_poles():
    f = H.rational([1], [2, 3, 1])  # 1/((z+1)(z+2))
    z = np.array([0.3 + 2j, -0.5j, 4.0])
    assert np.allclose(f(z), 1 / ((z + 1) * (z + 2)), rtol=1e-14)
    assert np.allclose(np.sort(f.poles.real), [-2, -1])
    assert f.alpha == pytest.approx(-1.0)
    assert f.decay_order == pytest.approx(1.0) and f.in_decaying_class


def test_pole_inside_domain_rejected():
    with pytest.raises(ParameterError):
        H.rational([1], [-1, 1], alpha=0.0)


def test_exponential_large_rate_no_underflow():
    f = H.exponential(500.0, shift=2.0)
    assert f(2.0 + 0.3j) == pytest.approx(np.exp(-150j), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31))
def test_derivative_matches_finite_difference(seed):
    rng = np.random.default_rng(seed)
    num = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    roots = -rng.uniform(0.5, 2, 3) + 1j * rng.uniform(-2, 2, 3)
    f = H.exp_rational([(1.0, rng.uniform(0, 2), num, np.poly(roots)[::-1])])
    z = complex(rng.uniform(0, 2), rng.uniform(-3, 3))
    h = 1e-5
    fd = (f(z + h) - f(z - h)) / (2 * h)
    assert f.derivative(1)(z) == pytest.approx(fd, rel=1e-6, abs=1e-9)


def test_constant_derivative_vanishes():
    assert H.constant(3.0).is_constant
    assert not H.constant(3.0).derivative(2).blocks


def test_product():
    f = H.rational([1], [1, 1])
    g = H.exponential(0.7)
    z = np.array([1 + 1j, 2 - 3j])
    assert np.allclose((f * g)(z), f(z) * g(z), rtol=1e-14)


def test_hinf_norm_examples():
    # |1/(1+z)| on Re z > 0 peaks at z = 0
    assert hinf_norm(H.rational([1], [1, 1]), 0.0) == pytest.approx(1.0, rel=1e-10)
    # |exp(-z)| on Re z > -1 has sup e
    assert hinf_norm(H.exponential(1.0), -1.0) == pytest.approx(math.e, rel=1e-10)
    # Laplace transform of e^{-t}: same as 1/(1+z) up to quadrature
    s = np.linspace(0, 40, 8001)
    f = H.laplace_of_density(s, np.exp(-s))
    assert hinf_norm(f, 0.0) == pytest.approx(1.0, rel=1e-5)
    assert f(1j * 2.0) == pytest.approx(1 / (1 + 2j), abs=1e-5)


def test_json_roundtrip():
    for f in (H.rational([1, 2j], [2, 3, 1]), H.exp_rational([(2, 0.5, [1], [1, 1], 0.25)]),
              H.laplace_of_density([0, 1, 2], [1, 0.5, 0.25])):
        g = H.from_json(f.to_json())
        z = np.array([0.5 + 1j, 3 - 2j])
        assert np.allclose(f(z), g(z), rtol=1e-14)


def test_json_rejects_bad_variant():
    with pytest.raises(InputError):
        H.from_json({"variant": "Spline"})
    with pytest.raises(InputError):
        H.from_json({"variant": "Rational", "numerator": [1], "denominator": [1, 1], "decayOrder": 5})
