import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hpcalc.errors import AbscissaError, ParameterError, SpectrumHit, TailBoundFailure
from hpcalc.functions import HalfPlaneFunction as H
from hpcalc.funcalc import (derivative_calculus_eval, dunford_eval, half_plane_type_check, regularized_eval,
                            resolvent, resolvent_sup, semigroup_exp)
from hpcalc.quadrature import QuadratureConfig

from conftest import decaying_corpus, eig_oracle, hilbert_op, jordan, random_diagonalizable


def test_resolvent_examples():
    assert np.allclose(resolvent(hilbert_op(np.diag([1.0, 2.0])), 0).entries, np.diag([-1, -0.5]))
    # (0 - J)^-1 = -J^-1 with J^-1 = [[1, -1], [0, 1]]
    R = resolvent(hilbert_op(jordan(1.0)), 0).entries
    assert np.allclose(R, [[-1, 1], [0, -1]])
    assert np.allclose((0 * np.eye(2) - jordan(1.0)) @ R, np.eye(2))
    with pytest.raises(SpectrumHit):
        resolvent(hilbert_op(np.diag([1.0, 2.0])), 2.0)


def test_half_plane_type_examples():
    rep = half_plane_type_check(hilbert_op(np.diag([1.0, 2.0])), 1.0, [0.0])
    assert rep.verdict == "pass" and rep.sups[0] == pytest.approx(1.0, rel=1e-12)
    rep = half_plane_type_check(hilbert_op(np.diag([-1.0])), 0.0)
    assert rep.verdict == "fail" and rep.witness == -1


def test_resolvent_sup_jordan_against_dense_grid():
    A = hilbert_op(jordan(1.0))
    sup, t, stable = resolvent_sup(A, 0.0)
    tt = np.linspace(-20, 20, 200001)
    dense = max(np.linalg.norm(resolvent(A, 1j * x).entries, 2) for x in tt[::100])
    assert stable and sup >= dense * (1 - 1e-9)


def test_regularization_example():
    A = hilbert_op(np.diag([1.0, 2.0]))
    e = H.rational([1], [1, 2, 1])  # (z+1)^-2 = (mu - z)^-2 with mu = -1
    assert np.allclose(dunford_eval(A, e).entries, np.diag([1 / 4, 1 / 9]), atol=1e-10)


def test_regularized_unit_and_zero(rng):
    A, V, lam = random_diagonalizable(rng, 4)
    assert np.allclose(regularized_eval(A, H.constant(1.0)).entries, np.eye(4), atol=1e-8)
    assert np.allclose(regularized_eval(A, H.constant(0.0)).entries, 0, atol=1e-12)


def test_regularized_exponential_matches_semigroup(rng):
    A, V, lam = random_diagonalizable(rng, 5)
    for t in (0.3, 1.0, 2.5):
        got = regularized_eval(A, H.exponential(t)).entries
        ref = semigroup_exp(A, t).entries
        assert np.linalg.norm(got - ref) <= 1e-7 * np.linalg.norm(ref)


def test_regularized_eigen_oracle(rng):
    A, V, lam = random_diagonalizable(rng, 5)
    f = H.exp_rational([(1, 1, [1], [1, 2, 1])])  # e^{-z}(z+1)^-2
    ref = eig_oracle(V, lam, f)
    assert np.linalg.norm(dunford_eval(A, f).entries - ref) <= 1e-6 * np.linalg.norm(ref)
    g = H.exponential(0.5) * H.rational([1, 2], [3, 1])  # bounded, not decaying
    ref = eig_oracle(V, lam, g)
    assert np.linalg.norm(regularized_eval(A, g).entries - ref) <= 1e-6 * np.linalg.norm(ref)


def test_semigroup_examples():
    A = hilbert_op(np.diag([1.0, 2.0]))
    assert np.allclose(semigroup_exp(A, 0).entries, np.eye(2))
    assert np.allclose(semigroup_exp(A, 1).entries, np.diag([np.exp(-1), np.exp(-2)]), rtol=1e-14)


@pytest.mark.parametrize("k", range(4))
def test_delta_independence(k):
    rng = np.random.default_rng(100 + k)
    A, V, lam = random_diagonalizable(rng, 4)
    f = decaying_corpus()[k]
    r1 = dunford_eval(A, f, QuadratureConfig(delta=0.1))
    r2 = dunford_eval(A, f, QuadratureConfig(delta=0.4))
    assert np.max(np.abs(r1.entries - r2.entries)) <= 10 * (r1.error + r2.error) + 1e-9


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31), st.integers(0, 9), st.integers(0, 9))
def test_multiplicativity(seed, i, j):
    rng = np.random.default_rng(seed)
    A, V, lam = random_diagonalizable(rng, 4)
    c = decaying_corpus()
    f, g = c[i], c[j]
    fg = dunford_eval(A, f * g).entries
    prod = dunford_eval(A, f).entries @ dunford_eval(A, g).entries
    assert np.linalg.norm(fg - prod) <= 1e-6 * max(np.linalg.norm(prod), 1e-3)


def test_mu_independence(rng):
    A, V, lam = random_diagonalizable(rng, 4)
    f = H.exponential(1.0)
    a = regularized_eval(A, f, mu=-1.0).entries
    b = regularized_eval(A, f, mu=-3.0).entries
    assert np.linalg.norm(a - b) <= 1e-8 * np.linalg.norm(a)


def test_dunford_rejects_non_decaying():
    with pytest.raises(TailBoundFailure):
        dunford_eval(hilbert_op([[1.0]]), H.rational([1], [1, 1]))


def test_dunford_rejects_domain_overlap():
    with pytest.raises(AbscissaError):
        dunford_eval(hilbert_op([[1.0]]), H.rational([1], [4, -4, 1]))  # (z-2)^-2, domain Re z > 2


def test_derivative_examples():
    A = hilbert_op([[1.0]])
    r = derivative_calculus_eval(A, H.exponential(1.0), 1, alpha=-1.0)
    assert r.entries[0, 0] == pytest.approx(-math.exp(-1), abs=1e-6)
    r = derivative_calculus_eval(A, H.constant(2.0), 2, alpha=-1.0)
    assert abs(r.entries[0, 0]) < 1e-9
    with pytest.raises(ParameterError):
        derivative_calculus_eval(A, H.exponential(1.0), 0)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_derivative_eigen_oracle(m, rng):
    A, V, lam = random_diagonalizable(rng, 4)
    f = H.rational([1, 1j], [2, 3, 1])
    ref = eig_oracle(V, lam, f.derivative(m))
    got = derivative_calculus_eval(A, f, m).entries
    assert np.linalg.norm(got - ref) <= 1e-6 * np.linalg.norm(ref)
