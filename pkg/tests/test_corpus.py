import math

import numpy as np
import pytest

from hpcalc.corpus import (MultiplierGroup, circulant_shift_generator, laplace_resolvent_case,
                           multiplier_calculus_case, multiplier_group_case, sectorial_case, sectorial_constant,
                           shift_gamma_lower_bound, shift_semigroup_case)
from hpcalc.errors import ParameterError
from hpcalc.funcalc import semigroup_exp
from hpcalc.gaussian import GaussianConfig, gamma_bound_estimate
from hpcalc.spaces import MatrixOperator, SpaceDescriptor

from conftest import hilbert_op

CFG = GaussianConfig(4000, seed=1)


@pytest.mark.parametrize("n", [4, 16, 64])
@pytest.mark.parametrize("p", [4.0, 4 / 3, 2.0])
def test_shift_case_closed_forms(n, p):
    c = shift_semigroup_case(n, p)
    assert c.computed["shifted"] == pytest.approx(1.0, abs=1e-12)
    assert c.computed["unshifted"] == pytest.approx(n ** (0.5 - 1 / p), abs=1e-12)
    assert c.passed


def test_shift_case_rejects_bad_n():
    with pytest.raises(ParameterError):
        shift_semigroup_case(12, 4.0)
    with pytest.raises(ParameterError):
        shift_semigroup_case(4, 0.5)


def test_shift_family_are_translations():
    c = shift_semigroup_case(8, 4.0)
    e = np.eye(16)
    for i, T in enumerate(c.payload["family"]):
        assert np.array_equal(T.entries @ e[0], e[i])


def test_circulant_generator_reproduces_shifts():
    N, h = 8, 0.25
    sp = SpaceDescriptor.func_lattice(0.0, h, N, 4.0)
    A = circulant_shift_generator(N, h, sp)
    C = np.roll(np.eye(N), 1, axis=0)
    for k in range(4):
        assert np.allclose(semigroup_exp(A, k * h).entries, np.linalg.matrix_power(C, k), atol=1e-10)


def test_shift_gamma_bound_grows_for_p4():
    vals = [shift_gamma_lower_bound(shift_semigroup_case(n, 4.0), CFG).lower for n in (4, 16, 64)]
    assert vals[0] < vals[1] < vals[2]
    p2 = shift_gamma_lower_bound(shift_semigroup_case(16, 2.0), CFG)
    assert p2.lower <= 1.0 + 1e-12


def test_multiplier_group():
    G = MultiplierGroup([1.0, 2.0, 5.0], SpaceDescriptor.hilbert(4))
    xs = np.arange(12.0).reshape(3, 4)
    assert np.array_equal(G.apply(0.0, xs), xs.astype(complex))
    assert G.group_law_error(0.3, -1.7) < 1e-15
    assert np.allclose(semigroup_exp(hilbert_op(G.generator()), 0.9).entries,
                       np.kron(np.diag(G.phases(0.9)), np.eye(4)))
    with pytest.raises(ParameterError):
        MultiplierGroup([1.0, 1.0], SpaceDescriptor.hilbert(2))


@pytest.mark.parametrize("base", ["h", "l"])
def test_multiplier_group_case_isometry(base):
    sp = SpaceDescriptor.hilbert(3) if base == "h" else SpaceDescriptor.seq_lattice(3, 4.0)
    c = multiplier_group_case([0.5, 2.0, -1.0], sp, 1.3, CFG)
    r = c.payload["ratio"]
    assert abs(r.estimate - 1.0) <= 3 * max(r.width, 1e-12)
    assert c.computed["groupLawError"] < 1e-14


def test_multiplier_hilbert_gamma_bound_is_one():
    G = MultiplierGroup([1.0, 2.0, 5.0], SpaceDescriptor.hilbert(2))
    fam = [hilbert_op(np.kron(np.diag(G.phases(t)), np.eye(2))) for t in np.linspace(0, 3, 7)]
    r = gamma_bound_estimate(fam, cfg=CFG)
    assert r.exact and r.lower == pytest.approx(1.0, rel=1e-12)


def test_multiplier_calculus_exponential_density():
    s = np.linspace(0, 40, 4001)
    xi = np.array([0.0, 1.0, -2.0])
    c = multiplier_calculus_case(xi, SpaceDescriptor.seq_lattice(3, 3.0), s, np.exp(-s), CFG)
    assert np.allclose(c.payload["multiplier"], 1 / (1 + 1j * xi), atol=2e-5)
    assert c.computed["calculusError"] < 1e-6
    assert c.payload["ratioCI"][0] <= 1.0 and c.payload["bound_holds"]


def test_multiplier_calculus_zero_density():
    s = np.linspace(0, 1, 11)
    c = multiplier_calculus_case([1.0, 2.0], SpaceDescriptor.hilbert(2), s, np.zeros(11), CFG,
                                 check_calculus=False)
    assert c.computed["normRatio"] == 0


def test_sectorial_constant_closed_form():
    C, scan = sectorial_constant([1.0, 2 + 3j])
    assert C == pytest.approx(math.sqrt(13) / 2)
    assert scan == pytest.approx(C, rel=1e-9)


def test_sectorial_case_bound():
    c = sectorial_case([1.0, 2 + 1j, 0.5 - 0.5j], pairs=4)
    assert c.computed["violations"] == 0
    # scalar: left side tends to 0 as alpha -> 0- and to C pi = pi as alpha -> -inf
    c = sectorial_case([1.0], alphas=[-1e-4, -1e4], pairs=1)
    near, far = c.payload["rows"]
    assert near["lhs"] / near["rhs"] < 1e-3
    assert 0.99 < far["lhs"] / far["rhs"] <= 1.0
    with pytest.raises(ParameterError):
        sectorial_case([-1.0])


def test_laplace_resolvent_examples():
    A = hilbert_op([[1.0]])
    c = laplace_resolvent_case(A, -1.0, 0.0, np.array([1.0]))
    assert c.payload["lhs"][0] == pytest.approx(-0.5, abs=1e-12)
    assert c.payload["rhs"][0] == pytest.approx(-0.5, abs=1e-10)
    c = laplace_resolvent_case(A, -1.0, 1.0, np.array([0.0]))
    assert np.all(c.payload["rhs"] == 0)


@pytest.mark.parametrize("seed", range(3))
def test_laplace_resolvent_random(seed):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((3, 3)) + 2 * np.eye(3)
    w = float(np.min(np.linalg.eigvals(M).real))
    x = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    for t in (0.0, 3.0, 40.0):
        c = laplace_resolvent_case(hilbert_op(M), w - 0.7, t, x)
        assert c.passed, c.computed
    with pytest.raises(ParameterError):
        laplace_resolvent_case(hilbert_op(M), w + 0.1, 0.0, x)
