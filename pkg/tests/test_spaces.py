import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hpcalc.errors import DimensionMismatch, InputError
from hpcalc.funcalc import resolvent
from hpcalc.spaces import (MatrixOperator, SpaceDescriptor, adjoint, dump_matrix, duality_pair, load_matrix,
                           norming_functional, operator_norm, operator_norms, vector_norm)

from conftest import hilbert_op


def test_vector_norm_examples():
    assert vector_norm(np.array([3.0, 4.0]), SpaceDescriptor.hilbert(2)) == pytest.approx(5.0, abs=1e-15)
    assert vector_norm(np.ones(4), SpaceDescriptor.seq_lattice(4, 4)) == pytest.approx(4 ** 0.25, rel=1e-15)
    for n in (4, 16, 64):
        for p in (1.0, 4 / 3, 2.0, 4.0, np.inf):
            sp = SpaceDescriptor.func_lattice(0.0, 1.0 / n, 2 * n, p)
            x = np.r_[np.ones(n), np.zeros(n)]
            assert vector_norm(x, sp) == pytest.approx(1.0, abs=1e-13)


def test_func_lattice_norm_refinement_stable():
    coarse = SpaceDescriptor.func_lattice(0.0, 0.25, 8, 3.0)
    fine = SpaceDescriptor.func_lattice(0.0, 0.125, 16, 3.0)
    x = np.array([1, 2, 0, -1, 3, 0, 0, 1.0])
    assert vector_norm(np.repeat(x, 2), fine) == pytest.approx(vector_norm(x, coarse), rel=1e-14)


def test_duality_pair_examples():
    assert duality_pair(np.array([1.0, 0]), np.array([0, 1.0])) == 0
    assert duality_pair(np.array([1.0, 2]), np.array([3.0, 4])) == 11


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        vector_norm(np.ones(3), SpaceDescriptor.hilbert(2))


def test_adjoint_examples():
    I = hilbert_op(np.eye(3))
    assert np.array_equal(adjoint(I).entries, np.eye(3))
    D = hilbert_op(np.diag([1.0, 2.0]))
    assert np.array_equal(adjoint(D).entries, np.diag([1.0, 2.0]))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from([("h", 2), ("s", 3), ("s", 1.5), ("f", 4)]))
def test_adjoint_compatibility(seed, kind):
    rng = np.random.default_rng(seed)
    n = 4
    sp = {"h": SpaceDescriptor.hilbert(n), "s": SpaceDescriptor.seq_lattice(n, kind[1]),
          "f": SpaceDescriptor.func_lattice(0.0, 0.5, n, kind[1])}[kind[0]]
    A = MatrixOperator(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)), sp)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    y = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    lhs = duality_pair(A.entries @ x, y, sp)
    rhs = duality_pair(x, adjoint(A).entries @ y, sp)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_operator_norm_examples():
    r = operator_norm(hilbert_op(np.diag([1.0, -2.0])))
    assert r.value == pytest.approx(2.0, rel=1e-14) and r.exact
    C = np.roll(np.eye(5), 1, axis=0)
    r = operator_norm(MatrixOperator(C, SpaceDescriptor.seq_lattice(5, 4)))
    assert r.value == pytest.approx(1.0, rel=1e-12) and not r.exact


@pytest.mark.parametrize("seed", range(5))
def test_operator_norm_p3_against_brute_force(seed):
    # oracle: random sampling polished by Nelder-Mead (derivative free, independent of the ascent)
    from scipy.optimize import minimize

    rng = np.random.default_rng(seed)
    n = 4
    M = rng.standard_normal((n, n))
    sp = SpaceDescriptor.seq_lattice(n, 3.0)
    X = rng.standard_normal((100_000, n)) + 1j * rng.standard_normal((100_000, n))
    r = vector_norm(X @ M.T, sp) / vector_norm(X, sp)

    def neg(v):
        x = v[:n] + 1j * v[n:]
        return -vector_norm(M @ x, sp) / vector_norm(x, sp)

    brute = r.max()
    for i in np.argsort(r)[-10:]:
        res = minimize(neg, np.r_[X[i].real, X[i].imag], method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 20000})
        brute = max(brute, -res.fun)
    est = operator_norm(MatrixOperator(M, sp)).value
    assert est >= brute * (1 - 1e-9)
    assert est <= brute * 1.01


def test_operator_norms_stack_matches_single(rng):
    sp = SpaceDescriptor.seq_lattice(3, 3.0)
    S = rng.standard_normal((20, 3, 3)) + 1j * rng.standard_normal((20, 3, 3))
    a = operator_norms(S, sp)
    b = np.array([operator_norm(MatrixOperator(m, sp), starts=4).value for m in S])
    assert np.allclose(a, b, rtol=1e-6)
    for p, kind in ((2, "hilbert"), (1, "seq"), (np.inf, "seq")):
        sp = SpaceDescriptor.hilbert(3) if kind == "hilbert" else SpaceDescriptor.seq_lattice(3, p)
        b = np.array([operator_norm(MatrixOperator(m, sp)).value for m in S])
        assert np.allclose(operator_norms(S, sp), b, rtol=1e-12)


@pytest.mark.parametrize("sp", [SpaceDescriptor.hilbert(4), SpaceDescriptor.seq_lattice(4, 3.0),
                                SpaceDescriptor.seq_lattice(4, 1.0), SpaceDescriptor.seq_lattice(4, np.inf),
                                SpaceDescriptor.func_lattice(0.0, 0.3, 4, 1.5)])
def test_norming_functional(sp, rng):
    x = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    y = norming_functional(x, sp)
    assert duality_pair(x, y, sp) == pytest.approx(vector_norm(x, sp), rel=1e-12)
    assert vector_norm(y, sp.dual()) == pytest.approx(1.0, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31))
def test_resolvent_identity(seed):
    rng = np.random.default_rng(seed)
    A = hilbert_op(rng.standard_normal((4, 4)))
    lam, mu = complex(*rng.uniform(-3, 3, 2)), complex(*rng.uniform(-3, 3, 2))
    if min(np.min(np.abs(A.spectrum - lam)), np.min(np.abs(A.spectrum - mu))) < 0.05:
        return
    Rl, Rm = resolvent(A, lam).entries, resolvent(A, mu).entries
    lhs = Rl - Rm
    rhs = (mu - lam) * Rl @ Rm
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * max(1.0, np.max(np.abs(Rl)) * np.max(np.abs(Rm)))


def test_matrix_json_roundtrip(tmp_path):
    A = MatrixOperator(np.array([[1, 2j], [0, -1.5]]), SpaceDescriptor.func_lattice(-1.0, 0.5, 2, 4.0))
    dump_matrix(A, tmp_path / "a.json")
    B = load_matrix(tmp_path / "a.json")
    assert np.array_equal(A.entries, B.entries) and B.space == A.space


def test_malformed_matrix(tmp_path):
    (tmp_path / "bad.json").write_text('{"dim": 3, "space": {"variant": "Hilbert", "dim": 2}, "entries": [[1,0],[0,1]]}')
    with pytest.raises(InputError):
        load_matrix(tmp_path / "bad.json")
    with pytest.raises(InputError):
        load_matrix(tmp_path / "missing.json")
