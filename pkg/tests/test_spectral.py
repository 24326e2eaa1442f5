import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hpcalc.gaussian import GaussianConfig
from hpcalc.spaces import MatrixOperator, SpaceDescriptor
from hpcalc.spectral import (K_GROTHENDIECK, disc_contour_check, gamma_abscissae, gearhart_pruss_report, growth_bound,
                             lemma_ineq_check, ordering_check, s0_bound)

from conftest import hilbert_op, jordan

CFG = GaussianConfig(1000, seed=0, batches=10)


@pytest.mark.parametrize("M, expected", [(np.diag([1.0, 2.0]), 1.0), (jordan(1.0), 1.0), (np.diag([-1.0]), -1.0),
                                         (jordan(0.5, 3), 0.5)])
def test_growth_and_s0_examples(M, expected):
    A = hilbert_op(M)
    g = growth_bound(A)
    assert g.value == pytest.approx(expected, abs=1e-12)
    assert g.check.get("consistent", True)
    assert s0_bound(A).value == pytest.approx(expected, abs=1e-12)


def test_hilbert_report_all_equal():
    rep = gearhart_pruss_report(hilbert_op(np.diag([1.0, 2.0])), CFG, budget=3)
    for b in (rep.omega, rep.s0, rep.omega_gamma, rep.s0_gamma):
        assert b.value == pytest.approx(1.0, abs=1e-12)
    assert rep.pattern == "all equal" and rep.ordering["holds"]
    assert rep.lemma_ineq["holds"]
    assert all(d["holds"] for d in rep.disc)
    json.dumps(rep.to_json())


def test_lemma_inequality_constant():
    res = lemma_ineq_check(hilbert_op(np.diag([1.0, 2.0])), cfg=CFG, budget=2)
    assert res["holds"]
    assert K_GROTHENDIECK == pytest.approx(1.783, abs=1e-3)


def test_disc_contour_representation():
    A = hilbert_op(np.array([[1.0, 0.5], [0.0, 2.0 + 1j]]))
    for d in disc_contour_check(A, cfg=CFG, budget=2):
        assert d["holds"]
        assert d["representationError"] < 1e-8


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31), st.floats(-5, 5), st.floats(-3, 3))
def test_shift_and_scaling_invariance(seed, beta, c):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((3, 3)) + 3 * np.eye(3)
    base = gearhart_pruss_report(hilbert_op(M), CFG, budget=2, checks=False)
    imag = gearhart_pruss_report(hilbert_op(M + 1j * beta * np.eye(3)), CFG, budget=2, checks=False)
    real = gearhart_pruss_report(hilbert_op(M + c * np.eye(3)), CFG, budget=2, checks=False)
    for name in ("omega", "s0", "omega_gamma", "s0_gamma"):
        b = getattr(base, name)
        tol = 2 * b.tolerance + 1e-9
        assert getattr(imag, name).value == pytest.approx(b.value, abs=tol)
        assert getattr(real, name).value == pytest.approx(b.value + c, abs=tol)


def test_ordering_check():
    assert ordering_check([0.0, 1.0, 1.0, 2.0], [0, 0, 0, 0])["holds"]
    assert not ordering_check([1.5, 1.0, 1.0, 1.0], [0.1, 0, 0, 0])["holds"]
    assert ordering_check([1.05, 1.0, 1.0, 1.0], [0.1, 0, 0, 0])["holds"]
    assert ordering_check([-math.inf, 1.0, 1.0, 1.0], [0, 0, 0, 0])["holds"]


def test_lattice_report_ordering():
    rng = np.random.default_rng(1)
    M = np.diag([1.0, 2.0]) + 0.3 * np.abs(rng.standard_normal((2, 2)))
    A = MatrixOperator(M, SpaceDescriptor.seq_lattice(2, 3.0))
    rep = gearhart_pruss_report(A, CFG, budget=3, checks=False)
    assert rep.ordering["holds"]
    exact = float(np.min(np.linalg.eigvals(M).real))
    assert rep.omega.value == pytest.approx(exact, abs=1e-8)
    assert rep.s0.value == pytest.approx(exact, abs=rep.s0.tolerance + 1e-8)
