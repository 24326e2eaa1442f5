"""Shared oracles and random instance generators."""

import numpy as np
import pytest

from hpcalc.functions import HalfPlaneFunction as H
from hpcalc.spaces import MatrixOperator, SpaceDescriptor


def eig_oracle(V, lam, f):
    """``V diag(f(lam)) V^-1``, independent of any contour integral."""
    return V @ np.diag(f(np.asarray(lam))) @ np.linalg.inv(V)


def random_diagonalizable(rng, n, re=(0.5, 3.0), im=(-3.0, 3.0)):
    V = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    lam = rng.uniform(*re, n) + 1j * rng.uniform(*im, n)
    return MatrixOperator(V @ np.diag(lam) @ np.linalg.inv(V), SpaceDescriptor.hilbert(n)), V, lam


def decaying_corpus():
    """Ten functions decaying faster than 1/|z|, holomorphic on Re z > 0."""
    return [
        H.rational([1], [1, 0, 1]),
        H.rational([1], [4, 4, 1]),
        H.rational([1, 0], [1, 3, 3, 1]),
        H.exp_rational([(1, 1, [1], [1, 0, 1])]),
        H.rational([2 - 1j], [2, 3, 1]),
        H.exp_rational([(1, 0.5, [1], [2j, 2 + 2j, 1])]),
        H.rational([1], [8, 12, 6, 1]),
        H.rational([3, 1], [6, 11, 6, 1]),
        H.exp_rational([(2, 2, [1], [9, 6, 1])]),
        H.rational([1], [0.5, 1, 1]),
    ]


def jordan(lam, n=2):
    return np.eye(n) * lam + np.diag(np.ones(n - 1), 1)


def hilbert_op(M):
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    return MatrixOperator(M, SpaceDescriptor.hilbert(M.shape[0]))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def record_acceptance(number, ok, detail):
    """Store (and print) the single pass/fail line of an acceptance criterion."""
    line = f"ACCEPTANCE {number:2d}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
