"""Finite-dimensional Banach spaces, duality and operator norms.

Three norm structures are supported:

* ``hilbert``: complex Euclidean space of dimension ``dim``;
* ``seq``: the sequence lattice l^p_n;
* ``func``: step functions on a uniform grid of ``count`` cells of width ``h``
  starting at ``start``, normed as a subspace of L^p(R), i.e.
  ``(h * sum |x_i|^p)^(1/p)``.

Duality is bilinear: ``<x, y> = w * sum x_i y_i`` with ``w = h`` on function
lattices and ``w = 1`` otherwise, so the adjoint of a matrix is its plain
transpose.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, InputError, ParameterError

__all__ = [
    "SpaceDescriptor",
    "MatrixOperator",
    "OperatorNorm",
    "vector_norm",
    "duality_pair",
    "adjoint",
    "operator_norm",
    "operator_norms",
    "dual_exponent",
    "norming_functional",
    "load_matrix",
    "dump_matrix",
]

_KINDS = ("hilbert", "seq", "func")
_JSON_NAMES = {"hilbert": "Hilbert", "seq": "SeqLattice", "func": "FuncLattice"}


def dual_exponent(p):
    """Conjugate exponent ``p'`` with ``1/p + 1/p' = 1``."""
    if p == 1:
        return np.inf
    if np.isinf(p):
        return 1.0
    return p / (p - 1.0)


@dataclass(frozen=True)
class SpaceDescriptor:
    kind: str
    dim: int
    p: float = 2.0
    start: float = 0.0
    h: float = 1.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ParameterError(f"unknown space kind {self.kind!r}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ParameterError(f"dimension must be a positive integer, got {self.dim}")
        if not self.p >= 1:
            raise ParameterError(f"p must be >= 1, got {self.p}")
        if not self.h > 0:
            raise ParameterError(f"grid step must be positive, got {self.h}")
        if self.kind == "hilbert" and self.p != 2:
            raise ParameterError("Hilbert spaces carry p = 2")

    @classmethod
    def hilbert(cls, dim):
        return cls("hilbert", int(dim))

    @classmethod
    def seq_lattice(cls, dim, p):
        return cls("seq", int(dim), float(p))

    @classmethod
    def func_lattice(cls, start, h, count, p):
        return cls("func", int(count), float(p), float(start), float(h))

    @property
    def is_lattice(self):
        return self.kind != "hilbert"

    @property
    def weight(self):
        return self.h if self.kind == "func" else 1.0

    @property
    def grid(self):
        """Left endpoints of the cells (function lattices only)."""
        return self.start + self.h * np.arange(self.dim)

    def dual(self):
        if self.kind == "hilbert":
            return self
        return SpaceDescriptor(self.kind, self.dim, dual_exponent(self.p), self.start, self.h)

    def to_json(self):
        d = {"variant": _JSON_NAMES[self.kind]}
        if self.kind == "func":
            d.update(gridStart=self.start, gridStep=self.h, gridCount=self.dim,
                     p=_p_to_json(self.p))
        else:
            d["dim"] = self.dim
            if self.kind == "seq":
                d["p"] = _p_to_json(self.p)
        return d

    @classmethod
    def from_json(cls, d):
        try:
            variant = d["variant"]
            if variant == "Hilbert":
                return cls.hilbert(d["dim"])
            if variant == "SeqLattice":
                return cls.seq_lattice(d["dim"], _p_from_json(d["p"]))
            if variant == "FuncLattice":
                return cls.func_lattice(d["gridStart"], d["gridStep"], d["gridCount"],
                                        _p_from_json(d["p"]))
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed space descriptor {d!r}: {exc}") from None
        raise InputError(f"unknown space variant {variant!r}")

    def __str__(self):
        if self.kind == "hilbert":
            return f"hilbert:{self.dim}"
        if self.kind == "seq":
            return f"seq:{self.dim}:p={self.p:g}"
        return f"func:{self.dim}:p={self.p:g}:h={self.h:g}"


def _p_to_json(p):
    return "inf" if np.isinf(p) else p


def _p_from_json(p):
    return np.inf if p in ("inf", "Infinity") else float(p)


def _check_len(x, space):
    if x.shape[-1] != space.dim:
        raise DimensionMismatch(f"vector of length {x.shape[-1]} in a space of dimension {space.dim}")


def _lp(x, p, axis=-1):
    a = np.abs(x)
    if np.isinf(p):
        return a.max(axis=axis)
    if p == 2:
        return np.sqrt(np.sum(a * a, axis=axis))
    if p == 1:
        return a.sum(axis=axis)
    # scale to avoid overflow for large p
    m = a.max(axis=axis, keepdims=True)
    m = np.where(m == 0, 1.0, m)
    return np.squeeze(m, axis=axis) * np.sum((a / m) ** p, axis=axis) ** (1.0 / p)


def vector_norm(x, space):
    """Norm of ``x`` (or of each row of a stacked array) in ``space``."""
    x = np.asarray(x)
    _check_len(x, space)
    val = _lp(x, space.p)
    if space.kind == "func" and not np.isinf(space.p):
        val = val * space.h ** (1.0 / space.p)
    return val


def duality_pair(x, y, space=None):
    """Bilinear pairing ``<x, y>``, weighted by the grid step on function lattices."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape[-1] != y.shape[-1]:
        raise DimensionMismatch(f"cannot pair vectors of lengths {x.shape[-1]} and {y.shape[-1]}")
    if space is not None:
        _check_len(x, space)
    w = 1.0 if space is None else space.weight
    return w * np.sum(x * y, axis=-1)


@dataclass(frozen=True, eq=False)
class MatrixOperator:
    """Square complex matrix acting on a :class:`SpaceDescriptor`."""

    entries: np.ndarray
    space: SpaceDescriptor
    _spectrum: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        a = np.array(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatch(f"operator must be square, got shape {a.shape}")
        if a.shape[0] != self.space.dim:
            raise DimensionMismatch(f"{a.shape[0]}x{a.shape[0]} matrix on a space of dimension {self.space.dim}")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def n(self):
        return self.entries.shape[0]

    @property
    def spectrum(self):
        if self._spectrum is None:
            object.__setattr__(self, "_spectrum", np.linalg.eigvals(self.entries))
        return self._spectrum

    def with_entries(self, entries):
        return MatrixOperator(entries, self.space)

    def __matmul__(self, other):
        if isinstance(other, MatrixOperator):
            return self.with_entries(self.entries @ other.entries)
        return self.entries @ other

    def adjoint(self):
        return adjoint(self)

    def norm(self, **kw):
        return operator_norm(self, **kw)


def adjoint(A):
    """Banach-space adjoint: the transpose, acting on the dual space."""
    return MatrixOperator(A.entries.T, A.space.dual())


class OperatorNorm(NamedTuple):
    value: float
    exact: bool

    def __float__(self):
        return float(self.value)


def _dual_vector(y, p):
    """Unit vector ``w`` in l^{p'} with ``sum(y * w) = ||y||_p``."""
    a = np.abs(y)
    phase = np.where(a > 0, np.conj(y) / np.where(a > 0, a, 1.0), 0.0)
    if np.isinf(p):
        w = np.zeros_like(y, dtype=complex)
        i = int(np.argmax(a))
        w[i] = phase[i] if a[i] > 0 else 1.0
        return w
    if p == 1:
        return np.where(a > 0, phase, 0.0) + 0j
    nrm = _lp(y, p)
    if nrm == 0:
        return np.zeros_like(y, dtype=complex)
    return phase * (a / nrm) ** (p - 1)


def _dual_columns(Y, p):
    """Column-wise :func:`_dual_vector` for a 2-D array."""
    a = np.abs(Y)
    phase = np.where(a > 0, np.conj(Y) / np.where(a > 0, a, 1.0), 0.0)
    if p == 1:
        return phase + 0j
    nrm = _lp(Y, p, axis=0)
    nrm = np.where(nrm == 0, 1.0, nrm)
    return phase * (a / nrm) ** (p - 1)


def _pnorm_ascent(M, p, X0, maxiter=200, rtol=1e-10):
    """Dual-norm ascent for ``max ||Mx||_p / ||x||_p``, one start per column of ``X0``.

    Each column's value increases monotonically; the best column is returned.
    """
    q = dual_exponent(p)
    X = X0 / _lp(X0, p, axis=0)
    best = _lp(M @ X, p, axis=0)
    active = np.ones(X.shape[1], dtype=bool)
    for _ in range(maxiter):
        Xa = X[:, active]
        Xn = _dual_columns(M.T @ _dual_columns(M @ Xa, p), q)
        val = _lp(M @ Xn, p, axis=0)
        gain = val > best[active] * (1 + rtol)
        idx = np.flatnonzero(active)
        better = val > best[active]
        X[:, idx[better]] = Xn[:, better]
        best[idx[better]] = val[better]
        active[idx[~gain]] = False
        if not active.any():
            break
    j = int(np.argmax(best))
    return float(best[j]), X[:, j]


def _stack_dual(Y, p):
    """:func:`_dual_columns` applied to each matrix of a ``(K, n, s)`` stack."""
    a = np.abs(Y)
    phase = np.where(a > 0, np.conj(Y) / np.where(a > 0, a, 1.0), 0.0)
    if p == 1:
        return phase + 0j
    nrm = _lp(Y, p, axis=1)
    nrm = np.where(nrm == 0, 1.0, nrm)[:, None, :]
    return phase * (a / nrm) ** (p - 1)


def operator_norms(stack, space, *, starts=4, seed=0, maxiter=200, rtol=1e-10):
    """:func:`operator_norm` values for a stack of matrices ``(K, n, n)`` on ``space``.

    Exact for p in {1, 2, inf}; otherwise the batched dual-norm ascent, a
    lower bound for each matrix.
    """
    stack = np.asarray(stack)
    p = space.p
    if p == 2:
        return np.linalg.norm(stack, ord=2, axis=(1, 2))
    if p == 1:
        return np.abs(stack).sum(axis=1).max(axis=1)
    if np.isinf(p):
        return np.abs(stack).sum(axis=2).max(axis=1)
    K, n, _ = stack.shape
    q = dual_exponent(p)
    rng = np.random.default_rng(seed)
    top = np.conj(np.linalg.svd(stack)[2][:, 0, :])[:, :, None]
    basis = np.broadcast_to(np.eye(n, dtype=complex)[:, : min(n, starts)], (K, n, min(n, starts)))
    rand = rng.standard_normal((n, starts)) + 1j * rng.standard_normal((n, starts))
    X = np.concatenate([top, basis, np.broadcast_to(rand, (K, n, starts))], axis=2)
    X = X / np.where(_lp(X, p, axis=1) == 0, 1.0, _lp(X, p, axis=1))[:, None, :]
    MH = np.swapaxes(stack, 1, 2)
    best = _lp(stack @ X, p, axis=1)
    for _ in range(maxiter):
        Xn = _stack_dual(MH @ _stack_dual(stack @ X, p), q)
        val = _lp(stack @ Xn, p, axis=1)
        better = val > best
        X = np.where(better[:, None, :], Xn, X)
        gain = np.max((val - best) / np.where(best > 0, best, 1.0))
        best = np.maximum(best, val)
        if gain <= rtol:
            break
    return best.max(axis=1)


def operator_norm(A, *, starts=12, seed=0, return_vector=False):
    """Norm of ``A`` on its space.

    Exact for Hilbert spaces (largest singular value) and for p in {1, 2, inf};
    otherwise a lower bound found by dual-norm ascent from several starts,
    flagged ``exact=False``. The grid weight of function lattices cancels.
    """
    M = A.entries
    p = A.space.p
    n = A.n
    if p == 2:
        u, s, vh = np.linalg.svd(M)
        res = OperatorNorm(float(s[0]), True)
        vec = np.conj(vh[0])
    elif p == 1:
        cols = np.abs(M).sum(axis=0)
        j = int(np.argmax(cols))
        res = OperatorNorm(float(cols[j]), True)
        vec = np.eye(n, dtype=complex)[j]
    elif np.isinf(p):
        rows = np.abs(M).sum(axis=1)
        i = int(np.argmax(rows))
        res = OperatorNorm(float(rows[i]), True)
        vec = np.conj(M[i]) / np.where(np.abs(M[i]) > 0, np.abs(M[i]), 1.0)
        vec = np.where(np.abs(M[i]) > 0, vec, 1.0)
    else:
        rng = np.random.default_rng(seed)
        cands = [np.conj(np.linalg.svd(M)[2][0])]
        cands += list(np.eye(n, dtype=complex)[: min(n, starts)])
        cands += list(rng.standard_normal((starts, n)) + 1j * rng.standard_normal((starts, n)))
        X0 = np.array(cands).T
        X0 = X0[:, np.any(X0 != 0, axis=0)]
        best, vec = _pnorm_ascent(M, p, X0)
        res = OperatorNorm(best, False)
    if return_vector:
        return res, vec
    return res


def matrix_to_json(A):
    return {
        "dim": A.n,
        "space": A.space.to_json(),
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in A.entries],
    }


def matrix_from_json(d):
    try:
        space = SpaceDescriptor.from_json(d["space"])
        raw = d["entries"]
        entries = np.array([[complex(*e) if isinstance(e, (list, tuple)) else complex(e)
                             for e in row] for row in raw], dtype=complex)
        if int(d.get("dim", entries.shape[0])) != entries.shape[0]:
            raise InputError(f"declared dim {d['dim']} does not match {entries.shape[0]} rows")
        return MatrixOperator(entries, space)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"malformed matrix file: {exc}") from None


def load_matrix(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read matrix file {path}: {exc.strerror}") from None
    try:
        return matrix_from_json(json.loads(text))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def dump_matrix(A, path):
    Path(path).write_text(json.dumps(matrix_to_json(A), indent=1))


def norming_functional(x, space):
    """Unit functional ``y`` in the dual space with ``<x, y> = ||x||``."""
    x = np.asarray(x, dtype=complex)
    _check_len(x, space)
    if space.p == 2 and space.kind == "hilbert":
        nrm = np.linalg.norm(x)
        return np.conj(x) / nrm if nrm else np.zeros_like(x)
    y = _dual_vector(x, space.p)
    if space.kind == "func":
        q = dual_exponent(space.p)
        y = y / space.h ** (1.0 / q)
    return y
