"""Gaussian sums, square functions and gamma-norms.

Complex Gaussians are standard complex: real and imaginary parts are
independent with variance 1/2, so ``E|g|^2 = 1``.

Random draws for a sum of ``N`` terms depend only on ``(seed, N, batch)``.
Two families of the same length are therefore evaluated on common random
numbers, which keeps ratio estimates far less noisy than their parts.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimensionMismatch, ParameterError
from .rng import max_workers, substream
from .spaces import (MatrixOperator, SpaceDescriptor, duality_pair, norming_functional,
                     operator_norm, vector_norm)

__all__ = [
    "GaussianConfig",
    "GaussianSum",
    "GaussianEstimate",
    "SampledFunction",
    "GammaNorm",
    "GammaBound",
    "gaussian_norm",
    "gaussian_ratio",
    "square_function_norm",
    "gamma_space_norm",
    "fourier_transform",
    "gamma_bound_estimate",
    "wgamma_pairing_ratio",
    "kconvexity_ratio",
]


@dataclass(frozen=True)
class GaussianConfig:
    """Monte-Carlo settings: ``samples`` draws split into ``batches`` batches."""

    samples: int = 10_000
    seed: int = 0
    batches: int = 20

    def __post_init__(self):
        if self.samples < 100:
            raise ParameterError(f"need at least 100 samples, got {self.samples}")
        if self.batches < 2:
            raise ParameterError("need at least 2 batches for a confidence interval")
        if self.samples < self.batches:
            raise ParameterError("fewer samples than batches")

    def cheap(self, samples=400, batches=4):
        """Smaller config with the same seed, used to screen search candidates."""
        return GaussianConfig(min(samples, self.samples), self.seed, min(batches, self.batches))


@dataclass(frozen=True)
class GaussianSum:
    """Finite sum ``sum_k g_k x_k`` stored as the rows of ``vectors``."""

    vectors: np.ndarray
    space: SpaceDescriptor

    def __post_init__(self):
        v = np.array(self.vectors, dtype=complex)
        if v.ndim == 1:
            v = v[None, :]
        if v.ndim != 2 or v.shape[0] < 1:
            raise DimensionMismatch("a Gaussian sum needs at least one vector")
        if v.shape[1] != self.space.dim:
            raise DimensionMismatch(f"vectors of length {v.shape[1]} in a space of dimension {self.space.dim}")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def N(self):
        return self.vectors.shape[0]

    def apply(self, ops):
        """The family ``(T_k x_k)`` for operators ``ops`` (one per term)."""
        if len(ops) != self.N:
            raise DimensionMismatch(f"{len(ops)} operators for {self.N} vectors")
        return GaussianSum(np.array([T.entries @ x for T, x in zip(ops, self.vectors)]),
                           ops[0].space if ops else self.space)


class GaussianEstimate(NamedTuple):
    estimate: float
    ci: tuple
    exact: bool
    samples: int
    seed: int

    @property
    def width(self):
        return self.ci[1] - self.ci[0]

    def fragment(self, quantity):
        return {"quantity": quantity, "estimate": float(self.estimate),
                "ci": [float(self.ci[0]), float(self.ci[1])], "exact": bool(self.exact),
                "seed": int(self.seed), "samples": int(self.samples)}


def _draws(cfg, N, b):
    m = cfg.samples // cfg.batches + (b < cfg.samples % cfg.batches)
    rng = substream(cfg.seed, f"gaussian/{N}/{b}")
    g = rng.standard_normal((m, N, 2)) * np.sqrt(0.5)
    return g[..., 0] + 1j * g[..., 1]


def _batch_moments(s: GaussianSum, cfg):
    """Per-batch means of ``||sum g_k x_k||^2``."""
    def one(b):
        S = _draws(cfg, s.N, b) @ s.vectors
        return float(np.mean(vector_norm(S, s.space) ** 2))

    workers = min(max_workers(), cfg.batches)
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return np.array(list(ex.map(one, range(cfg.batches))))
    return np.array([one(b) for b in range(cfg.batches)])


def _from_batches(values):
    return float(np.mean(values)), float(np.std(values, ddof=1) / np.sqrt(values.size))


def gaussian_norm(s: GaussianSum, cfg: GaussianConfig = GaussianConfig()):
    """Monte-Carlo estimate of ``(E||sum g_k x_k||^2)^(1/2)``.

    A single vector is exact (``E|g|^2 = 1``) and is returned as such.

    Returns
    -------
    GaussianEstimate
        Estimate with a ``+-2`` batch-standard-error interval.
    """
    if s.N == 1:
        v = float(vector_norm(s.vectors[0], s.space))
        return GaussianEstimate(v, (v, v), True, cfg.samples, cfg.seed)
    mean, se = _from_batches(_batch_moments(s, cfg))
    lo = np.sqrt(max(mean - 2 * se, 0.0))
    hi = np.sqrt(mean + 2 * se)
    return GaussianEstimate(float(np.sqrt(mean)), (float(lo), float(hi)), False,
                            cfg.samples, cfg.seed)


def gaussian_ratio(num: GaussianSum, den: GaussianSum, cfg: GaussianConfig = GaussianConfig()):
    """``G(num) / G(den)`` on common random numbers, with a batch-ratio interval."""
    if num.N != den.N:
        raise DimensionMismatch("ratio needs families of equal length")
    if num.N == 1:
        d = float(vector_norm(den.vectors[0], den.space))
        v = float(vector_norm(num.vectors[0], num.space)) / d if d else 0.0
        return GaussianEstimate(v, (v, v), True, cfg.samples, cfg.seed)
    a = _batch_moments(num, cfg)
    b = _batch_moments(den, cfg)
    if not np.all(b > 0):
        raise ParameterError("denominator family is zero")
    est = float(np.sqrt(a.mean() / b.mean()))
    r = np.sqrt(a / b)
    se = float(np.std(r, ddof=1) / np.sqrt(r.size))
    return GaussianEstimate(est, (max(est - 2 * se, 0.0), est + 2 * se), False,
                            cfg.samples, cfg.seed)


def square_function_norm(vectors, space: SpaceDescriptor):
    """Lattice norm of ``(sum_k |x_k|^2)^(1/2)``."""
    if not space.is_lattice:
        raise ParameterError("square functions need a lattice; use gaussian_norm on Hilbert spaces")
    v = np.atleast_2d(np.asarray(vectors, dtype=complex))
    if v.shape[1] != space.dim:
        raise DimensionMismatch(f"vectors of length {v.shape[1]} in a space of dimension {space.dim}")
    return float(vector_norm(np.sqrt(np.sum(np.abs(v) ** 2, axis=0)), space))


@dataclass(frozen=True)
class SampledFunction:
    """Function on a weighted grid, optionally crossed with an index set.

    Row ``j`` of ``values`` is the sample at ``nodes[j]`` with quadrature
    weight ``weights[j]`` and index ``labels[j]``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    space: SpaceDescriptor
    labels: np.ndarray = field(default=None)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float).ravel()
        w = np.broadcast_to(np.asarray(self.weights, dtype=float), nodes.shape).copy()
        vals = np.array(self.values, dtype=complex).reshape(nodes.size, -1)
        if vals.shape[1] != self.space.dim:
            raise DimensionMismatch(f"samples of length {vals.shape[1]} in a space of dimension {self.space.dim}")
        labels = np.zeros(nodes.size, dtype=int) if self.labels is None else np.asarray(self.labels, dtype=int).ravel()
        if labels.shape != nodes.shape:
            raise DimensionMismatch("one label per node required")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def uniform(cls, start, step, values, space):
        """Samples ``values[j]`` at ``start + j*step`` with weight ``step``."""
        values = np.asarray(values, dtype=complex)
        nodes = start + step * np.arange(values.shape[0])
        return cls(nodes, step, values, space)

    @classmethod
    def product(cls, nodes, weights, values, space):
        """Function on ``grid x {0..N-1}`` from ``values[k, j, :]``."""
        values = np.asarray(values, dtype=complex)
        N, J = values.shape[:2]
        nodes = np.asarray(nodes, dtype=float)
        w = np.broadcast_to(np.asarray(weights, dtype=float), nodes.shape)
        return cls(np.tile(nodes, N), np.tile(w, N), values.reshape(N * J, -1), space,
                   np.repeat(np.arange(N), J))

    def components(self):
        for k in np.unique(self.labels):
            sel = self.labels == k
            yield k, self.nodes[sel], self.weights[sel], self.values[sel]


class GammaNorm(NamedTuple):
    value: float
    surrogate: bool

    def __float__(self):
        return float(self.value)


def gamma_space_norm(f: SampledFunction):
    """Norm of ``f`` in gamma(S; X).

    On Hilbert spaces this is the Hilbert-Schmidt norm
    ``(sum_j w_j ||f_j||^2)^(1/2)``. On lattices the square function
    ``||(sum_j w_j |f_j|^2)^(1/2)||`` is returned and flagged as a surrogate:
    it is equivalent to the gamma-norm only up to constants.
    """
    if f.space.is_lattice:
        sq = np.sqrt(np.sum(f.weights[:, None] * np.abs(f.values) ** 2, axis=0))
        return GammaNorm(float(vector_norm(sq, f.space)), True)
    return GammaNorm(float(np.sqrt(np.sum(f.weights * np.sum(np.abs(f.values) ** 2, axis=1)))), False)


def fourier_transform(f: SampledFunction, pad=4):
    r"""Discrete Fourier transform ``\hat f(t) = \int e^{-its} f(s) ds``.

    Each component must be sampled on a uniform grid with weights equal to
    the grid step. The result lives on the frequency grid
    ``t_k = 2 pi k / (P J ds)`` with ``P = pad``, where the discrete Parseval
    identity holds exactly: ``||\hat f|| = sqrt(2 pi) ||f||``.
    """
    pad = int(pad)
    if pad < 1:
        raise ParameterError("pad must be a positive integer")
    out_nodes, out_w, out_vals, out_lab = [], [], [], []
    for k, s, w, vals in f.components():
        order = np.argsort(s)
        s, w, vals = s[order], w[order], vals[order]
        J = s.size
        ds = float(s[1] - s[0]) if J > 1 else float(w[0])
        if J > 1 and (not np.allclose(np.diff(s), ds, rtol=1e-9, atol=0)
                      or not np.allclose(w, ds, rtol=1e-9, atol=0)):
            raise ParameterError("fourier_transform needs a uniform grid with weights equal to the step")
        L = pad * J
        spec = np.fft.fftshift(np.fft.fft(vals, n=L, axis=0), axes=0)
        freq = 2 * np.pi * np.fft.fftshift(np.fft.fftfreq(L, d=ds))
        spec *= ds * np.exp(-1j * freq * s[0])[:, None]
        out_nodes.append(freq)
        out_w.append(np.full(L, 2 * np.pi / (L * ds)))
        out_vals.append(spec)
        out_lab.append(np.full(L, k))
    return SampledFunction(np.concatenate(out_nodes), np.concatenate(out_w),
                           np.concatenate(out_vals), f.space, np.concatenate(out_lab))


class GammaBound(NamedTuple):
    lower: float
    exact: bool
    ci: tuple
    witness: dict

    def fragment(self, quantity, cfg):
        return {"quantity": quantity, "estimate": float(self.lower),
                "ci": [float(self.ci[0]), float(self.ci[1])], "exact": bool(self.exact),
                "seed": int(cfg.seed), "samples": int(cfg.samples)}


def _random_vector(rng, n, kind):
    if kind == 0:
        return rng.standard_normal(n) + 1j * rng.standard_normal(n)
    if kind == 1:
        x = np.zeros(n, dtype=complex)
        x[rng.integers(n)] = 1.0
        return x
    # nonnegative, sparse-ish
    return np.abs(rng.standard_normal(n)) * (rng.random(n) < 0.3)


def gamma_bound_estimate(family: Sequence[MatrixOperator], trials=(), budget=50,
                         cfg: GaussianConfig = GaussianConfig(), max_terms=8, norms=None):
    """Lower bound on the gamma-bound of ``family``.

    Parameters
    ----------
    family : list of MatrixOperator
    trials : iterable of ``(indices, GaussianSum)``
        Supplied instances: term ``k`` applies ``family[indices[k]]``.
    budget : int
        Random instances to screen before coordinate ascent.
    norms : list of OperatorNorm, optional
        Precomputed operator norms of ``family``.

    Returns
    -------
    GammaBound
        On Hilbert spaces the maximal operator norm, flagged exact. Otherwise
        the best ratio ``G(T_k x_k)/G(x_k)`` found, never below the largest
        single-operator norm.
    """
    family = list(family)
    if not family:
        raise ParameterError("empty operator family")
    space = family[0].space
    if any(T.space != space for T in family):
        raise DimensionMismatch("operators act on different spaces")
    if norms is None:
        norms = [operator_norm(T, seed=cfg.seed) for T in family]
    best = int(np.argmax([v.value for v in norms]))
    top = float(norms[best].value)
    if space.p == 2:
        return GammaBound(top, all(v.exact for v in norms), (top, top),
                          {"indices": [best], "method": "operator-norm"})

    lower, ci = top, (top, top)
    witness = {"indices": [best], "method": "operator-norm"}

    def ratio(idx, xs, c):
        s = GaussianSum(xs, space)
        return gaussian_ratio(s.apply([family[i] for i in idx]), s, c)

    for idx, s in trials:
        r = ratio(list(idx), s.vectors, cfg)
        if r.estimate > lower:
            lower, ci = r.estimate, r.ci
            witness = {"indices": list(map(int, idx)), "vectors": s.vectors, "method": "supplied"}

    if budget > 0:
        rng = substream(cfg.seed, "gamma-search")
        screen = cfg.cheap()
        n = space.dim
        cands = []
        for _ in range(int(budget)):
            N = int(rng.integers(2, max_terms + 1))
            idx = rng.integers(len(family), size=N)
            kind = int(rng.integers(3))
            xs = np.array([_random_vector(rng, n, kind) for _ in range(N)])
            if np.any(vector_norm(xs, space) == 0):
                continue
            cands.append((ratio(idx, xs, screen).estimate, idx, xs))
        cands.sort(key=lambda c: -c[0])
        for val, idx, xs in cands[:3]:
            idx, xs = idx.copy(), xs.copy()
            # coordinate ascent: perturb one term at a time
            for _ in range(4 * len(idx)):
                k = int(rng.integers(len(idx)))
                i2, x2 = idx.copy(), xs.copy()
                if rng.random() < 0.5:
                    i2[k] = rng.integers(len(family))
                else:
                    x2[k] = _random_vector(rng, n, int(rng.integers(3)))
                    if vector_norm(x2[k], space) == 0:
                        continue
                v2 = ratio(i2, x2, screen).estimate
                if v2 > val:
                    val, idx, xs = v2, i2, x2
            r = ratio(idx, xs, cfg)
            if r.estimate > lower:
                lower, ci = r.estimate, r.ci
                witness = {"indices": idx.tolist(), "vectors": xs, "method": "search"}
    return GammaBound(float(lower), False, ci, witness)


def wgamma_pairing_ratio(ops, xs, ys, space: SpaceDescriptor,
                         cfg: GaussianConfig = GaussianConfig()):
    """``sum_k |<T_k x_k, y_k>| / (G(x) G*(y))``, a lower bound on the W-gamma bound."""
    xs = np.atleast_2d(np.asarray(xs, dtype=complex))
    ys = np.atleast_2d(np.asarray(ys, dtype=complex))
    if not (len(ops) == xs.shape[0] == ys.shape[0]):
        raise DimensionMismatch("operators, x and y families differ in length")
    num = float(sum(abs(duality_pair(T.entries @ x, y, space)) for T, x, y in zip(ops, xs, ys)))
    gx = gaussian_norm(GaussianSum(xs, space), cfg)
    gy = gaussian_norm(GaussianSum(ys, space.dual()), cfg)
    den = gx.estimate * gy.estimate
    if den == 0:
        return GaussianEstimate(0.0, (0.0, 0.0), gx.exact and gy.exact, cfg.samples, cfg.seed)
    lo = num / (gx.ci[1] * gy.ci[1])
    hi = num / (gx.ci[0] * gy.ci[0]) if gx.ci[0] * gy.ci[0] > 0 else np.inf
    return GaussianEstimate(num / den, (lo, hi), gx.exact and gy.exact, cfg.samples, cfg.seed)


def kconvexity_ratio(xs, space: SpaceDescriptor, budget=20, cfg: GaussianConfig = GaussianConfig(),
                     return_dual=False):
    """``G(x) / sup { |sum <x_n, y_n>| : G*(y) = 1 }`` over searched dual families.

    The starting dual family is ``y_n = E[g_n J(S)]`` with ``S = sum g_n x_n``
    and ``J`` the duality map, estimated on a separate substream. Random
    perturbations then try to improve the pairing. Since the supremum is
    approximated from below the value is an upper estimate for this
    family's ratio, which in turn bounds the K-convexity constant from below.
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=complex))
    N = xs.shape[0]
    dual = space.dual()
    gx = gaussian_norm(GaussianSum(xs, space), cfg)
    if gx.estimate == 0:
        raise ParameterError("zero family")

    rng = substream(cfg.seed, "kconvexity")
    g = rng.standard_normal((cfg.samples, N, 2)) * np.sqrt(0.5)
    g = g[..., 0] + 1j * g[..., 1]
    S = g @ xs
    J = np.array([norming_functional(v, space) for v in S]) * vector_norm(S, space)[:, None]
    ys = g.T @ J / cfg.samples

    def score(y, c):
        pair = abs(np.sum(duality_pair(xs, y, space)))
        gy = gaussian_norm(GaussianSum(y, dual), c)
        return pair / gy.estimate if gy.estimate else 0.0

    screen = cfg.cheap()
    best = score(ys, screen)
    for _ in range(int(budget)):
        step = 0.1 * np.mean(np.abs(ys)) * (rng.standard_normal(ys.shape) + 1j * rng.standard_normal(ys.shape))
        y2 = ys + step
        v = score(y2, screen)
        if v > best:
            best, ys = v, y2
    pair = abs(np.sum(duality_pair(xs, ys, space)))
    gy = gaussian_norm(GaussianSum(ys, dual), cfg)
    est = gx.estimate * gy.estimate / pair
    lo = gx.ci[0] * gy.ci[0] / pair
    hi = gx.ci[1] * gy.ci[1] / pair
    res = GaussianEstimate(float(est), (float(lo), float(hi)), False, cfg.samples, cfg.seed)
    return (res, ys) if return_dual else res
