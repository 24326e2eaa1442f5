"""Bounded holomorphic functions on right half-planes.

Every function is stored as a finite sum of blocks

    r(z) * sum_j c_j exp(-tau_j z),      tau_j >= 0,

with ``r = P / prod Q_i^k_i`` rational. This covers rational functions,
exponential-rational combinations and Laplace transforms of sampled densities
(one block with ``r = 1``), and is closed under products and exact
differentiation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import minimize_scalar

from .errors import InputError, ParameterError

__all__ = ["Rational", "HalfPlaneFunction", "hinf_norm"]


def _poly(coefs):
    p = Polynomial(np.asarray(coefs, dtype=complex))
    return p.trim() if np.any(p.coef) else Polynomial([0j])


def _same(p, q):
    return p.coef.shape == q.coef.shape and np.array_equal(p.coef, q.coef)


@dataclass(frozen=True, eq=False)
class Rational:
    """``num / prod(q**k for q, k in factors)``."""

    num: Polynomial
    factors: tuple = ()

    @classmethod
    def from_coefficients(cls, num, den=(1.0,)):
        d = _poly(den)
        if not np.any(d.coef):
            raise InputError("zero denominator")
        if d.degree() == 0:
            return cls(_poly(num) / d.coef[0])
        return cls(_poly(num), ((d, 1),))

    @classmethod
    def one(cls):
        return cls(Polynomial([1.0 + 0j]))

    @property
    def is_zero(self):
        return not np.any(self.num.coef)

    @property
    def decay_power(self):
        if self.is_zero:
            return math.inf
        return sum(k * q.degree() for q, k in self.factors) - self.num.degree()

    @property
    def poles(self):
        out = [q.roots() for q, _ in self.factors if q.degree() > 0]
        return np.concatenate(out) if out else np.zeros(0, complex)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        val = self.num(z)
        for q, k in self.factors:
            val = val / q(z) ** k
        return val

    def __mul__(self, other):
        factors = list(self.factors)
        for q, k in other.factors:
            for i, (p, j) in enumerate(factors):
                if _same(p, q):
                    factors[i] = (p, j + k)
                    break
            else:
                factors.append((q, k))
        return Rational(self.num * other.num, tuple(factors))

    def scale(self, c):
        return Rational(self.num * c, self.factors)

    def derivative(self):
        # r' = (P' prod Q_i - P sum_i k_i Q_i' prod_{j != i} Q_j) / (D prod Q_i)
        if not self.factors:
            return Rational(self.num.deriv())
        prod_all = Polynomial([1.0 + 0j])
        for q, _ in self.factors:
            prod_all = prod_all * q
        num = self.num.deriv() * prod_all
        for i, (qi, ki) in enumerate(self.factors):
            rest = Polynomial([1.0 + 0j])
            for j, (qj, _) in enumerate(self.factors):
                if j != i:
                    rest = rest * qj
            num = num - self.num * qi.deriv() * rest * ki
        return Rational(_poly(num.coef), tuple((q, k + 1) for q, k in self.factors))

    def expanded(self):
        """``(numerator, denominator)`` coefficient arrays, lowest degree first."""
        den = Polynomial([1.0 + 0j])
        for q, k in self.factors:
            den = den * q**k
        return self.num.coef, den.coef


_CHUNK = 1 << 20


@dataclass(frozen=True, eq=False)
class _Block:
    """``r(z) * sum_j c_j exp(-tau_j (z - shift_j))``."""

    r: Rational
    c: np.ndarray
    tau: np.ndarray
    shift: np.ndarray = None

    def __post_init__(self):
        if self.shift is None:
            object.__setattr__(self, "shift", np.zeros_like(self.tau))

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if self.tau.size == 1 and self.tau[0] == 0:
            s = self.c[0] * np.ones_like(z)
        elif self.tau.size * z.size <= _CHUNK:
            s = np.exp(-self.tau * (z[..., None] - self.shift)) @ self.c
        else:
            # long sampled densities: bound the size of the exponential table
            flat = z.ravel()
            step = max(1, _CHUNK // self.tau.size)
            s = np.concatenate([np.exp(-self.tau * (flat[i:i + step, None] - self.shift)) @ self.c
                                for i in range(0, flat.size, step)]).reshape(z.shape)
        return self.r(z) * s


class HalfPlaneFunction:
    """Bounded holomorphic function on the half-plane ``Re z > alpha``.

    ``variant`` records how the function was built (``Rational``,
    ``ExpRational`` or ``LaplaceOfDensity``); derived functions (products,
    derivatives) are reported as ``ExpRational``.
    """

    def __init__(self, blocks, alpha=None, variant="ExpRational", name=None, source=None):
        self.blocks = tuple(b for b in blocks if not b.r.is_zero and np.any(b.c))
        for b in self.blocks:
            if np.any(b.tau < 0):
                raise ParameterError("exponential rates must be nonnegative")
        poles = self.poles
        pmax = float(np.max(poles.real)) if poles.size else -math.inf
        if alpha is None:
            alpha = pmax
        if poles.size and pmax > alpha:
            raise ParameterError(f"pole with real part {pmax:g} inside Re z > {alpha:g}")
        if self.decay_power < 0:
            raise ParameterError("function is unbounded at infinity (numerator degree too high)")
        self.alpha = float(alpha)
        self.variant = variant
        self.name = name
        self._source = source

    # -- constructors -----------------------------------------------------
    @classmethod
    def rational(cls, num, den=(1.0,), alpha=None, name=None):
        r = Rational.from_coefficients(num, den)
        blk = _Block(r, np.array([1.0 + 0j]), np.array([0.0]))
        src = {"numerator": np.asarray(num, complex), "denominator": np.asarray(den, complex)}
        return cls([blk], alpha, "Rational", name, src)

    @classmethod
    def constant(cls, c, alpha=-math.inf):
        return cls.rational([c], [1.0], alpha=alpha, name=f"const({c})")

    @classmethod
    def exp_rational(cls, terms, alpha=None, name=None):
        """``terms``: iterable of ``(c, tau, numerator, denominator)``."""
        blocks, src = [], []
        for term in terms:
            c, tau, num, den = term[:4]
            shift = float(term[4]) if len(term) > 4 else 0.0
            blocks.append(_Block(Rational.from_coefficients(num, den), np.array([complex(c)]),
                                 np.array([float(tau)]), np.array([shift])))
            src.append({"c": complex(c), "tau": float(tau), "shift": shift,
                        "numerator": np.asarray(num, complex),
                        "denominator": np.asarray(den, complex)})
        return cls(blocks, alpha, "ExpRational", name, src)

    @classmethod
    def exponential(cls, tau, shift=0.0, alpha=-math.inf):
        """``exp(-tau (z - shift))``; sup norm 1 on ``Re z > shift``."""
        return cls.exp_rational([(1.0, tau, [1.0], [1.0], shift)], alpha=alpha,
                                name=f"exp(-{tau:g}(z-{shift:g}))")

    @classmethod
    def laplace_of_density(cls, nodes, density, weights=None, alpha=0.0, name=None):
        """Laplace transform ``z -> int_0^inf exp(-z s) b(s) ds`` of a sampled density."""
        s = np.asarray(nodes, dtype=float)
        b = np.asarray(density, dtype=complex)
        if s.ndim != 1 or b.shape != s.shape:
            raise InputError("density and nodes must be 1-D arrays of equal length")
        if np.any(s < 0):
            raise InputError("density nodes must lie in [0, inf)")
        if weights is None:
            weights = np.zeros_like(s)
            d = np.diff(s)
            weights[:-1] += d / 2
            weights[1:] += d / 2
        w = np.asarray(weights, dtype=float)
        blk = _Block(Rational.one(), w * b, s)
        src = {"nodes": s, "weights": w, "density": b}
        return cls([blk], alpha, "LaplaceOfDensity", name, src)

    # -- structure --------------------------------------------------------
    @property
    def poles(self):
        out = [b.r.poles for b in self.blocks]
        return np.concatenate(out) if out else np.zeros(0, complex)

    @property
    def decay_power(self):
        """Largest ``d`` with ``f(z) = O(|z|^-d)`` along vertical lines."""
        if not self.blocks:
            return math.inf
        return min(b.r.decay_power for b in self.blocks)

    @property
    def decay_order(self):
        """``s`` with ``f = O(|z|^-(1+s))``; positive exactly on the decaying class."""
        d = self.decay_power
        return max(d - 1.0, 0.0) if math.isfinite(d) else math.inf

    @property
    def in_decaying_class(self):
        return self.decay_order > 0

    @property
    def is_constant(self):
        return not self.derivative(1).blocks

    @property
    def max_rate(self):
        return max((float(b.tau.max()) for b in self.blocks), default=0.0)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        for b in self.blocks:
            out = out + b(z)
        return out

    def __mul__(self, other):
        if not isinstance(other, HalfPlaneFunction):
            c = complex(other)
            return HalfPlaneFunction([_Block(b.r.scale(c), b.c, b.tau, b.shift) for b in self.blocks],
                                     self.alpha, self.variant if self.variant != "Rational" else "Rational")
        blocks = []
        for a in self.blocks:
            for b in other.blocks:
                tau = np.add.outer(a.tau, b.tau)
                moment = np.add.outer(a.tau * a.shift, b.tau * b.shift)
                shift = np.divide(moment, tau, out=np.zeros_like(tau), where=tau > 0)
                blocks.append(_Block(a.r * b.r, np.multiply.outer(a.c, b.c).ravel(),
                                     tau.ravel(), shift.ravel()))
        return HalfPlaneFunction(blocks, max(self.alpha, other.alpha))

    __rmul__ = __mul__

    def derivative(self, m=1):
        """Exact ``m``-th derivative."""
        if m < 0:
            raise ParameterError("derivative order must be >= 0")
        f = self
        for _ in range(m):
            blocks = []
            for b in f.blocks:
                blocks.append(_Block(b.r.derivative(), b.c, b.tau, b.shift))
                if np.any(b.tau):
                    blocks.append(_Block(b.r, -b.tau * b.c, b.tau, b.shift))
            f = HalfPlaneFunction(blocks, f.alpha)
        return f

    def hinf_norm(self, beta=None):
        return hinf_norm(self, self.alpha if beta is None else beta)

    # -- serialisation ----------------------------------------------------
    def to_json(self):
        d = {"variant": self.variant, "alpha": _num(self.alpha), "decayOrder": _num(self.decay_order)}
        src = self._source
        if self.variant == "Rational" and src is not None:
            d["numerator"] = _cpairs(src["numerator"])
            d["denominator"] = _cpairs(src["denominator"])
        elif self.variant == "LaplaceOfDensity" and src is not None:
            d["nodes"] = src["nodes"].tolist()
            d["weights"] = src["weights"].tolist()
            d["density"] = _cpairs(src["density"])
        else:
            d["variant"] = "ExpRational"
            terms = []
            for b in self.blocks:
                num, den = b.r.expanded()
                for c, tau, sh in zip(b.c, b.tau, b.shift):
                    t = {"c": [c.real, c.imag], "tau": float(tau),
                         "numerator": _cpairs(num), "denominator": _cpairs(den)}
                    if sh:
                        t["shift"] = float(sh)
                    terms.append(t)
            d["terms"] = terms
        if self.name:
            d["name"] = self.name
        return d

    @classmethod
    def from_json(cls, d):
        try:
            variant = d["variant"]
            alpha = d.get("alpha")
            alpha = None if alpha is None else _from_num(alpha)
            name = d.get("name")
            if variant == "Rational":
                f = cls.rational(_from_cpairs(d["numerator"]), _from_cpairs(d["denominator"]), alpha, name)
            elif variant == "ExpRational":
                f = cls.exp_rational([(complex(*t["c"]) if isinstance(t["c"], list) else complex(t["c"]),
                                       t["tau"], _from_cpairs(t["numerator"]),
                                       _from_cpairs(t.get("denominator", [1.0])),
                                       t.get("shift", 0.0))
                                      for t in d["terms"]], alpha, name)
            elif variant == "LaplaceOfDensity":
                f = cls.laplace_of_density(d["nodes"], _from_cpairs(d["density"]), d.get("weights"),
                                           0.0 if alpha is None else alpha, name)
            else:
                raise InputError(f"unknown function variant {variant!r}")
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed function description: {exc}") from None
        declared = d.get("decayOrder")
        if declared is not None and _from_num(declared) > f.decay_order + 1e-12:
            raise InputError(f"declared decayOrder {declared} exceeds actual {f.decay_order}")
        return f

    def __repr__(self):
        label = self.name or self.variant
        return f"<HalfPlaneFunction {label} alpha={self.alpha:g} decay={self.decay_order:g}>"


def _num(x):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


def _from_num(x):
    if isinstance(x, str):
        return float(x.replace("Infinity", "inf"))
    return float(x)


def _cpairs(a):
    return [[float(np.real(z)), float(np.imag(z))] for z in np.atleast_1d(a)]


def _from_cpairs(a):
    return np.array([complex(*z) if isinstance(z, (list, tuple)) else complex(z) for z in a])


def hinf_norm(f, beta):
    """Sup of ``|f|`` on ``Re z > beta``, from the boundary line (maximum principle).

    The boundary is scanned on a log-spaced grid, a uniform grid resolving the
    fastest exponential, and the imaginary parts of the poles; the best few
    points are polished by bounded scalar maximisation. The result is a lower
    bound exact up to the grid resolution.
    """
    if not math.isfinite(beta):
        raise ParameterError("sup norm needs a finite abscissa")
    if beta < f.alpha:
        raise ParameterError(f"beta={beta:g} is left of the domain abscissa {f.alpha:g}")
    if f.poles.size and not np.max(f.poles.real) < beta:
        return math.inf
    if not f.blocks:
        return 0.0
    poles = f.poles
    scale = max(1.0, float(np.max(np.abs(poles))) if poles.size else 1.0)
    pos = np.logspace(-4, 5, 600) * scale
    ts = [np.zeros(1), pos, -pos, poles.imag]
    rate = f.max_rate
    if rate > 0:
        step = min(0.5, math.pi / (8 * rate))
        span = min(200.0 * scale, 40000 * step)
        ts.append(np.arange(-span, span + step, step))
    t = np.unique(np.concatenate(ts))
    vals = np.abs(f(beta + 1j * t))
    best = float(vals.max())
    order = np.argsort(vals)[::-1][:5]
    for i in order:
        lo = t[max(i - 1, 0)]
        hi = t[min(i + 1, t.size - 1)]
        if hi <= lo:
            continue
        res = minimize_scalar(lambda s: -abs(complex(f(beta + 1j * s))), bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-10 * max(1.0, abs(t[i]))})
        best = max(best, -float(res.fun))
    return best
