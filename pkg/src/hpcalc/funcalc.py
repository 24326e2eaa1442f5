"""Half-plane holomorphic functional calculus for matrices.

For ``f`` decaying on the half-plane, ``f(A)`` is the vertical line integral

    f(A) = -(1/2pi) int f(delta + i t) R(delta + i t, A) dt,

where the sign accounts for the upward orientation of the line with the
spectrum on its right. General bounded ``f`` are reached by regularisation
with ``e(z) = (mu - z)^-2`` and derivatives by resolvent powers:

    f^(m)(A) = -(m!/2pi) int f(alpha + i t) R(alpha + i t, A)^(m+1) dt.

Before integration the first terms of the Neumann expansion of the resolvent
around a point ``c`` left of the line are subtracted. Those terms are
powers of ``(z - c)^-1`` whose products with ``f`` integrate to zero over the
line, so the integral is unchanged while the integrand decays several orders
faster; this keeps tails of oscillating integrands (``exp(-tau z)``) tame.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial
from scipy.linalg import expm

from .errors import AbscissaError, IllConditionedWarning, ParameterError, SpectrumHit, TailBoundFailure
from .functions import HalfPlaneFunction, Rational, _Block, hinf_norm
from .quadrature import QuadratureConfig, integrate, integrate_line, line_breakpoints
from .spaces import MatrixOperator, operator_norms

__all__ = [
    "QuadratureConfig",
    "CalculusResult",
    "HalfPlaneTypeReport",
    "resolvent",
    "resolvents",
    "half_plane_type",
    "half_plane_type_check",
    "resolvent_sup",
    "dunford_eval",
    "regularized_eval",
    "semigroup_exp",
    "derivative_calculus_eval",
]

_SUBTRACT_TERMS = 4


@dataclass
class CalculusResult:
    operator: MatrixOperator
    error: float
    abscissa: float
    panels: int
    converged: bool

    @property
    def entries(self):
        return self.operator.entries


def resolvent(A, lam):
    """``R(lam, A) = (lam I - A)^-1`` by a dense solve."""
    lam = complex(lam)
    M = lam * np.eye(A.n) - A.entries
    if np.min(np.abs(A.spectrum - lam)) == 0:
        raise SpectrumHit(f"{lam} is an eigenvalue")
    try:
        R = np.linalg.solve(M, np.eye(A.n))
    except np.linalg.LinAlgError:
        raise SpectrumHit(f"{lam} is numerically in the spectrum") from None
    cond = np.linalg.cond(M)
    if cond > 1e12:
        warnings.warn(f"resolvent at {lam}: condition number {cond:.2e}", IllConditionedWarning,
                      stacklevel=2)
    return A.with_entries(R)


def resolvents(M, z):
    """Stack of ``(z_k I - M)^-1`` for an array of points ``z``."""
    z = np.asarray(z, dtype=complex)
    n = M.shape[0]
    stack = z[:, None, None] * np.eye(n) - M[None]
    return np.linalg.inv(stack)


def half_plane_type(A):
    """Largest ``omega`` with the spectrum in ``Re z >= omega`` (exact for matrices)."""
    return float(np.min(A.spectrum.real))


def _stack_norms(stack, space):
    return operator_norms(stack, space, starts=4)


def resolvent_sup(A, alpha, *, n_grid=400, refine=3):
    """Sup over ``t`` of ``||R(alpha + i t, A)||`` (grid maximum, refined until stable).

    Returns ``(sup, t_at_sup, stable)``.
    """
    eig = A.spectrum
    dist = max(float(np.min(np.abs(eig.real - alpha))), 1e-12)
    scale = max(1.0, float(np.max(np.abs(eig))))
    t = [eig.imag, np.linspace(-4 * scale, 4 * scale, n_grid),
         np.logspace(-3, 4, 80) * scale, -np.logspace(-3, 4, 80) * scale]
    t += [c + dist * np.array([-2.0, -1.0, -0.5, 0.5, 1.0, 2.0]) for c in eig.imag]
    t = np.unique(np.concatenate(t))
    vals = _stack_norms(resolvents(A.entries, alpha + 1j * t), A.space)
    prev = float(vals.max())
    stable = False
    for _ in range(refine):
        i = int(np.argmax(vals))
        lo = t[max(i - 1, 0)]
        hi = t[min(i + 1, t.size - 1)]
        tt = np.linspace(lo, hi, 41)
        vv = _stack_norms(resolvents(A.entries, alpha + 1j * tt), A.space)
        t = np.concatenate([t, tt])
        vals = np.concatenate([vals, vv])
        cur = float(vals.max())
        if cur <= prev * (1 + 1e-6):
            stable = True
            prev = cur
            break
        prev = cur
    i = int(np.argmax(vals))
    return float(vals[i]), float(t[i]), stable


@dataclass
class HalfPlaneTypeReport:
    omega: float
    alphas: list
    sups: list
    verdict: str
    witness: complex | None = None

    def to_json(self):
        return {"omega": self.omega, "alphas": list(map(float, self.alphas)),
                "resolventSup": list(map(float, self.sups)), "verdict": self.verdict,
                "witness": None if self.witness is None else [self.witness.real, self.witness.imag]}


def half_plane_type_check(A, omega, alpha_grid=None):
    """Check that ``A`` is of half-plane type ``omega``.

    For each ``alpha < omega`` the sup of the resolvent norm over the line
    ``Re z = alpha`` is computed; by subharmonicity of ``||R(z, A)||`` and its
    decay at infinity this is the sup over ``Re z <= alpha``.
    """
    eig = A.spectrum
    bad = eig[eig.real < omega - 1e-12]
    if alpha_grid is None:
        alpha_grid = omega - np.logspace(-2, 2, 9)
    alpha_grid = np.asarray(alpha_grid, dtype=float)
    if np.any(alpha_grid >= omega):
        raise ParameterError("alpha grid must lie strictly below omega")
    if bad.size:
        w = bad[np.argmin(bad.real)]
        return HalfPlaneTypeReport(omega, list(alpha_grid), [], "fail", complex(w))
    sups = [resolvent_sup(A, a)[0] for a in alpha_grid]
    verdict = "pass" if all(np.isfinite(sups)) else "fail"
    return HalfPlaneTypeReport(omega, list(alpha_grid), sups, verdict)


def semigroup_exp(A, t):
    """``exp(-t A)`` (scaling and squaring with a Pade kernel)."""
    if t < 0:
        raise ParameterError("semigroup time must be nonnegative")
    return A.with_entries(expm(-t * A.entries))


def _neumann_terms(M, c, k_max):
    n = M.shape[0]
    B = M - c * np.eye(n)
    out = [np.eye(n, dtype=complex)]
    for _ in range(1, k_max):
        out.append(out[-1] @ B)
    return np.array(out), float(np.linalg.norm(B, 2))


def _line_integral(A, f, abscissa, power, quad):
    """``int f(a + i t) R(a + i t, A)^power dt`` with Neumann-term subtraction."""
    M = A.entries
    n = A.n
    eig = A.spectrum
    spread = float(np.linalg.norm(M - abscissa * np.eye(n), 2))
    c = abscissa - max(1.0, spread)
    K = _SUBTRACT_TERMS
    terms, rho = _neumann_terms(M, c, K)
    m = power - 1
    binom = np.array([math.comb(k + m, m) for k in range(K)], dtype=float)
    scaled = terms * binom[:, None, None]

    def integrand(t):
        z = abscissa + 1j * t
        R = resolvents(M, z)
        if power > 1:
            R = np.linalg.matrix_power(R, power)
        w = 1.0 / (z - c)
        powers = w[:, None] ** (np.arange(K)[None, :] + power)
        S = np.einsum("zk,kij->zij", powers, scaled)
        return f(z)[:, None, None] * (R - S)

    centers = np.concatenate([eig.imag, f.poles.imag]) if f.poles.size else eig.imag
    d_spec = float(np.min(np.abs(eig.real - abscissa)))
    d_pole = float(np.min(np.abs(f.poles.real - abscissa))) if f.poles.size else math.inf
    width = max(min(d_spec, d_pole), 1e-9)
    if quad.truncation is None:
        res = integrate_line(integrand, centers=centers, width=width, tol=quad.tol,
                             rtol=quad.rtol, max_panels=quad.max_panels)
        return res, 0.0
    T = float(quad.truncation)
    res = integrate(integrand, line_breakpoints(centers, width, T), quad.tol, quad.rtol, quad.max_panels)
    if T <= rho:
        return res, math.inf
    # ||R^p - S|| <= sum_{k>=K} C(k+m, m) rho^k / t^(k+p) for |t| >= T > rho
    fsup = hinf_norm(f, abscissa)
    ks = np.arange(K, K + 400)
    terms_k = np.array([math.comb(int(k) + m, m) for k in ks], dtype=float)
    expo = ks + power - 1
    tail = 2 * fsup * float(np.sum(terms_k * (rho / T) ** ks / (expo * T ** (power - 1))))
    return res, tail


def _strip_abscissa(f, omega, delta, lower=None):
    lo = f.alpha if lower is None else max(f.alpha, lower)
    if delta is None:
        delta = 0.5 * (lo + omega) if math.isfinite(lo) else omega - 1.0
    if not lo < delta < omega:
        raise AbscissaError(f"abscissa {delta:g} not in ({lo:g}, {omega:g})")
    return float(delta)


def dunford_eval(A, f, quad=None):
    """``f(A)`` by the vertical line integral; ``f`` must decay like ``|z|^-(1+s)``, ``s > 0``."""
    quad = quad or QuadratureConfig()
    if not f.in_decaying_class:
        raise TailBoundFailure(f"{f!r} does not decay faster than 1/|z|; use regularized_eval")
    omega = half_plane_type(A)
    if not f.alpha < omega:
        raise AbscissaError(f"domain abscissa {f.alpha:g} must be left of the spectrum ({omega:g})")
    delta = _strip_abscissa(f, omega, quad.delta)
    res, tail = _line_integral(A, f, delta, 1, quad)
    val = -res.value / (2 * math.pi)
    return CalculusResult(A.with_entries(val), (res.error + tail) / (2 * math.pi), delta,
                          res.panels, res.converged and math.isfinite(tail))


def regularized_eval(A, f, mu=None, quad=None):
    """``f(A) = e(A)^-1 (e f)(A)`` with ``e(z) = (mu - z)^-2`` and ``e(A) = R(mu, A)^2``."""
    quad = quad or QuadratureConfig()
    omega = half_plane_type(A)
    if mu is None:
        mu = (min(f.alpha, omega) if math.isfinite(f.alpha) else omega) - 1.0
    mu = float(mu)
    if math.isfinite(f.alpha) and not mu < f.alpha:
        raise ParameterError(f"mu={mu:g} must be left of the domain abscissa {f.alpha:g}")
    if not mu < omega:
        raise ParameterError(f"mu={mu:g} must be left of the spectrum")
    # factored (z - mu)^2 keeps the double pole exactly at mu
    r = Rational(Polynomial([1.0 + 0j]), ((Polynomial([-mu + 0j, 1.0 + 0j]), 2),))
    e = HalfPlaneFunction([_Block(r, np.array([1.0 + 0j]), np.array([0.0]))], mu)
    ef = e * f
    delta = quad.delta
    if delta is None:
        lo = max(ef.alpha, mu)
        delta = 0.5 * (lo + omega)
    inner = dunford_eval(A, ef, QuadratureConfig(quad.tol, quad.rtol, quad.max_panels, quad.truncation, delta))
    B = mu * np.eye(A.n) - A.entries
    B2 = B @ B
    val = B2 @ inner.entries
    err = inner.error * float(np.linalg.norm(B2, 2))
    return CalculusResult(A.with_entries(val), err, inner.abscissa, inner.panels, inner.converged)


def derivative_calculus_eval(A, f, m, alpha=None, quad=None):
    """``f^(m)(A)`` from the resolvent-power integral on the line ``Re z = alpha``."""
    quad = quad or QuadratureConfig()
    if int(m) != m or m < 1:
        raise ParameterError("derivative order m must be an integer >= 1")
    m = int(m)
    omega = half_plane_type(A)
    if alpha is None:
        alpha = 0.5 * (f.alpha + omega) if math.isfinite(f.alpha) else omega - 1.0
    if not alpha < omega:
        raise AbscissaError(f"alpha={alpha:g} must be left of the spectrum ({omega:g})")
    if f.poles.size and not np.max(f.poles.real) < alpha:
        raise AbscissaError(f"f has a pole on or right of the line Re z = {alpha:g}")
    res, tail = _line_integral(A, f, float(alpha), m + 1, quad)
    fac = math.factorial(m) / (2 * math.pi)
    val = -fac * res.value
    return CalculusResult(A.with_entries(val), fac * (res.error + tail), float(alpha), res.panels,
                          res.converged and math.isfinite(tail))
