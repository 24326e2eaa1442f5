"""Growth bound, abscissa of uniform boundedness and their gamma-analogues.

For matrices ``omega(A) = s0(A) = min Re sigma(A)``; both are returned
exactly and the sampling estimators are kept as consistency checks. The
gamma-abscissae have no closed form off Hilbert spaces and are located by
bisection: a probe passes when the relevant operator family has a
gamma-bound estimate below ``threshold``. The same bisection run on plain
operator norms measures how far the threshold rule sits from the exact
answer, and that offset is the tolerance reported for the gamma fields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .conditions import gamma_type_check
from .funcalc import half_plane_type, resolvent_sup, resolvents, semigroup_exp
from .gaussian import GaussianConfig, gamma_bound_estimate
from .quadrature import integrate_halfline
from .spaces import MatrixOperator, operator_norm

__all__ = [
    "BoundEstimate",
    "BoundsReport",
    "growth_bound",
    "s0_bound",
    "gamma_abscissae",
    "lemma_ineq_check",
    "disc_contour_check",
    "gearhart_pruss_report",
    "K_GROTHENDIECK",
]

# upper bound for the constant of the L^inf integral-means estimate
K_GROTHENDIECK = 1.783


@dataclass
class BoundEstimate:
    value: float
    exact: bool
    method: str
    tolerance: float = 0.0
    check: dict = field(default_factory=dict)

    def to_json(self):
        return {"value": _j(self.value), "exact": self.exact, "method": self.method,
                "tolerance": _j(self.tolerance), "check": {k: _j(v) if isinstance(v, float) else v
                                                          for k, v in self.check.items()}}


def _j(x):
    x = float(x)
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


def _scale(A):
    return max(1.0, float(np.max(np.abs(A.spectrum))))


def _norm_upper(M, space):
    """Operator norm, or its Riesz-Thorin upper bound when p is not 1, 2 or inf."""
    p = space.p
    if p == 2:
        return float(np.linalg.norm(M, 2))
    n1 = float(np.abs(M).sum(axis=0).max())
    ninf = float(np.abs(M).sum(axis=1).max())
    if p == 1:
        return n1
    if np.isinf(p):
        return ninf
    return n1 ** (1.0 / p) * ninf ** (1.0 - 1.0 / p)


def _shifted(A, c):
    return A.with_entries(A.entries - c * np.eye(A.n))


def growth_bound(A: MatrixOperator, time_grid=None):
    """Growth bound ``omega(A)``, exact, with a log-norm fit as a check.

    The fit is the negative slope of ``log ||exp(-tA)||`` over the later half
    of the grid; polynomial factors from Jordan blocks bias it by about
    ``(n-1)/t``, which is the tolerance of the check.
    """
    w0 = half_plane_type(A)
    if time_grid is None:
        T = 400.0 / _scale(A)
        time_grid = np.linspace(T / 2, T, 32)
    t = np.asarray(time_grid, dtype=float)
    B = _shifted(A, w0)
    # log ||exp(-tA)|| = log ||exp(-t(A - w0))|| - w0 t, without overflow
    logs = np.array([math.log(operator_norm(semigroup_exp(B, s), starts=4).value) for s in t]) - w0 * t
    slope = float(np.polyfit(t, logs, 1)[0])
    fit = -slope
    tol = 2.0 * (A.n - 1) / float(t.min()) + 1e-8 * max(1.0, abs(w0))
    ok = abs(fit - w0) <= tol
    check = {"fit": fit, "fitTolerance": tol, "consistent": bool(ok)}
    if not ok:
        check["diagnostic"] = "log-norm fit disagrees with the spectral value; time grid too short"
    return BoundEstimate(w0, True, "min Re spectrum", 0.0, check)


def _bisect(pred, top, span, tol, expand=8):
    """Largest passing point below ``top``: returns ``(passing, failing)`` ends.

    ``(-inf, last tested)`` if no probe passes after ``expand`` widenings.
    """
    if pred(top):
        return top, top
    lo = top - span
    for _ in range(expand):
        if pred(lo):
            break
        span *= 4.0
        lo = top - span
    else:
        return -math.inf, lo
    a, b = lo, top
    while b - a > tol:
        mid = 0.5 * (a + b)
        if pred(mid):
            a = mid
        else:
            b = mid
    return a, b


def s0_bound(A: MatrixOperator, threshold=1e3, tol=1e-6):
    """Abscissa ``s0(A)``, exact, with a resolvent-sup bisection as a check.

    The scan passes ``alpha`` when the spectrum lies right of it and the
    sup of ``||R(alpha + it, A)||`` is at most ``threshold``. Since
    ``||R(z, A)|| >= 1 / dist(z, sigma(A))`` the scan must stop at least
    ``1/threshold`` left of ``s0``; that lower offset is checked.
    """
    w0 = half_plane_type(A)
    pred = lambda a: a < w0 and resolvent_sup(A, a)[0] <= threshold
    a, b = _bisect(pred, w0, max(1.0, abs(w0)) * 0.1, tol * max(1.0, abs(w0)))
    offset = w0 - a
    ok = offset >= (1.0 / threshold) * (1 - 1e-3) - tol
    return BoundEstimate(w0, True, "min Re spectrum", 0.0,
                         {"scan": a, "scanOffset": offset, "threshold": threshold,
                          "consistent": bool(ok)})


def _gamma_time_grid(A, horizon=1e3, count=40):
    return np.concatenate([[0.0], np.geomspace(1e-3, horizon, count) / _scale(A)])


def _resolvent_family(A, alpha, scale):
    eig = A.spectrum
    reals = alpha - np.concatenate([[0.0], np.geomspace(1e-2, 1e2, 4) * scale])
    ims = np.unique(np.concatenate([eig.imag, np.linspace(-4 * scale, 4 * scale, 9)]))
    z = (reals[:, None] + 1j * ims[None, :]).ravel()
    return [A.with_entries(R) for R in resolvents(A.entries, z)]


def gamma_abscissae(A: MatrixOperator, cfg: GaussianConfig = GaussianConfig(), threshold=1e3,
                    budget=10, tol=1e-3, time_grid=None):
    """Estimates of ``(omega_gamma, s0_gamma)``.

    On Hilbert spaces gamma-boundedness is uniform boundedness and both equal
    ``min Re sigma(A)`` exactly. Otherwise ``omega_gamma`` is the largest
    ``omega`` whose family ``{exp(omega t) T_t}`` passes
    :func:`gamma_type_check` with a bound below ``threshold``, and
    ``s0_gamma`` the largest ``alpha`` whose resolvent family on
    ``Re z <= alpha`` does. ``-inf`` is reported when every probe fails.
    """
    w0 = half_plane_type(A)
    if A.space.p == 2:
        return (BoundEstimate(w0, True, "Hilbert collapse"), BoundEstimate(w0, True, "Hilbert collapse"))
    scale = _scale(A)
    grid = _gamma_time_grid(A) if time_grid is None else np.asarray(time_grid, dtype=float)
    step = tol * max(1.0, abs(w0))
    span = 0.1 * max(1.0, abs(w0))
    top = w0 + 2.0 * math.log(threshold) / float(grid.max())

    def pass_gamma_type(w):
        r = gamma_type_check(A, w, time_grid=grid, cfg=cfg, budget=budget, threshold=threshold)
        return r.verdict == "consistent" and r.constant <= threshold

    def pass_plain_type(w):
        B = _shifted(A, w)
        return max(_norm_upper(semigroup_exp(B, t).entries, A.space) for t in grid) <= threshold

    def pass_gamma_res(a):
        if not a < w0:
            return False
        gb = gamma_bound_estimate(_resolvent_family(A, a, scale), budget=budget, cfg=cfg)
        return gb.lower <= threshold

    def pass_plain_res(a):
        return a < w0 and resolvent_sup(A, a)[0] <= threshold

    wg, wg_fail = _bisect(pass_gamma_type, top, span, step)
    wp, _ = _bisect(pass_plain_type, top, span, step)
    sg, sg_fail = _bisect(pass_gamma_res, w0, span, step)
    sp, _ = _bisect(pass_plain_res, w0, span, step)
    tol_w = (wg_fail - wg if math.isfinite(wg) else 0.0) + abs(wp - w0)
    tol_s = (sg_fail - sg if math.isfinite(sg) else 0.0) + abs(sp - w0)
    meta = {"threshold": threshold, "samples": cfg.samples, "seed": cfg.seed}
    om = BoundEstimate(wg, False, "bisection on gamma_type_check", tol_w,
                       dict(meta, plainScan=wp, sentinel=not math.isfinite(wg)))
    s0 = BoundEstimate(sg, False, "bisection on resolvent-family gamma-bound", tol_s,
                       dict(meta, plainScan=sp, sentinel=not math.isfinite(sg)))
    return om, s0


def lemma_ineq_check(A: MatrixOperator, delta=None, cfg: GaussianConfig = GaussianConfig(), budget=10):
    """Check the mechanism behind ``omega(A) <= s0_gamma(A)``.

    For ``w = omega(A) - delta`` the resolvents ``R(alpha + it)``,
    ``alpha <= w``, are L^inf-means of ``s -> exp(ws) T_s``, so their
    gamma-bound is at most ``K_G * int_0^inf ||exp(ws) T_s|| ds``. The
    gamma-bound estimate of a sampled resolvent family is compared with
    that bound.
    """
    w0 = half_plane_type(A)
    scale = _scale(A)
    if delta is None:
        delta = 0.1 * max(1.0, abs(w0))
    w = w0 - delta
    B = _shifted(A, w)

    def integrand(s):
        return np.array([_norm_upper(semigroup_exp(B, si).entries, A.space) for si in s])

    res = integrate_halfline(integrand, scale=1.0 / delta, tol=1e-10, rtol=1e-8)
    l1 = float(res.value)
    bound = K_GROTHENDIECK * l1
    fam = []
    for a in (w, w - delta, w - 10 * delta):
        fam += _resolvent_family(A, a, scale)[:9 + A.n]
    gb = gamma_bound_estimate(fam, budget=budget, cfg=cfg)
    holds = gb.ci[0] <= bound * (1 + 1e-9)
    return {"omegaPrime": w, "l1Norm": l1, "bound": bound, "resolventGamma": gb.lower,
            "ci": list(gb.ci), "exact": gb.exact, "holds": bool(holds)}


def _disc(mu):
    """Disc ``|z - c| < r`` inside ``Re z > 0`` containing the points ``mu``."""
    c = 1.25 * float(np.max(np.abs(mu) ** 2 / (2 * mu.real)))
    far = float(np.max(np.abs(mu - c)))
    r = far + 0.5 * (c - far)
    return c, r


def disc_contour_check(A: MatrixOperator, deltas=(0.1, 1.0), cfg: GaussianConfig = GaussianConfig(),
                       times=None, budget=10, nodes=None):
    """Uniformly continuous case: ``{exp(-delta t) S_t}`` is gamma-bounded for each delta > 0.

    Here ``S_t = exp(-t(A - omega I))`` with ``omega = omega(A)``. On a disc
    ``D`` in the open right half-plane containing ``sigma(B)``,
    ``B = A - omega + delta``,

        exp(-delta t) S_t = (1/2 pi i) int_{dD} exp(-t z) R(z, B) dz,

    and ``|exp(-tz)| <= 1`` on ``D``, so the gamma-bound is at most
    ``K_G (r / 2 pi) int_0^{2 pi} ||R(c + r e^{i theta}, B)|| d theta``. The
    representation itself is verified at a few times by the trapezoid rule.
    """
    w0 = half_plane_type(A)
    out = []
    for d in deltas:
        B = A.entries - (w0 - d) * np.eye(A.n)
        mu = np.linalg.eigvals(B)
        c, r = _disc(mu)
        gap = r - float(np.max(np.abs(mu - c)))
        ts = (np.concatenate([[0.0], np.geomspace(1e-2, 1e2, 20) / max(1.0, abs(d))])
              if times is None else np.asarray(times, dtype=float))
        # the trapezoid rule needs about r t nodes to resolve exp(-tz) on the circle
        check_t = ts[ts * r <= 50.0][:: 2]
        N = int(np.clip(np.ceil(60 * r / gap), 256, 20000)) if nodes is None else int(nodes)
        theta = 2 * np.pi * np.arange(N) / N
        z = c + r * np.exp(1j * theta)
        R = resolvents(B, z)
        bound = K_GROTHENDIECK * r * float(np.mean(np.linalg.norm(R, 2, axis=(1, 2))
                                                   if A.space.p == 2 else
                                                   [_norm_upper(m, A.space) for m in R]))
        fam = [A.with_entries(semigroup_exp(A.with_entries(B), t).entries) for t in ts]
        # dz = i r e^{i theta} d theta, so (1/2 pi i) dz -> r e^{i theta} / N per node;
        # errors are absolute since |exp(-tz)| <= 1 on the disc
        rep_err = 0.0
        for t in check_t:
            rep = np.einsum("k,kij->ij", np.exp(-t * z) * r * np.exp(1j * theta) / N, R)
            exact = semigroup_exp(A.with_entries(B), t).entries
            rep_err = max(rep_err, float(np.linalg.norm(rep - exact, 2)))
        gb = gamma_bound_estimate(fam, budget=budget, cfg=cfg)
        out.append({"delta": float(d), "center": c, "radius": r, "bound": bound,
                    "gammaLower": gb.lower, "ci": list(gb.ci), "representationError": rep_err,
                    "holds": bool(gb.ci[0] <= bound * (1 + 1e-9))})
    return out


@dataclass
class BoundsReport:
    omega: BoundEstimate
    s0: BoundEstimate
    omega_gamma: BoundEstimate
    s0_gamma: BoundEstimate
    ordering: dict
    pattern: str
    lemma_ineq: dict | None = None
    disc: list | None = None

    def to_json(self):
        d = {"omega": self.omega.to_json(), "s0": self.s0.to_json(),
             "omegaGamma": self.omega_gamma.to_json(), "s0Gamma": self.s0_gamma.to_json(),
             "ordering": self.ordering, "pattern": self.pattern}
        if self.lemma_ineq is not None:
            d["lemmaIneq"] = {k: (_j(v) if isinstance(v, float) else v) for k, v in self.lemma_ineq.items()}
        if self.disc is not None:
            d["discContour"] = self.disc
        return d


def ordering_check(values, tolerances):
    """``omega_gamma <= omega <= s0_gamma <= s0`` up to the summed tolerances."""
    names = ["omegaGamma", "omega", "s0Gamma", "s0"]
    slack, ok = [], True
    for i in range(3):
        a, b = values[i], values[i + 1]
        if a == -math.inf:
            slack.append(math.inf)
            continue
        s = b - a + tolerances[i] + tolerances[i + 1]
        slack.append(s)
        ok &= s >= -1e-12 * max(1.0, abs(a), abs(b))
    return {"chain": names, "slack": [_j(s) for s in slack], "holds": bool(ok)}


def gearhart_pruss_report(A: MatrixOperator, cfg: GaussianConfig = GaussianConfig(), threshold=1e3,
                          budget=10, checks=True):
    """All four abscissae, the ordering check and the two auxiliary checks."""
    om = growth_bound(A)
    s0 = s0_bound(A, threshold=threshold)
    og, sg = gamma_abscissae(A, cfg, threshold=threshold, budget=budget)
    vals = [og.value, om.value, sg.value, s0.value]
    tols = [og.tolerance, om.tolerance, sg.tolerance, s0.tolerance]
    order = ordering_check(vals, tols)
    eq = lambda a, b: abs(a.value - b.value) <= a.tolerance + b.tolerance + 1e-12 * max(1.0, abs(b.value))
    if not math.isfinite(og.value):
        pattern = "no gamma-type"
    elif eq(og, om) and eq(sg, s0) and eq(om, s0):
        pattern = "all equal"
    else:
        parts = []
        if not eq(og, om):
            parts.append("omegaGamma < omega")
        if not eq(om, sg):
            parts.append("omega < s0Gamma")
        if not eq(sg, s0):
            parts.append("s0Gamma < s0")
        pattern = ", ".join(parts)
    lem = lemma_ineq_check(A, cfg=cfg, budget=budget) if checks else None
    disc = disc_contour_check(A, cfg=cfg, budget=budget) if checks else None
    return BoundsReport(om, s0, og, sg, order, pattern, lem, disc)
