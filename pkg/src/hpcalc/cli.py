"""Command-line front end.

Every subcommand writes a JSON report that embeds the full run configuration
(including the seed); sweep data go to CSV with a PNG plot beside it unless
``--no-plot`` is given. Exit status: 0 consistent, 2 violated with a witness,
1 input or parameter error (the error code is printed on stderr and written
to the report).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import HPCalcError, InputError
from .gaussian import GaussianConfig
from .quadrature import QuadratureConfig
from .report import write_csv, write_json

__all__ = ["RunConfig", "run", "main", "build_parser", "parse_space"]

EXIT_OK, EXIT_INPUT, EXIT_VIOLATED = 0, 1, 2


@dataclass
class RunConfig:
    command: str
    matrix: str | None = None
    omega: float | None = None
    m: int = 1
    budget: int | None = None
    seed: int = 0
    samples: int = 10_000
    batches: int = 20
    tol: float = 1e-11
    rtol: float = 1e-11
    max_panels: int = 4000
    out: str | None = None
    csv: str | None = None
    plot: bool = True
    options: dict = field(default_factory=dict)

    @property
    def gaussian(self):
        return GaussianConfig(self.samples, self.seed, self.batches)

    @property
    def quad(self):
        return QuadratureConfig(self.tol, self.rtol, self.max_panels)

    def to_json(self):
        return dataclasses.asdict(self)


def parse_space(text):
    """``hilbert:d``, ``seq:d:p`` or ``func:start:h:count:p``."""
    from .spaces import SpaceDescriptor

    parts = text.split(":")
    try:
        kind = parts[0].lower()
        if kind == "hilbert" and len(parts) == 2:
            return SpaceDescriptor.hilbert(int(parts[1]))
        if kind == "seq" and len(parts) == 3:
            return SpaceDescriptor.seq_lattice(int(parts[1]), float(parts[2]))
        if kind == "func" and len(parts) == 5:
            return SpaceDescriptor.func_lattice(float(parts[1]), float(parts[2]), int(parts[3]), float(parts[4]))
    except ValueError as exc:
        raise InputError(f"bad space {text!r}: {exc}") from None
    raise InputError(f"bad space {text!r}; use hilbert:d, seq:d:p or func:start:h:count:p")


def _floats(text, kind=float):
    try:
        return [kind(s.replace(" ", "")) for s in str(text).split(",") if s.strip()]
    except ValueError as exc:
        raise InputError(f"bad number list {text!r}: {exc}") from None


def _load_json_arg(text):
    """Inline JSON (starting with ``{``) or a path to a JSON file."""
    if text.lstrip().startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid inline JSON: {exc}") from None
    try:
        return json.loads(Path(text).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {text}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{text}: invalid JSON ({exc})") from None


def _matrix(cfg):
    from .spaces import load_matrix

    if cfg.matrix is None:
        raise InputError("--matrix is required")
    return load_matrix(cfg.matrix)


def _omega(cfg, A):
    from .funcalc import half_plane_type

    return half_plane_type(A) if cfg.omega is None else float(cfg.omega)


def _status(verdicts):
    return EXIT_VIOLATED if any(v == "violatedWithWitness" for v in verdicts) else EXIT_OK


# -- command handlers: return (result, exit_status, csv_spec or None) ------------

def _cmd_resolvent(cfg):
    from .funcalc import half_plane_type_check, resolvent

    A = _matrix(cfg)
    out = {}
    z = cfg.options.get("z")
    if z is not None:
        try:
            lam = complex(z.replace(" ", ""))
        except ValueError:
            raise InputError(f"bad complex number {z!r}") from None
        R = resolvent(A, lam)
        out["z"] = lam
        out["resolvent"] = R.entries
        out["norm"] = R.norm().value
    omega = _omega(cfg, A)
    rep = half_plane_type_check(A, omega)
    out["halfPlaneType"] = rep
    status = EXIT_OK if rep.verdict == "pass" else EXIT_VIOLATED
    rows = [(a, s) for a, s in zip(rep.alphas, rep.sups)]
    return out, status, (["alpha", "resolvent_sup"], rows, {"logy": True})


def _cmd_funcalc(cfg):
    from .functions import HalfPlaneFunction
    from .funcalc import derivative_calculus_eval, dunford_eval, regularized_eval

    A = _matrix(cfg)
    if cfg.options.get("function") is None:
        raise InputError("--function is required")
    f = HalfPlaneFunction.from_json(_load_json_arg(cfg.options["function"]))
    deriv = cfg.options.get("derivative") or 0
    if deriv:
        res, method = derivative_calculus_eval(A, f, deriv, cfg.options.get("alpha"), cfg.quad), "derivative"
    elif f.in_decaying_class and cfg.options.get("mu") is None:
        res, method = dunford_eval(A, f, cfg.quad), "dunford"
    else:
        res, method = regularized_eval(A, f, cfg.options.get("mu"), cfg.quad), "regularized"
    out = {"function": f.to_json(), "method": method, "derivative": deriv, "result": res.entries,
           "errorBound": res.error, "abscissa": res.abscissa, "panels": res.panels,
           "converged": res.converged}
    return out, EXIT_OK, None


def _record(cfg, rep):
    from .conditions import WitnessStore

    path = cfg.options.get("witness_store")
    if path:
        WitnessStore(path).append(rep, cfg.matrix or "")


def _sweep(rep):
    sweep = rep.extra.get("alphaSweep")
    if not sweep:
        return None
    rows = list(zip(sweep["omegaMinusAlpha"], sweep["ratio"]))
    return ["omega_minus_alpha", "ratio"], rows, {"logx": True}


def _cmd_gfs(cfg):
    from .conditions import WitnessStore, gfs_constant

    A = _matrix(cfg)
    path = cfg.options.get("witness_store")
    # the store also seeds the search with earlier witnesses
    rep = gfs_constant(A, _omega(cfg, A), cfg.m, cfg.budget or 200, seed=cfg.seed,
                       store=WitnessStore(path) if path else None)
    return rep, _status([rep.verdict]), _sweep(rep)


def _cmd_wgfs(cfg):
    from .conditions import wgfs_constant

    A = _matrix(cfg)
    rep = wgfs_constant(A, _omega(cfg, A), cfg.m, cfg.budget or 100, cfg.gaussian)
    _record(cfg, rep)
    return rep, _status([rep.verdict]), _sweep(rep)


def _cmd_calc(cfg):
    from .conditions import gamma_strong_m_calc_constant, strong_m_calc_constant

    A = _matrix(cfg)
    omega = _omega(cfg, A)
    if cfg.options.get("gamma"):
        rep = gamma_strong_m_calc_constant(A, omega, cfg.m, cfg=cfg.gaussian, budget=cfg.budget or 30)
    else:
        rep = strong_m_calc_constant(A, omega, cfg.m)
    _record(cfg, rep)
    return rep, _status([rep.verdict]), None


def _cmd_square(cfg):
    from .conditions import square_function_condition

    A = _matrix(cfg)
    rep = square_function_condition(A, _omega(cfg, A), cfg.budget or 60, seed=cfg.seed)
    _record(cfg, rep)
    return rep, _status([rep.verdict]), None


def _cmd_gamma(cfg):
    from .conditions import gamma_type_check
    from .gaussian import gamma_bound_estimate
    from .spaces import load_matrix

    family = cfg.options.get("family")
    if family:
        ops = [load_matrix(p) for p in family]
        if len({op.space for op in ops}) != 1:
            raise InputError("family members must act on the same space")
        est = gamma_bound_estimate(ops, budget=cfg.budget or 50, cfg=cfg.gaussian)
        return {"gammaBound": est.fragment("gammaBound", cfg.gaussian), "witness": est.witness}, EXIT_OK, None
    A = _matrix(cfg)
    if cfg.omega is None:
        raise InputError("--omega is required (or give --family)")
    grid = cfg.options.get("times")
    grid = None if grid is None else np.array(_floats(grid))
    rep = gamma_type_check(A, cfg.omega, grid, cfg.gaussian, budget=cfg.budget or 30)
    return rep, _status([rep.verdict]), None


def _cmd_spectral(cfg):
    from .spectral import gearhart_pruss_report

    A = _matrix(cfg)
    rep = gearhart_pruss_report(A, cfg.gaussian, threshold=cfg.options.get("threshold", 1e3),
                                budget=cfg.budget or 10, checks=not cfg.options.get("no_checks"))
    ok = rep.ordering["holds"]
    if rep.lemma_ineq is not None:
        ok &= bool(rep.lemma_ineq.get("holds", True))
    if rep.disc is not None:
        ok &= all(d.get("holds", True) for d in rep.disc)
    return rep, EXIT_OK if ok else EXIT_VIOLATED, None


def _cmd_reproduce(cfg):
    what = cfg.options["case"]
    return _REPRODUCE[what](cfg)


def _rep_nogtype(cfg):
    from .corpus import shift_gamma_lower_bound, shift_semigroup_case

    ns = cfg.options.get("n") or [16]
    p = cfg.options.get("p", 4.0)
    rows, cases = [], []
    for n in ns:
        case = shift_semigroup_case(int(n), p)
        gb = shift_gamma_lower_bound(case, cfg.gaussian, budget=cfg.budget or 0)
        rows.append((int(n), case.computed["shifted"], case.computed["unshifted"]))
        cases.append({**case.to_json(), "gammaLowerBound": gb.fragment("gammaBound", cfg.gaussian)})
    status = EXIT_OK if all(c["passed"] for c in cases) else EXIT_VIOLATED
    return {"cases": cases}, status, (["n", "shifted", "unshifted"], rows, {"logx": True})


def _rep_multiplier(cfg):
    from .corpus import multiplier_group_case

    xi = cfg.options.get("xi") or [1.0, 2.0, 5.0]
    base = parse_space(cfg.options.get("base") or "hilbert:4")
    times = cfg.options.get("t") or list(np.linspace(0.0, 2 * math.pi, 9))
    rows, cases = [], []
    for t in times:
        c = multiplier_group_case(xi, base, t, cfg.gaussian)
        r = c.payload["ratio"]
        rows.append((float(t), r.estimate, r.ci[0], r.ci[1]))
        cases.append(c.to_json())
    status = EXIT_OK if all(c["passed"] for c in cases) else EXIT_VIOLATED
    return {"cases": cases}, status, (["t", "norm_ratio", "ci_lo", "ci_hi"], rows, {})


def _rep_sectorial(cfg):
    from .corpus import sectorial_case

    d = cfg.options.get("d") or [1.0, 2.0 + 1.0j]
    c = sectorial_case(d, pairs=cfg.budget or 10, seed=cfg.seed)
    by_alpha = {}
    for r in c.payload["rows"]:
        by_alpha[r["alpha"]] = max(by_alpha.get(r["alpha"], 0.0), r["lhs"] / r["rhs"])
    rows = sorted((-a, v) for a, v in by_alpha.items())
    status = EXIT_OK if c.passed else EXIT_VIOLATED
    return {"case": c.to_json(), "rows": c.payload["rows"]}, status, \
        (["minus_alpha", "max_lhs_over_rhs"], rows, {"logx": True})


def _rep_laplace(cfg):
    from .corpus import laplace_resolvent_case
    from .spaces import MatrixOperator, SpaceDescriptor

    if cfg.matrix:
        A = _matrix(cfg)
    else:
        A = MatrixOperator(np.array([[1.0]]), SpaceDescriptor.hilbert(1))
    alpha = cfg.options.get("alpha")
    alpha = float(np.min(A.spectrum.real)) - 2.0 if alpha is None else float(alpha)
    x = np.ones(A.n, dtype=complex) / math.sqrt(A.n)
    times = cfg.options.get("t") or [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0]
    rows, cases = [], []
    for t in times:
        c = laplace_resolvent_case(A, alpha, t, x)
        rows.append((float(t), float(np.linalg.norm(c.payload["lhs"])), c.computed["relativeError"]))
        cases.append(c.to_json())
    status = EXIT_OK if all(c["passed"] for c in cases) else EXIT_VIOLATED
    return {"cases": cases}, status, (["t", "resolvent_norm", "relative_error"], rows, {})


_REPRODUCE = {"nogtype": _rep_nogtype, "multiplier": _rep_multiplier,
              "sectorial": _rep_sectorial, "laplace": _rep_laplace}

_COMMANDS = {"resolvent": _cmd_resolvent, "funcalc": _cmd_funcalc, "gfs-check": _cmd_gfs,
             "wgfs-check": _cmd_wgfs, "calc-constant": _cmd_calc, "square-function": _cmd_square,
             "gamma-bound": _cmd_gamma, "spectral-bounds": _cmd_spectral, "reproduce": _cmd_reproduce}


def run(cfg: RunConfig, stdout=None):
    """Execute ``cfg``; returns the exit status."""
    stdout = stdout or sys.stdout
    out = {"command": cfg.command, "version": __version__, "config": cfg.to_json(), "seed": cfg.seed}
    try:
        result, status, sweep = _COMMANDS[cfg.command](cfg)
        out["result"] = result
        out["exitStatus"] = status
        if sweep is not None:
            header, rows, kw = sweep
            csv_path = cfg.csv or (str(Path(cfg.out).with_suffix(".csv")) if cfg.out else None)
            if csv_path:
                _, png = write_csv(csv_path, header, rows, plot=cfg.plot, title=cfg.command, **kw)
                out["csv"] = csv_path
                if png is not None:
                    out["plot"] = str(png)
            else:
                out["sweep"] = {"header": header, "rows": rows}
    except HPCalcError as exc:
        status = EXIT_INPUT
        out["error"] = {"code": exc.code, "message": str(exc)}
        out["exitStatus"] = status
        print(f"error {exc.code}: {exc}", file=sys.stderr)
    if cfg.out:
        write_json(cfg.out, out)
    else:
        from .report import to_jsonable

        print(json.dumps(to_jsonable(out), indent=2), file=stdout)
    return status


def _complex_list(text):
    try:
        return [complex(s.replace(" ", "")) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _float_list(text):
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _p_value(text):
    if "/" in text:
        a, b = text.split("/")
        return float(a) / float(b)
    return float(text)


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with status 1 and code E_INPUT (2 means a violated condition)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"error E_INPUT: {message}\n")


def build_parser():
    ap = _Parser(prog="hpcalc", description="Half-plane functional calculus toolkit.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=10_000, help="Monte-Carlo samples")
    common.add_argument("--batches", type=int, default=20)
    common.add_argument("--tol", type=float, default=1e-11)
    common.add_argument("--rtol", type=float, default=1e-11)
    common.add_argument("--max-panels", type=int, default=4000)
    common.add_argument("--budget", type=int, default=None, help="search budget (command specific default)")
    common.add_argument("--out", help="JSON report path (default: stdout)")
    common.add_argument("--csv", help="CSV sweep path (default: next to --out)")
    common.add_argument("--no-plot", action="store_true", help="do not render PNG plots")
    mat = _Parser(add_help=False)
    mat.add_argument("--matrix", help="matrix JSON file")
    mat.add_argument("--omega", type=float, default=None, help="default: min Re of the spectrum")
    mat.add_argument("--witness-store", help="append witnesses to this JSON-lines file")

    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("resolvent", parents=[common, mat], help="resolvent and half-plane type check")
    p.add_argument("--z", help="evaluation point, e.g. 0.5+1j")
    p = sub.add_parser("funcalc", parents=[common, mat], help="evaluate f(A)")
    p.add_argument("--function", required=True, help="function JSON (file or inline)")
    p.add_argument("--mu", type=float, default=None, help="force the regularized route with this mu")
    p.add_argument("--derivative", type=int, default=0, help="evaluate f^(m)(A) instead")
    p.add_argument("--alpha", type=float, default=None, help="line abscissa for --derivative")
    for name, helptext in (("gfs-check", "GFS constant"), ("wgfs-check", "Gaussian GFS constant"),
                           ("calc-constant", "strong m-calculus constant"),
                           ("square-function", "square-function constants")):
        p = sub.add_parser(name, parents=[common, mat], help=helptext)
        if name != "square-function":
            p.add_argument("--m", type=int, default=1)
        if name == "calc-constant":
            p.add_argument("--gamma", action="store_true", help="gamma-bounded version")
    p = sub.add_parser("gamma-bound", parents=[common, mat], help="gamma-type check or family gamma-bound")
    p.add_argument("--family", nargs="+", help="matrix files forming the family")
    p.add_argument("--times", help="comma-separated time grid")
    p = sub.add_parser("spectral-bounds", parents=[common, mat], help="four abscissae and ordering")
    p.add_argument("--threshold", type=float, default=1e3)
    p.add_argument("--no-checks", action="store_true", help="skip the auxiliary inequality checks")

    p = sub.add_parser("reproduce", help="corpus constructions")
    rsub = p.add_subparsers(dest="case", required=True, parser_class=_Parser)
    r = rsub.add_parser("nogtype", parents=[common])
    r.add_argument("--n", type=lambda s: [int(v) for v in s.split(",")], default=[16])
    r.add_argument("--p", type=_p_value, default=4.0)
    r = rsub.add_parser("multiplier", parents=[common])
    r.add_argument("--xi", type=_float_list, default=[1.0, 2.0, 5.0])
    r.add_argument("--base", default="hilbert:4")
    r.add_argument("--t", type=_float_list, default=None)
    r = rsub.add_parser("sectorial", parents=[common])
    r.add_argument("--d", type=_complex_list, default=[1.0, 2.0 + 1.0j], help="diagonal entries")
    r = rsub.add_parser("laplace", parents=[common])
    r.add_argument("--matrix", default=None)
    r.add_argument("--alpha", type=float, default=None)
    r.add_argument("--t", type=_float_list, default=None)
    return ap


_BASE = {f.name for f in dataclasses.fields(RunConfig)}


def config_from_args(ns):
    d = vars(ns).copy()
    d["max_panels"] = d.pop("max_panels", 4000)
    d["plot"] = not d.pop("no_plot", False)
    base = {k: d.pop(k) for k in list(d) if k in _BASE and k != "options"}
    if base.get("command") == "reproduce":
        d["case"] = d.get("case")
    return RunConfig(**base, options=d)


def main(argv=None):
    ap = build_parser()
    ns = ap.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        cfg.gaussian
    except HPCalcError as exc:
        print(f"error {exc.code}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
