"""Command-line entry point: ``mapflow <subcommand> [options]``.

Exit codes: 0 success, 1 domain error (bad input values), 2 numeric error
(failed procedure, divergence, failed reproduction), 64 usage error.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import io as mio
from .dynamics import (
    IntegratorConfig,
    RK4Fixed,
    RK45Adaptive,
    Status,
    Thresholds,
    classify_with_summary,
    integrate,
    orbit_summary,
)
from .embedding import ScaledCubic, linear_system, linearize, truncate
from .errors import DegenerateSpectrum, DomainError, NumericError
from .linear_solution import propagate_closed, propagate_series
from .maps import deriv, eval_map, fixed_points, parse_map
from .scenarios import SCENARIOS, run_scenario
from .stability import _fmt_q, char_poly, hurwitz_sequence, roots, to_rational
from .sweep import (
    Axis,
    ColdStart,
    FollowAttractor,
    ScaledCubicSystem,
    SweepPlan,
    TruncatedLogistic,
    bifurcation_sweep,
    plane_scan,
)

__all__ = ["main", "load_config", "RunConfig", "EX_USAGE"]

EX_OK, EX_DOMAIN, EX_NUMERIC, EX_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


@dataclass
class RunConfig:
    """Flat ``key = value`` settings; numbers are already parsed."""

    values: dict = field(default_factory=dict)
    path: str | None = None


_INT = re.compile(r"^[+-]?\d+$")
_RATIONAL = re.compile(r"^[+-]?\d+\s*/\s*\d+$")


def parse_number(text: str):
    """Integer, exact rational ``a/b``, decimal real, or the text itself."""
    s = text.strip()
    if _INT.match(s):
        return int(s)
    if _RATIONAL.match(s):
        return Fraction(s.replace(" ", ""))
    try:
        return float(s)
    except ValueError:
        return s


def load_config(path) -> RunConfig:
    """Read ``key = value`` lines; ``#`` starts a comment.

    Raises
    ------
    DomainError
        On a malformed line, with its line number.
    """
    values = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or not key or not value.strip() or not re.match(r"^[A-Za-z_][A-Za-z0-9_]*$", key):
            raise DomainError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        values[key] = parse_number(value)
    return RunConfig(values, str(path))


def _real(text) -> float:
    if isinstance(text, (int, float, Fraction)):
        return float(text)
    v = parse_number(text)
    if isinstance(v, str):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    return float(v)


def _vector(text) -> tuple[float, ...]:
    if isinstance(text, (tuple, list)):
        return tuple(float(v) for v in text)
    if isinstance(text, (int, float, Fraction)):
        return (float(text),)
    return tuple(_real(v) for v in str(text).split(","))


def _positive_int(text) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


# ----------------------------------------------------------------- options

def _common(p):
    p.add_argument("--config", help="file of 'key = value' lines; command-line flags win")
    p.add_argument("--output", "-o", help="write the result here instead of stdout")
    p.add_argument("--format", choices=("text", "csv", "json", "svg"), default=None,
                   help="output format (default depends on the subcommand)")
    p.add_argument("--threads", type=_positive_int, default=None,
                   help="worker threads for sweeps (default: machine parallelism)")
    p.add_argument("--seed", type=int, default=0, help="reserved; no component is stochastic, so it has no effect")


def _system_opts(p):
    p.add_argument("--system", choices=("truncated", "scaled"), default="truncated",
                   help="truncated map ODE or the scaled cubic in (nu, lambda)")
    p.add_argument("--map", default="logistic:4", help="'logistic:<p>' or 'poly:<c0>,<c1>,...'")
    p.add_argument("--order", type=_positive_int, default=3, help="truncation order N")
    p.add_argument("--nu", type=_real, default=2.0 / 3.0, help="scaled cubic nu")
    p.add_argument("--lambda", dest="lam", type=_real, default=2.0 / 3.0, help="scaled cubic lambda")
    p.add_argument("--x0", type=_vector, default=None,
                   help="initial state, comma separated; missing derivatives are zero "
                        "(default 0.3 for maps, 0.1 for the scaled cubic)")


def _integrator_opts(p, t_end=2500.0):
    p.add_argument("--method", choices=("rk4", "rk45"), default="rk4", help="fixed RK4 or adaptive embedded 4(5)")
    p.add_argument("--h", type=_real, default=1e-2, help="RK4 step")
    p.add_argument("--rel-tol", type=_real, default=1e-9, help="adaptive relative tolerance")
    p.add_argument("--abs-tol", type=_real, default=1e-12, help="adaptive absolute tolerance")
    p.add_argument("--t-end", type=_real, default=t_end, help="integration end time")
    p.add_argument("--divergence-bound", type=_real, default=1e8, help="escape threshold on any state component")
    p.add_argument("--sample-stride", type=_real, default=0.05, help="output / peak-detection sampling interval")


def _threshold_opts(p):
    d = Thresholds()
    p.add_argument("--t-transient", type=_real, default=d.t_transient, help="discarded initial time")
    p.add_argument("--renorm", type=_real, default=d.renorm, help="tangent renormalisation interval")
    p.add_argument("--peak-tol", type=_real, default=d.peak_tol, help="relative tolerance for equal peaks")
    p.add_argument("--fp-tol", type=_real, default=d.fp_tol, help="speed below which the orbit is at rest")
    p.add_argument("--chaos-tol", type=_real, default=d.chaos_tol, help="exponent above which the orbit is chaotic")
    p.add_argument("--max-period", type=_positive_int, default=d.max_period, help="largest period searched")


def _alpha_opts(p):
    p.add_argument("--order", type=_positive_int, default=3, help="truncation order N")
    p.add_argument("--alpha", default=None, help="alpha as decimal or exact rational a/b")
    p.add_argument("--map", default=None, help="derive alpha = 1 - f'(x*) from this map ...")
    p.add_argument("--at", type=_real, default=None, help="... at this reference point x*")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="mapflow", description="Continuous-time truncations of one-dimensional maps.",
                     formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("truncate", help="print the order-N ODE of a map", formatter_class=fmt)
    p.add_argument("--map", default="logistic:4", help="'logistic:<p>' or 'poly:<c0>,...'")
    p.add_argument("--order", type=_positive_int, default=3, help="truncation order N")
    _common(p)

    p = sub.add_parser("stability", help="Routh-Hurwitz report", formatter_class=fmt)
    _alpha_opts(p)
    _common(p)

    p = sub.add_parser("roots", help="characteristic roots", formatter_class=fmt)
    _alpha_opts(p)
    _common(p)

    p = sub.add_parser("linear", help="closed-form vs matrix-exponential solution of the linearisation",
                       formatter_class=fmt)
    _alpha_opts(p)
    p.add_argument("--beta", type=_real, default=0.0, help="inhomogeneity when alpha is given directly")
    p.add_argument("--t", type=_real, default=1.0, help="time")
    p.add_argument("--xi0", type=_vector, default=None, help="initial perturbation (default e_1)")
    _common(p)

    for name, hlp in (("integrate", "sampled trajectory as CSV"),
                      ("lyapunov", "largest Lyapunov exponent as JSON"),
                      ("classify", "attractor class as JSON")):
        p = sub.add_parser(name, help=hlp, formatter_class=fmt)
        _system_opts(p)
        _integrator_opts(p, t_end=100.0 if name == "integrate" else 2500.0)
        if name != "integrate":
            _threshold_opts(p)
        _common(p)

    p = sub.add_parser("bifurcate", help="one-parameter bifurcation sweep", formatter_class=fmt)
    p.add_argument("--system", choices=("scaled", "logistic3", "logistic4"), default="scaled")
    p.add_argument("--axis", choices=("lambda", "nu", "p"), default="lambda")
    p.add_argument("--lo", type=_real, default=0.2)
    p.add_argument("--hi", type=_real, default=1.3)
    p.add_argument("--steps", type=_positive_int, default=1101)
    p.add_argument("--nu", type=_real, default=2.0 / 3.0, help="fixed nu for the scaled cubic")
    p.add_argument("--continuation", choices=("follow", "cold"), default="follow")
    _integrator_opts(p)
    _threshold_opts(p)
    _common(p)

    p = sub.add_parser("scan", help="(nu, lambda) classification raster", formatter_class=fmt)
    p.add_argument("--nu-lo", type=_real, default=0.3)
    p.add_argument("--nu-hi", type=_real, default=1.2)
    p.add_argument("--nu-steps", type=_positive_int, default=200)
    p.add_argument("--lambda-lo", type=_real, default=0.2)
    p.add_argument("--lambda-hi", type=_real, default=1.4)
    p.add_argument("--lambda-steps", type=_positive_int, default=200)
    _integrator_opts(p, t_end=600.0)
    p.set_defaults(h=0.02)
    _threshold_opts(p)
    p.set_defaults(t_transient=200.0)
    _common(p)

    p = sub.add_parser("reproduce", help="run a named acceptance scenario", formatter_class=fmt)
    p.add_argument("claim", nargs="?", default=None, help=f"one of: {', '.join(SCENARIOS)}, or 'all'")
    p.add_argument("--list", action="store_true", help="list scenario ids")
    _common(p)
    return parser


# ----------------------------------------------------------------- helpers

def _emit(args, text: str):
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _alpha_from(args) -> tuple[Fraction, dict]:
    if args.alpha is not None:
        if args.map is not None:
            raise DomainError("give either --alpha or --map/--at, not both")
        return to_rational(str(args.alpha) if not isinstance(args.alpha, Fraction) else args.alpha), {}
    if args.map is None or args.at is None:
        raise DomainError("need --alpha, or --map together with --at")
    m = parse_map(args.map)
    x = float(args.at)
    a = 1.0 - float(deriv(m, x))
    return to_rational(a), {"map": m.spec_string(), "at": x, "beta": float(eval_map(m, x)) - x}


def _field_and_x0(args):
    if args.system == "scaled":
        fld = ScaledCubic(args.nu, args.lam).field()
        default = (0.1,)
    else:
        fld = truncate(parse_map(args.map), args.order).field()
        default = (0.3,)
    x0 = list(args.x0 or default)
    if len(x0) > fld.dim:
        raise DomainError(f"--x0 has {len(x0)} entries, the system has dimension {fld.dim}")
    return fld, x0 + [0.0] * (fld.dim - len(x0))


def _integrator(args) -> IntegratorConfig:
    method = RK4Fixed(args.h) if args.method == "rk4" else RK45Adaptive(args.rel_tol, args.abs_tol)
    return IntegratorConfig(method, args.t_end, args.divergence_bound, args.sample_stride)


def _thresholds(args) -> Thresholds:
    return Thresholds(args.t_transient, args.renorm, args.peak_tol, args.fp_tol, args.chaos_tol, args.max_period)


def _complex_list(z) -> list:
    return [[mio.fmt(c.real), mio.fmt(c.imag)] for c in z]


# ----------------------------------------------------------------- commands

def cmd_truncate(args) -> int:
    m = parse_map(args.map)
    s = truncate(m, args.order)
    coeffs = s.integer_coeffs()
    companions = {}
    for x in fixed_points(m):
        companions[mio.fmt(x)] = linearize(s, x).companion.tolist()
    if args.format == "json":
        _emit(args, mio.dumps({
            "map": m.spec_string(),
            "order": s.order,
            "taylor_coeffs": [_fmt_q(c) for c in s.taylor_coeffs],
            "integer_coeffs": list(coeffs),
            "equation": s.describe(),
            "companion_at_fixed_points": companions,
        }))
        return EX_OK
    lines = [
        f"map: {m.spec_string()}",
        f"order: {s.order}",
        f"equation: {s.describe()}",
        "coefficients: " + ",".join(str(c) for c in coeffs),
    ]
    for x, mat in companions.items():
        lines.append(f"companion matrix at x* = {x}:")
        lines += ["  " + " ".join(mio.fmt(v) for v in row) for row in mat]
    _emit(args, "\n".join(lines) + "\n")
    return EX_OK


def cmd_stability(args) -> int:
    alpha, extra = _alpha_from(args)
    cp = char_poly(args.order, alpha)
    rep = hurwitz_sequence(cp)
    mu = roots(cp)
    if args.format == "json":
        d = rep.to_dict()
        d["roots"] = _complex_list(mu)
        d.update(extra)
        _emit(args, mio.dumps(d))
        return EX_OK
    lines = [f"order: {cp.order}", f"alpha: {_fmt_q(alpha)}"]
    lines += [f"U_{j} = {_fmt_q(u)}" for j, u in enumerate(rep.u_sequence)]
    lines += [
        f"sign changes: {rep.sign_changes} (raw flips along U: {rep.raw_sign_changes})",
        f"roots with positive real part: {rep.n_unstable_roots}",
        f"verdict: {rep.verdict.value}",
        "roots: " + ", ".join(f"{mio.fmt(z.real)}{'+' if z.imag >= 0 else '-'}{mio.fmt(abs(z.imag))}j" for z in mu),
    ]
    _emit(args, "\n".join(lines) + "\n")
    return EX_OK


def cmd_roots(args) -> int:
    alpha, _ = _alpha_from(args)
    mu = roots(char_poly(args.order, alpha))
    if args.format == "json":
        _emit(args, mio.dumps({"order": args.order, "alpha": _fmt_q(alpha), "roots": _complex_list(mu)}))
    else:
        _emit(args, "".join(f"{mio.fmt(z.real)} {mio.fmt(z.imag)}\n" for z in mu))
    return EX_OK


def cmd_linear(args) -> int:
    if args.alpha is not None:
        ls = linear_system(args.order, float(to_rational(str(args.alpha))), args.beta)
    else:
        if args.map is None or args.at is None:
            raise DomainError("need --alpha, or --map together with --at")
        ls = linearize(truncate(parse_map(args.map), args.order), args.at)
    xi0 = np.zeros(ls.order)
    if args.xi0 is None:
        xi0[0] = 1.0
    else:
        if len(args.xi0) != ls.order:
            raise DomainError(f"--xi0 needs {ls.order} entries")
        xi0[:] = args.xi0
    series = propagate_series(ls, xi0, args.t)
    try:
        closed = propagate_closed(ls, xi0, args.t)
        diff = float(np.max(np.abs(closed - series)))
    except DegenerateSpectrum:
        closed, diff = None, None
    rec = {
        "order": ls.order, "alpha": ls.alpha, "beta": ls.beta, "t": args.t,
        "xi0": xi0.tolist(),
        "closed": None if closed is None else closed.tolist(),
        "series": series.tolist(),
        "max_abs_difference": diff,
    }
    if args.format == "json":
        _emit(args, mio.dumps(rec))
    else:
        lines = [
            "closed: " + ("degenerate spectrum" if closed is None else " ".join(mio.fmt(v) for v in closed)),
            "series: " + " ".join(mio.fmt(v) for v in series),
            "difference: " + ("n/a" if diff is None else mio.fmt(diff)),
        ]
        _emit(args, "\n".join(lines) + "\n")
    return EX_OK


def cmd_integrate(args) -> int:
    fld, x0 = _field_and_x0(args)
    tr = integrate(fld, x0, _integrator(args))
    _emit(args, mio.trajectory_csv(tr))
    return EX_OK if tr.status is Status.COMPLETED else EX_NUMERIC


def cmd_lyapunov(args) -> int:
    fld, x0 = _field_and_x0(args)
    th = _thresholds(args)
    cfg = _integrator(args)
    s = orbit_summary(fld, x0, cfg, th.t_transient, tangent=True, renorm=th.renorm)
    ok = s.status is Status.COMPLETED
    rec = {
        "system": fld.name, "x0": x0,
        "status": "Completed" if ok else "Unstable",
        "lyapunov": s.lyapunov if ok else None,
        "escape_time": None if ok else s.t_stop,
        "t_transient": th.t_transient, "t_measure": cfg.t_end - th.t_transient,
    }
    _emit(args, mio.dumps(rec))
    return EX_OK if ok else EX_NUMERIC


def cmd_classify(args) -> int:
    fld, x0 = _field_and_x0(args)
    c, s = classify_with_summary(fld, x0, _integrator(args), _thresholds(args))
    rec = {"system": fld.name, "x0": x0, "class": str(c), **c.to_dict(),
           "escape_time": None if s.status is Status.COMPLETED else s.t_stop}
    _emit(args, mio.dumps(rec))
    return EX_OK


def cmd_bifurcate(args) -> int:
    if args.system == "scaled":
        system = ScaledCubicSystem()
        fixed = (("nu", args.nu),) if args.axis != "nu" else ()
    else:
        system = TruncatedLogistic(int(args.system[-1]))
        fixed = ()
        if args.axis != "p":
            raise DomainError("logistic truncations are swept in p")
    plan = SweepPlan(
        system, Axis(args.axis, args.lo, args.hi, args.steps),
        continuation=FollowAttractor() if args.continuation == "follow" else ColdStart(),
        integrator=_integrator(args), thresholds=_thresholds(args), fixed=fixed,
    )
    recs = bifurcation_sweep(plan, threads=args.threads)
    kind = args.format or "csv"
    if kind == "json":
        _emit(args, mio.bifurcation_json(recs, args.axis))
    elif kind == "svg":
        _emit(args, mio.bifurcation_svg(recs, args.axis))
    else:
        _emit(args, mio.bifurcation_csv(recs, args.axis))
        if args.output:
            Path(args.output).with_suffix(".json").write_text(mio.bifurcation_json(recs, args.axis))
    return EX_OK


def cmd_scan(args) -> int:
    plan = SweepPlan(
        ScaledCubicSystem(),
        Axis("nu", args.nu_lo, args.nu_hi, args.nu_steps),
        Axis("lambda", args.lambda_lo, args.lambda_hi, args.lambda_steps),
        continuation=ColdStart(), integrator=_integrator(args), thresholds=_thresholds(args),
    )
    grid = plane_scan(plan, threads=args.threads)
    _emit(args, mio.plane_csv(grid))
    return EX_OK


def cmd_reproduce(args) -> int:
    if args.list or args.claim is None:
        _emit(args, "".join(f"{k}  (criterion {c})\n" for k, (c, _) in SCENARIOS.items()))
        return EX_OK
    names = list(SCENARIOS) if args.claim == "all" else [args.claim]
    if any(n not in SCENARIOS for n in names):
        raise DomainError(f"unknown scenario {args.claim!r}; choose from {', '.join(SCENARIOS)}")
    out = []
    ok = True
    for n in names:
        r = run_scenario(n, threads=args.threads)
        ok &= r.passed
        out.append(("PASS" if r.passed else "FAIL") + f" {n}")
        out += ["  " + ln for ln in r.lines]
    _emit(args, "\n".join(out) + "\n")
    return EX_OK if ok else EX_NUMERIC


COMMANDS = {
    "truncate": cmd_truncate,
    "stability": cmd_stability,
    "roots": cmd_roots,
    "linear": cmd_linear,
    "integrate": cmd_integrate,
    "lyapunov": cmd_lyapunov,
    "classify": cmd_classify,
    "bifurcate": cmd_bifurcate,
    "scan": cmd_scan,
    "reproduce": cmd_reproduce,
}

_NOT_CONFIGURABLE = {"config", "output", "command", "help"}


def _subparser(parser, name):
    for action in parser._subparsers._group_actions:
        if name in action.choices:
            return action.choices[name]
    return None


def parse(argv, parser=None):
    """Parse ``argv``, layering a ``--config`` file under the flags."""
    parser = parser or build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = load_config(args.config)
        sp = _subparser(parser, args.command)
        actions = {a.dest: a for a in sp._actions if a.dest not in _NOT_CONFIGURABLE}
        names = {("lambda" if d == "lam" else d): d for d in actions}
        defaults = {}
        for k, v in cfg.values.items():
            if k not in names:
                raise DomainError(f"unknown config key {k!r}; valid keys: {', '.join(sorted(names))}")
            defaults[names[k]] = v
        sp.set_defaults(**defaults)
        args = parser.parse_args(argv)
        for dest, v in defaults.items():
            # argparse converts only string defaults; numbers from the file
            # go through the option's type here.
            conv = actions[dest].type
            if getattr(args, dest) is v and conv is not None and not isinstance(v, str):
                setattr(args, dest, conv(v))
    return args


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EX_USAGE
    except SystemExit as exc:  # --help
        return EX_OK if exc.code in (0, None) else EX_USAGE
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EX_DOMAIN
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EX_NUMERIC
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
