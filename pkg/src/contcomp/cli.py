"""Command-line front end: evaluation, limits, criteria, codecs, π, constants, solvers and the corpus."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional, Sequence

import mpmath

from . import constants, cotangent, criteria, fexp, products, radicals, solver
from .engine import DEFAULT_PRECISION, MIN_PRECISION, EvalRequest, estimate_limit, eval_backward, eval_forward
from .errors import ContCompError, ExponentOutOfRange, NegativeTerm
from .specs import evaluate, parse_terms

PRECISION_ENV = "CONTCOMP_PRECISION"


@dataclass(frozen=True)
class CommandConfig:
    precision_bits: int = DEFAULT_PRECISION
    tolerance: str = "1e-12"
    max_depth: int = 64
    output: str = "text"

    def __post_init__(self):
        if self.precision_bits < MIN_PRECISION:
            raise ValueError(f"precision must be at least {MIN_PRECISION} bits")
        if self.max_depth < 1:
            raise ValueError("max-depth must be at least 1")
        if self.output not in ("text", "json", "csv"):
            raise ValueError("output must be text, json or csv")


@dataclass
class Result:
    """Scalar fields (ordered) plus an optional table (header, rows)."""

    fields: dict = field(default_factory=dict)
    header: Optional[list] = None
    rows: list = field(default_factory=list)
    exit_code: int = 0


# ---------------------------------------------------------------- formatting


def fmt(value: Any, precision: int) -> Any:
    """Decimal string at the digits the binary precision supports; None stays None."""
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Fraction):
        return str(value)
    dps = mpmath.libmp.prec_to_dps(precision)
    v = mpmath.mpmathify(value)
    if isinstance(v, mpmath.mpc):
        return f"{_dec(v.real, dps)}{'+' if v.imag >= 0 else '-'}{_dec(abs(v.imag), dps)}j"
    return _dec(v, dps)


def _dec(v, dps: int) -> str:
    # fixed notation down to 1e-4, scientific below, so columns read uniformly
    return mpmath.nstr(v, dps, min_fixed=-4, max_fixed=dps)


def _jsonable(value: Any, precision: int) -> Any:
    if isinstance(value, (list, tuple)):
        return [_jsonable(v, precision) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v, precision) for k, v in value.items()}
    return fmt(value, precision)


def render(result: Result, cfg: CommandConfig) -> str:
    prec = cfg.precision_bits
    if cfg.output == "json":
        doc = {k: _jsonable(v, prec) for k, v in result.fields.items()}
        if result.header is not None:
            doc["table"] = [dict(zip(result.header, _jsonable(list(r), prec))) for r in result.rows]
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    if cfg.output == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if result.header is not None:
            w.writerow(result.header)
            for r in result.rows:
                w.writerow(["" if v is None else _text(v, prec) for v in r])
        else:
            w.writerow(["field", "value"])
            for k, v in result.fields.items():
                w.writerow([k, _text(v, prec)])
        return buf.getvalue()
    lines = [f"{k}: {_text(v, prec)}" for k, v in result.fields.items()]
    if result.header is not None:
        lines.append("\t".join(result.header))
        lines.extend("\t".join("" if v is None else _text(v, prec) for v in r) for r in result.rows)
    return "\n".join(lines) + "\n"


def _text(value: Any, precision: int) -> str:
    if isinstance(value, (list, tuple)):
        return " ".join(_text(v, precision) for v in value)
    v = fmt(value, precision)
    return "" if v is None else str(v)


# ---------------------------------------------------------------- helpers


def _expr(text: str, precision: int):
    with mpmath.workprec(precision):
        return evaluate(text)


def _rational_or_expr(text: str, precision: int):
    """Integers and p/q ratios stay exact; everything else is evaluated."""
    t = text.strip()
    try:
        if "/" in t or t.lstrip("-").isdigit():
            return Fraction(t)
    except ValueError:
        pass
    return _expr(t, precision)


def _trace_rows(trace_values: list) -> list:
    rows = []
    prev = None
    for d, v in enumerate(trace_values):
        rows.append([d, v, None if prev is None else abs(v - prev)])
        prev = v
    return rows


def _request(args, cfg: CommandConfig, depth: int) -> EvalRequest:
    kind = radicals.parse_kind(args.kind)
    seed = None if args.seed is None else _expr(args.seed, cfg.precision_bits)
    terms = parse_terms(args.terms, cfg.precision_bits)
    return EvalRequest(kind, terms, depth, seed=seed, precision=cfg.precision_bits)


# ---------------------------------------------------------------- commands


def cmd_eval(args, cfg: CommandConfig) -> Result:
    values = []
    for d in range(args.depth + 1):
        req = _request(args, cfg, d)
        values.append(eval_forward(req) if args.direction == "forward" else eval_backward(req))
    return Result({"kind": args.kind, "terms": args.terms, "depth": args.depth, "value": values[-1]},
                  ["depth", "value", "delta"], _trace_rows(values))


def cmd_limit(args, cfg: CommandConfig) -> Result:
    req = _request(args, cfg, 0)
    value, trace = estimate_limit(req, _expr(cfg.tolerance, cfg.precision_bits), cfg.max_depth, args.direction)
    return Result({"kind": args.kind, "terms": args.terms, "value": value, "converged_at": trace.converged_at,
                   "tolerance": cfg.tolerance}, ["depth", "value", "delta"], _trace_rows(trace.values))


def _criteria_for(args, cfg: CommandConfig) -> list:
    prec = cfg.precision_bits
    N = args.N
    runs = {
        "herschfeld": lambda t: criteria.herschfeld_vijayaraghavan(t, N, prec),
        "polya": lambda t: criteria.polya_loglog(t, N, prec),
        "polya-szego-series": lambda t: criteria.polya_szego_series_test(t, N, precision=prec),
        "herschfeld-theorem3": lambda t: criteria.herschfeld_theorem3(t, N, prec),
        "andrushkiw": lambda t: criteria.andrushkiw(t, N, prec),
    }
    if args.p is not None:
        runs["jones-power"] = lambda t: criteria.jones_power_tests(t, _expr(args.p, prec), N, prec)
    if args.r is not None:
        runs["jones-reciprocal-root"] = lambda t: criteria.jones_reciprocal_root(t, _expr(args.r, prec), N, prec)
    if args.criterion == "all":
        return list(runs.items())
    if args.criterion not in runs:
        needs = {"jones-power": "--p", "jones-reciprocal-root": "--r"}
        if args.criterion in needs:
            raise ValueError(f"criterion {args.criterion} needs {needs[args.criterion]}")
        raise ValueError(f"unknown criterion {args.criterion!r}")
    return [(args.criterion, runs[args.criterion])]


def cmd_classify(args, cfg: CommandConfig) -> Result:
    terms = parse_terms(args.terms, cfg.precision_bits)
    rows = []
    for name, run in _criteria_for(args, cfg):
        try:
            rep = run(terms)
        except (NegativeTerm, ExponentOutOfRange) as exc:
            if args.criterion != "all":
                raise
            rows.append([name, "Inapplicable", None, args.N, f"{type(exc).__name__}: {exc}"])
            continue
        rows.append([rep.criterion, rep.verdict.value, rep.statistic, rep.sample_depth, rep.notes])
    return Result({"terms": args.terms, "N": args.N},
                  ["criterion", "verdict", "statistic", "sample_depth", "notes"], rows)


def cmd_expand(args, cfg: CommandConfig) -> Result:
    prec = cfg.precision_bits
    codec = args.codec
    if codec == "cot":
        work = max(prec, cotangent.encode_precision(args.digits))
        d = cotangent.cot_encode(_expr(args.x, work), args.digits, work)
        return Result({"codec": "cot", "x": args.x, "digits": list(d.digits), "terminated": d.terminated,
                       "residual": d.residual, "regular": cotangent.check_regular(d)})
    if codec == "fexp":
        system = fexp.reciprocal_system() if args.system == "reciprocal" else fexp.decimal_system(args.radix)
        d = fexp.f_encode(system, _rational_or_expr(args.x, prec), args.digits, prec)
        return Result({"codec": "fexp", "system": system.name, "x": args.x, "digits": list(d.digits),
                       "terminated": d.terminated, "residual": d.residual})
    if codec == "beta":
        x = args.x.strip()
        try:
            Fraction(x)
        except ValueError:
            x = _expr(x, prec)
        beta = args.beta.strip()
        try:
            Fraction(beta)
        except ValueError:
            beta = _expr(beta, prec)
        d = fexp.beta_encode(beta, x, args.digits, prec)
        return Result({"codec": "beta", "beta": args.beta, "x": args.x, "digits": list(d.digits),
                       "residual": d.residual})
    if codec == "signs":
        s = radicals.encode_sign_nest(_expr(args.x, prec), args.depth, prec)
        v = radicals.sign_nest_value(s, args.depth, prec)
        return Result({"codec": "signs", "x": args.x, "signs": s.to_text(), "value": v.direct,
                       "series": v.series})
    if codec == "sizer":
        d = radicals.sizer_encode(_expr(args.x, prec), args.depth, prec)
        return Result({"codec": "sizer", "x": args.x, "head": d.head, "tail": list(d.tail),
                       "residual": d.residual, "decoded": radicals.sizer_decode(d, prec)})
    raise ValueError(f"unknown codec {codec!r}")


def cmd_pi(args, cfg: CommandConfig) -> Result:
    prec = cfg.precision_bits
    n = args.n
    m = args.method
    if m == "bounds":
        lo, hi = products.polygon_bounds_pi(n, prec)
        return Result({"method": m, "q": n, "sides": 3 * 2**n, "lower": lo, "upper": hi})
    if m == "catalan":
        value = products.catalan_pi(n, prec)
    elif m == "viete":
        with mpmath.workprec(prec):
            value = 2 / products.viete_product(n, prec)
    elif m == "euler":
        with mpmath.workprec(prec):
            value = 2 * products.euler_secant_product(n, mpmath.pi / 2, prec)
    elif m == "osler":
        with mpmath.workprec(prec):
            value = 2 / products.osler_union_product(n, args.wallis, prec)
    else:
        raise ValueError(f"unknown method {m!r}")
    with mpmath.workprec(prec):
        err = abs(value - mpmath.pi)
    return Result({"method": m, "n": n, "value": value, "error": err})


def cmd_log(args, cfg: CommandConfig) -> Result:
    prec = cfg.precision_bits
    x = _expr(args.x, prec)
    value = products.osler_log_product(x, args.n, prec)
    with mpmath.workprec(prec):
        err = abs(value - mpmath.log(x))
    return Result({"x": args.x, "n": args.n, "value": value, "error": err})


def cmd_lemniscate(args, cfg: CommandConfig) -> Result:
    prec = cfg.precision_bits
    prod = products.levin_lemniscate_product(args.n, prec)
    with mpmath.workprec(prec):
        L = 2 / prod
        ref = mpmath.mpf(products.LEMNISCATE_L)
        err = abs(prod - 2 / ref)
    return Result({"n": args.n, "product": prod, "L": L, "published_L": products.LEMNISCATE_L,
                   "product_error": err})


def cmd_solve(args, cfg: CommandConfig) -> Result:
    prec = cfg.precision_bits
    tol = _expr(cfg.tolerance, prec)
    if args.problem == "trinomial":
        p, q = _expr(args.p, prec), _expr(args.q, prec)
        x0 = None if args.x0 is None else _expr(args.x0, prec)
        if args.algorithm.lower() == "astrand":
            if args.n_exp != 1 or not p < 0 or q == 0:
                raise ValueError("the Åstrand route needs n = 1, p < 0 and q != 0")
            sign = 1 if q > 0 else -1
            r = solver.astrand_transform(args.m, -p, abs(q), sign, seed=x0, max_iter=args.max_iter,
                                         tol=tol, precision=prec)
            return Result({"problem": "trinomial", "algorithm": "astrand", "root": r.root, "c": r.c,
                           "iterations": r.iterations, "residual": r.residual})
        t = solver.Trinomial(args.m, args.n_exp, p, q)
        r = solver.hoffmann_solve(t, args.algorithm, x0, args.max_iter, tol, prec)
        return Result({"problem": "trinomial", "algorithm": args.algorithm.upper(), "root": r.root,
                       "iterations": r.iterations, "residual": r.residual, "bound": r.bound,
                       "inside_bound": r.inside_bound})
    f_text, df_text = args.f, args.df

    def f(x):
        return evaluate(f_text, {"x": x})

    df = None if df_text is None else (lambda x: evaluate(df_text, {"x": x}))
    r = solver.iterate_fixed_point(f, _expr(args.x0, prec), args.max_iter, tol, df, args.newton, prec)
    return Result({"problem": "fixed-point", "f": f_text, "root": r.root, "iterations": r.iterations,
                   "derivative_at_root": r.derivative_at_root, "approach": r.approach})


def cmd_constants(args, cfg: CommandConfig) -> Result:
    prec = cfg.precision_bits
    if args.action == "list":
        rows = [[c.name, c.reference_digits, c.provenance, c.citation, c.description]
                for c in constants.REGISTRY.values()]
        return Result({}, ["name", "reference", "provenance", "citation", "description"], rows)
    c = constants.get_constant(args.name)
    value = constants.compute_constant(args.name, prec)
    with mpmath.workprec(prec):
        diff = abs(value - c.reference())
    fields = {"name": c.name, "value": value, "reference": c.reference_digits, "difference": diff,
              "provenance": c.provenance, "citation": c.citation}
    if c.erratum:
        fields["erratum"] = c.erratum
    return Result(fields)


def cmd_corpus(args, cfg: CommandConfig) -> Result:
    path = args.path
    if path is not None and not Path(path).exists() and Path(path).name == "identities.corpus":
        path = None  # the shipped corpus
    records = radicals.load_corpus(path)
    report = radicals.run_identity_corpus(records)
    rows = [[r.id, "pass" if r.passed else "FAIL", r.error, r.tol, r.message]
            for r in report.results]
    return Result({"passed": report.passed, "total": report.total}, ["id", "status", "error", "tol", "message"],
                  rows, 0 if report.all_passed else 1)


# ---------------------------------------------------------------- parser


def _default_precision() -> int:
    raw = os.environ.get(PRECISION_ENV)
    if raw is None:
        return DEFAULT_PRECISION
    try:
        return int(raw)
    except ValueError:
        return DEFAULT_PRECISION


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, default=argparse.SUPPRESS,
                        help=f"working precision in bits (default 128, env {PRECISION_ENV})")
    common.add_argument("--tol", default=argparse.SUPPRESS, help="stopping tolerance (default 1e-12)")
    common.add_argument("--max-depth", type=int, default=argparse.SUPPRESS, help="depth limit (default 64)")
    common.add_argument("--output", choices=("text", "json", "csv"), default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="contcomp", description=__doc__, parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    def nest_args(p):
        p.add_argument("--kind", default="sqrt", help="sqrt, root:r=3, power:p=2, recip-root:r=2, cot, log:base=10, fraction")
        p.add_argument("--terms", required=True, help="term spec, e.g. const:a=2, arith:start=1,step=1, ramanujan1, 1,2,3")
        p.add_argument("--seed", default=None)
        p.add_argument("--direction", choices=("backward", "forward"), default="backward")

    p = sub.add_parser("eval", parents=[common], help="approximants up to a fixed depth")
    nest_args(p)
    p.add_argument("--depth", type=int, required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("limit", parents=[common], help="deepen until two deltas fall within --tol")
    nest_args(p)
    p.set_defaults(func=cmd_limit)

    p = sub.add_parser("classify", parents=[common], help="run convergence criteria on a term stream")
    p.add_argument("--criterion", default="all")
    p.add_argument("--terms", required=True)
    p.add_argument("--N", type=int, default=60, help="sample depth")
    p.add_argument("--p", default=None, help="power for the continued p-th power tests")
    p.add_argument("--r", default=None, help="root index for the reciprocal-root test")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("expand", parents=[common], help="digit codecs")
    p.add_argument("codec", choices=("cot", "fexp", "beta", "signs", "sizer"))
    p.add_argument("--x", required=True)
    p.add_argument("--digits", type=int, default=8)
    p.add_argument("--depth", type=int, default=24)
    p.add_argument("--system", choices=("reciprocal", "decimal"), default="reciprocal")
    p.add_argument("--radix", type=int, default=10)
    p.add_argument("--beta", default="2")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("pi", parents=[common], help="π from nested-radical products")
    p.add_argument("--method", choices=("catalan", "viete", "euler", "osler", "bounds"), default="catalan")
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--wallis", type=int, default=0, help="Wallis factors for --method osler")
    p.set_defaults(func=cmd_pi)

    p = sub.add_parser("log", parents=[common], help="log x from a nested-radical product")
    p.add_argument("--x", required=True)
    p.add_argument("--n", type=int, default=30)
    p.set_defaults(func=cmd_log)

    p = sub.add_parser("lemniscate", parents=[common], help="lemniscate constant product")
    p.add_argument("--n", type=int, default=24)
    p.set_defaults(func=cmd_lemniscate)

    p = sub.add_parser("solve", parents=[common], help="trinomial and fixed-point solvers")
    p.add_argument("problem", choices=("trinomial", "fixed-point"))
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--n", dest="n_exp", type=int, default=1)
    p.add_argument("--p", default="0")
    p.add_argument("--q", default="0")
    p.add_argument("--algorithm", choices=("A", "B", "a", "b", "astrand"), default="A")
    p.add_argument("--x0", default=None)
    p.add_argument("--f", default="x", help="map in the variable x, e.g. sqrt(6+x)")
    p.add_argument("--df", default=None, help="derivative of --f, needed by --newton")
    p.add_argument("--newton", action="store_true")
    p.add_argument("--max-iter", type=int, default=500)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("constants", parents=[common], help="named constants")
    p.add_argument("action", choices=("get", "list"))
    p.add_argument("name", nargs="?")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("corpus", parents=[common], help="identity corpus")
    p.add_argument("action", choices=("run",))
    p.add_argument("path", nargs="?", default=None)
    p.set_defaults(func=cmd_corpus)
    return parser


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = CommandConfig(
            getattr(args, "precision", _default_precision()),
            getattr(args, "tol", "1e-12"),
            getattr(args, "max_depth", 64),
            getattr(args, "output", "text"),
        )
        if args.command == "constants" and args.action == "get" and not args.name:
            raise ValueError("constants get needs a name")
        if args.command == "solve" and args.problem == "fixed-point" and args.x0 is None:
            raise ValueError("solve fixed-point needs --x0")
        result = args.func(args, cfg)
    except ContCompError as exc:
        print(f"{type(exc).__name__}: {exc}", file=stderr)
        return 1
    except (ValueError, KeyError) as exc:
        print(f"usage error: {exc}", file=stderr)
        return 2
    stdout.write(render(result, cfg))
    return result.exit_code


def main() -> None:
    sys.exit(run())
