"""``nc``: command-line front end.

Every subcommand prints one report (JSON by default) holding the command,
an echo of its configuration, the result, and a status. Exit codes:

0
    success, or every check passed
1
    numerical failure (singular matrix, path left the domain)
2
    parse or validation error, unknown subcommand
3
    a check ran and failed
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import acceptance
from .errors import DomainExitError, NcError, SingularMatrixError
from .evalad import dir_deriv, divisor, evaluate
from .matcore import MatrixTuple, matrix_to_json, random_tuple
from .ncexpr import nvars, parse
from .realize import Realization, det_ratio, divisor_split, linearize, realization_eval
from .tracial import (
    DomainSpec,
    GermSpec,
    PathSpec,
    builtin_path,
    concatenate,
    continue_germ,
    integrality_test,
    loop_phi,
    quantization_check,
    trace_equiv_check,
)

EXIT_OK, EXIT_NUMERIC, EXIT_INPUT, EXIT_CHECK = 0, 1, 2, 3


class UsageError(Exception):
    """Bad or conflicting command-line input."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# --------------------------------------------------------------------------
# JSON output with 17 significant digits

def _fmt_float(x):
    if math.isnan(x) or math.isinf(x):
        return json.dumps(str(x))
    return format(x, ".17g")


def _to_plain(obj):
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        if obj.ndim == 2:
            return matrix_to_json(obj)
        return [_to_plain(a) for a in obj]
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, MatrixTuple):
        return obj.to_json()
    if isinstance(obj, dict):
        return {str(k): _to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_plain(v) for v in obj]
    return obj


def _encode(obj, indent=0):
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_encode(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj):
    """JSON text with every float printed to 17 significant digits."""
    return _encode(_to_plain(obj))


def _text(obj, prefix=""):
    obj = _to_plain(obj)
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v and not _is_leaf_list(v):
                lines.append(f"{prefix}{k}:")
                lines.extend(_text(v, prefix + "  "))
            else:
                lines.append(f"{prefix}{k}: {_encode(v) if isinstance(v, (list, dict)) else _short(v)}")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            if isinstance(v, (dict, list)) and not _is_leaf_list(v):
                lines.append(f"{prefix}[{i}]")
                lines.extend(_text(v, prefix + "  "))
            else:
                lines.append(f"{prefix}[{i}] {_short(v)}")
    else:
        lines.append(prefix + _short(obj))
    return lines


def _is_leaf_list(v):
    return isinstance(v, list) and all(isinstance(a, (int, float, str)) for a in v)


def _short(v):
    if isinstance(v, float):
        return _fmt_float(v)
    return str(v)


# --------------------------------------------------------------------------
# input helpers

def _load_json(path):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from None


def _exclusive(args, flag, file_flag):
    a, b = getattr(args, flag), getattr(args, file_flag)
    if a is not None and b is not None:
        raise UsageError(f"give --{flag.replace('_', '-')} or --{file_flag.replace('_', '-')}, not both")
    return a, b


def _expr(args, flag="expr"):
    text, path = _exclusive(args, flag, flag + "_file")
    if path is not None:
        try:
            text = Path(path).read_text().strip()
        except FileNotFoundError:
            raise UsageError(f"no such file: {path}") from None
    if text is None:
        raise UsageError(f"missing --{flag}")
    return text, parse(text)


def _point(args, d):
    path, n = _exclusive(args, "point", "random")
    if path is not None:
        x = MatrixTuple.from_json(_load_json(path))
        return x, {"point": path}
    if n is not None:
        return random_tuple(n, d, args.seed), {"random": n}
    raise UsageError("missing --point (or --random N)")


def _domain(args):
    if args.domain is None:
        return DomainSpec.gl() if getattr(args, "gl", False) else None
    return DomainSpec.from_json(_load_json(args.domain))


def _germ(args):
    if args.logdet is not None and args.closed is not None:
        raise UsageError("give --logdet or --closed, not both")
    if args.logdet is not None:
        return GermSpec.logdet(parse(args.logdet))
    if args.closed is not None:
        return GermSpec.closed_form([parse(s) for s in args.closed.split(";")])
    raise UsageError("missing germ: --logdet EXPR or --closed 'g1; g2; ...'")


def _path(path):
    return PathSpec.from_json(_load_json(path))


def _sizes(text):
    try:
        sizes = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"bad --sizes {text!r}") from None
    if not sizes or min(sizes) < 1:
        raise UsageError(f"bad --sizes {text!r}")
    return sizes


def _write_out(args, obj):
    if getattr(args, "out", None):
        Path(args.out).write_text(dumps(obj) + "\n")


# --------------------------------------------------------------------------
# subcommands; each returns (config, result, passed)

def cmd_eval(args):
    text, e = _expr(args)
    x, src = _point(args, nvars(e))
    res = evaluate(e, x)
    return {"expr": text, **src}, {
        "value": res.value,
        "condition": res.condition,
        "block_dims": list(res.block_dims),
    }, True


def cmd_dderiv(args):
    text, e = _expr(args)
    x, src = _point(args, nvars(e))
    if args.dir is None:
        raise UsageError("missing --dir")
    h = MatrixTuple.from_json(_load_json(args.dir))
    return {"expr": text, "dir": args.dir, **src}, {"derivative": dir_deriv(e, x, h)}, True


def cmd_divisor(args):
    text, e = _expr(args)
    x, src = _point(args, nvars(e))
    g = divisor(e, x, method=args.method)
    return {"expr": text, "method": args.method, **src}, {"components": list(g)}, True


def cmd_check_div_eq(args):
    t1, e1 = _expr(args, "e1")
    t2, e2 = _expr(args, "e2")
    sizes = _sizes(args.sizes)
    d = max(nvars(e1), nvars(e2), 1)
    rng = np.random.default_rng(args.seed)
    trials, worst, skipped = [], 0.0, 0
    for n in sizes:
        for j in range(args.trials):
            x = random_tuple(n, d, rng)
            try:
                g1, g2 = divisor(e1, x), divisor(e2, x)
            except SingularMatrixError:
                skipped += 1
                continue
            scale = 1.0 + max(float(np.abs(a).max()) for a in g1)
            res = g1.max_abs_diff(g2) / scale
            worst = max(worst, res)
            trials.append({"n": n, "trial": j, "residual": res})
    passed = worst <= args.tol and bool(trials)
    config = {"e1": t1, "e2": t2, "sizes": sizes, "trials": args.trials}
    return config, {"max_residual": worst, "skipped": skipped, "trials": trials}, passed


def cmd_linearize(args):
    text, e = _expr(args)
    r = linearize(e, seed=args.seed)
    _write_out(args, r.to_json())
    return {"expr": text}, {"realization": r.to_json()}, True


def _realization(args):
    if args.realization is None:
        raise UsageError("missing --realization")
    return Realization.from_json(_load_json(args.realization))


def cmd_realization_eval(args):
    r = _realization(args)
    x, src = _point(args, r.d)
    return {"realization": args.realization, **src}, {"value": realization_eval(r, x)}, True


def cmd_det_ratio(args):
    r = _realization(args)
    x, src = _point(args, r.d)
    dr = det_ratio(r, x)
    result = {"det_bordered": dr.bordered, "det_pencil": dr.pencil, "ratio": dr.ratio}
    return {"realization": args.realization, **src}, result, True


def cmd_divisor_split(args):
    r = _realization(args)
    x, src = _point(args, r.d)
    p, q = divisor_split(r, x)
    result = {"div_p": list(p), "div_q": list(q), "difference": list(p - q)}
    return {"realization": args.realization, **src}, result, True


def cmd_gen_path(args):
    if args.kind == "custom":
        if args.nodes is None:
            raise UsageError("custom paths need --nodes FILE")
        path = _path(args.nodes)
    else:
        if args.samples < 3 or args.n < 1:
            raise UsageError("need --samples >= 3 and --n >= 1")
        path = builtin_path(
            args.kind, n=args.n, winding=args.winding, samples=args.samples,
            radius=args.radius, center=args.center, d=args.d,
        )
    _write_out(args, path.to_json())
    config = {"kind": args.kind, "n": args.n, "winding": args.winding, "samples": args.samples}
    return config, {"path": path.to_json()}, True


def cmd_concat(args):
    p = concatenate(_path(args.path1), _path(args.path2))
    _write_out(args, p.to_json())
    return {"path1": args.path1, "path2": args.path2}, {"path": p.to_json()}, True


def cmd_continue(args):
    germ = _germ(args)
    res = continue_germ(germ, _path(args.path), _domain(args), args.tol)
    result = {
        "start_value": res.start_value,
        "end_value": res.end_value,
        "increment": res.increment,
        "normalized_increment": res.normalized_increment,
        "germ_value": res.germ_value,
        "steps": res.steps,
        "max_step_error": res.max_step_error,
    }
    return {"germ": str(germ), "path": args.path, "domain": args.domain}, result, True


def cmd_loop_phi(args):
    germ = _germ(args)
    phi = loop_phi(germ, _path(args.path), _domain(args), args.tol)
    result = {"phi": phi, "winding_ratio": phi / (2j * math.pi)}
    return {"germ": str(germ), "path": args.path, "domain": args.domain}, result, True


def cmd_quantize(args):
    if args.loops is None:
        raise UsageError("missing --loops FILE")
    raw = _load_json(args.loops)
    try:
        values = [(complex(*v["c"]), int(v["n"])) for v in raw]
    except (KeyError, TypeError, ValueError):
        raise UsageError('loops file must be a list of {"c": [re, im], "n": int}') from None
    report = quantization_check(values, args.tol)
    entries = [
        {"c": e.value, "n": e.n, "ratio": str(e.ratio), "residual": e.residual, "ok": e.ok}
        for e in report.entries
    ]
    return {"loops": args.loops}, {"entries": entries}, report.passed


def cmd_integrality(args):
    germ = _germ(args)
    loops = [_path(p) for p in args.path or []]
    v = integrality_test(germ, loops, _domain(args), args.tol)
    result = {"verdict": v.verdict, "ratios": list(v.ratios), "witnesses": list(v.witnesses)}
    return {"germ": str(germ), "paths": args.path or []}, result, v.passed


def cmd_trace_equiv(args):
    if not args.logdet:
        raise UsageError("give at least one --logdet EXPR")
    germs = [GermSpec.logdet(parse(s)) for s in args.logdet]
    v = trace_equiv_check(_path(args.path1), _path(args.path2), germs, _domain(args), args.tol)
    result = {
        "verdict": v.verdict + (" (w.r.t. supplied germs)" if v.indistinguishable else ""),
        "values": [list(pair) for pair in v.values],
        "separating_germ": None if v.separating is None else args.logdet[v.separating],
    }
    return {"path1": args.path1, "path2": args.path2, "germs": args.logdet}, result, v.indistinguishable


def cmd_suite(args):
    only = _sizes(args.only) if args.only else None
    rows = acceptance.run_all(args.seed, only)
    if args.format == "text":
        for c in rows:
            print(c.line(), file=sys.stderr)
    result = {
        "criteria": [
            {"number": c.number, "name": c.name, "passed": c.passed, "detail": c.detail}
            for c in rows
        ]
    }
    return {"only": only}, result, all(c.passed for c in rows)


COMMANDS = {
    "eval": cmd_eval,
    "dderiv": cmd_dderiv,
    "divisor": cmd_divisor,
    "check-div-eq": cmd_check_div_eq,
    "linearize": cmd_linearize,
    "realization-eval": cmd_realization_eval,
    "det-ratio": cmd_det_ratio,
    "divisor-split": cmd_divisor_split,
    "gen-path": cmd_gen_path,
    "concat": cmd_concat,
    "continue": cmd_continue,
    "loop-phi": cmd_loop_phi,
    "quantize": cmd_quantize,
    "integrality": cmd_integrality,
    "trace-equiv": cmd_trace_equiv,
    "suite": cmd_suite,
}


def _default_seed():
    raw = os.environ.get("NC_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"NC_SEED must be an integer, got {raw!r}") from None


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default: $NC_SEED or 0)")
    common.add_argument("--format", choices=("json", "text"), default="json")

    def expr_flags(p, name="expr"):
        p.add_argument(f"--{name}", dest=name)
        p.add_argument(f"--{name}-file", dest=f"{name}_file")

    def point_flags(p):
        p.add_argument("--point", help="MatrixTuple JSON file")
        p.add_argument("--random", type=int, metavar="N", help="random point of size N")

    def germ_flags(p):
        p.add_argument("--logdet", metavar="EXPR")
        p.add_argument("--closed", metavar="G1;G2;...")

    def domain_flags(p):
        p.add_argument("--domain", help="domain JSON file")
        p.add_argument("--gl", action="store_true", help="restrict to invertible X1")

    parser = _Parser(prog="nc", description="Free noncommutative functions on matrix tuples.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", parents=[common], help="evaluate an expression")
    expr_flags(p)
    point_flags(p)
    p = sub.add_parser("dderiv", parents=[common], help="directional derivative")
    expr_flags(p)
    point_flags(p)
    p.add_argument("--dir", help="direction MatrixTuple JSON file")
    p = sub.add_parser("divisor", parents=[common], help="principal divisor")
    expr_flags(p)
    point_flags(p)
    p.add_argument("--method", choices=("reverse", "forward"), default="reverse")
    p = sub.add_parser("check-div-eq", parents=[common], help="compare two divisors at random points")
    expr_flags(p, "e1")
    expr_flags(p, "e2")
    p.add_argument("--sizes", default="1,2,3,4")
    p.add_argument("--trials", type=int, default=25)
    p.add_argument("--tol", type=float, default=1e-8)
    p = sub.add_parser("linearize", parents=[common], help="build a pencil realization")
    expr_flags(p)
    p.add_argument("--out")
    for name, helptext in (
        ("realization-eval", "evaluate a realization"),
        ("det-ratio", "determinant ratio of a realization"),
        ("divisor-split", "divisors of the bordered pencil and the pencil"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--realization")
        point_flags(p)
    p = sub.add_parser("gen-path", parents=[common], help="sample a built-in path")
    p.add_argument("--kind", choices=("circle-det", "diag-rotation", "unipotent-2x2", "custom"), default="circle-det")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--winding", type=int, default=1)
    p.add_argument("--samples", type=int, default=256)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--center", type=float, default=0.0)
    p.add_argument("--nodes", help="path JSON to validate (custom kind)")
    p.add_argument("--out")
    p = sub.add_parser("concat", parents=[common], help="concatenate two paths")
    p.add_argument("--path1", required=True)
    p.add_argument("--path2", required=True)
    p.add_argument("--out")
    for name, helptext in (("continue", "continue a germ along a path"), ("loop-phi", "monodromy increment")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        germ_flags(p)
        domain_flags(p)
        p.add_argument("--path", required=True)
        p.add_argument("--tol", type=float, default=1e-8)
    p = sub.add_parser("quantize", parents=[common], help="check n c in 2 pi i Z")
    p.add_argument("--loops")
    p.add_argument("--tol", type=float, default=1e-6)
    p = sub.add_parser("integrality", parents=[common], help="integrality test of a closed form")
    germ_flags(p)
    domain_flags(p)
    p.add_argument("--path", action="append", help="loop JSON file (repeatable)")
    p.add_argument("--tol", type=float, default=1e-6)
    p = sub.add_parser("trace-equiv", parents=[common], help="compare two paths")
    p.add_argument("--path1", required=True)
    p.add_argument("--path2", required=True)
    p.add_argument("--logdet", action="append", metavar="EXPR")
    domain_flags(p)
    p.add_argument("--tol", type=float, default=1e-6)
    p = sub.add_parser("suite", parents=[common], help="run the acceptance criteria")
    p.add_argument("--only", help="comma-separated criterion numbers")
    return parser


def _emit(args_format, report):
    if args_format == "text":
        print("\n".join(_text(report)))
    else:
        print(dumps(report))


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    fmt = "json"
    command = argv[0] if argv else None
    try:
        args = build_parser().parse_args(argv)
        fmt = args.format
        if args.seed is None:
            args.seed = _default_seed()
        config, result, passed = COMMANDS[args.command](args)
    except UsageError as exc:
        return _fail(fmt, command, "usage", str(exc), EXIT_INPUT)
    except (SingularMatrixError, DomainExitError) as exc:
        return _fail(fmt, command, "numerical", str(exc), EXIT_NUMERIC)
    except (NcError, ValueError) as exc:
        return _fail(fmt, command, "invalid", str(exc), EXIT_INPUT)
    config = {"seed": args.seed, **config}
    if hasattr(args, "tol"):
        config["tol"] = args.tol
    report = {
        "command": args.command,
        "config": config,
        "result": result,
        "status": "pass" if passed else "fail",
    }
    _emit(fmt, report)
    return EXIT_OK if passed else EXIT_CHECK


def _fail(fmt, command, kind, message, code):
    print(f"nc: {message}", file=sys.stderr)
    _emit(fmt, {"command": command, "status": "error", "error": {"kind": kind, "message": message}})
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
