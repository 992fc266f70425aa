"""Command-line interface: ``regularity gen|decompose|norms|verify``.

Exit codes: 0 success, 2 usage or parse error, 3 budget exceeded,
4 convergence failure, 5 a verified bound did not hold.
"""

import argparse
import json
import math
import sys
import time

import numpy as np

from . import generators
from .cutalg import (
    DEFAULT_RESTARTS,
    DEFAULT_SPAN_BUDGET,
    black_square_norm_exact,
    classical_cut_norm,
    cut_norm_exact,
    cut_norm_heuristic,
)
from .engine import (
    SATURATED,
    GrowthFunction,
    f_iterate,
    strong_decompose_cut,
    strong_decompose_rank,
    weak_decompose_cut,
    weak_decompose_rank,
)
from .exceptions import BudgetExceededError, ConvergenceError, RegularityError
from .graphreg import (
    C_MODES,
    ceil_inverse_square,
    format_edge_list,
    parse_edge_list,
    verify_exceptional,
    verify_irregularity,
    verify_szemeredi_disc,
    verify_weak_graph,
)
from .matcore import ParseError, f_top_k_norm, format_matrix, frobenius_norm, parse_matrix

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_BUDGET = 3
EXIT_CONVERGENCE = 4
EXIT_BOUND = 5


class UsageError(RegularityError):
    pass


# -- deterministic JSON ------------------------------------------------------


def _float_text(x):
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    text = format(x, ".17g")
    if not any(ch in text for ch in ".en"):
        text += ".0"
    return text


def to_json(obj, indent=2, _level=0):
    """JSON with insertion-ordered keys and floats at 17 significant digits.

    Non-finite floats become the strings ``"inf"``, ``"-inf"`` and ``"nan"``.
    """
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float_text(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{to_json(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(to_json(v) for v in obj) + "]"
        items = [pad + to_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_json(report, path):
    text = to_json(report) + "\n"
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# -- input -------------------------------------------------------------------


def _looks_like_edge_list(lines):
    try:
        header = [int(x) for x in lines[0].split()]
        if len(header) != 2:
            return False
        for line in lines[1:]:
            tokens = line.split()
            if len(tokens) != 2:
                return False
            [int(t) for t in tokens]
    except ValueError:
        return False
    return True


def load_input(path):
    """Read a matrix or an edge list; returns ``(kind, matrix, graph_or_None)``.

    Text whose every line is a pair of integers is an edge list if it parses
    as one; anything else is a matrix.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    lines = [ln for ln in text.splitlines()]
    while lines and not lines[-1].strip():
        lines.pop()
    if lines and _looks_like_edge_list(lines):
        try:
            g = parse_edge_list(text)
            return "graph", g.adjacency, g
        except ParseError:
            pass
    a = parse_matrix(text)
    return "matrix", a, None


def _require_graph(path):
    _, _, g = load_input(path)
    if g is None:
        raise UsageError(f"{path} is a matrix; this command needs an edge list")
    return g


# -- commands ----------------------------------------------------------------


def _input_block(path, kind, a):
    return {"path": path, "kind": kind, "shape": list(a.shape)}


def cmd_gen(args):
    if args.kind == "gnp":
        g = generators.gnp(args.n, args.p, seed=args.seed)
        params = {"n": args.n, "p": args.p, "seed": args.seed}
        text = format_edge_list(g)
    elif args.kind == "complete-bipartite":
        g = generators.complete_bipartite(args.a, args.b)
        params = {"a": args.a, "b": args.b}
        text = format_edge_list(g)
    elif args.kind == "planted-partition":
        sizes = _int_list(args.sizes)
        g = generators.planted_partition(sizes, args.p_in, args.p_out, seed=args.seed)
        params = {"sizes": sizes, "p_in": args.p_in, "p_out": args.p_out, "seed": args.seed}
        text = format_edge_list(g)
    else:
        rng = np.random.default_rng(args.seed)
        shape = (args.rows, args.cols)
        a = rng.choice([-1.0, 1.0], size=shape) if args.dist == "sign" else rng.uniform(-1.0, 1.0, size=shape)
        params = {"rows": args.rows, "cols": args.cols, "dist": args.dist, "seed": args.seed}
        text = format_matrix(a)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    if args.json:
        write_json({"command": "gen", "kind": args.kind, "params": params, "out": args.out}, args.json)
    return EXIT_OK


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _decomposition_json(result, atoms):
    if atoms == "rank":
        return [{"coeff": t.coeff, "left": t.left, "right": t.right} for t in result.decomposition]
    return [
        {"rows": list(atom.row_set), "cols": list(atom.col_set), "coeff": atom.coeff}
        for atom in result.decomposition.atoms
    ]


def _run_decompose(a, args):
    kw = {"seed": args.seed}
    if args.atoms == "cut":
        kw.update(mode=args.mode, restarts=args.restarts, workers=args.threads)
        if args.f is None:
            return weak_decompose_cut(a, args.epsilon, **kw)
        return strong_decompose_cut(a, args.epsilon, GrowthFunction.parse(args.f), **kw)
    if args.f is None:
        return weak_decompose_rank(a, args.epsilon, **kw)
    return strong_decompose_rank(a, args.epsilon, GrowthFunction.parse(args.f), **kw)


def cmd_decompose(args):
    kind, a, _ = load_input(args.input)
    params = {
        "atoms": args.atoms,
        "mode": args.mode if args.atoms == "cut" else None,
        "epsilon": args.epsilon,
        "f": args.f if args.f is not None else "const:1",
        "seed": args.seed,
    }
    report = {"command": "decompose", "input": _input_block(args.input, kind, a), "params": params}
    start = time.perf_counter()
    try:
        result = _run_decompose(a, args)
    except ConvergenceError as exc:
        report["trace"] = exc.trace.to_dict() if exc.trace is not None else None
        report["error"] = str(exc)
        _finish(report, args, start)
        raise
    residual = a - result.a_hat
    report["trace"] = result.trace.to_dict()
    report["k_witness"] = result.k_witness
    report["halting_certificate"] = result.halting_certificate
    report["residual_frobenius"] = frobenius_norm(residual)
    report["input_frobenius"] = frobenius_norm(a)
    report["decomposition"] = _decomposition_json(result, args.atoms)
    _finish(report, args, start)
    _say(
        args,
        f"rounds={result.n_rounds} k_witness={result.k_witness} "
        f"certificate={result.halting_certificate} residual_fro={_float_text(report['residual_frobenius'])}"
    )
    return EXIT_OK


def _say(args, text):
    # Keep stdout clean for the report when it goes there.
    print(text, file=sys.stderr if args.json == "-" else sys.stdout)


def _finish(report, args, start):
    if args.timing:
        report["wall_time_ms"] = (time.perf_counter() - start) * 1000.0
    if args.json:
        write_json(report, args.json)


def _norm_value(a, which, args):
    name, _, arg = which.partition(":")
    if name == "frob" and not arg:
        return frobenius_norm(a)
    if name == "classical" and not arg:
        return classical_cut_norm(a, workers=args.threads)
    if name == "cut1" and not arg:
        if args.mode == "exact":
            return cut_norm_exact(a, workers=args.threads)[0]
        return cut_norm_heuristic(a, restarts=args.restarts, seed=args.seed)[0]
    if name in ("fk", "cutk") and arg:
        try:
            k = int(arg)
        except ValueError:
            k = 0
        if k < 1:
            raise UsageError(f"{name} needs a positive integer, got {arg!r}")
        if name == "fk":
            return f_top_k_norm(a, k, seed=args.seed)
        return black_square_norm_exact(a, k, budget=args.budget)
    raise UsageError(f"unknown norm {which!r}; use frob, fk:k, cut1, cutk:k or classical")


def cmd_norms(args):
    kind, a, _ = load_input(args.input)
    names = [w.strip() for w in args.which.split(",") if w.strip()]
    if not names:
        raise UsageError("--which is empty")
    start = time.perf_counter()
    values = {}
    for name in names:
        values[name] = _norm_value(a, name, args)
    report = {
        "command": "norms",
        "input": _input_block(args.input, kind, a),
        "params": {"which": names, "mode": args.mode, "seed": args.seed, "budget": args.budget},
        "norms": values,
        "certificate": "exact" if args.mode == "exact" or "cut1" not in names else "lower-bound",
    }
    for name, value in values.items():
        _say(args, f"{name} {_float_text(value)}")
    _finish(report, args, start)
    return EXIT_OK


def _checks_json(checks):
    return [c.to_dict() | {"bound_saturated": c.bound == SATURATED} for c in checks]


def _trace_summary(result, f):
    trace = result.trace.to_dict()
    bound = f_iterate(f, result.n_rounds) if f is not None else None
    trace["f_iterate_rounds"] = None if bound == SATURATED else bound
    trace["f_iterate_saturated"] = bound == SATURATED
    return trace


def cmd_verify(args):
    g = _require_graph(args.input)
    kw = dict(mode=args.mode, seed=args.seed, restarts=args.restarts, workers=args.threads)
    params = {"theorem": args.theorem, "epsilon": args.epsilon, "mode": args.mode, "seed": args.seed}
    report = {"command": "verify", "input": _input_block(args.input, "graph", g.adjacency), "params": params}
    start = time.perf_counter()
    if args.theorem == "weak-graph":
        cg, checks = verify_weak_graph(g, args.epsilon, **kw)
        partition, result, f = cg.partition, cg.result, GrowthFunction.constant(1)
        report["trace"] = _trace_summary(result, f)
        report["partition"] = [list(p) for p in partition.parts]
        report["c"] = cg.c
    else:
        params["c_mode"] = args.c_mode
        if args.theorem == "exceptional":
            partition, rep = verify_exceptional(g, args.epsilon, c_mode=args.c_mode, **kw)
            f = GrowthFunction.scaled_exponential(ceil_inverse_square(args.epsilon), 16)
        else:
            verify = verify_szemeredi_disc if args.theorem == "disc" else verify_irregularity
            rep = verify(g, args.epsilon, c_mode=args.c_mode, **kw)
            partition, f = rep.partition, GrowthFunction.exponential(16)
        checks = rep.checks
        parts = partition.parts
        report["trace"] = _trace_summary(rep.result, f)
        report["partition"] = [list(p) for p in parts]
        report["exceptional_part"] = partition.exceptional
        report["discrepancies"] = [
            {
                "i": i,
                "j": j,
                "disc": d,
                "bound": rep.epsilon * len(parts[i]) * len(parts[j]),
                "irregular": (i, j) in rep.irregular_pairs,
            }
            for (i, j), d in sorted(rep.per_pair.items())
        ]
        report["total_discrepancy"] = rep.total_discrepancy
    report["checks"] = _checks_json(checks)
    passed = all(c.passed for c in checks)
    report["passed"] = passed
    if not passed:
        report["note"] = "a bound failed; this indicates a defect, please report it with this file"
    _finish(report, args, start)
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        _say(args, f"{status} {c.name}: {_float_text(c.measured)} {c.relation} {_float_text(c.bound)}")
    return EXIT_OK if passed else EXIT_BOUND


# -- parser ------------------------------------------------------------------


def _positive_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (value > 0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError("must be a positive finite number")
    return value


def _probability(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError("must lie in [0, 1]")
    return value


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _growth_spec(text):
    try:
        GrowthFunction.parse(text)
    except RegularityError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return text


def build_parser():
    parser = argparse.ArgumentParser(prog="regularity", description="Regularity decompositions and verifiers.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--json", metavar="PATH", help="write the JSON report here ('-' for stdout)")
    common.add_argument("--threads", type=_positive_int, default=1, help="workers for exhaustive searches")
    common.add_argument("--timing", action="store_true", help="add wall_time_ms to the report")
    common.add_argument("--restarts", type=_positive_int, default=DEFAULT_RESTARTS, help="heuristic restarts")

    gen = sub.add_parser("gen", parents=[common], help="write a generated graph or matrix")
    gen.add_argument("kind", choices=["gnp", "complete-bipartite", "planted-partition", "matrix"])
    gen.add_argument("--n", type=_positive_int, default=10)
    gen.add_argument("--p", type=_probability, default=0.5)
    gen.add_argument("--a", type=_positive_int, default=3)
    gen.add_argument("--b", type=_positive_int, default=3)
    gen.add_argument("--sizes", default="4,4")
    gen.add_argument("--p-in", type=_probability, default=0.8)
    gen.add_argument("--p-out", type=_probability, default=0.2)
    gen.add_argument("--rows", type=_positive_int, default=8)
    gen.add_argument("--cols", type=_positive_int, default=8)
    gen.add_argument("--dist", choices=["sign", "uniform"], default="sign")
    gen.add_argument("--out", help="output file (default stdout)")
    gen.set_defaults(func=cmd_gen)

    dec = sub.add_parser("decompose", parents=[common], help="run the greedy decomposition")
    dec.add_argument("--in", dest="input", required=True)
    dec.add_argument("--atoms", choices=["rank", "cut"], default="cut")
    dec.add_argument("--mode", choices=["exact", "heuristic"], default="exact")
    dec.add_argument("--epsilon", type=_positive_float, default=0.5)
    dec.add_argument("--f", type=_growth_spec, default=None, help="const:c, exp:b or scaledexp:a:b (default: weak)")
    dec.set_defaults(func=cmd_decompose)

    norms = sub.add_parser("norms", parents=[common], help="compute matrix norms")
    norms.add_argument("--in", dest="input", required=True)
    norms.add_argument("--which", default="frob,fk:1,cut1,classical", help="comma list of frob, fk:k, cut1, cutk:k, classical")
    norms.add_argument("--mode", choices=["exact", "heuristic"], default="exact")
    norms.add_argument("--budget", type=_positive_int, default=DEFAULT_SPAN_BUDGET, help="work budget for cutk")
    norms.set_defaults(func=cmd_norms)

    ver = sub.add_parser("verify", parents=[common], help="build a regularity partition and check its bounds")
    ver.add_argument("--in", dest="input", required=True)
    ver.add_argument("--theorem", choices=["weak-graph", "disc", "irregular", "exceptional"], required=True)
    ver.add_argument("--epsilon", type=_positive_float, default=0.5)
    ver.add_argument("--mode", choices=["exact", "heuristic"], default="exact")
    ver.add_argument("--c-mode", choices=list(C_MODES), default="free")
    ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceededError as exc:
        print(f"error: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ConvergenceError as exc:
        print(f"error: did not converge: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (ParseError, UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RegularityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
