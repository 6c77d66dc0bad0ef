"""Command-line front end: ``run``, ``generate`` and ``bench``.

Exit codes: 0 success, 1 bad input file or arguments, 2 infeasible
instance, 3 solver cannot handle the instance, 4 internal numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

from ascendopt import bench, decomp, greedy, nested, oracle, tautstring
from ascendopt.errors import (
    CapabilityError,
    InfeasibleError,
    InvariantError,
    NumericalError,
    ProblemFileError,
)
from ascendopt.generators import FAMILIES, generate
from ascendopt.problem import (
    ORACLE_MAX_N,
    check_constraints,
    groenevelt_certificate,
    make_allocation,
)
from ascendopt.problem_file import dumps, load

EXIT_OK, EXIT_PARSE, EXIT_INFEASIBLE, EXIT_CAPABILITY, EXIT_INTERNAL = 0, 1, 2, 3, 4
SOLVER_NAMES = ("decomp", "greedy", "nested", "tautstring", "oracle")
REPORT_TOL = 1e-8


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _name_list(choices):
    def parse(text):
        names = [v.strip() for v in text.split(",") if v.strip()]
        bad = [v for v in names if v not in choices]
        if bad:
            raise argparse.ArgumentTypeError(f"unknown names {bad}; choose from {', '.join(choices)}")
        return names
    return parse


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _solve(args, inst):
    """Return ``(allocation, trace_dict or None)``."""
    if args.solver == "decomp":
        tr = decomp.solve(inst, **({"tol": args.tol} if args.tol else {}))
        return tr.allocation, tr.to_dict()
    if args.solver == "greedy":
        try:
            if args.eps is not None:
                run = greedy.gap_run_eps(inst, args.eps)
                alloc = make_allocation(inst, [v * args.eps for v in run.x])
            else:
                run = greedy.gap_run(inst)
                alloc = make_allocation(inst, run.x)
        except ValueError as exc:
            raise CapabilityError(f"greedy solver: {exc}") from None
        trace = {"passes": [
            {"scale": p.scale, "lower": list(p.lower), "x": list(p.x), "delta": list(p.delta)}
            for p in run.passes
        ]}
        return alloc, trace
    if args.solver == "nested":
        ni = nested.tighten(nested.from_ascending(inst, args.breakpoints))
        alloc, stats = nested.nested_run(ni, **({"tol": args.tol} if args.tol else {}))
        trace = {
            "breaks": list(ni.breaks),
            "tightened": list(ni.tightened),
            "calls_by_depth": {str(k): v for k, v in sorted(stats.calls_by_depth.items())},
        }
        return alloc, trace
    if args.solver == "tautstring":
        res = tautstring.solve(inst)
        if args.emit_path:
            tautstring.write_path_csv(args.emit_path, res.points, res.cover)
        return res.allocation, {"change_indices": list(res.cover.change_indices),
                                "visits": res.cover.visits}
    if args.solver == "oracle":
        return oracle.grid_refine_optimum(inst, oracle.BruteForceConfig(max_n=ORACLE_MAX_N)), None
    raise AssertionError(args.solver)


def cmd_run(args) -> int:
    if args.emit_path and args.solver != "tautstring":
        return _fail(EXIT_PARSE, "--emit-path is only available with --solver tautstring")
    if args.breakpoints is not None and args.solver != "nested":
        return _fail(EXIT_PARSE, "--breakpoints is only available with --solver nested")
    try:
        inst = load(args.input)
    except ProblemFileError as exc:
        return _fail(EXIT_PARSE, f"parse error: {exc}")
    start = time.perf_counter_ns()
    try:
        alloc, trace = _solve(args, inst)
    except InfeasibleError as exc:
        return _fail(EXIT_INFEASIBLE, str(exc), {"prefix": exc.prefix})
    except CapabilityError as exc:
        return _fail(EXIT_CAPABILITY, str(exc))
    except ValueError as exc:
        return _fail(EXIT_PARSE, str(exc))
    except (NumericalError, InvariantError) as exc:
        return _fail(EXIT_INTERNAL, f"internal failure: {exc}")
    elapsed = time.perf_counter_ns() - start
    result = {
        "solver": args.solver,
        "x": list(alloc.x),
        "objective": alloc.objective,
        "wall_time_ns": elapsed,
        "constraints": check_constraints(inst, alloc.x, REPORT_TOL).to_dict(),
    }
    if args.trace and trace is not None:
        result["trace"] = trace
    if args.certify:
        if inst.n > ORACLE_MAX_N:
            result["certificate"] = {"skipped": f"certificate enumerates subsets; needs n <= {ORACLE_MAX_N}"}
        else:
            try:
                result["certificate"] = groenevelt_certificate(inst, alloc.x).to_dict()
            except ValueError as exc:
                result["certificate"] = {"passed": False, "error": str(exc)}
    print(json.dumps(_jsonable(result), indent=1))
    return EXIT_OK


def _fail(code, message, extra=None) -> int:
    print(f"error: {message}", file=sys.stderr)
    doc = {"error": message, "exit_code": code}
    if extra:
        doc.update(extra)
    print(json.dumps(doc))
    return code


def cmd_generate(args) -> int:
    try:
        inst = generate(args.family, args.n, args.seed)
    except ValueError as exc:
        return _fail(EXIT_PARSE, str(exc))
    text = dumps(inst)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_bench(args) -> int:
    bench.write_csv(bench.run(args.sizes, args.solvers, args.seed), sys.stdout)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ascendopt", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="solve a problem file and print the result as JSON")
    r.add_argument("--input", required=True, help="problem file (JSON)")
    r.add_argument("--solver", choices=SOLVER_NAMES, default="decomp")
    r.add_argument("--eps", type=float, help="grid step for the greedy solver on continuous data")
    r.add_argument("--tol", type=float, help="solver tolerance")
    r.add_argument("--trace", action="store_true", help="include the solver trace")
    r.add_argument("--certify", action="store_true", help="run the exchange-pair optimality check")
    r.add_argument("--emit-path", help="write the taut-string polyline as CSV")
    r.add_argument("--breakpoints", type=_int_list,
                   help="prefixes l kept by the nested solver, e.g. 2,5,9")
    r.set_defaults(func=cmd_run)

    g = sub.add_parser("generate", help="write a seeded random problem file")
    g.add_argument("--family", choices=FAMILIES, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--output", help="output path (default: standard output)")
    g.set_defaults(func=cmd_generate)

    b = sub.add_parser("bench", help="time solvers and print CSV")
    b.add_argument("--sizes", type=_int_list, required=True)
    b.add_argument("--solvers", type=_name_list(bench.SOLVERS), default=list(bench.SOLVERS))
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_PARSE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
