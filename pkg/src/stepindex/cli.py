"""Command-line entry point: ``stepindex {transform,eval,check,bench,total} FILE ...``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .errors import LocatedError, StepIndexError
from .execution import BIG, MODES, ExecConfig, Executor
from .surface import definition_tree, expr_tree, parse_program, pretty
from .syntax import Program
from .totality import check_program_totality
from .transform import transform_program
from .values import render
from .verify import CheckPlan, CheckReport, run_all_checks

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DEFAULT_GRID = "-1:3,-1:6"


class UsageError(Exception):
    pass


def parse_grid(text: str, arity: int) -> tuple[tuple[int, int], ...]:
    """``"lo:hi,lo:hi"``; the last range is reused for any further parameters."""
    ranges = []
    for part in text.split(","):
        lo, sep, hi = part.strip().partition(":")
        try:
            r = (int(lo), int(hi)) if sep else (int(lo), int(lo))
        except ValueError:
            raise UsageError(f"bad grid range {part!r}; expected LO:HI") from None
        if r[0] > r[1]:
            raise UsageError(f"empty grid range {part!r}")
        ranges.append(r)
    if len(ranges) > arity:
        raise UsageError(f"grid has {len(ranges)} ranges but the function takes {arity} argument(s)")
    return tuple(ranges + [ranges[-1]] * (arity - len(ranges)))


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--big", type=int, default=BIG, help="index used by the exported function")
    common.add_argument("--safety-cap", type=int, default=10**7, help="maximum recursion depth")
    common.add_argument("--domain-cap", type=int, default=4096, help="bound for witness searches")
    common.add_argument("--samples", type=int, default=200, help="random (d1, d2, point) samples")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--grid", default=DEFAULT_GRID, help="inclusive ranges, e.g. -1:3,-1:6")
    common.add_argument("--format", choices=("text", "machine-readable"), default="text")

    p = argparse.ArgumentParser(prog="stepindex", description="Step-indexed partial functions.")
    sub = p.add_subparsers(dest="command", required=True)
    t = sub.add_parser("transform", parents=[common], help="print the generated definitions")
    t.add_argument("file")
    t.add_argument("function", nargs="?")
    e = sub.add_parser("eval", parents=[common], help="evaluate one call")
    e.add_argument("file")
    e.add_argument("function")
    e.add_argument("args", nargs="*", type=int)
    b = sub.add_parser("bench", parents=[common], help="step counts of the four execution modes")
    b.add_argument("file")
    b.add_argument("function")
    b.add_argument("args", nargs="*", type=int)
    for name, text in (("check", "run the property suite"), ("total", "check def::total claims")):
        c = sub.add_parser(name, parents=[common], help=text)
        c.add_argument("file")
        c.add_argument("function", nargs="?")
    return p


def _load(path: str) -> Program:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return parse_program(text)
    except LocatedError as exc:
        if exc.line is not None:
            raise UsageError(f"{path}:{exc.line}:{exc.col}: {exc.message}") from None
        raise UsageError(f"{path}: {exc.message}") from None


def _functions(program: Program, fname: Optional[str]) -> list[str]:
    names = [d.name for d in program.definitions]
    if fname is None:
        return names
    if fname not in names:
        raise UsageError(f"no definition named {fname}")
    return [fname]


def _config(ns) -> ExecConfig:
    try:
        return ExecConfig(ns.big, ns.safety_cap, ns.domain_cap)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _plan(ns, arity: int) -> CheckPlan:
    cfg = _config(ns)
    if ns.samples < 0:
        raise UsageError("--samples must be non-negative")
    return CheckPlan(grid=parse_grid(ns.grid, arity), random_samples=ns.samples, seed=ns.seed,
                     domain_cap=cfg.domain_cap, safety_cap=cfg.safety_cap, big=cfg.big)


def _emit(record: dict) -> None:
    print(json.dumps(record, sort_keys=True))


# subcommands

def cmd_transform(ns, program: Program) -> int:
    results = transform_program(program)
    for fname in _functions(program, ns.function):
        r = results[fname]
        if ns.format == "machine-readable":
            _emit({"function": fname,
                   "definitions": {g.name: pretty(definition_tree(g)) for g in r.generated()},
                   "base_predicate": pretty(expr_tree(r.base_predicate)),
                   "default": pretty(expr_tree(r.default_expr)),
                   "equations": {eq.name: [pretty(expr_tree(eq.lhs)), pretty(expr_tree(eq.rhs))]
                                 for eq in r.derived}})
            continue
        print(f"; {fname}: base predicate {pretty(expr_tree(r.base_predicate))}, "
              f"default {pretty(expr_tree(r.default_expr))}")
        for g in r.generated():
            print(pretty(definition_tree(g)))
            print()
    return EXIT_OK


def _resolve(program: Program, name: str) -> tuple[str, str]:
    for d in program.definitions:
        if name == d.name:
            return d.name, "indexed"
        if d.wrapper_name is not None and name == d.wrapper_name:
            return d.name, "wrapper"
        if name == f"{d.name}-domain":
            return d.name, "domain"
    raise UsageError(f"no function, wrapper or domain named {name}")


def cmd_eval(ns, program: Program) -> int:
    fname, mode = _resolve(program, ns.function)
    ex = Executor.from_program(program, _config(ns))
    arity = len(program.get(fname).params)
    if len(ns.args) != arity:
        raise UsageError(f"{ns.function} expects {arity} argument(s), got {len(ns.args)}")
    if mode == "indexed":
        value = ex.run(fname, ns.args)
    elif mode == "wrapper":
        value = ex.run_wrapper(fname, ns.args)
    else:
        value = "t" if ex.exec_dom(fname, ns.args) else "nil"
    text = value if isinstance(value, str) else render(value)
    if ns.format == "machine-readable":
        _emit({"function": ns.function, "args": ns.args, "value": text})
    else:
        print(text)
    return EXIT_OK


def cmd_bench(ns, program: Program) -> int:
    fname = _functions(program, ns.function)[0]
    arity = len(program.get(fname).params)
    if len(ns.args) != arity:
        raise UsageError(f"{fname} expects {arity} argument(s), got {len(ns.args)}")
    ex = Executor.from_program(program, _config(ns))
    rows = []
    for mode in MODES:
        try:
            rows.append((mode, ex.count_steps(mode, fname, ns.args).as_dict(), ""))
        except StepIndexError as exc:
            rows.append((mode, None, str(exc)))
    if ns.format == "machine-readable":
        for mode, st, err in rows:
            _emit({"function": fname, "args": ns.args, "mode": mode, "stats": st, "error": err or None})
        return EXIT_OK
    cols = ("call_count", "prim_count", "max_recursion_depth", "domain_checks", "steps")
    print(f"{'mode':<8} " + " ".join(f"{c:>20}" for c in cols))
    for mode, st, err in rows:
        if st is None:
            print(f"{mode:<8} error: {err}")
        else:
            print(f"{mode:<8} " + " ".join(f"{st[c]:>20}" for c in cols))
    return EXIT_OK


def _report(ns, reports: list[CheckReport]) -> int:
    for rep in reports:
        if ns.format == "machine-readable":
            _emit(rep.as_dict())
            continue
        print(f"{rep.status.upper():<5} {rep.fname:<12} {rep.name:<28} {rep.instances_checked:>8} instances")
        for note in rep.notes:
            print(f"      note: {note}")
        for f in rep.failures[:10]:
            print(f"      {f}")
        if len(rep.failures) > 10:
            print(f"      ... {len(rep.failures) - 10} more")
    return EXIT_FAIL if any(r.failures for r in reports) else EXIT_OK


def cmd_check(ns, program: Program) -> int:
    reports: list[CheckReport] = []
    for fname in _functions(program, ns.function):
        reports += run_all_checks(program, fname, _plan(ns, len(program.get(fname).params)))
    return _report(ns, reports)


def cmd_total(ns, program: Program) -> int:
    reports: list[CheckReport] = []
    for fname in _functions(program, ns.function):
        if any(s.fname == fname for s in program.totality_specs):
            reports += check_program_totality(program, _plan(ns, len(program.get(fname).params)), fname)
    if not reports and ns.format == "text":
        print("no def::total forms")
    return _report(ns, reports)


COMMANDS = {"transform": cmd_transform, "eval": cmd_eval, "bench": cmd_bench,
            "check": cmd_check, "total": cmd_total}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        program = _load(ns.file)
        return COMMANDS[ns.command](ns, program)
    except UsageError as exc:
        print(f"stepindex: {exc}", file=sys.stderr)
    except StepIndexError as exc:
        if isinstance(exc, LocatedError) and exc.line is not None:
            print(f"stepindex: {ns.file}:{exc.line}:{exc.col}: {exc.message}", file=sys.stderr)
        else:
            print(f"stepindex: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
