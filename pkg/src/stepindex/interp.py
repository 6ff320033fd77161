"""Evaluation of indexed definitions and the least-index measure.

Two evaluators share one cost model (:class:`EvalStats`):

* :class:`TreeEvaluator` walks expressions directly.  It is the reference
  semantics and is also used for small auxiliary expressions (defaults,
  equation sides) whose calls are delegated to host functions.
* :class:`~stepindex.machine.Machine` runs compiled definitions and does the
  heavy lifting behind :class:`Interpreter`.
"""

from __future__ import annotations

import sys
import threading
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional, Union

from .errors import DynamicTypeError, EvaluationError, RecursionSafetyCap
from .machine import HostFn, Machine
from .stats import EvalStats
from .syntax import (
    And, BoolLit, Call, Expr, FunctionDef, GeneratedDef, If, IntLit, NilLit, Or, Prim,
    Program, SymLit, Var,
)
from .transform import TransformResult, transform_program
from .values import PRIMITIVES, Sym, Value, from_bool, render, truthy

__all__ = [
    "DomainVerdict", "EvalStats", "InDomain", "Interpreter", "NotInDomainUpTo",
    "TreeEvaluator", "eval_expr",
]

DEFAULT_SAFETY_CAP = 10**7
DEFAULT_DOMAIN_CAP = 4096


@dataclass(frozen=True)
class InDomain:
    """The least index at which the indexed domain holds."""

    witness: int


@dataclass(frozen=True)
class NotInDomainUpTo:
    """No index up to ``cap`` satisfies the indexed domain."""

    cap: int


DomainVerdict = Union[InDomain, NotInDomainUpTo]


# -- direct evaluator ------------------------------------------------------------

Definition = Union[FunctionDef, GeneratedDef]

_STACK_BYTES = 512 * 1024 * 1024
_FRAMES_PER_CALL = 24


class TreeEvaluator:
    """Applicative-order evaluator over a table of definitions.

    Calls to names outside ``defs`` go to ``hosts``.  Recursion deeper than
    ``safety_cap`` active calls raises :class:`RecursionSafetyCap`.
    """

    def __init__(
        self,
        defs: Union[Program, Mapping[str, Definition], Iterable[Definition]] = (),
        hosts: Optional[Mapping[str, HostFn]] = None,
        safety_cap: int = 100_000,
    ):
        if isinstance(defs, Program):
            defs = defs.definitions
        if isinstance(defs, Mapping):
            self.defs = dict(defs)
        else:
            self.defs = {d.name: d for d in defs}
        self.hosts = dict(hosts or {})
        self.safety_cap = safety_cap

    def call(self, name: str, args: list[Value], stats: Optional[EvalStats] = None) -> Value:
        st = EvalStats()
        try:
            return self._deep(lambda: self._call(name, list(args), 0, st))
        finally:
            if stats is not None:
                stats.absorb(st)

    def eval(self, expr: Expr, env: Mapping[str, Value], stats: Optional[EvalStats] = None,
             where: str = "<expr>") -> Value:
        st = EvalStats()
        try:
            return self._deep(lambda: self._eval(expr, env, 0, where, "expr", st))
        finally:
            if stats is not None:
                stats.absorb(st)

    def _deep(self, thunk: Callable[[], Value]) -> Value:
        # deep recursion runs on a private thread with a large stack
        if self.safety_cap <= 200:
            return self._guarded(thunk)
        box: dict = {}

        def target():
            try:
                box["value"] = self._guarded(thunk)
            except BaseException as err:  # re-raised in the caller's thread
                box["error"] = err

        old_size = threading.stack_size()
        threading.stack_size(_STACK_BYTES)
        try:
            worker = threading.Thread(target=target)
            worker.start()
        finally:
            threading.stack_size(old_size)
        worker.join()
        if "error" in box:
            raise box["error"]
        return box["value"]

    def _guarded(self, thunk: Callable[[], Value]) -> Value:
        need = min(self.safety_cap, 1_000_000) * _FRAMES_PER_CALL + 1000
        old = sys.getrecursionlimit()
        if need > old:
            sys.setrecursionlimit(need)
        try:
            return thunk()
        except RecursionError:
            raise EvaluationError("expression nesting too deep for the tree evaluator") from None
        finally:
            if need > old:
                sys.setrecursionlimit(old)

    def _call(self, name: str, args: list[Value], depth: int, st: EvalStats) -> Value:
        d = self.defs.get(name)
        if d is None:
            host = self.hosts.get(name)
            if host is None:
                raise EvaluationError(f"undefined function {name}")
            sub = EvalStats()
            try:
                return host(args, sub)
            finally:
                st.absorb(sub, depth)
        if len(args) != len(d.params):
            raise EvaluationError(f"{name} expects {len(d.params)} argument(s), got {len(args)}")
        if depth + 1 > self.safety_cap:
            raise RecursionSafetyCap(self.safety_cap, name)
        st.call_count += 1
        if depth + 1 > st.max_recursion_depth:
            st.max_recursion_depth = depth + 1
        return self._eval(d.body, dict(zip(d.params, args)), depth + 1, name, "body", st)

    def _eval(self, e: Expr, env: Mapping[str, Value], depth: int, fname: str, path: str,
              st: EvalStats) -> Value:
        if isinstance(e, Var):
            try:
                return env[e.name]
            except KeyError:
                raise EvaluationError(f"unbound variable {e.name} at {fname}:{path}") from None
        if isinstance(e, IntLit):
            return e.value
        if isinstance(e, BoolLit):
            return True if e.value else None
        if isinstance(e, NilLit):
            return None
        if isinstance(e, SymLit):
            return Sym(e.name)
        if isinstance(e, If):
            if truthy(self._eval(e.test, env, depth, fname, path + ".test", st)):
                return self._eval(e.then, env, depth, fname, path + ".then", st)
            return self._eval(e.else_, env, depth, fname, path + ".else", st)
        if isinstance(e, And):
            v: Value = True
            for i, a in enumerate(e.args):
                v = self._eval(a, env, depth, fname, f"{path}.{i + 1}", st)
                if not truthy(v):
                    return None
            return v
        if isinstance(e, Or):
            for i, a in enumerate(e.args):
                v = self._eval(a, env, depth, fname, f"{path}.{i + 1}", st)
                if truthy(v):
                    return v
            return None
        if isinstance(e, Prim):
            vals = [self._eval(a, env, depth, fname, f"{path}.{i + 1}", st) for i, a in enumerate(e.args)]
            st.prim_count += 1
            try:
                return PRIMITIVES[e.op].fn(*vals)
            except DynamicTypeError as err:
                raise DynamicTypeError(err.detail, f"{fname}:{path}") from None
        if isinstance(e, Call):
            vals = [self._eval(a, env, depth, fname, f"{path}.{i + 1}", st) for i, a in enumerate(e.args)]
            return self._call(e.fn, vals, depth, st)
        raise TypeError(f"not an expression: {e!r}")


def eval_expr(
    env: Mapping[str, Value],
    expr: Expr,
    prog: Union[Program, Mapping[str, Definition], Iterable[Definition]] = (),
    stats: Optional[EvalStats] = None,
    *,
    hosts: Optional[Mapping[str, HostFn]] = None,
    safety_cap: int = 100_000,
) -> Value:
    """Evaluate ``expr`` under ``env``, calling definitions from ``prog``."""
    return TreeEvaluator(prog, hosts, safety_cap).eval(expr, env, stats)


# -- indexed definitions and the measure -----------------------------------------------

def _key(args: Iterable[Value]) -> tuple[str, ...]:
    # render() keeps t and 1 apart, which tuple equality does not
    return tuple(render(a) for a in args)


class Interpreter:
    """Indexed function, indexed domain and measure for every program function.

    With ``memo=True`` the results of *top-level* indexed evaluations and
    verdicts are cached per argument vector; recursive calls inside an
    evaluation are never cached, so step counts are unaffected.
    """

    def __init__(
        self,
        program: Program,
        *,
        safety_cap: int = DEFAULT_SAFETY_CAP,
        backend: str = "auto",
        memo: bool = False,
        results: Optional[dict[str, TransformResult]] = None,
    ):
        self.program = program
        self.results = results if results is not None else transform_program(program)
        self.machine = Machine([g for r in self.results.values() for g in r.generated()], backend=backend)
        self.safety_cap = safety_cap
        self._memo: Optional[dict] = {} if memo else None

    def result(self, fname: str) -> TransformResult:
        try:
            return self.results[fname]
        except KeyError:
            raise EvaluationError(f"unknown function {fname}") from None

    def _check_args(self, fname: str, args) -> list[Value]:
        params = self.result(fname).params
        if len(args) != len(params):
            raise EvaluationError(f"{fname} expects {len(params)} argument(s), got {len(args)}")
        return list(args)

    def _cached(self, key: tuple, stats: Optional[EvalStats], compute: Callable[[Optional[EvalStats]], object]):
        if self._memo is None or stats is not None:
            return compute(stats)
        if key not in self._memo:
            self._memo[key] = compute(None)
        return self._memo[key]

    # indexed evaluation

    def eval_indexed_fn(self, fname: str, d: int, args, stats: Optional[EvalStats] = None) -> Value:
        args = self._check_args(fname, args)
        name = self.result(fname).names.indexed
        return self._cached(("f", fname, d, _key(args)), stats,
                            lambda st: self.machine.call(name, [d] + args, safety_cap=self.safety_cap, stats=st))

    def eval_indexed_dom(self, fname: str, d: int, args, stats: Optional[EvalStats] = None) -> bool:
        args = self._check_args(fname, args)
        name = self.result(fname).names.indexed_dom
        return self._cached(
            ("dom", fname, d, _key(args)), stats,
            lambda st: truthy(self.machine.call(name, [d] + args, safety_cap=self.safety_cap, stats=st)))

    # witness search

    def linear_witness_search(self, fname: str, args, cap: int, stats: Optional[EvalStats] = None,
                              budget: Optional[int] = None) -> Optional[DomainVerdict]:
        """Ascending search for the least witness; ``None`` if ``budget`` steps run out."""
        if cap < 0:
            raise ValueError("cap must be non-negative")
        st = stats if stats is not None else EvalStats()
        name = self.result(fname).names.indexed_dom
        args = self._check_args(fname, args)
        for w in range(cap + 1):
            if budget is not None and st.steps > budget:
                return None
            if truthy(self.machine.call(name, [w] + args, safety_cap=self.safety_cap, stats=st)):
                return InDomain(w)
        return NotInDomainUpTo(cap)

    def find_witness_depth(self, fname: str, args, cap: int, stats: Optional[EvalStats] = None) -> DomainVerdict:
        """Least ``w <= cap`` with the indexed domain true at ``w``."""
        if cap < 0:
            raise ValueError("cap must be non-negative")
        args = self._check_args(fname, args)
        return self._cached(("w", fname, cap, _key(args)), stats,
                            lambda st: self._search(fname, args, cap, st if st is not None else EvalStats()))

    def _search(self, fname: str, args: list[Value], cap: int, st: EvalStats) -> DomainVerdict:
        names = self.result(fname).names

        def dom(d: int) -> bool:
            b = truthy(self.machine.call(names.indexed_dom, [d] + args, safety_cap=self.safety_cap, stats=st))
            if self._memo is not None:  # a top-level evaluation like any other
                self._memo[("dom", fname, d, _key(args))] = b
            return b

        # The unindexed call tree is at least measure+1 deep, so a terminating
        # run bounded at cap+1 frames proposes an upper bound on the witness.
        hint = None
        try:
            self.machine.call(names.fast, args, safety_cap=cap + 1, stats=(sub := EvalStats()))
            hint = sub.max_recursion_depth - 1
        except EvaluationError:
            pass
        finally:
            st.absorb(sub)

        lo, hi = -1, None  # dom(lo) false (or lo = -1), dom(hi) true
        if hint is not None and hint <= cap:
            if dom(hint):
                if hint == 0 or not dom(hint - 1):
                    return InDomain(hint)
                hi = hint - 1
            else:
                lo = hint
        if hi is None:
            d, step = lo + 1, 1
            while True:
                d = min(d, cap)
                if dom(d):
                    hi = d
                    break
                lo = d
                if d == cap:
                    return NotInDomainUpTo(cap)
                d, step = lo + step, step * 2
        while hi - lo > 1:  # stability makes the domain monotone in the index
            mid = (lo + hi) // 2
            if dom(mid):
                hi = mid
            else:
                lo = mid
        return InDomain(hi)

    def min_index(self, fname: str, d: int, args, stats: Optional[EvalStats] = None) -> int:
        """The least-index recursion, unrolled into a loop."""
        args = self._check_args(fname, args)
        while True:
            if type(d) is not int or d <= 0:
                return 0
            if not self.eval_indexed_dom(fname, d, args, stats):
                return 0
            if not self.eval_indexed_dom(fname, d - 1, args, stats):
                return d
            d -= 1

    # logical functions

    def measure(self, fname: str, args, cap: int = DEFAULT_DOMAIN_CAP,
                stats: Optional[EvalStats] = None) -> Optional[int]:
        """Least index applied to the searched witness; ``None`` when none was found."""
        verdict = self.find_witness_depth(fname, args, cap, stats)
        if isinstance(verdict, NotInDomainUpTo):
            return None
        return self.min_index(fname, verdict.witness, args, stats)

    def l_eval(self, fname: str, args, cap: int = DEFAULT_DOMAIN_CAP, stats: Optional[EvalStats] = None) -> Value:
        m = self.measure(fname, args, cap, stats)
        return self.eval_indexed_fn(fname, 0 if m is None else m, args, stats)

    def l_dom(self, fname: str, args, cap: int = DEFAULT_DOMAIN_CAP,
              stats: Optional[EvalStats] = None) -> DomainVerdict:
        m = self.measure(fname, args, cap, stats)
        if m is not None and self.eval_indexed_dom(fname, m, args, stats):
            return InDomain(m)
        return NotInDomainUpTo(cap)

    def logic_hosts(self, cap: int = DEFAULT_DOMAIN_CAP) -> dict[str, HostFn]:
        """Host bindings for the logical names used in derived equations."""
        hosts: dict[str, HostFn] = {}
        for fname, r in self.results.items():
            hosts[r.names.logic] = lambda a, st, f=fname: self.l_eval(f, a, cap, st)
            hosts[r.names.logic_dom] = lambda a, st, f=fname: from_bool(
                isinstance(self.l_dom(f, a, cap, st), InDomain))
            hosts[r.names.measure] = lambda a, st, f=fname: self.measure(f, a, cap, st) or 0
        return hosts

    def machine_hosts(self, hosts: Optional[Mapping[str, HostFn]] = None) -> dict[str, HostFn]:
        """Host bindings that route generated names to the machine."""
        out: dict[str, HostFn] = {}
        for name in self.machine.code.names:
            out[name] = lambda a, st, n=name: self.machine.call(n, a, safety_cap=self.safety_cap,
                                                                stats=st, hosts=hosts)
        return out

    def eval_aux(self, expr: Expr, env: Mapping[str, Value], hosts: Mapping[str, HostFn],
                 stats: Optional[EvalStats] = None) -> Value:
        """Evaluate a non-recursive expression whose calls are all host calls."""
        return TreeEvaluator((), hosts, safety_cap=200).eval(expr, env, stats)
