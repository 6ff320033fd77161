"""Brute-force checks of the properties the construction is supposed to have.

Every check runs over a :class:`CheckPlan`: an exhaustive integer grid for the
function's parameters, plus seeded random samples of (index, index, point)
triples for the index-quantified properties.  Failures carry the full input
assignment and the values on both sides so they can be replayed.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator, Optional

from .errors import EvaluationError
from .execution import BIG, ExecConfig, Executor
from .interp import InDomain, Interpreter
from .machine import HostFn
from .stats import EvalStats
from .syntax import And, Call, Expr, GeneratedDef, If, IntLit, Prim, Program, TRUE, Var, map_calls, walk
from .transform import TransformResult
from .values import PRIMITIVES, Value, equal, from_bool, render, truthy


@dataclass(frozen=True)
class CheckPlan:
    grid: tuple[tuple[int, int], ...]
    random_samples: int = 200
    seed: int = 0
    depth_range: tuple[int, int] = (0, 12)
    domain_cap: int = 4096
    safety_cap: int = 10**7
    big: int = BIG
    # step budget per point for the linear witness search run alongside the fast one
    oracle_budget: int = 10**8

    def __post_init__(self):
        for lo, hi in self.grid:
            if lo > hi:
                raise ValueError(f"empty range {lo}:{hi}")
        lo, hi = self.depth_range
        if lo < 0 or lo > hi:
            raise ValueError(f"bad depth range {lo}:{hi}")
        if self.random_samples < 0:
            raise ValueError("random_samples must be non-negative")

    def points(self) -> list[tuple[int, ...]]:
        return list(itertools.product(*(range(lo, hi + 1) for lo, hi in self.grid)))

    def depths(self) -> range:
        return range(self.depth_range[0], self.depth_range[1] + 1)

    def samples(self) -> list[tuple[int, int, tuple[int, ...]]]:
        """Seeded ``(d1, d2, point)`` triples; indices range over 0..4*max depth."""
        rng = random.Random(self.seed)
        top = 4 * self.depth_range[1]
        out = []
        for _ in range(self.random_samples):
            d1, d2 = rng.randint(0, top), rng.randint(0, top)
            point = tuple(rng.randint(lo, hi) for lo, hi in self.grid)
            out.append((d1, d2, point))
        return out


@dataclass(frozen=True)
class Failure:
    inputs: tuple[tuple[str, str], ...]
    lhs: str
    rhs: str
    detail: str = ""

    def as_dict(self) -> dict:
        return {"inputs": dict(self.inputs), "lhs": self.lhs, "rhs": self.rhs, "detail": self.detail}

    def __str__(self) -> str:
        where = " ".join(f"{k}={v}" for k, v in self.inputs)
        return f"{where}: {self.lhs} vs {self.rhs}" + (f" ({self.detail})" if self.detail else "")


@dataclass
class CheckReport:
    name: str
    fname: str
    instances_checked: int = 0
    failures: list[Failure] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def status(self) -> str:
        return "fail" if self.failures else "pass"

    def as_dict(self) -> dict:
        return {
            "check": self.name,
            "function": self.fname,
            "status": self.status,
            "instances": self.instances_checked,
            "failures": [f.as_dict() for f in self.failures],
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class Outcome:
    """A value or the class of the error raised while computing it."""

    ok: bool
    value: Value = None
    error: str = ""

    def same(self, other: "Outcome") -> bool:
        if self.ok and other.ok:
            return equal(self.value, other.value)
        return not self.ok and not other.ok and self.error == other.error

    def __str__(self) -> str:
        return render(self.value) if self.ok else f"error: {self.error}"


class _Replayed(EvaluationError):
    """Re-raises a cached failure so it is classified like the original."""

    def __init__(self, error: str):
        self.error = error
        super().__init__(error)


def outcome(thunk: Callable[[], Value]) -> Outcome:
    try:
        return Outcome(True, thunk())
    except _Replayed as err:
        return Outcome(False, error=err.error)
    except EvaluationError as err:
        return Outcome(False, error=type(err).__name__)


class Session:
    """Shared state for the checks of one function under one plan.

    Top-level indexed evaluations, verdicts and executable outcomes are cached
    per argument vector so the checks can share work.
    """

    def __init__(self, program: Program, fname: str, plan: CheckPlan, *,
                 results: Optional[dict[str, TransformResult]] = None, backend: str = "auto"):
        self.plan = plan
        self.interp = Interpreter(program, safety_cap=plan.safety_cap, backend=backend, memo=True,
                                  results=results)
        self.executor = Executor(self.interp, ExecConfig(plan.big, plan.safety_cap, plan.domain_cap))
        self.fname = fname
        self.result = self.interp.result(fname)
        self.params = self.result.params
        if len(plan.grid) != len(self.params):
            raise ValueError(f"{fname} has {len(self.params)} parameter(s) but the grid has {len(plan.grid)}")
        self._outcomes: dict = {}
        self._hosts: Optional[dict[str, HostFn]] = None

    # cached primitives of every check

    def dom(self, d: int, args) -> bool:
        return self.interp.eval_indexed_dom(self.fname, d, list(args))

    def fn(self, d: int, args) -> Value:
        return self.interp.eval_indexed_fn(self.fname, d, list(args))

    def verdict(self, args):
        return self.interp.find_witness_depth(self.fname, list(args), self.plan.domain_cap)

    def measure(self, args) -> Optional[int]:
        return self.interp.measure(self.fname, list(args), self.plan.domain_cap)

    def l_eval(self, args) -> Value:
        return self.interp.l_eval(self.fname, list(args), self.plan.domain_cap)

    def cached(self, kind: str, args, thunk: Callable[[], Value]) -> Outcome:
        key = (kind, tuple(render(a) for a in args))
        if key not in self._outcomes:
            self._outcomes[key] = outcome(thunk)
        return self._outcomes[key]

    def run(self, args) -> Outcome:
        if self.result.source.indexed_execution:
            return self.comp(self.plan.big, args)
        return self.cached("run", args, lambda: self.executor.run(self.fname, list(args)))

    def comp(self, d: int, args) -> Outcome:
        return self.cached("comp", (d,) + tuple(args), lambda: self.executor.comp_eval(self.fname, d, list(args)))

    def hosts(self) -> dict[str, HostFn]:
        """Bindings for every name that can appear in a derived equation.

        Logical names and the exported function answer from the session caches;
        the step counts of these calls are not needed by any check.
        """
        if self._hosts is None:
            hosts = self.executor.exec_hosts()
            hosts.update(self.interp.logic_hosts(self.plan.domain_cap))
            names = self.result.names
            cap = self.plan.domain_cap
            hosts[names.logic] = lambda a, st: self.interp.l_eval(self.fname, a, cap)
            hosts[names.logic_dom] = lambda a, st: from_bool(
                isinstance(self.interp.l_dom(self.fname, a, cap), InDomain))
            hosts[names.measure] = lambda a, st: self.interp.measure(self.fname, a, cap) or 0
            hosts[names.fn] = lambda a, st: _replay(self.run(a))
            hosts[names.comp] = lambda a, st: _replay(self.comp(a[0], a[1:]))
            self._hosts = hosts
        return self._hosts

    def aux(self, expr: Expr, args, hosts: Optional[dict[str, HostFn]] = None) -> Outcome:
        env = dict(zip(self.params, args))
        return outcome(lambda: self.interp.eval_aux(expr, env, hosts or self.hosts()))

    def inputs(self, args, **extra: int) -> tuple[tuple[str, str], ...]:
        pairs = [(k, str(v)) for k, v in extra.items()]
        return tuple(pairs + [(p, render(a)) for p, a in zip(self.params, args)])

    def index_triples(self) -> Iterator[tuple[int, int, tuple]]:
        for args in self.plan.points():
            for d1 in self.plan.depths():
                for d2 in self.plan.depths():
                    yield d1, d2, args
        yield from self.plan.samples()


def _replay(o: Outcome) -> Value:
    if not o.ok:
        raise _Replayed(o.error)
    return o.value


# -- recursive call sites --------------------------------------------------------------

def recursive_calls(session: Session, args) -> list[tuple[Value, ...]]:
    """Arguments of the recursive calls made by the branch ``args`` selects.

    The body is evaluated with every recursive call recorded and answered by
    the logical function, so nested calls see the values they would in the
    logic.
    """
    names = session.result.names
    seen: list[tuple[Value, ...]] = []

    def record(a: list[Value], st: EvalStats) -> Value:
        seen.append(tuple(a))
        return session.l_eval(a)

    hosts = dict(session.executor.machine_hosts())
    hosts[names.logic] = record
    body = session.result.derived.l_fn_equation.rhs.else_
    session.interp.eval_aux(body, dict(zip(session.params, args)), hosts)
    return seen


# -- the checks ----------------------------------------------------------------

def check_determinism(session: Session) -> CheckReport:
    rep = CheckReport("determinism", session.fname)
    for d1, d2, args in session.index_triples():
        rep.instances_checked += 1
        if not (session.dom(d1, args) and session.dom(d2, args)):
            continue
        v1, v2 = session.fn(d1, args), session.fn(d2, args)
        if not equal(v1, v2):
            rep.failures.append(Failure(session.inputs(args, d1=d1, d2=d2), render(v1), render(v2)))
    return rep


def check_stability(session: Session) -> CheckReport:
    rep = CheckReport("stability", session.fname)
    for d1, d2, args in session.index_triples():
        if d1 > d2:
            continue
        rep.instances_checked += 1
        if session.dom(d1, args) and not session.dom(d2, args):
            variant = "strict" if d1 < d2 else "non-strict"
            rep.failures.append(Failure(session.inputs(args, d1=d1, d2=d2), "t", "nil", variant))
    return rep


def check_canonical_measure(session: Session) -> CheckReport:
    rep = CheckReport("canonical-measure", session.fname)
    fname, plan = session.fname, session.plan
    skipped = []
    for args in plan.points():
        verdict = session.verdict(args)
        # the linear ascending search is an independent route to the same answer
        rep.instances_checked += 1
        linear = session.interp.linear_witness_search(fname, list(args), plan.domain_cap,
                                                      budget=plan.oracle_budget)
        if linear is None:
            skipped.append(args)
        elif linear != verdict:
            rep.failures.append(Failure(session.inputs(args), str(linear), str(verdict), "linear search vs search"))
        if not isinstance(verdict, InDomain):
            continue
        w = verdict.witness
        m = session.measure(args)
        rep.instances_checked += 1
        if m != w or (w > 0 and session.dom(w - 1, args)):
            rep.failures.append(Failure(session.inputs(args), str(m), str(w), "least index"))
        canonical = session.fn(w, args)
        for d in plan.depths():
            if d < w or not session.dom(d, args):
                continue
            rep.instances_checked += 1
            v = session.fn(d, args)
            if not equal(v, canonical):
                rep.failures.append(Failure(session.inputs(args, d=d), render(v), render(canonical), "value"))
            mi = session.interp.min_index(fname, d, list(args))
            if mi != w:
                rep.failures.append(Failure(session.inputs(args, d=d), str(mi), str(w), "min-index"))
    for d1, _, args in plan.samples():
        verdict = session.verdict(args)
        if not isinstance(verdict, InDomain) or not session.dom(d1, args):
            continue
        rep.instances_checked += 1
        v, canonical = session.fn(d1, args), session.fn(verdict.witness, args)
        if not equal(v, canonical):
            rep.failures.append(Failure(session.inputs(args, d=d1), render(v), render(canonical), "value"))
    if skipped:
        rep.notes.append(f"linear search over budget at {len(skipped)} point(s): "
                         + ", ".join(str(p) for p in skipped))
    return rep


def check_defining_equations(session: Session) -> CheckReport:
    rep = CheckReport("defining-equations", session.fname)
    for eq in session.result.derived:
        for args in session.plan.points():
            if eq.domain_conditioned and not isinstance(session.verdict(args), InDomain):
                continue
            rep.instances_checked += 1
            lhs, rhs = session.aux(eq.lhs, args), session.aux(eq.rhs, args)
            if not lhs.same(rhs):
                rep.failures.append(Failure(session.inputs(args), str(lhs), str(rhs), eq.name))
    return rep


def check_measure_decrease(session: Session) -> CheckReport:
    rep = CheckReport("measure-decrease", session.fname)
    for args in session.plan.points():
        m = session.measure(args)
        if m is None:
            continue
        for call in recursive_calls(session, args):
            rep.instances_checked += 1
            mc = session.measure(call)
            if mc is None or mc >= m:
                rep.failures.append(Failure(session.inputs(args), str(mc), str(m),
                                            f"call {session.fname}{tuple(render(a) for a in call)}"))
    return rep


def check_exec_equivalence(session: Session) -> CheckReport:
    rep = CheckReport("exec-equivalence", session.fname)
    if session.result.source.non_executable:
        rep.notes.append("non-executable: no executable to compare")
        return rep
    ex, fname = session.executor, session.fname
    for args in session.plan.points():
        rep.instances_checked += 1
        a = list(args)
        wrapper = outcome(lambda: ex.run_wrapper(fname, a))
        if isinstance(session.verdict(args), InDomain):
            logic = Outcome(True, session.l_eval(args))
            sides = [
                ("run", session.run(args)),
                ("fast", outcome(lambda: ex.fast_eval(fname, a))),
                ("wrapper", wrapper),
            ]
            for label, o in sides:
                if not o.same(logic):
                    rep.failures.append(Failure(session.inputs(args), str(o), str(logic), f"{label} vs logic"))
            dom = outcome(lambda: ex.exec_dom(fname, a))
            if not dom.same(Outcome(True, True)):
                rep.failures.append(Failure(session.inputs(args), str(dom), "t", "executable domain"))
        else:
            default = outcome(lambda: ex.default_value(fname, a))
            if not wrapper.same(default):
                rep.failures.append(Failure(session.inputs(args), str(wrapper), str(default), "wrapper off-domain"))
    return rep


def check_signature(session: Session) -> CheckReport:
    rep = CheckReport("signature", session.fname)
    sig = session.result.source.signature
    if sig is None:
        rep.notes.append("no signature declared")
        return rep
    for args in session.plan.points():
        if not all(truthy(PRIMITIVES[p].fn(a)) for p, a in zip(sig.params, args)):
            continue
        rep.instances_checked += 1
        v = session.l_eval(args)
        if not truthy(PRIMITIVES[sig.result].fn(v)):
            rep.failures.append(Failure(session.inputs(args), render(v), sig.result, "result type"))
    return rep


CHECKS: dict[str, Callable[[Session], CheckReport]] = {
    "determinism": check_determinism,
    "stability": check_stability,
    "canonical-measure": check_canonical_measure,
    "defining-equations": check_defining_equations,
    "measure-decrease": check_measure_decrease,
    "exec-equivalence": check_exec_equivalence,
    "signature": check_signature,
}


def run_all_checks(program: Program, fname: str, plan: CheckPlan, *,
                   results: Optional[dict[str, TransformResult]] = None,
                   only: Optional[list[str]] = None, backend: str = "auto") -> list[CheckReport]:
    session = Session(program, fname, plan, results=results, backend=backend)
    return [CHECKS[name](session) for name in (only or list(CHECKS))]


# -- mutations: deliberately broken constructions that the checks must reject ---------------

MUTATIONS = ("index-skip", "base-true", "drop-lifted-call", "default-per-branch")


def _strip_last_site(e: Expr, site: str) -> Expr:
    if isinstance(e, And):
        parts = [_strip_last_site(a, site) for a in e.args]
        sites = [i for i, a in enumerate(parts) if isinstance(a, Call) and a.fn == site]
        if sites and len(parts) > 1:
            del parts[sites[-1]]
        return parts[0] if len(parts) == 1 else And(tuple(parts))
    if isinstance(e, If):
        return If(e.test, _strip_last_site(e.then, site), _strip_last_site(e.else_, site))
    return e


def _leaf_map(e: Expr, leaf: Callable[[Expr], Expr]) -> Expr:
    if isinstance(e, If):
        return If(e.test, _leaf_map(e.then, leaf), _leaf_map(e.else_, leaf))
    return leaf(e)


def mutate(result: TransformResult, kind: str) -> TransformResult:
    """A copy of ``result`` whose indexed definitions are wrong in a specific way."""
    iv = Var(result.index_var)
    fn, dom = result.indexed_fn, result.indexed_dom
    names = result.names
    if kind == "index-skip":
        skip = Prim("-", (iv, IntLit(2)))

        def respace(d: GeneratedDef) -> GeneratedDef:
            body = map_calls(d.body, lambda c, a: Call(c.fn, (skip,) + a[1:])
                             if c.fn in (names.indexed, names.indexed_dom) else Call(c.fn, a))
            return replace(d, body=body)

        return replace(result, indexed_fn=respace(fn), indexed_dom=respace(dom))
    if kind == "base-true":
        return replace(result, indexed_dom=replace(dom, body=If(dom.body.test, TRUE, dom.body.else_)))
    if kind == "drop-lifted-call":
        return replace(result, indexed_dom=replace(
            dom, body=If(dom.body.test, dom.body.then, _strip_last_site(dom.body.else_, names.indexed_dom))))
    if kind == "default-per-branch":
        # base leaves answer differently at index 1 than at larger indices
        at_one = Prim("zp", (Prim("1-", (iv,)),))

        def leaf(e: Expr) -> Expr:
            if any(isinstance(c, Call) and c.fn == names.indexed for c in _calls(e)):
                return e
            return If(at_one, e, Prim("1+", (e,)))

        return replace(result, indexed_fn=replace(fn, body=If(fn.body.test, fn.body.then,
                                                               _leaf_map(fn.body.else_, leaf))))
    raise ValueError(f"unknown mutation {kind!r}")


def _calls(e: Expr) -> list[Call]:
    return [c for c in walk(e) if isinstance(c, Call)]
