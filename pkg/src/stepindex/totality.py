"""Desk-scale check of a ``def::total`` claim.

At every grid point where the totality predicate holds, the point must be in
the logical domain, and each recursive call of the branch taken must again
satisfy the predicate with a strictly smaller measure.
"""

from __future__ import annotations

from typing import Optional, Sequence

from .interp import InDomain
from .syntax import LEXICOGRAPHIC_LESS, NATURAL_LESS, Program, TotalitySpec
from .values import Value, render, truthy
from .verify import CheckPlan, CheckReport, Failure, Session, recursive_calls


def _nat(v: Value) -> int:
    return v if type(v) is int and v > 0 else 0


def lex_less(a: Sequence[Value], b: Sequence[Value]) -> bool:
    """Strict lexicographic order on tuples of naturals (components are nfix'd)."""
    if len(a) != len(b):
        raise ValueError(f"lexicographic comparison of tuples of length {len(a)} and {len(b)}")
    for x, y in zip(a, b):
        x, y = _nat(x), _nat(y)
        if x != y:
            return x < y
    return False


def natural_less(a: Value, b: Value) -> bool:
    return _nat(a) < _nat(b)


def relation_holds(relation: str, a: tuple[Value, ...], b: tuple[Value, ...]) -> bool:
    if relation == LEXICOGRAPHIC_LESS:
        return lex_less(a, b)
    if relation == NATURAL_LESS:
        if len(a) != 1 or len(b) != 1:
            raise ValueError("a natural-number measure has exactly one component")
        return natural_less(a[0], b[0])
    raise ValueError(f"unknown relation {relation!r}")


def _show(m: tuple[Value, ...]) -> str:
    return render(m[0]) if len(m) == 1 else "(" + " ".join(render(v) for v in m) + ")"


def check_total(program: Program, spec: TotalitySpec, plan: CheckPlan, *,
                session: Optional[Session] = None, backend: str = "auto") -> CheckReport:
    s = session if session is not None else Session(program, spec.fname, plan, backend=backend)
    if s.fname != spec.fname:
        raise ValueError(f"session is for {s.fname}, not {spec.fname}")
    rep = CheckReport(f"total:{spec.theorem_name}", spec.fname)
    hosts = s.executor.machine_hosts()

    def holds(args) -> bool:
        return truthy(s.interp.eval_aux(spec.predicate, dict(zip(spec.params, args)), hosts))

    def measure(args) -> tuple[Value, ...]:
        env = dict(zip(spec.params, args))
        return tuple(s.interp.eval_aux(m, env, hosts) for m in spec.measure)

    for args in plan.points():
        if not holds(args):
            continue
        rep.instances_checked += 1
        verdict = s.interp.l_dom(spec.fname, list(args), plan.domain_cap)
        if not isinstance(verdict, InDomain):
            rep.failures.append(Failure(s.inputs(args), str(verdict), "in domain", "predicate without domain"))
        m = measure(args)
        for call in recursive_calls(s, args):
            where = f"call {spec.fname}{tuple(render(a) for a in call)}"
            if not holds(call):
                rep.failures.append(Failure(s.inputs(args), "nil", "t", f"{where}: predicate not preserved"))
            mc = measure(call)
            if not relation_holds(spec.relation, mc, m):
                rep.failures.append(Failure(s.inputs(args), _show(mc), _show(m), f"{where}: measure not smaller"))
    return rep


def check_program_totality(program: Program, plan: CheckPlan, fname: Optional[str] = None, *,
                           backend: str = "auto") -> list[CheckReport]:
    """Every ``def::total`` form in ``program`` (or only those for ``fname``)."""
    sessions: dict[str, Session] = {}
    reports = []
    for spec in program.totality_specs:
        if fname is not None and spec.fname != fname:
            continue
        if spec.fname not in sessions:
            sessions[spec.fname] = Session(program, spec.fname, plan, backend=backend)
        reports.append(check_total(program, spec, plan, session=sessions[spec.fname]))
    return reports
