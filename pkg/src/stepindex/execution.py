"""Executable layer: fast path, executable domain, deferred-check indexed run.

For a function ``f`` the generated definitions are used as follows:

``mf``        the source equations run directly (no index, no domain check)
``f-domain``  executable domain, nested values computed by ``mf``
``comp-f``    indexed run; on index exhaustion a bounded domain check decides
              between ``mf`` and the default value
``run``       ``comp-f`` at index ``big``
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import EvaluationError, GuardViolation, NonExecutableError
from .interp import InDomain, Interpreter
from .machine import HostFn
from .stats import EvalStats
from .syntax import Program
from .transform import TransformResult
from .values import Value, from_bool, truthy

BIG = 2**61 - 1
MODES = ("indexed", "fast", "domain", "wrapper")


@dataclass(frozen=True)
class ExecConfig:
    big: int = BIG
    safety_cap: int = 10**7
    domain_cap: int = 4096

    def __post_init__(self):
        if self.big < 1:
            raise ValueError("big must be at least 1")
        if self.safety_cap < 1:
            raise ValueError("safety_cap must be at least 1")
        if self.domain_cap < 0:
            raise ValueError("domain_cap must be non-negative")


class Executor:
    def __init__(self, interp: Interpreter, cfg: ExecConfig = ExecConfig()):
        self.interp = interp
        self.cfg = cfg
        self.machine = interp.machine
        self._hosts = {r.names.in_domain: self._in_domain_host(f) for f, r in interp.results.items()}

    @classmethod
    def from_program(cls, program: Program, cfg: ExecConfig = ExecConfig(), *, backend: str = "auto",
                     memo: bool = False) -> "Executor":
        return cls(Interpreter(program, safety_cap=cfg.safety_cap, backend=backend, memo=memo), cfg)

    def _in_domain_host(self, fname: str) -> HostFn:
        def in_domain(args: list[Value], stats: EvalStats) -> Value:
            stats.domain_checks += 1
            verdict = self.interp.find_witness_depth(fname, args, self.cfg.domain_cap, stats)
            return from_bool(isinstance(verdict, InDomain))
        return in_domain

    def _executable(self, fname: str, args) -> TransformResult:
        r = self.interp.result(fname)
        if r.source.non_executable:
            raise NonExecutableError(fname)
        if len(args) != len(r.params):
            raise EvaluationError(f"{fname} expects {len(r.params)} argument(s), got {len(args)}")
        return r

    def _call(self, name: str, args: list[Value], stats: Optional[EvalStats]) -> Value:
        return self.machine.call(name, args, safety_cap=self.cfg.safety_cap, stats=stats, hosts=self._hosts)

    # the four executables

    def fast_eval(self, fname: str, args, stats: Optional[EvalStats] = None) -> Value:
        r = self._executable(fname, args)
        return self._call(r.names.fast, list(args), stats)

    def exec_dom(self, fname: str, args, stats: Optional[EvalStats] = None) -> bool:
        r = self._executable(fname, args)
        return truthy(self._call(r.names.domain, list(args), stats))

    def comp_eval(self, fname: str, d: int, args, stats: Optional[EvalStats] = None) -> Value:
        r = self._executable(fname, args)
        return self._call(r.names.comp, [d] + list(args), stats)

    def default_value(self, fname: str, args, stats: Optional[EvalStats] = None) -> Value:
        r = self.interp.result(fname)
        env = dict(zip(r.params, args))
        return self.interp.eval_aux(r.default_expr, env, self.machine_hosts(), stats)

    def run(self, fname: str, args, stats: Optional[EvalStats] = None) -> Value:
        """The exported function.

        With indexed execution (the default) this is ``comp-f`` at ``big``.
        Without it, the domain is checked once up front and the fast path runs
        only on in-domain arguments.
        """
        r = self._executable(fname, args)
        if r.source.indexed_execution:
            return self.comp_eval(fname, self.cfg.big, args, stats)
        if not self.exec_dom(fname, args, stats):
            raise GuardViolation(fname, tuple(args))
        return self.fast_eval(fname, args, stats)

    def run_wrapper(self, fname: str, args, stats: Optional[EvalStats] = None) -> Value:
        """Domain pass, then fast path or default value.

        Any evaluation failure during the domain pass (in particular the safety
        cap) counts as "not in the domain".
        """
        self._executable(fname, args)
        st = stats if stats is not None else EvalStats()
        try:
            in_domain = self.exec_dom(fname, args, st)
        except EvaluationError:
            in_domain = False
        if in_domain:
            return self.fast_eval(fname, args, st)
        return self.default_value(fname, args, st)

    def count_steps(self, mode: str, fname: str, args) -> EvalStats:
        st = EvalStats()
        if mode == "indexed":
            self.run(fname, args, st)
        elif mode == "fast":
            self.fast_eval(fname, args, st)
        elif mode == "domain":
            self.exec_dom(fname, args, st)
        elif mode == "wrapper":
            self.run_wrapper(fname, args, st)
        else:
            raise ValueError(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}")
        return st

    # host bindings for equations that mention executable names

    def machine_hosts(self) -> dict[str, HostFn]:
        return self.interp.machine_hosts(self._hosts)

    def exec_hosts(self) -> dict[str, HostFn]:
        hosts = self.machine_hosts()
        hosts.update(self._hosts)
        hosts["big"] = lambda a, st: self.cfg.big
        for fname, r in self.interp.results.items():
            hosts[r.names.fn] = lambda a, st, f=fname: self.run(f, a, st)
        return hosts
