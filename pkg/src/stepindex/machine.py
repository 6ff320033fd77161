"""Bytecode compiler and stack machine for generated definitions.

Definitions are compiled once into a flat instruction array.  Two back ends
execute it with identical semantics and identical cost counters:

* a Python loop over arbitrary values (the reference back end), and
* a numba kernel for integer/boolean programs, used when available; it hands
  control back to Python for host calls and array growth, and bails out to the
  Python back end whenever a value leaves its representable range.

Calls to names that are not compiled definitions become *host calls*, served
by Python callables supplied per evaluation.
"""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .errors import DynamicTypeError, EvaluationError, RecursionSafetyCap
from .opcodes import (
    INSTR_WIDTH as W,
    OP_ARG, OP_ARGARG, OP_ARGARG_JF, OP_ARGC, OP_ARGC_JF, OP_ARGP1, OP_ARGP1_JF,
    OP_CALL, OP_CARG, OP_CARG_JF, OP_CONST, OP_HOST, OP_JF, OP_JF_KEEP, OP_JMP,
    OP_JT_KEEP, OP_PRIM, OP_RET, OP_DEC, OP_INC, OP_ZP_JF, OP_EQC_JF,
    OPNAMES, PRIM_ID, PRIM_ORDER, P_DEC, P_EQ, P_INC, P_ZP,
    ST_BAIL, ST_DONE, ST_GROW, ST_HOST, ST_SAFETY, TAG_INT, TAG_NIL, TAG_T,
)
from .stats import EvalStats
from .syntax import (
    And, BoolLit, Call, Expr, GeneratedDef, If, IntLit, NilLit, Or, Prim, SymLit, Var,
)
from .values import PRIMITIVES, Sym, Value

HostFn = Callable[[list, EvalStats], Value]

_LIMIT = 1 << 62
# specialised opcodes expressed in their generic fused form: b -> (op, b, c)
_SPECIAL = {
    OP_DEC: lambda b: (OP_ARGP1, P_DEC, 0),
    OP_INC: lambda b: (OP_ARGP1, P_INC, 0),
    OP_ZP_JF: lambda b: (OP_ARGP1_JF, P_ZP, 0),
    OP_EQC_JF: lambda b: (OP_ARGC_JF, b, P_EQ),
}
_FUSABLE_CONST = (IntLit, BoolLit, NilLit)


def _const_value(e: Expr) -> Value:
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, BoolLit):
        return True if e.value else None
    if isinstance(e, NilLit):
        return None
    if isinstance(e, SymLit):
        return Sym(e.name)
    raise TypeError(e)


class _FunctionCompiler:
    def __init__(self, owner: "Compiler", d: GeneratedDef):
        self.o = owner
        self.d = d
        self.slots = {p: i for i, p in enumerate(d.params)}
        self.height = len(d.params)
        self.max_height = self.height

    # stack bookkeeping
    def push(self, n: int = 1) -> None:
        self.height += n
        self.max_height = max(self.max_height, self.height)

    def pop(self, n: int = 1) -> None:
        self.height -= n

    def emit(self, op: int, a: int = 0, b: int = 0, c: int = 0, t: int = 0, path: str = "") -> int:
        at = len(self.o.code)
        self.o.code.extend((op, a, b, c, t))
        if path:
            self.o.paths[at] = (self.d.name, path)
        return at

    def patch(self, at: int) -> None:
        self.o.code[at + 4] = len(self.o.code)

    def _operand(self, e: Expr):
        if isinstance(e, Var):
            return ("arg", self.slots[e.name])
        if isinstance(e, _FUSABLE_CONST):
            return ("const", self.o.const(_const_value(e)))
        return None

    def _fused(self, e: Expr, path: str, jump: bool) -> Optional[int]:
        """Emit a fused form of primitive ``e`` if its operands allow it."""
        if not isinstance(e, Prim):
            return None
        p = PRIM_ID[e.op]
        ops = [self._operand(a) for a in e.args]
        if any(o is None for o in ops):
            return None
        if len(ops) == 1 and ops[0][0] == "arg":
            special = {(P_DEC, False): OP_DEC, (P_INC, False): OP_INC, (P_ZP, True): OP_ZP_JF}.get((p, jump))
            if special is not None:
                return self.emit(special, ops[0][1], path=path)
            return self.emit(OP_ARGP1_JF if jump else OP_ARGP1, ops[0][1], p, path=path)
        if len(ops) == 2:
            (k1, v1), (k2, v2) = ops
            if k1 == "arg" and k2 == "const":
                if jump and p == P_EQ and type(self.o.consts[v2]) is int:
                    return self.emit(OP_EQC_JF, v1, v2, path=path)
                return self.emit(OP_ARGC_JF if jump else OP_ARGC, v1, v2, p, path=path)
            if k1 == "const" and k2 == "arg":
                return self.emit(OP_CARG_JF if jump else OP_CARG, v1, v2, p, path=path)
            if k1 == "arg" and k2 == "arg":
                return self.emit(OP_ARGARG_JF if jump else OP_ARGARG, v1, v2, p, path=path)
        return None

    def value(self, e: Expr, path: str) -> None:
        if isinstance(e, (IntLit, BoolLit, NilLit, SymLit)):
            self.emit(OP_CONST, self.o.const(_const_value(e)))
            self.push()
        elif isinstance(e, Var):
            self.emit(OP_ARG, self.slots[e.name])
            self.push()
        elif isinstance(e, Prim):
            if self._fused(e, path, jump=False) is not None:
                self.push()
                return
            for i, a in enumerate(e.args):
                self.value(a, f"{path}.{i + 1}")
            self.emit(OP_PRIM, PRIM_ID[e.op], len(e.args), path=path)
            self.pop(len(e.args))
            self.push()
        elif isinstance(e, Call):
            for i, a in enumerate(e.args):
                self.value(a, f"{path}.{i + 1}")
            if e.fn in self.o.index:
                self.emit(OP_CALL, self.o.index[e.fn], len(e.args), path=path)
            else:
                self.emit(OP_HOST, self.o.host(e.fn), len(e.args), path=path)
            self.pop(len(e.args))
            self.push()
        elif isinstance(e, If):
            j_else = self.jump_if_false(e.test, path + ".test")
            h = self.height
            self.value(e.then, path + ".then")
            j_end = self.emit(OP_JMP)
            self.patch(j_else)
            self.height = h
            self.value(e.else_, path + ".else")
            self.patch(j_end)
        elif isinstance(e, (And, Or)):
            if not e.args:
                self.emit(OP_CONST, self.o.const(True if isinstance(e, And) else None))
                self.push()
                return
            jumps = []
            kind = OP_JF_KEEP if isinstance(e, And) else OP_JT_KEEP
            for i, a in enumerate(e.args):
                self.value(a, f"{path}.{i + 1}")
                if i < len(e.args) - 1:
                    jumps.append(self.emit(kind))
                    self.pop()
            for j in jumps:
                self.patch(j)
        else:
            raise TypeError(f"cannot compile {e!r}")

    def jump_if_false(self, test: Expr, path: str) -> int:
        at = self._fused(test, path, jump=True)
        if at is not None:
            return at
        self.value(test, path)
        self.pop()
        return self.emit(OP_JF)

    def tail(self, e: Expr, path: str) -> None:
        if isinstance(e, If):
            j_else = self.jump_if_false(e.test, path + ".test")
            h = self.height
            self.tail(e.then, path + ".then")
            self.patch(j_else)
            self.height = h
            self.tail(e.else_, path + ".else")
        else:
            self.value(e, path)
            self.emit(OP_RET)
            self.pop()


class Compiler:
    def __init__(self, defs: Sequence[GeneratedDef]):
        self.defs = list(defs)
        self.index = {d.name: i for i, d in enumerate(self.defs)}
        if len(self.index) != len(self.defs):
            raise ValueError("duplicate generated definition names")
        self.code: list[int] = []
        self.consts: list[Value] = []
        self._const_ix: dict = {}
        self.hosts: list[str] = []
        self.paths: dict[int, tuple[str, str]] = {}
        self.entry: list[int] = []
        self.maxstack: list[int] = []

    def const(self, v: Value) -> int:
        key = (type(v), v)
        if key not in self._const_ix:
            self._const_ix[key] = len(self.consts)
            self.consts.append(v)
        return self._const_ix[key]

    def host(self, name: str) -> int:
        if name not in self.hosts:
            self.hosts.append(name)
        return self.hosts.index(name)

    def compile(self) -> "Code":
        for d in self.defs:
            self.entry.append(len(self.code))
            fc = _FunctionCompiler(self, d)
            fc.tail(d.body, "body")
            self.maxstack.append(fc.max_height + 1)
        return Code(
            code=self.code,
            entry=self.entry,
            maxstack=self.maxstack,
            consts=self.consts,
            hosts=self.hosts,
            names=[d.name for d in self.defs],
            nparams=[len(d.params) for d in self.defs],
            paths=self.paths,
        )


@dataclass
class Code:
    code: list[int]
    entry: list[int]
    maxstack: list[int]
    consts: list[Value]
    hosts: list[str]
    names: list[str]
    nparams: list[int]
    paths: dict[int, tuple[str, str]] = field(default_factory=dict)

    def disassemble(self) -> str:
        lines = []
        starts = {e: n for n, e in zip(self.names, self.entry)}
        for pc in range(0, len(self.code), W):
            if pc in starts:
                lines.append(f"{starts[pc]}:")
            op, a, b, c, t = self.code[pc:pc + W]
            lines.append(f"  {pc:5d} {OPNAMES[op]:<10} {a} {b} {c} {t}")
        return "\n".join(lines)


def _encodable(v: Value) -> bool:
    if v is True or v is None:
        return True
    return type(v) is int and -_LIMIT < v < _LIMIT


def _numba_available() -> bool:
    if os.environ.get("STEPINDEX_BACKEND", "").lower() == "python":
        return False
    try:
        import numba  # noqa: F401
    except ImportError:  # pragma: no cover - numba is a declared dependency
        return False
    return True


class _Buffers:
    __slots__ = ("vals", "tags", "fpc", "fbp", "regs")

    def __init__(self, np, slots: int = 1 << 12, frames: int = 1 << 10):
        self.vals = np.zeros(slots, dtype=np.int64)
        self.tags = np.zeros(slots, dtype=np.uint8)
        self.fpc = np.zeros(frames, dtype=np.int64)
        self.fbp = np.zeros(frames, dtype=np.int64)
        self.regs = np.zeros(8, dtype=np.int64)


class Machine:
    """Executes compiled generated definitions.

    ``backend`` is ``"auto"`` (numba when the program and arguments allow it),
    ``"python"`` or ``"numba"`` (numba required; still bails to Python on
    values it cannot represent).
    """

    _KEEP_SLOTS = 1 << 16

    def __init__(self, defs: Iterable[GeneratedDef], backend: str = "auto"):
        self.code = Compiler(list(defs)).compile()
        self.index = {n: i for i, n in enumerate(self.code.names)}
        if backend not in ("auto", "python", "numba"):
            raise ValueError(f"unknown backend {backend!r}")
        self.backend = backend
        self._local = threading.local()
        self._np_code = None
        self.jit_eligible = all(_encodable(c) for c in self.code.consts) and all(
            self.code.code[pc] != OP_PRIM or self.code.code[pc + 1] != PRIM_ID["cons"]
            for pc in range(0, len(self.code.code), W)
        )
        if backend == "numba" and not _numba_available():
            raise RuntimeError("numba back end requested but unavailable")
        self.use_jit = self.jit_eligible and backend != "python" and _numba_available()
        if self.use_jit:
            self._prepare_jit()

    def has(self, name: str) -> bool:
        return name in self.index

    # -- public entry --------------------------------------------------------

    def call(
        self,
        name: str,
        args: Sequence[Value],
        *,
        safety_cap: int,
        stats: Optional[EvalStats] = None,
        hosts: Optional[Mapping[str, HostFn]] = None,
    ) -> Value:
        try:
            fn = self.index[name]
        except KeyError:
            raise EvaluationError(f"unknown function {name}") from None
        if len(args) != self.code.nparams[fn]:
            raise EvaluationError(f"{name} expects {self.code.nparams[fn]} argument(s), got {len(args)}")
        if safety_cap < 1:
            raise RecursionSafetyCap(safety_cap, name)
        host_fns = [self._host(hosts, h) for h in self.code.hosts]
        local = EvalStats()
        try:
            if self.use_jit and all(_encodable(a) for a in args):
                done, result = self._run_jit(fn, list(args), safety_cap, local, host_fns)
                if done:
                    return result
                local = EvalStats()
            return self._run_python(fn, list(args), safety_cap, local, host_fns)
        finally:
            if stats is not None:
                stats.absorb(local)

    def _host(self, hosts: Optional[Mapping[str, HostFn]], name: str) -> HostFn:
        if hosts is not None and name in hosts:
            return hosts[name]

        def missing(args, stats):
            raise EvaluationError(f"no host function bound for {name}")

        return missing

    # -- python back end ------------------------------------------------------

    def _type_error(self, pc: int, err: DynamicTypeError) -> DynamicTypeError:
        fname, path = self.code.paths.get(pc, ("?", "?"))
        return DynamicTypeError(err.detail, f"{fname}:{path}")

    def _run_python(self, fn: int, args: list, cap: int, stats: EvalStats, hosts: list[HostFn]) -> Value:
        code = self.code.code
        entry = self.code.entry
        consts = self.code.consts
        pfuns = [PRIMITIVES[name].fn for name in PRIM_ORDER]
        stack = args
        frames: list[tuple[int, int]] = []
        bp = 0
        pc = entry[fn]
        depth = 1
        calls = 1
        prims = 0
        maxd = 1
        in_host = False
        try:
            while True:
                op = code[pc]
                if op == OP_ARG:
                    stack.append(stack[bp + code[pc + 1]])
                    pc += W
                elif op == OP_CONST:
                    stack.append(consts[code[pc + 1]])
                    pc += W
                elif op == OP_CALL:
                    if depth + 1 > cap:
                        raise RecursionSafetyCap(cap, self.code.names[code[pc + 1]])
                    calls += 1
                    depth += 1
                    if depth > maxd:
                        maxd = depth
                    frames.append((pc + W, bp))
                    bp = len(stack) - code[pc + 2]
                    pc = entry[code[pc + 1]]
                elif op == OP_RET:
                    v = stack[-1]
                    if not frames:
                        result = v
                        break
                    pc, obp = frames.pop()
                    del stack[bp:]
                    stack.append(v)
                    bp = obp
                    depth -= 1
                elif op == OP_JF:
                    v = stack.pop()
                    pc = code[pc + 4] if (v is None or v is False) else pc + W
                elif op == OP_JMP:
                    pc = code[pc + 4]
                elif op == OP_JF_KEEP:
                    v = stack[-1]
                    if v is None or v is False:
                        pc = code[pc + 4]
                    else:
                        stack.pop()
                        pc += W
                elif op == OP_JT_KEEP:
                    v = stack[-1]
                    if not (v is None or v is False):
                        pc = code[pc + 4]
                    else:
                        stack.pop()
                        pc += W
                elif op == OP_HOST:
                    n = code[pc + 2]
                    hargs = stack[len(stack) - n:] if n else []
                    del stack[len(stack) - n:]
                    sub = EvalStats()
                    in_host = True
                    stack.append(hosts[code[pc + 1]](hargs, sub))
                    in_host = False
                    calls += sub.call_count
                    prims += sub.prim_count
                    stats.domain_checks += sub.domain_checks
                    if sub.max_recursion_depth and depth + sub.max_recursion_depth > maxd:
                        maxd = depth + sub.max_recursion_depth
                    pc += W
                else:
                    prims += 1
                    a = code[pc + 1]
                    b = code[pc + 2]
                    c = code[pc + 3]
                    if op in _SPECIAL:
                        op, b, c = _SPECIAL[op](b)
                    if op == OP_PRIM:
                        if b == 1:
                            v = pfuns[a](stack.pop())
                        else:
                            y = stack.pop()
                            v = pfuns[a](stack.pop(), y)
                        stack.append(v)
                        pc += W
                        continue
                    if op == OP_ARGP1 or op == OP_ARGP1_JF:
                        v = pfuns[b](stack[bp + a])
                    elif op == OP_ARGC or op == OP_ARGC_JF:
                        v = pfuns[c](stack[bp + a], consts[b])
                    elif op == OP_CARG or op == OP_CARG_JF:
                        v = pfuns[c](consts[a], stack[bp + b])
                    elif op == OP_ARGARG or op == OP_ARGARG_JF:
                        v = pfuns[c](stack[bp + a], stack[bp + b])
                    else:  # pragma: no cover - compiler never emits other ops
                        raise EvaluationError(f"bad opcode {op}")
                    if op in (OP_ARGP1, OP_ARGC, OP_CARG, OP_ARGARG):
                        stack.append(v)
                        pc += W
                    else:
                        pc = code[pc + 4] if (v is None or v is False) else pc + W
        except DynamicTypeError as err:
            if in_host:
                raise
            raise self._type_error(pc, err) from None
        finally:
            stats.call_count += calls
            stats.prim_count += prims
            stats.max_recursion_depth = max(stats.max_recursion_depth, maxd)
        return result

    # -- numba back end ----------------------------------------------------------

    def _prepare_jit(self) -> None:
        import numpy as np

        from . import _jit

        self._np = np
        self._kernel = _jit.run_kernel
        c = self.code
        self._np_code = np.array(c.code, dtype=np.int64)
        self._np_entry = np.array(c.entry, dtype=np.int64)
        self._np_maxstack = np.array(c.maxstack, dtype=np.int64)
        self._np_cvals = np.array([v if type(v) is int else 0 for v in c.consts] or [0], dtype=np.int64)
        self._np_ctags = np.array(
            [TAG_INT if type(v) is int else (TAG_T if v is True else TAG_NIL) for v in c.consts] or [TAG_NIL],
            dtype=np.uint8,
        )

    def _acquire(self) -> _Buffers:
        pool = getattr(self._local, "pool", None)
        if pool is None:
            pool = self._local.pool = []
        return pool.pop() if pool else _Buffers(self._np)

    def _release(self, buf: _Buffers) -> None:
        if buf.vals.shape[0] <= self._KEEP_SLOTS and buf.fpc.shape[0] <= self._KEEP_SLOTS:
            self._local.pool.append(buf)

    def _grow(self, buf: _Buffers, need_slots: int, need_frames: int) -> None:
        np = self._np
        if need_slots >= buf.vals.shape[0]:
            n = max(need_slots + 1, 2 * buf.vals.shape[0])
            vals = np.zeros(n, dtype=np.int64)
            vals[: buf.vals.shape[0]] = buf.vals
            tags = np.zeros(n, dtype=np.uint8)
            tags[: buf.tags.shape[0]] = buf.tags
            buf.vals, buf.tags = vals, tags
        if need_frames >= buf.fpc.shape[0]:
            n = max(need_frames + 1, 2 * buf.fpc.shape[0])
            fpc = np.zeros(n, dtype=np.int64)
            fpc[: buf.fpc.shape[0]] = buf.fpc
            fbp = np.zeros(n, dtype=np.int64)
            fbp[: buf.fbp.shape[0]] = buf.fbp
            buf.fpc, buf.fbp = fpc, fbp

    @staticmethod
    def _decode(v: int, t: int) -> Value:
        if t == TAG_INT:
            return int(v)
        return True if t == TAG_T else None

    def _run_jit(self, fn: int, args: list, cap: int, stats: EvalStats, hosts: list[HostFn]):
        buf = self._acquire()
        try:
            n = len(args)
            self._grow(buf, n + self.code.maxstack[fn] + 1, 2)
            for i, a in enumerate(args):
                if type(a) is int:
                    buf.vals[i], buf.tags[i] = a, TAG_INT
                else:
                    buf.vals[i], buf.tags[i] = 0, (TAG_T if a is True else TAG_NIL)
            regs = buf.regs
            regs[:] = 0
            regs[0] = self.code.entry[fn]
            regs[1] = n
            regs[4] = 1
            regs[6] = 1
            code = self._np_code
            while True:
                status = self._kernel(code, self._np_entry, self._np_maxstack, self._np_cvals, self._np_ctags,
                                      buf.vals, buf.tags, buf.fpc, buf.fbp, regs, cap)
                if status == ST_DONE:
                    result = self._decode(buf.vals[0], buf.tags[0])
                    break
                if status == ST_BAIL:
                    return False, None
                if status == ST_SAFETY:
                    self._record(stats, regs)
                    raise RecursionSafetyCap(cap, self.code.names[self.code.code[int(regs[0]) + 1]])
                if status == ST_GROW:
                    pc = int(regs[0])
                    self._grow(buf, int(regs[1]) + max(self.code.maxstack) + 2, int(regs[2]) + 3)
                    continue
                if status == ST_HOST:
                    pc = int(regs[0])
                    h = self.code.code[pc + 1]
                    k = self.code.code[pc + 2]
                    sp = int(regs[1])
                    hargs = [self._decode(buf.vals[i], buf.tags[i]) for i in range(sp - k, sp)]
                    sub = EvalStats()
                    try:
                        v = hosts[h](hargs, sub)
                    except BaseException:
                        self._record(stats, regs)
                        raise
                    if not _encodable(v):
                        return False, None
                    sp -= k
                    if type(v) is int:
                        buf.vals[sp], buf.tags[sp] = v, TAG_INT
                    else:
                        buf.vals[sp], buf.tags[sp] = 0, (TAG_T if v is True else TAG_NIL)
                    regs[1] = sp + 1
                    regs[0] = pc + W
                    regs[4] += sub.call_count
                    regs[5] += sub.prim_count
                    stats.domain_checks += sub.domain_checks
                    depth = int(regs[2]) + 1
                    if sub.max_recursion_depth:
                        regs[6] = max(int(regs[6]), depth + sub.max_recursion_depth)
                    continue
                raise EvaluationError(f"unexpected machine status {status}")  # pragma: no cover
            self._record(stats, regs)
            return True, result
        finally:
            self._release(buf)

    @staticmethod
    def _record(stats: EvalStats, regs) -> None:
        stats.call_count += int(regs[4])
        stats.prim_count += int(regs[5])
        stats.max_recursion_depth = max(stats.max_recursion_depth, int(regs[6]))
