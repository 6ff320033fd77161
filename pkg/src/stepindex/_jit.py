"""Numba kernel for the bytecode machine (integer/boolean fast path).

The kernel mirrors :func:`stepindex.machine.Machine._run_python` instruction for
instruction.  Anything it cannot represent -- values outside +/-2**62, type
errors, pairs -- makes it return ``BAIL`` and the caller reruns the whole
evaluation on the Python machine.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .opcodes import (
    INSTR_WIDTH as W,
    OP_ARG, OP_ARGARG, OP_ARGARG_JF, OP_ARGC, OP_ARGC_JF, OP_ARGP1, OP_ARGP1_JF,
    OP_CALL, OP_CARG, OP_CARG_JF, OP_CONST, OP_HOST, OP_JF, OP_JF_KEEP, OP_JMP,
    OP_JT_KEEP, OP_PRIM, OP_RET, OP_DEC, OP_INC, OP_ZP_JF, OP_EQC_JF,
    P_ADD, P_CAR, P_CDR, P_CONSP, P_DEC, P_EQ, P_EQUAL, P_INC, P_INTEGERP, P_LE,
    P_LT, P_MAX, P_MUL, P_NATP, P_NFIX, P_NOT, P_SUB, P_ZP,
    ST_BAIL, ST_DONE, ST_GROW, ST_HOST, ST_SAFETY,
    TAG_INT, TAG_NIL, TAG_T,
)

LIMIT = 1 << 62
MUL_LIMIT = 1 << 31


@njit(inline="always", cache=True)
def _apply(p, av, at, bv, bt):
    # returns (bail, value, tag)
    if p == P_EQ:
        if at != TAG_INT or bt != TAG_INT:
            return True, 0, TAG_NIL
        return False, 0, TAG_T if av == bv else TAG_NIL
    if p == P_DEC:
        if at != TAG_INT or av - 1 <= -LIMIT:
            return True, 0, TAG_NIL
        return False, av - 1, TAG_INT
    if p == P_INC:
        if at != TAG_INT or av + 1 >= LIMIT:
            return True, 0, TAG_NIL
        return False, av + 1, TAG_INT
    if p == P_ZP:
        return False, 0, TAG_T if (at != TAG_INT or av <= 0) else TAG_NIL
    if p == P_ADD or p == P_SUB:
        if at != TAG_INT or bt != TAG_INT:
            return True, 0, TAG_NIL
        r = av + bv if p == P_ADD else av - bv
        if r >= LIMIT or r <= -LIMIT:
            return True, 0, TAG_NIL
        return False, r, TAG_INT
    if p == P_LT or p == P_LE:
        if at != TAG_INT or bt != TAG_INT:
            return True, 0, TAG_NIL
        ok = av < bv if p == P_LT else av <= bv
        return False, 0, TAG_T if ok else TAG_NIL
    if p == P_MUL:
        if at != TAG_INT or bt != TAG_INT or abs(av) >= MUL_LIMIT or abs(bv) >= MUL_LIMIT:
            return True, 0, TAG_NIL
        return False, av * bv, TAG_INT
    if p == P_MAX:
        if at != TAG_INT or bt != TAG_INT:
            return True, 0, TAG_NIL
        return False, av if av >= bv else bv, TAG_INT
    if p == P_NOT:
        return False, 0, TAG_T if at == TAG_NIL else TAG_NIL
    if p == P_NFIX:
        return False, av if (at == TAG_INT and av >= 0) else 0, TAG_INT
    if p == P_EQUAL:
        return False, 0, TAG_T if (at == bt and (at != TAG_INT or av == bv)) else TAG_NIL
    if p == P_NATP:
        return False, 0, TAG_T if (at == TAG_INT and av >= 0) else TAG_NIL
    if p == P_INTEGERP:
        return False, 0, TAG_T if at == TAG_INT else TAG_NIL
    if p == P_CONSP:
        return False, 0, TAG_NIL
    if p == P_CAR or p == P_CDR:
        if at == TAG_NIL:
            return False, 0, TAG_NIL
        return True, 0, TAG_NIL
    return True, 0, TAG_NIL


@njit(cache=True)
def run_kernel(code, entry, maxstack, cvals, ctags, vals, tags, fpc, fbp, regs, safety_cap):
    pc = regs[0]
    sp = regs[1]
    fp = regs[2]
    bp = regs[3]
    calls = regs[4]
    prims = regs[5]
    maxd = regs[6]
    status = ST_DONE
    # one comparison per call covers the safety cap and both growth limits
    flimit = min(safety_cap, fpc.shape[0] - 1)
    smax = 1
    for i in range(maxstack.shape[0]):
        smax = max(smax, maxstack[i] + 1)
    slimit = vals.shape[0]
    while True:
        op = code[pc]
        if op == OP_DEC:
            prims += 1
            s = bp + code[pc + 1]
            v = vals[s] - 1
            if tags[s] != TAG_INT or v <= -LIMIT:
                status = ST_BAIL
                break
            vals[sp] = v
            tags[sp] = TAG_INT
            sp += 1
            pc += W
        elif op == OP_EQC_JF:
            prims += 1
            s = bp + code[pc + 1]
            if tags[s] != TAG_INT:
                status = ST_BAIL
                break
            pc = pc + W if vals[s] == cvals[code[pc + 2]] else code[pc + 4]
        elif op == OP_ZP_JF:
            prims += 1
            s = bp + code[pc + 1]
            pc = code[pc + 4] if (tags[s] == TAG_INT and vals[s] > 0) else pc + W
        elif op == OP_INC:
            prims += 1
            s = bp + code[pc + 1]
            v = vals[s] + 1
            if tags[s] != TAG_INT or v >= LIMIT:
                status = ST_BAIL
                break
            vals[sp] = v
            tags[sp] = TAG_INT
            sp += 1
            pc += W
        elif op == OP_ARGC_JF:
            prims += 1
            s = bp + code[pc + 1]
            c = code[pc + 2]
            bail, v, t = _apply(code[pc + 3], vals[s], tags[s], cvals[c], ctags[c])
            if bail:
                status = ST_BAIL
                break
            pc = code[pc + 4] if t == TAG_NIL else pc + W
        elif op == OP_ARGP1:
            prims += 1
            s = bp + code[pc + 1]
            bail, v, t = _apply(code[pc + 2], vals[s], tags[s], 0, TAG_NIL)
            if bail:
                status = ST_BAIL
                break
            vals[sp] = v
            tags[sp] = t
            sp += 1
            pc += W
        elif op == OP_CALL:
            callee = code[pc + 1]
            if fp + 2 > flimit or sp + smax >= slimit:
                status = ST_SAFETY if fp + 2 > safety_cap else ST_GROW
                break
            calls += 1
            fp += 1
            if fp + 1 > maxd:
                maxd = fp + 1
            fpc[fp] = pc + W
            fbp[fp] = bp
            bp = sp - code[pc + 2]
            pc = entry[callee]
        elif op == OP_RET:
            rv = vals[sp - 1]
            rt = tags[sp - 1]
            if fp == 0:
                vals[0] = rv
                tags[0] = rt
                sp = 1
                status = ST_DONE
                break
            pc = fpc[fp]
            sp = bp
            bp = fbp[fp]
            fp -= 1
            vals[sp] = rv
            tags[sp] = rt
            sp += 1
        elif op == OP_ARG:
            s = bp + code[pc + 1]
            vals[sp] = vals[s]
            tags[sp] = tags[s]
            sp += 1
            pc += W
        elif op == OP_CONST:
            c = code[pc + 1]
            vals[sp] = cvals[c]
            tags[sp] = ctags[c]
            sp += 1
            pc += W
        elif op == OP_ARGP1_JF:
            prims += 1
            s = bp + code[pc + 1]
            bail, v, t = _apply(code[pc + 2], vals[s], tags[s], 0, TAG_NIL)
            if bail:
                status = ST_BAIL
                break
            pc = code[pc + 4] if t == TAG_NIL else pc + W
        elif op == OP_ARGC:
            prims += 1
            s = bp + code[pc + 1]
            c = code[pc + 2]
            bail, v, t = _apply(code[pc + 3], vals[s], tags[s], cvals[c], ctags[c])
            if bail:
                status = ST_BAIL
                break
            vals[sp] = v
            tags[sp] = t
            sp += 1
            pc += W
        elif op == OP_CARG or op == OP_CARG_JF:
            prims += 1
            c = code[pc + 1]
            s = bp + code[pc + 2]
            bail, v, t = _apply(code[pc + 3], cvals[c], ctags[c], vals[s], tags[s])
            if bail:
                status = ST_BAIL
                break
            if op == OP_CARG:
                vals[sp] = v
                tags[sp] = t
                sp += 1
                pc += W
            else:
                pc = code[pc + 4] if t == TAG_NIL else pc + W
        elif op == OP_ARGARG or op == OP_ARGARG_JF:
            prims += 1
            s1 = bp + code[pc + 1]
            s2 = bp + code[pc + 2]
            bail, v, t = _apply(code[pc + 3], vals[s1], tags[s1], vals[s2], tags[s2])
            if bail:
                status = ST_BAIL
                break
            if op == OP_ARGARG:
                vals[sp] = v
                tags[sp] = t
                sp += 1
                pc += W
            else:
                pc = code[pc + 4] if t == TAG_NIL else pc + W
        elif op == OP_PRIM:
            prims += 1
            n = code[pc + 2]
            if n == 1:
                bail, v, t = _apply(code[pc + 1], vals[sp - 1], tags[sp - 1], 0, TAG_NIL)
            else:
                bail, v, t = _apply(code[pc + 1], vals[sp - 2], tags[sp - 2], vals[sp - 1], tags[sp - 1])
            if bail:
                status = ST_BAIL
                break
            sp -= n
            vals[sp] = v
            tags[sp] = t
            sp += 1
            pc += W
        elif op == OP_JF:
            sp -= 1
            pc = code[pc + 4] if tags[sp] == TAG_NIL else pc + W
        elif op == OP_JMP:
            pc = code[pc + 4]
        elif op == OP_JF_KEEP:
            if tags[sp - 1] == TAG_NIL:
                pc = code[pc + 4]
            else:
                sp -= 1
                pc += W
        elif op == OP_JT_KEEP:
            if tags[sp - 1] != TAG_NIL:
                pc = code[pc + 4]
            else:
                sp -= 1
                pc += W
        elif op == OP_HOST:
            status = ST_HOST
            break
        else:
            status = ST_BAIL
            break
    regs[0] = pc
    regs[1] = sp
    regs[2] = fp
    regs[3] = bp
    regs[4] = calls
    regs[5] = prims
    regs[6] = maxd
    return status


def warm_up() -> None:
    """Compile the kernel (or load it from the on-disk cache)."""
    code = np.array([OP_CONST, 0, 0, 0, 0, OP_RET, 0, 0, 0, 0], dtype=np.int64)
    regs = np.zeros(8, dtype=np.int64)
    run_kernel(code, np.zeros(1, np.int64), np.full(1, 2, np.int64), np.zeros(1, np.int64),
               np.zeros(1, np.uint8), np.zeros(8, np.int64), np.zeros(8, np.uint8),
               np.zeros(8, np.int64), np.zeros(8, np.int64), regs, 10)
