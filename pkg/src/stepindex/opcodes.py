"""Instruction set shared by the compiler and both machine back ends.

Every instruction occupies ``INSTR_WIDTH`` slots: ``op a b c target``.
"""

INSTR_WIDTH = 5

OP_CONST = 0        # a=const
OP_ARG = 1          # a=slot
OP_PRIM = 2         # a=prim b=nargs
OP_ARGP1 = 3        # a=slot b=prim            (unary prim on a parameter)
OP_ARGC = 4         # a=slot b=const c=prim    (param op const)
OP_CARG = 5         # a=const b=slot c=prim    (const op param)
OP_ARGARG = 6       # a=slot b=slot c=prim
OP_JF = 7           # pop; jump if nil
OP_JF_KEEP = 8      # jump keeping nil on the stack, else pop
OP_JT_KEEP = 9      # jump keeping non-nil on the stack, else pop
OP_JMP = 10
OP_ARGP1_JF = 11    # fused test-and-branch forms of the above
OP_ARGC_JF = 12
OP_CARG_JF = 13
OP_ARGARG_JF = 14
OP_CALL = 15        # a=function b=nargs
OP_HOST = 16        # a=host b=nargs
OP_RET = 17
# specialised forms of the hottest fused primitives
OP_DEC = 18         # a=slot        push (1- param)
OP_INC = 19         # a=slot        push (1+ param)
OP_ZP_JF = 20       # a=slot        branch on (zp param)
OP_EQC_JF = 21      # a=slot b=const  branch on (= param const)

OPNAMES = {v: k[3:] for k, v in dict(globals()).items() if k.startswith("OP_")}

# primitive ids, most frequent first
PRIM_ORDER = ["=", "1-", "1+", "zp", "+", "-", "<", "<=", "*", "max", "not", "nfix",
              "equal", "natp", "integerp", "consp", "car", "cdr", "cons"]
(P_EQ, P_DEC, P_INC, P_ZP, P_ADD, P_SUB, P_LT, P_LE, P_MUL, P_MAX, P_NOT, P_NFIX,
 P_EQUAL, P_NATP, P_INTEGERP, P_CONSP, P_CAR, P_CDR, P_CONS) = range(len(PRIM_ORDER))
PRIM_ID = {name: i for i, name in enumerate(PRIM_ORDER)}

TAG_INT = 0
TAG_T = 1
TAG_NIL = 2

ST_DONE = 0
ST_BAIL = 1
ST_SAFETY = 2
ST_HOST = 3
ST_GROW = 4
