"""Step-indexed partial functions for a small first-order Lisp."""

from .execution import BIG, ExecConfig, Executor
from .interp import InDomain, Interpreter, NotInDomainUpTo
from .surface import parse_program
from .totality import check_program_totality, check_total
from .transform import transform, transform_program
from .verify import CheckPlan, run_all_checks

__all__ = [
    "BIG", "CheckPlan", "ExecConfig", "Executor", "InDomain", "Interpreter", "NotInDomainUpTo",
    "check_program_totality", "check_total", "parse_program", "run_all_checks", "transform",
    "transform_program",
]
