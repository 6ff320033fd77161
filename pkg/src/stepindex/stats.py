"""Machine-independent cost counters."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class EvalStats:
    call_count: int = 0
    prim_count: int = 0
    max_recursion_depth: int = 0
    domain_checks: int = 0

    @property
    def steps(self) -> int:
        return self.call_count + self.prim_count

    def absorb(self, other: "EvalStats", depth_offset: int = 0) -> None:
        """Add ``other``'s counts; its depths are relative to ``depth_offset``."""
        self.call_count += other.call_count
        self.prim_count += other.prim_count
        self.domain_checks += other.domain_checks
        if other.max_recursion_depth:
            self.max_recursion_depth = max(self.max_recursion_depth,
                                           depth_offset + other.max_recursion_depth)

    def as_dict(self) -> dict[str, int]:
        return {
            "call_count": self.call_count,
            "prim_count": self.prim_count,
            "max_recursion_depth": self.max_recursion_depth,
            "domain_checks": self.domain_checks,
            "steps": self.steps,
        }
