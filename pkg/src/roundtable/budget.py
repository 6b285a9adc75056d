"""Search budget accounting; the counter is owned by a single session writer."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import BudgetExhausted


@dataclass
class BudgetCounter:
    initial: int
    remaining: int

    def __init__(self, initial: int):
        if initial < 1:
            raise ValueError("search budget must be at least 1")
        self.initial = initial
        self.remaining = initial

    @property
    def spent(self) -> int:
        return self.initial - self.remaining

    @property
    def exhausted(self) -> bool:
        return self.remaining <= 0

    def consume(self) -> None:
        """Take one search from the budget; raises BudgetExhausted at zero."""
        if self.remaining <= 0:
            raise BudgetExhausted(
                f"search budget of {self.initial} is exhausted"
            )
        self.remaining -= 1

    def copy(self) -> "BudgetCounter":
        dup = BudgetCounter(self.initial)
        dup.remaining = self.remaining
        return dup
