"""Symbol identities used by every expression in the package.

Four disjoint families exist: state coordinates, input derivatives
``u_{j,i}`` (the j-th time derivative of input i), output derivatives
``y_i^(d)`` and the time symbol ``t``.  The ordering key fixes the monomial
order: states first, then output derivatives, then input derivatives, then
time.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

STATE = "x"
OUTPUT = "y"
INPUT = "u"
TIME = "t"

_KIND_RANK = {STATE: 0, OUTPUT: 1, INPUT: 2, TIME: 3}

RESERVED_NAME = re.compile(r"^(d\d*)?[yu]\d+$|^t$")


def _derivative_name(base: str, index: int, order: int) -> str:
    if order == 0:
        return f"{base}{index}"
    if order == 1:
        return f"d{base}{index}"
    return f"d{order}{base}{index}"


@dataclass(frozen=True)
class Sym:
    kind: str
    index: int = 0
    order: int = 0
    name: str = ""

    @property
    def key(self) -> tuple[int, int, int]:
        if self.kind == STATE:
            return (0, self.index, 0)
        return (_KIND_RANK[self.kind], self.order, self.index)

    def __lt__(self, other: "Sym") -> bool:
        return self.key < other.key

    def __str__(self) -> str:
        return self.name

    def __repr__(self) -> str:
        return f"Sym({self.name})"


def state(index: int, name: str | None = None) -> Sym:
    """State coordinate ``x_index`` (1-based)."""
    return Sym(STATE, index, 0, name or f"x{index}")


def output(index: int, order: int = 0) -> Sym:
    """Output derivative ``y_index^(order)``."""
    return Sym(OUTPUT, index, order, _derivative_name("y", index, order))


def input_(index: int, order: int = 0) -> Sym:
    """Input derivative ``u_{order,index}``."""
    return Sym(INPUT, index, order, _derivative_name("u", index, order))


TIME_SYM = Sym(TIME, 0, 0, "t")


def output_stack(p: int, k: int) -> list[Sym]:
    """Symbols of the stacked output vector (y, y', ..., y^(k)), block by order."""
    return [output(i, d) for d in range(k + 1) for i in range(1, p + 1)]


def input_family(m: int, order: int) -> list[Sym]:
    return [input_(i, order) for i in range(1, m + 1)]
