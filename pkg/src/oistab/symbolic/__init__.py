"""Exact computer-algebra core."""

from .matrix import (
    RankWitness,
    SymMatrix,
    constant_minor_selection,
    det,
    generic_rank,
    inverse,
    minor,
    solve_annihilator,
    witness_is_valid,
)
from .poly import Polynomial, format_polynomial
from .rational import RationalFn, substitute
from .squarefree import reduced_numerator, squarefree_factors
from .symbols import (
    INPUT,
    OUTPUT,
    STATE,
    TIME,
    TIME_SYM,
    Sym,
    input_,
    input_family,
    output,
    output_stack,
    state,
)


def differentiate(p, s: Sym):
    """Formal partial derivative of a Polynomial or RationalFn."""
    return p.diff(s)


def evaluate(r, point):
    """Exact value of ``r`` at ``point``; raises EvaluationSingularity on a zero denominator."""
    return RationalFn.coerce(r).evaluate(point)


def is_identically_zero(r) -> bool:
    return RationalFn.coerce(r).is_zero()


__all__ = [
    "INPUT", "OUTPUT", "STATE", "TIME", "TIME_SYM",
    "Polynomial", "RankWitness", "RationalFn", "Sym", "SymMatrix",
    "constant_minor_selection", "det", "differentiate", "evaluate", "format_polynomial",
    "generic_rank", "input_", "input_family", "inverse", "is_identically_zero", "minor",
    "output", "output_stack", "reduced_numerator", "solve_annihilator", "squarefree_factors",
    "state", "substitute", "witness_is_valid",
]
