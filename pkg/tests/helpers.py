"""Shared helpers: parse expressions over every symbol family."""

from __future__ import annotations

from fractions import Fraction

from hypothesis import strategies as st

from oistab.cli.dsl import parse_expression
from oistab.symbolic import Polynomial, RationalFn, input_, output, state

NAMES = {}
for _i in range(1, 7):
    NAMES[f"x{_i}"] = state(_i)
    for _d in range(5):
        NAMES[output(_i, _d).name] = output(_i, _d)
        NAMES[input_(_i, _d).name] = input_(_i, _d)

X = [state(i) for i in range(1, 5)]


def P(text: str) -> Polynomial:
    """Polynomial from text over x, y-derivative and u-derivative names."""
    return parse_expression(text, NAMES)


def R(num: str, den: str = "1") -> RationalFn:
    return RationalFn(P(num), P(den))


def strings(M) -> list:
    return M.to_strings()


coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@st.composite
def polynomials(draw, syms=tuple(X[:3]), max_terms=4, max_exp=2):
    """Small random polynomials over ``syms``."""
    n = draw(st.integers(0, max_terms))
    p = Polynomial()
    for _ in range(n):
        c = draw(coeffs)
        mono = Polynomial.const(c)
        for s in syms:
            mono = mono * Polynomial.sym(s) ** draw(st.integers(0, max_exp))
        p = p + mono
    return p


points = st.fixed_dictionaries({s: st.fractions(-3, 3, max_denominator=5) for s in X[:3]})


def frac(x) -> Fraction:
    return Fraction(x)
