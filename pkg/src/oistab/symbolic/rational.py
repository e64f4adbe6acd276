"""Rational functions over the rationals, kept as numerator/denominator pairs.

Normalization clears coefficient denominators, removes the integer content
and any common monomial factor, and tries one exact division of the
numerator by the denominator.  No multivariate GCD is computed, so two equal
functions may have different representations; ``==`` compares by
cross-multiplication.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Mapping, Union

from ..errors import EvaluationSingularity
from .poly import Polynomial, format_polynomial
from .symbols import Sym

Scalar = Union[int, Fraction]


def _scale_integer(num: Polynomial, den: Polynomial) -> tuple[Polynomial, Polynomial]:
    lcm = 1
    for p in (num, den):
        d = p.coefficient_denominator_lcm()
        lcm = lcm * d // math.gcd(lcm, d)
    if lcm != 1:
        num, den = num * lcm, den * lcm
    g = math.gcd(num.integer_content(), den.integer_content())
    if g > 1:
        inv = Fraction(1, g)
        num, den = num * inv, den * inv
    return num, den


class RationalFn:
    __slots__ = ("num", "den")

    def __init__(self, num, den=None, *, normalize: bool = True):
        if not isinstance(num, Polynomial):
            num = Polynomial.const(num)
        if den is None:
            den = Polynomial.const(1)
        elif not isinstance(den, Polynomial):
            den = Polynomial.const(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if normalize:
            num, den = self._normalize(num, den)
        self.num = num
        self.den = den

    @staticmethod
    def _normalize(num: Polynomial, den: Polynomial):
        if num.is_zero():
            return Polynomial(), Polynomial.const(1)
        if den.is_constant():
            c = den.constant_value()
            num = num * (1 / c)
            den = Polynomial.const(1)
        else:
            mono = num.monomial_content()
            dmono = den.monomial_content()
            if mono and dmono:
                dm = dict(dmono)
                common = tuple((s, min(e, dm[s])) for s, e in mono if s in dm)
                if common:
                    num = num.divide_monomial(common)
                    den = den.divide_monomial(common)
            if not den.is_constant():
                q = num.exact_divide(den)
                if q is not None:
                    num, den = q, Polynomial.const(1)
            if den.is_constant():
                c = den.constant_value()
                num = num * (1 / c)
                den = Polynomial.const(1)
        if den.is_constant():
            # polynomial: keep rational coefficients, denominator exactly 1
            return num, den
        num, den = _scale_integer(num, den)
        if den.leading_coefficient() < 0:
            num, den = -num, -den
        return num, den

    # construction ------------------------------------------------------
    @classmethod
    def sym(cls, s: Sym) -> "RationalFn":
        return cls(Polynomial.sym(s), normalize=False)

    @classmethod
    def const(cls, c: Scalar) -> "RationalFn":
        return cls(Polynomial.const(c), normalize=False)

    @classmethod
    def coerce(cls, value) -> "RationalFn":
        if isinstance(value, RationalFn):
            return value
        if isinstance(value, Polynomial):
            return cls(value, normalize=False)
        if isinstance(value, (int, Fraction)):
            return cls.const(value)
        raise TypeError(f"cannot convert {type(value).__name__} to RationalFn")

    # predicates --------------------------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self) -> Fraction:
        return self.num.constant_value() / self.den.constant_value()

    def as_polynomial(self) -> Polynomial:
        if not self.den.is_constant():
            raise ValueError(f"{self} is not a polynomial")
        return self.num * (1 / self.den.constant_value())

    def symbols(self) -> set:
        return self.num.symbols() | self.den.symbols()

    # arithmetic --------------------------------------------------------
    def __add__(self, other):
        try:
            other = RationalFn.coerce(other)
        except TypeError:
            return NotImplemented
        if self.den == other.den:
            return RationalFn(self.num + other.num, self.den)
        return RationalFn(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFn(-self.num, self.den, normalize=False)

    def __sub__(self, other):
        try:
            other = RationalFn.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            other = RationalFn.coerce(other)
        except TypeError:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return RationalFn(Polynomial())
        return RationalFn(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = RationalFn.coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("division by identically zero rational function")
        return RationalFn(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return RationalFn.coerce(other) / self

    def __pow__(self, k: int):
        if k >= 0:
            return RationalFn(self.num ** k, self.den ** k)
        return RationalFn(self.den ** (-k), self.num ** (-k))

    def __eq__(self, other):
        try:
            other = RationalFn.coerce(other)
        except TypeError:
            return NotImplemented
        return (self.num * other.den - other.num * self.den).is_zero()

    __hash__ = None

    # calculus / substitution ------------------------------------------
    def diff(self, s: Sym) -> "RationalFn":
        dn = self.num.diff(s)
        if self.den.is_constant():
            return RationalFn(dn, self.den)
        dd = self.den.diff(s)
        if dd.is_zero():
            return RationalFn(dn, self.den)
        return RationalFn(dn * self.den - self.num * dd, self.den * self.den)

    def substitute(self, mapping: Mapping[Sym, "RationalFn"]) -> "RationalFn":
        return substitute(self.num, mapping) / substitute(self.den, mapping)

    def evaluate(self, point: Mapping[Sym, Scalar]) -> Fraction:
        d = self.den.evaluate(point)
        if d == 0:
            raise EvaluationSingularity(f"denominator {format_polynomial(self.den)} vanishes")
        return self.num.evaluate(point) / d

    def __str__(self) -> str:
        if self.den.is_constant():
            return format_polynomial(self.as_polynomial())
        num = format_polynomial(self.num)
        den = format_polynomial(self.den)
        if len(self.num) > 1:
            num = f"({num})"
        if len(self.den) > 1 or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", den):
            den = f"({den})"
        return f"{num}/{den}"

    def __repr__(self) -> str:
        return f"RationalFn({str(self)!r})"


def substitute(p: Polynomial, mapping: Mapping[Sym, RationalFn]) -> RationalFn:
    """Compose ``p`` with a map from symbols to rational functions.

    Symbols absent from ``mapping`` are left unchanged.  Terms are grouped
    over a common denominator built from the distinct denominators of the
    substituted values, so polynomial substitutions stay polynomial.
    """
    mapping = {s: RationalFn.coerce(v) for s, v in mapping.items()}
    used = [s for s in sorted(p.symbols()) if s in mapping]
    if all(mapping[s].den.is_constant() for s in used):
        return RationalFn(p.compose({s: mapping[s].as_polynomial() for s in used}))
    result = RationalFn(Polynomial())
    powers: dict = {}
    for mono, c in p.terms.items():
        term = RationalFn.const(c)
        for s, e in mono:
            if s in mapping:
                key = (s, e)
                if key not in powers:
                    powers[key] = mapping[s] ** e
                term = term * powers[key]
            else:
                term = term * RationalFn(Polynomial({((s, e),): 1}), normalize=False)
        result = result + term
    return result
