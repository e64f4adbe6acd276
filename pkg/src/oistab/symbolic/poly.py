"""Sparse multivariate polynomials with exact rational coefficients.

A monomial is a tuple of ``(Sym, exponent)`` pairs sorted by symbol key,
with every exponent positive.  Terms live in a plain dict, so two
polynomials are equal exactly when their dicts are.  Printing and
``leading_term`` use graded lexicographic order.
"""

from __future__ import annotations

import math
import os
from fractions import Fraction
from typing import Iterable, Mapping, Union

from ..errors import ExpansionLimitError
from .symbols import Sym

Monomial = tuple  # tuple[tuple[Sym, int], ...]
Scalar = Union[int, Fraction]

ONE_MONO: Monomial = ()

_DEFAULT_LIMIT = 100_000


def term_limit() -> int:
    """Expansion guard, overridable via ``OISTAB_MAX_TERMS``."""
    raw = os.environ.get("OISTAB_MAX_TERMS")
    if raw:
        return int(raw)
    return _DEFAULT_LIMIT


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    exps = dict(a)
    for s, e in b:
        exps[s] = exps.get(s, 0) + e
    return tuple(sorted(exps.items(), key=lambda se: se[0].key))


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def mono_divides(a: Monomial, b: Monomial) -> bool:
    """True when monomial ``a`` divides ``b``."""
    eb = dict(b)
    return all(eb.get(s, 0) >= e for s, e in a)


def mono_div(b: Monomial, a: Monomial) -> Monomial:
    exps = dict(b)
    for s, e in a:
        exps[s] -= e
    return tuple((s, e) for s, e in sorted(exps.items(), key=lambda se: se[0].key) if e)


def grlex_key(m: Monomial):
    """Sort key placing the grlex-largest monomial first."""
    return (-mono_degree(m), tuple((s.key, -e) for s, e in m))


class Polynomial:
    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, Scalar] | None = None):
        clean = {}
        if terms:
            for mono, c in terms.items():
                if c:
                    clean[mono] = Fraction(c)
        self.terms: dict = clean

    # construction -------------------------------------------------------
    @classmethod
    def const(cls, c: Scalar) -> "Polynomial":
        return cls({ONE_MONO: c})

    @classmethod
    def sym(cls, s: Sym) -> "Polynomial":
        return cls({((s, 1),): 1})

    @classmethod
    def _raw(cls, terms: dict) -> "Polynomial":
        p = cls.__new__(cls)
        p.terms = terms
        return p

    # predicates ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and ONE_MONO in self.terms)

    def constant_value(self) -> Fraction:
        return self.terms.get(ONE_MONO, Fraction(0))

    def symbols(self) -> set:
        return {s for mono in self.terms for s, _ in mono}

    def degree(self) -> int:
        return max((mono_degree(m) for m in self.terms), default=0)

    def __len__(self) -> int:
        return len(self.terms)

    # arithmetic ---------------------------------------------------------
    @staticmethod
    def _coerce(other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for mono, c in other.terms.items():
            v = out.get(mono, 0) + c
            if v:
                out[mono] = v
            else:
                out.pop(mono, None)
        return Polynomial._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return Polynomial()
            return Polynomial._raw({m: c * other for m, c in self.terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if len(self.terms) * len(other.terms) > term_limit():
            raise ExpansionLimitError(
                f"product of {len(self.terms)} x {len(other.terms)} terms exceeds limit {term_limit()}"
            )
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = mono_mul(m1, m2)
                v = out.get(mono, 0) + c1 * c2
                if v:
                    out[mono] = v
                else:
                    out.pop(mono, None)
        return Polynomial._raw(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative exponent")
        result = Polynomial.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.const(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    # calculus / substitution -------------------------------------------
    def diff(self, s: Sym) -> "Polynomial":
        out: dict = {}
        for mono, c in self.terms.items():
            for idx, (sym, e) in enumerate(mono):
                if sym == s:
                    if e == 1:
                        new = mono[:idx] + mono[idx + 1:]
                    else:
                        new = mono[:idx] + ((sym, e - 1),) + mono[idx + 1:]
                    out[new] = out.get(new, 0) + c * e
                    break
        return Polynomial(out)

    def evaluate(self, point: Mapping[Sym, Scalar]):
        """Exact value at ``point``; every symbol must be assigned."""
        total = Fraction(0)
        for mono, c in self.terms.items():
            v = c
            for s, e in mono:
                if s not in point:
                    raise KeyError(f"no value for symbol {s}")
                v *= Fraction(point[s]) ** e
            total += v
        return total

    def partial_evaluate(self, point: Mapping[Sym, Scalar]) -> "Polynomial":
        """Substitute values for some symbols, keeping the rest symbolic."""
        out: dict = {}
        for mono, c in self.terms.items():
            v = Fraction(c)
            rest = []
            for s, e in mono:
                if s in point:
                    v *= Fraction(point[s]) ** e
                else:
                    rest.append((s, e))
            if v:
                key = tuple(rest)
                out[key] = out.get(key, 0) + v
        return Polynomial(out)

    def compose(self, mapping: Mapping[Sym, "Polynomial"]) -> "Polynomial":
        """Polynomial substitution; unmapped symbols stay as they are."""
        result = Polynomial()
        powers: dict = {}
        for mono, c in self.terms.items():
            term = Polynomial.const(c)
            for s, e in mono:
                if s in mapping:
                    key = (s, e)
                    if key not in powers:
                        powers[key] = mapping[s] ** e
                    term = term * powers[key]
                else:
                    term = term * Polynomial({((s, e),): 1})
            result = result + term
        return result

    # normal-form helpers -----------------------------------------------
    def sorted_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda mc: grlex_key(mc[0]))

    def leading_term(self):
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        mono = min(self.terms, key=grlex_key)
        return mono, self.terms[mono]

    def leading_coefficient(self) -> Fraction:
        return self.leading_term()[1]

    def coefficient_denominator_lcm(self) -> int:
        out = 1
        for c in self.terms.values():
            out = out * c.denominator // math.gcd(out, c.denominator)
        return out

    def integer_content(self) -> int:
        g = 0
        for c in self.terms.values():
            g = math.gcd(g, c.numerator)
        return g

    def monomial_content(self) -> Monomial:
        """Largest monomial dividing every term."""
        it = iter(self.terms)
        try:
            first = dict(next(it))
        except StopIteration:
            return ONE_MONO
        for mono in it:
            exps = dict(mono)
            first = {s: min(e, exps[s]) for s, e in first.items() if s in exps}
            if not first:
                return ONE_MONO
        return tuple(sorted(first.items(), key=lambda se: se[0].key))

    def divide_monomial(self, mono: Monomial) -> "Polynomial":
        return Polynomial._raw({mono_div(m, mono): c for m, c in self.terms.items()})

    def exact_divide(self, divisor: "Polynomial") -> "Polynomial | None":
        """Quotient when ``divisor`` divides ``self`` exactly, else None."""
        if divisor.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        lm, lc = divisor.leading_term()
        rem = self
        quotient: dict = {}
        budget = term_limit()
        while not rem.is_zero():
            rm, rc = rem.leading_term()
            if not mono_divides(lm, rm):
                return None
            qm = mono_div(rm, lm)
            qc = rc / lc
            quotient[qm] = quotient.get(qm, 0) + qc
            rem = rem - Polynomial._raw({qm: qc}) * divisor
            if len(quotient) > budget:
                raise ExpansionLimitError("exact division exceeded term limit")
        return Polynomial(quotient)

    # printing ----------------------------------------------------------
    def __str__(self) -> str:
        return format_polynomial(self)

    def __repr__(self) -> str:
        return f"Polynomial({format_polynomial(self)!r})"


def _format_coeff(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def format_monomial(mono: Monomial) -> str:
    return "*".join(s.name if e == 1 else f"{s.name}^{e}" for s, e in mono)


def format_polynomial(p: Polynomial) -> str:
    """Canonical text: grlex order, explicit ``*`` and ``^``."""
    if p.is_zero():
        return "0"
    parts = []
    for i, (mono, c) in enumerate(p.sorted_terms()):
        sign = "-" if c < 0 else "+"
        a = abs(c)
        if not mono:
            body = _format_coeff(a)
        elif a == 1:
            body = format_monomial(mono)
        elif a.denominator == 1:
            body = f"{a.numerator}*{format_monomial(mono)}"
        else:
            body = f"{a.numerator}/{a.denominator}*{format_monomial(mono)}"
        if i == 0:
            parts.append(body if sign == "+" else f"-{body}")
        else:
            parts.append(f" {sign} {body}")
    return "".join(parts)


def poly_sum(items: Iterable[Polynomial]) -> Polynomial:
    out = Polynomial()
    for p in items:
        out = out + p
    return out
