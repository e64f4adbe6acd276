"""Squarefree decomposition and cancellation, delegated to sympy.

Only the locus report needs a multivariate GCD, so sympy is confined to this
module and data crosses the boundary as plain coefficient dicts.
"""

from __future__ import annotations

from fractions import Fraction

import sympy

from .poly import Polynomial, format_polynomial
from .rational import RationalFn


def _to_sympy(p: Polynomial, gens):
    index = {s: i for i, s in enumerate(gens)}
    rep = {}
    for mono, c in p.terms.items():
        exps = [0] * len(gens)
        for s, e in mono:
            exps[index[s]] = e
        rep[tuple(exps)] = sympy.Rational(c.numerator, c.denominator)
    return sympy.Poly.from_dict(rep, *[sympy.Symbol(s.name) for s in gens], domain="QQ")


def _from_sympy(poly, gens) -> Polynomial:
    terms = {}
    for exps, c in poly.terms():
        mono = tuple((gens[i], e) for i, e in enumerate(exps) if e)
        terms[mono] = Fraction(int(c.p), int(c.q))
    return Polynomial(terms)


def _primitive(p: Polynomial) -> Polynomial:
    lcm = p.coefficient_denominator_lcm()
    p = p * lcm
    g = p.integer_content()
    p = p * Fraction(1, g)
    if p.leading_coefficient() < 0:
        p = -p
    return p


def reduced_numerator(r: RationalFn) -> Polynomial:
    """Numerator of ``r`` after cancelling its GCD with the denominator."""
    if r.den.is_constant() or r.num.is_constant():
        return r.num
    gens = sorted(r.symbols())
    num = _to_sympy(r.num, gens)
    den = _to_sympy(r.den, gens)
    g = sympy.gcd(num, den)
    return _from_sympy(sympy.div(num, g)[0], gens)


def squarefree_factors(p: Polynomial) -> list[Polynomial]:
    """Distinct squarefree parts of ``p``; empty for constants.

    Factors are primitive with positive leading coefficient and sorted by
    their canonical text, so the result is deterministic.
    """
    if p.is_constant():
        return []
    gens = sorted(p.symbols())
    _, parts = sympy.sqf_list(_to_sympy(p, gens))
    out = [_primitive(_from_sympy(f, gens)) for f, _ in parts]
    out = [f for f in out if not f.is_constant()]
    return sorted(out, key=format_polynomial)
