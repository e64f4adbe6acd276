"""System definitions, Lie derivatives and the output-derivative chain.

For ``x' = f(x, u)``, ``y = h(x)`` the chain is ``H_0 = h`` and

    H_{i+1} = (dH_i/dx) f(x, u_0) + sum_j (dH_i/du_j) u_{j+1}

so that ``y^(i)(t) = H_i(x(t), u(t), ..., u^(i-1)(t))``.  Input derivative
``u_j`` is represented by the symbol family ``input_(c, j)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence, Union

from .errors import ValidationError
from .symbolic import (
    INPUT,
    STATE,
    Polynomial,
    RationalFn,
    Sym,
    SymMatrix,
    input_,
    input_family,
    output_stack,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AffineSystem:
    """``x' = f(x) + G(x) u``, ``y = h(x)`` with polynomial data."""

    states: tuple
    f: tuple
    G: tuple  # n rows of m entries
    h: tuple
    name: str = ""

    @property
    def n(self) -> int:
        return len(self.states)

    @property
    def m(self) -> int:
        return len(self.G[0]) if self.G else 0

    @property
    def p(self) -> int:
        return len(self.h)

    def g(self, i: int) -> list:
        """Column ``i`` (0-based) of G."""
        return [row[i] for row in self.G]

    def lift(self) -> "GeneralSystem":
        u0 = input_family(self.m, 0)
        f = tuple(
            fi + sum((gij * Polynomial.sym(u) for gij, u in zip(row, u0)), Polynomial())
            for fi, row in zip(self.f, self.G)
        )
        return GeneralSystem(self.states, self.m, f, self.h, self.name)

    @classmethod
    def build(cls, states: Sequence[Sym], f, G, h, name: str = "") -> "AffineSystem":
        def poly(v):
            return v if isinstance(v, Polynomial) else Polynomial.const(v)

        return cls(
            tuple(states),
            tuple(poly(v) for v in f),
            tuple(tuple(poly(v) for v in row) for row in G),
            tuple(poly(v) for v in h),
            name,
        )


@dataclass(frozen=True)
class GeneralSystem:
    """``x' = f(x, u_0)``, ``y = h(x)``."""

    states: tuple
    m: int
    f: tuple
    h: tuple
    name: str = ""

    @property
    def n(self) -> int:
        return len(self.states)

    @property
    def p(self) -> int:
        return len(self.h)


System = Union[AffineSystem, GeneralSystem]


@dataclass
class ValidationReport:
    errors: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def raise_if_failed(self) -> None:
        if self.errors:
            raise ValidationError(self.errors, self.warnings)


def _at_origin(p: Polynomial):
    return p.constant_value()


def validate(sys: System) -> ValidationReport:
    rep = ValidationReport()
    n, p = sys.n, sys.p
    states = set(sys.states)
    if len(states) != n:
        rep.errors.append("duplicate state symbols")
    if len(sys.f) != n:
        rep.errors.append(f"f has {len(sys.f)} entries, expected {n}")
    if isinstance(sys, AffineSystem):
        m = sys.m
        if len(sys.G) != n or any(len(row) != m for row in sys.G):
            rep.errors.append(f"G must be {n}x{m}")
        allowed = states
        data = list(sys.f) + [v for row in sys.G for v in row]
    else:
        m = sys.m
        allowed = states | set(input_family(m, 0))
        data = list(sys.f)
    if m < 1:
        rep.errors.append("system has no inputs")
    if m > p:
        rep.errors.append(f"more inputs than outputs (m={m} > p={p})")
    for v in data:
        stray = v.symbols() - allowed
        if stray:
            rep.errors.append(f"stray symbols {sorted(s.name for s in stray)} in dynamics")
            break
    for v in sys.h:
        stray = v.symbols() - states
        if stray:
            rep.errors.append(f"stray symbols {sorted(s.name for s in stray)} in output map")
            break
    if not rep.errors:
        for i, fi in enumerate(sys.f):
            c = _at_origin(fi if isinstance(sys, AffineSystem) else fi.partial_evaluate({u: 0 for u in input_family(m, 0)}))
            if c != 0:
                rep.errors.append(f"f(0) != 0: component {i + 1} is {c}")
        for i, hi in enumerate(sys.h):
            c = _at_origin(hi)
            if c != 0:
                rep.warnings.append(f"h(0) != 0: component {i + 1} is {c}")
    for w in rep.warnings:
        log.warning(w)
    return rep


def lie_derivative(R, v: Sequence, states: Sequence[Sym]):
    """Derivative of ``R`` along the vector field ``v``; componentwise on matrices."""
    if len(v) != len(states):
        raise ValueError(f"vector field has {len(v)} components for {len(states)} states")
    if isinstance(R, SymMatrix):
        return R.map(lambda e: lie_derivative(e, v, states))
    if isinstance(R, (list, tuple)):
        return [lie_derivative(e, v, states) for e in R]
    if isinstance(R, Polynomial):
        out = Polynomial()
        for s, vi in zip(states, v):
            if vi.is_zero() if isinstance(vi, Polynomial) else RationalFn.coerce(vi).is_zero():
                continue
            d = R.diff(s)
            if not d.is_zero():
                out = out + d * vi
        return out
    R = RationalFn.coerce(R)
    out = RationalFn.const(0)
    for s, vi in zip(states, v):
        d = R.diff(s)
        if not d.is_zero():
            out = out + d * RationalFn.coerce(vi)
    return out


@dataclass(frozen=True)
class DerivativeChain:
    depth: int
    H: tuple  # H[i] is a p-tuple of Polynomials over x and u_{0..i-1}
    m: int

    def stack(self, k: int) -> list:
        """Entries of (H_0; ...; H_k) in the order of ``output_stack(p, k)``."""
        return [e for i in range(k + 1) for e in self.H[i]]

    def substitution(self, k: int) -> dict:
        """Map from output-derivative symbols up to order k onto chain entries."""
        p = len(self.H[0])
        return {s: RationalFn(e, normalize=False) for s, e in zip(output_stack(p, k), self.stack(k))}


def _next_level(Hi: tuple, f: tuple, states: tuple, m: int, i: int) -> tuple:
    out = []
    for e in Hi:
        acc = lie_derivative(e, f, states)
        for j in range(i):
            for c in range(1, m + 1):
                d = e.diff(input_(c, j))
                if not d.is_zero():
                    acc = acc + d * Polynomial.sym(input_(c, j + 1))
        out.append(acc)
    return tuple(out)


@lru_cache(maxsize=64)
def _chain(sys: GeneralSystem, N: int) -> DerivativeChain:
    if N == 0:
        return DerivativeChain(0, (tuple(sys.h),), sys.m)
    prev = _chain(sys, N - 1)
    nxt = _next_level(prev.H[-1], sys.f, sys.states, sys.m, N - 1)
    return DerivativeChain(N, prev.H + (nxt,), sys.m)


def derivative_chain(sys: System, N: int) -> DerivativeChain:
    if N < 0:
        raise ValueError("chain depth must be nonnegative")
    if isinstance(sys, AffineSystem):
        sys = sys.lift()
    return _chain(sys, N)


def is_state_only(expr) -> bool:
    return all(s.kind == STATE for s in RationalFn.coerce(expr).symbols())


def input_symbols_in(expr) -> set:
    return {s for s in RationalFn.coerce(expr).symbols() if s.kind == INPUT}
