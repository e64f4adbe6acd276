"""Hirschorn's structure algorithm with constant-rank diagnostics.

Each step holds the relation

    M_k(x) y^k = h_k(x) + J_k(x) u,    J_k = (Jbar_k; 0)

with ``y^k`` the stacked output derivatives up to order k.  A step
differentiates the rows without input dependence, stacks the new input
coefficients under ``Jbar_k``, and row-reduces with ``R_k = [[I, 0], [F_k, I]] E_k``.

When some ``L_{g_i}`` of the unreduced rows of M is not identically zero the
input-dependent terms are moved to the right-hand side (Singh's variant);
from then on the matrices may depend on output-derivative symbols as well.
The general bookkeeping below covers both modes: with state-only M and h
every Singh correction term vanishes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import OistabError
from .model import AffineSystem, derivative_chain, lie_derivative
from .symbolic import (
    OUTPUT,
    Polynomial,
    RankWitness,
    RationalFn,
    SymMatrix,
    constant_minor_selection,
    generic_rank,
    input_family,
    output,
    output_stack,
    solve_annihilator,
    substitute,
)
from .symbolic.matrix import witness_for

log = logging.getLogger(__name__)

AFFINE = "affine"
SINGH = "singh"


@dataclass
class StructureStep:
    """State of the algorithm after k reductions.

    ``E``, ``F``, ``R``, ``Jhat`` and ``rank_witness`` describe the transition
    that produced this step (empty for k = 0).  ``a1_violations`` lists the
    nonzero ``L_{g_i}`` of the unreduced rows of M found when this step was
    differentiated.
    """

    k: int
    r: int
    M: SymMatrix
    h: list
    Jbar: SymMatrix
    mode: str = AFFINE
    E: list = field(default_factory=list)
    F: Optional[SymMatrix] = None
    R: Optional[SymMatrix] = None
    Jhat: Optional[SymMatrix] = None
    rank_witness: Optional[RankWitness] = None
    a1_violations: list = field(default_factory=list)
    locus: list = field(default_factory=list)

    @property
    def p(self) -> int:
        return self.M.rows

    @property
    def Mbar(self) -> SymMatrix:
        return self.M.select(range(self.r))

    @property
    def Mhat(self) -> SymMatrix:
        return self.M.select(range(self.r, self.p))

    @property
    def hbar(self) -> list:
        return self.h[: self.r]

    @property
    def hhat(self) -> list:
        return self.h[self.r:]

    @property
    def J(self) -> SymMatrix:
        return self.Jbar.vstack(SymMatrix.zeros(self.p - self.r, self.Jbar.cols))


@dataclass
class Terminated:
    k_star: int
    kind: str = "terminated"


@dataclass
class IterationCap:
    max_k: int
    kind: str = "iteration_cap"


@dataclass
class Assumption2Violation:
    step: int
    locus: list
    rank: int
    pivot_rows: list
    kind: str = "assumption2_violation"


@dataclass
class Assumption1Violation:
    step: int
    violations: list
    kind: str = "assumption1_violation"


Outcome = Union[Terminated, IterationCap, Assumption2Violation, Assumption1Violation]


@dataclass
class StructureReport:
    steps: list
    outcome: Outcome
    singh_activated_at: Optional[int] = None

    @property
    def ranks(self) -> list:
        return [s.r for s in self.steps]

    @property
    def terminated(self) -> bool:
        return isinstance(self.outcome, Terminated)


@dataclass(frozen=True)
class StructureConfig:
    max_iter: Optional[int] = None  # default n + p
    strict: bool = True
    affine_only: bool = False
    check_invariants: bool = True


def init(sys: AffineSystem) -> StructureStep:
    p = sys.p
    return StructureStep(
        k=0,
        r=0,
        M=SymMatrix.identity(p),
        h=[RationalFn(v, normalize=False) for v in sys.h],
        Jbar=SymMatrix.zeros(0, sys.m),
    )


def check_assumption1(step: StructureStep, sys: AffineSystem) -> list:
    """Nonzero ``L_{g_i}`` entries of the unreduced rows of M as (row, input, column, expr).

    Row and input indices are 0-based; the column indexes the output stack.
    """
    out = []
    Mhat = step.Mhat
    for i in range(sys.m):
        LgM = lie_derivative(Mhat, sys.g(i), sys.states)
        for row in range(LgM.rows):
            for col in range(LgM.cols):
                v = LgM[row, col]
                if not v.is_zero():
                    out.append((step.r + row, i, col, v))
    return out


def _permutation_matrix(order: list) -> SymMatrix:
    n = len(order)
    return SymMatrix([[1 if j == order[i] else 0 for j in range(n)] for i in range(n)], cols=n)


def step(cur: StructureStep, sys: AffineSystem, *, singh: bool, strict: bool = True):
    """One reduction ``k -> k+1``.

    Returns the next StructureStep, or an Assumption2Violation when the
    stacked input matrix has no constant-rank witness and ``strict`` is set.
    ``singh`` enables the moved input terms; callers decide when.
    """
    p, m, k, r = cur.p, sys.m, cur.k, cur.r
    if r >= m:
        raise OistabError("step called after termination")
    Y = output_stack(p, k)
    Mhat, hhat = cur.Mhat, cur.hhat
    nhat = p - r

    Jhat_rows = []
    for row in range(nhat):
        entries = []
        for i in range(m):
            v = lie_derivative(hhat[row], sys.g(i), sys.states)
            if singh:
                corr = RationalFn.const(0)
                LgM = [lie_derivative(Mhat[row, c], sys.g(i), sys.states) for c in range(len(Y))]
                for c, coeff in enumerate(LgM):
                    if not coeff.is_zero():
                        corr = corr + coeff * RationalFn.sym(Y[c])
                v = v - corr
            entries.append(v)
        Jhat_rows.append(entries)
    Jhat = SymMatrix(Jhat_rows, cols=m)

    # lower block of the new M over y^{k+1}: L_f Mhat on y^k, Mhat on the shifted block,
    # plus time derivatives of output-derivative symbols inside Mhat and hhat
    width = p * (k + 2)
    lower = []
    for row in range(nhat):
        new = [RationalFn.const(0)] * width
        for c in range(len(Y)):
            new[c] = new[c] + lie_derivative(Mhat[row, c], sys.f, sys.states)
            new[c + p] = new[c + p] + Mhat[row, c]
        for c, s in enumerate(Y):
            extra = RationalFn.const(0)
            for c2 in range(len(Y)):
                d = Mhat[row, c2].diff(s)
                if not d.is_zero():
                    extra = extra + d * RationalFn.sym(Y[c2])
            dh = hhat[row].diff(s)
            if not dh.is_zero():
                extra = extra - dh
            if not extra.is_zero():
                new[c + p] = new[c + p] + extra
        lower.append(new)
    upper = [list(cur.M.row(i)) + [RationalFn.const(0)] * p for i in range(r)]
    N = SymMatrix(upper + lower, cols=width)
    rhs = list(cur.hbar) + [lie_derivative(v, sys.f, sys.states) for v in hhat]

    S = cur.Jbar.vstack(Jhat)
    witness = generic_rank(S)
    r_next = witness.rank
    locus: list = []
    if witness.locus:
        alt = constant_minor_selection(S, r_next, keep_rows=range(r))
        if alt is not None:
            witness = witness_for(S, *alt)
        elif strict:
            return Assumption2Violation(k, list(witness.locus), r_next, list(witness.pivot_rows))
        else:
            locus = list(witness.locus)
            log.warning("step %d: continuing off the locus %s", k, [str(q) for q in locus])
    pivots = sorted(witness.pivot_rows)
    order = pivots + [i for i in range(p) if i not in pivots]
    Jbar_next = S.select(order[:r_next])
    Jtilde = S.select(order[r_next:])
    F = solve_annihilator(Jbar_next, Jtilde, witness.pivot_cols)

    top = SymMatrix.identity(r_next).hstack(SymMatrix.zeros(r_next, p - r_next))
    bottom = F.hstack(SymMatrix.identity(p - r_next))
    R = top.vstack(bottom) @ _permutation_matrix(order)
    M_next = R @ N
    h_next = (R @ SymMatrix.column(rhs)).col(0)
    return StructureStep(
        k=k + 1,
        r=r_next,
        M=M_next,
        h=h_next,
        Jbar=Jbar_next,
        mode=SINGH if singh else AFFINE,
        E=order,
        F=F,
        R=R,
        Jhat=Jhat,
        rank_witness=witness,
        locus=locus,
    )


def defining_relation_residual(st: StructureStep, sys: AffineSystem) -> list:
    """``M(x, H) H - h(x, H) - J(x, H) u_0`` with the chain substituted for y."""
    chain = derivative_chain(sys, st.k)
    sub = chain.substitution(st.k)
    u0 = [RationalFn.sym(u) for u in input_family(sys.m, 0)]
    Hstack = [RationalFn(e, normalize=False) for e in chain.stack(st.k)]
    J = st.J
    out = []
    for i in range(st.p):
        acc = RationalFn.const(0)
        for c, Hc in enumerate(Hstack):
            e = st.M[i, c]
            if not e.is_zero():
                acc = acc + _subs(e, sub) * Hc
        acc = acc - _subs(st.h[i], sub)
        for j in range(sys.m):
            e = J[i, j]
            if not e.is_zero():
                acc = acc - _subs(e, sub) * u0[j]
        out.append(acc)
    return out


def _subs(expr: RationalFn, sub: dict) -> RationalFn:
    if not any(s.kind == OUTPUT for s in expr.symbols()):
        return expr
    return substitute(expr.num, sub) / substitute(expr.den, sub)


def run(sys: AffineSystem, config: StructureConfig = StructureConfig()) -> StructureReport:
    max_iter = config.max_iter if config.max_iter is not None else sys.n + sys.p
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    cur = init(sys)
    steps = [cur]
    singh_at = None
    while cur.r < sys.m:
        if cur.k >= max_iter:
            return StructureReport(steps, IterationCap(max_iter), singh_at)
        violations = check_assumption1(cur, sys)
        cur.a1_violations = violations
        if violations and singh_at is None:
            if config.affine_only:
                return StructureReport(steps, Assumption1Violation(cur.k, violations), None)
            singh_at = cur.k
            log.info("Assumption 1 fails at k=%d; switching to Singh's variant", cur.k)
        nxt = step(cur, sys, singh=singh_at is not None, strict=config.strict)
        if isinstance(nxt, Assumption2Violation):
            return StructureReport(steps, nxt, singh_at)
        if nxt.r < cur.r:
            raise OistabError("rank decreased between steps")
        if config.check_invariants:
            bad = [e for e in defining_relation_residual(nxt, sys) if not e.is_zero()]
            if bad:
                raise OistabError(f"defining relation fails at step {nxt.k}: {bad[0]}")
        steps.append(nxt)
        cur = nxt
    return StructureReport(steps, Terminated(cur.k), singh_at)
