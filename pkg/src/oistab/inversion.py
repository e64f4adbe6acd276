"""Left inverse synthesis and input-bounding tables.

From a terminated run, ``Mbar y^k* = hbar + Jbar u`` with ``Jbar`` square and
invertible, so ``u = A(x) + B(x) y^k*`` with ``A = -Jbar^-1 hbar`` and
``B = Jbar^-1 Mbar``.  The tables bound ``|A|`` and ``|B| - |B(0)|`` by sampled
maxima over a state box, which gives

    |u| <= rho1(|x|) + rho2(|y^k*|),
    rho1 = gamma1 + gamma2^2 / 2,   rho2(r) = |B(0)| r + r^2 / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.stats import qmc

from .errors import ContractError, InversionUnavailable, OistabError, UnreliableEstimate
from .model import AffineSystem, derivative_chain
from .structure import SINGH, StructureReport
from .symbolic import (
    OUTPUT,
    RationalFn,
    SymMatrix,
    input_,
    input_family,
    inverse,
    output_stack,
    substitute,
)
from .symbolic.numeric import compile_vector

AFFINE = "affine"


@dataclass
class InverseMap:
    k_star: int
    mode: str
    u: list  # m expressions in x and output-derivative symbols
    A: Optional[list] = None
    B: Optional[SymMatrix] = None
    states: tuple = ()
    p: int = 0

    @property
    def m(self) -> int:
        return len(self.u)

    @property
    def y_symbols(self) -> list:
        return output_stack(self.p, self.k_star)

    @property
    def polynomial_in_y(self) -> bool:
        """True when no denominator involves an output-derivative symbol."""
        return all(not any(s.kind == OUTPUT for s in e.den.symbols()) for e in self.u)


def build_inverse(report: StructureReport, sys: AffineSystem) -> InverseMap:
    if not report.terminated:
        raise InversionUnavailable(f"structure algorithm outcome is {report.outcome.kind}")
    last = report.steps[-1]
    m = sys.m
    Jinv = inverse(last.Jbar)
    Mbar = last.M.select(range(m))
    hbar = SymMatrix.column(last.h[:m])
    A = (-(Jinv @ hbar)).col(0)
    B = Jinv @ Mbar
    Y = [RationalFn.sym(s) for s in output_stack(sys.p, last.k)]
    BY = (B @ SymMatrix.column(Y)).col(0)
    u = [a + by for a, by in zip(A, BY)]
    singh = report.singh_activated_at is not None
    state_only = all(s.kind == "x" for e in A for s in e.symbols()) and all(
        s.kind == "x" for s in B.symbols()
    )
    if singh or not state_only:
        return InverseMap(last.k, SINGH, u, states=sys.states, p=sys.p)
    origin = {s: 0 for s in sys.states}
    for a in A:
        if a.evaluate(origin) != 0:
            raise OistabError(f"A(0) = {a.evaluate(origin)} != 0 despite f(0) = 0")
    return InverseMap(last.k, AFFINE, u, A, B, states=sys.states, p=sys.p)


@dataclass
class SymbolicCheck:
    ok: bool
    residuals: list


def verify_inverse_symbolic(inv: InverseMap, sys: AffineSystem) -> SymbolicCheck:
    """Substitute the output-derivative chain into the inverse; expect ``u_0``."""
    chain = derivative_chain(sys, inv.k_star)
    sub = chain.substitution(inv.k_star)
    residuals = []
    for expr, u in zip(inv.u, input_family(sys.m, 0)):
        val = substitute(expr.num, sub) / substitute(expr.den, sub)
        residuals.append(val - RationalFn.sym(u))
    return SymbolicCheck(all(r.is_zero() for r in residuals), residuals)


# ---------------------------------------------------------------------------
# tables


@dataclass
class Table:
    """Nondecreasing samples of a comparison function on an increasing grid."""

    grid: list
    values: list

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.shape != v.shape or g.ndim != 1 or len(g) == 0:
            raise ContractError("grid and values must be equal-length 1-D sequences")
        if np.any(np.diff(g) <= 0):
            raise ContractError("grid must be strictly increasing")
        if np.any(np.diff(v) < 0):
            raise ContractError("table values must be nondecreasing")
        if g[0] == 0 and v[0] != 0:
            raise ContractError("table must vanish at 0")

    def __call__(self, s):
        """Linear interpolation, clamped at both grid ends."""
        return np.interp(s, self.grid, self.values)

    def upper(self, s):
        """Value at the smallest grid point >= s (conservative for sampled maxima)."""
        idx = np.searchsorted(np.asarray(self.grid), s, side="left")
        idx = np.minimum(idx, len(self.grid) - 1)
        return np.asarray(self.values)[idx]


@dataclass
class BoundEstimate:
    radius_grid: list
    gamma1: list
    gamma2: list
    rho1: list
    rho2: list
    b_norm: float
    box: list
    sample_count: int
    skipped: int = 0
    seed: int = 0
    norm: str = "frobenius"

    def table(self, name: str) -> Table:
        return Table(self.radius_grid, getattr(self, name))


def halton_points(dim: int, count: int, seed: int) -> np.ndarray:
    """Deterministic scrambled Halton points in the unit cube."""
    return qmc.Halton(d=dim, scramble=True, seed=seed).random(count)


def scale_to_box(unit: np.ndarray, box: Sequence) -> np.ndarray:
    lo = np.array([b[0] for b in box], dtype=float)
    hi = np.array([b[1] for b in box], dtype=float)
    return lo + unit * (hi - lo)


def default_grid(box: Sequence, points: int = 33) -> list:
    rmax = math.sqrt(sum(max(abs(lo), abs(hi)) ** 2 for lo, hi in box))
    if rmax == 0:
        return [0.0]
    return [float(r) for r in np.linspace(0.0, rmax, points)]


def estimate_bounds(
    inv: InverseMap,
    box: Sequence,
    grid: Optional[Sequence] = None,
    samples: int = 4096,
    seed: int = 0,
) -> BoundEstimate:
    if inv.mode != AFFINE:
        raise InversionUnavailable("bound tables need an affine-mode inverse")
    n = len(inv.states)
    if len(box) != n:
        raise ValueError(f"box has {len(box)} intervals for {n} states")
    if any(not (lo <= 0 <= hi) for lo, hi in box):
        raise ValueError("box must contain the origin")
    grid = default_grid(box) if grid is None else [float(r) for r in grid]
    args = list(inv.states)
    fA = compile_vector(inv.A, args)
    fB = compile_vector([e for row in inv.B.entries for e in row], args)

    origin = np.zeros(n)
    b_norm = float(np.linalg.norm(fB(origin)))
    pts = scale_to_box(halton_points(n, samples, seed), box) if samples else np.zeros((0, n))
    pts = np.vstack([origin, pts])
    with np.errstate(divide="ignore", invalid="ignore"):
        Avals = fA(pts.T)
        Bvals = fB(pts.T)
    a_norm = np.linalg.norm(Avals, axis=0)
    b_excess = np.maximum(np.linalg.norm(Bvals, axis=0) - b_norm, 0.0)
    good = np.isfinite(a_norm) & np.isfinite(b_excess)
    skipped = int((~good).sum())
    if skipped > 0.1 * len(pts):
        raise UnreliableEstimate(f"{skipped} of {len(pts)} samples hit singular points")
    xnorm = np.linalg.norm(pts, axis=1)[good]
    a_norm, b_excess = a_norm[good], b_excess[good]
    order = np.argsort(xnorm, kind="stable")
    xnorm = xnorm[order]
    a_run = np.maximum.accumulate(a_norm[order])
    b_run = np.maximum.accumulate(b_excess[order])
    g1, g2 = [], []
    for r in grid:
        idx = np.searchsorted(xnorm, r, side="right") - 1
        g1.append(float(a_run[idx]) if idx >= 0 else 0.0)
        g2.append(float(b_run[idx]) if idx >= 0 else 0.0)
    rho1 = [a + 0.5 * b * b for a, b in zip(g1, g2)]
    rho2 = [b_norm * r + 0.5 * r * r for r in grid]
    return BoundEstimate(
        radius_grid=grid,
        gamma1=g1,
        gamma2=g2,
        rho1=rho1,
        rho2=rho2,
        b_norm=b_norm,
        box=[list(map(float, b)) for b in box],
        sample_count=len(pts),
        skipped=skipped,
        seed=seed,
    )


def compose_bounds(rho1: Table, rho2: Table, beta_bar: dict, gamma_bar: Table):
    """Gains of the combined estimate from detectability and input bounding.

    ``gamma(s) = rho1(2 gammaBar(s)) + rho2(s) + gammaBar(s)`` on gammaBar's
    grid, and for every time slice ``t`` of ``beta_bar``,
    ``beta(s, t) = rho1(2 betaBar(s, t)) + betaBar(s, t)``.
    Arguments are Table instances (construction enforces monotonicity).
    """
    for t in (rho1, rho2, gamma_bar, *beta_bar.values()):
        if not isinstance(t, Table):
            raise ContractError("compose_bounds expects Table arguments")
    s = np.asarray(gamma_bar.grid, dtype=float)
    gb = np.asarray(gamma_bar.values, dtype=float)
    gamma = Table(list(s), list(rho1(2 * gb) + rho2(s) + gb))
    beta = {}
    for t, slice_ in sorted(beta_bar.items()):
        bb = np.asarray(slice_.values, dtype=float)
        beta[t] = Table(list(slice_.grid), list(rho1(2 * bb) + bb))
    return beta, gamma


@dataclass
class BoundingCheck:
    samples: int
    violations: list = field(default_factory=list)
    worst_margin: float = math.inf

    @property
    def ok(self) -> bool:
        return not self.violations


def sampled_input_bounding_check(
    inv: InverseMap,
    sys: AffineSystem,
    bounds: BoundEstimate,
    samples: int = 10_000,
    input_box: Optional[Sequence] = None,
    seed: int = 1,
) -> BoundingCheck:
    """Test ``|u_0| <= rho1(|x|) + rho2(|(H_0, ..., H_k*)|)`` at sampled points.

    States are drawn from the bounds' box and the input derivatives
    ``u_0 .. u_{k*-1}`` from ``input_box`` (default ``[-1, 1]`` per entry).
    Table lookups use the next grid point up, matching how the sampled
    maxima were accumulated.
    """
    n, m, k = sys.n, sys.m, inv.k_star
    u_syms = [input_(c, j) for j in range(k) for c in range(1, m + 1)]
    if input_box is None:
        input_box = [(-1.0, 1.0)] * len(u_syms)
    chain = derivative_chain(sys, k)
    args = list(sys.states) + u_syms
    fH = compile_vector(chain.stack(k), args)
    unit = halton_points(n + len(u_syms), samples, seed)
    pts = np.hstack([scale_to_box(unit[:, :n], bounds.box), scale_to_box(unit[:, n:], input_box)])
    vals = fH(pts.T)
    xnorm = np.linalg.norm(pts[:, :n], axis=1)
    u0norm = np.linalg.norm(pts[:, n:n + m], axis=1)
    ynorm = np.linalg.norm(vals, axis=0)
    rhs = bounds.table("rho1").upper(xnorm) + bounds.b_norm * ynorm + 0.5 * ynorm ** 2
    margin = rhs - u0norm
    bad = np.nonzero(margin < 0)[0]
    return BoundingCheck(
        samples=samples,
        violations=[pts[i].tolist() for i in bad],
        worst_margin=float(margin.min()) if len(margin) else math.inf,
    )
