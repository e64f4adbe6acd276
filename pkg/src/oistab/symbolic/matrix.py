"""Dense matrices of rational functions and rank machinery over the field."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from ..errors import AnnihilatorInfeasible, OistabError
from .poly import Polynomial
from .rational import RationalFn
from .squarefree import reduced_numerator, squarefree_factors


class SymMatrix:
    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Sequence[Sequence], cols: int | None = None):
        grid = [[RationalFn.coerce(v) for v in row] for row in entries]
        self.rows = len(grid)
        self.cols = len(grid[0]) if grid else (cols or 0)
        if any(len(r) != self.cols for r in grid):
            raise ValueError("ragged matrix")
        self.entries = grid

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "SymMatrix":
        return cls([[0] * cols for _ in range(rows)], cols=cols)

    @classmethod
    def identity(cls, n: int) -> "SymMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)], cols=n)

    @classmethod
    def column(cls, values: Sequence) -> "SymMatrix":
        return cls([[v] for v in values], cols=1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def row(self, i: int) -> list:
        return list(self.entries[i])

    def col(self, j: int) -> list:
        return [r[j] for r in self.entries]

    def select(self, rows: Iterable[int] | None = None, cols: Iterable[int] | None = None) -> "SymMatrix":
        rows = range(self.rows) if rows is None else list(rows)
        cols = range(self.cols) if cols is None else list(cols)
        cols = list(cols)
        return SymMatrix([[self.entries[i][j] for j in cols] for i in rows], cols=len(cols))

    def vstack(self, other: "SymMatrix") -> "SymMatrix":
        cols = max(self.cols, other.cols)
        if self.rows and other.rows and self.cols != other.cols:
            raise ValueError("column mismatch in vstack")
        return SymMatrix(self.entries + other.entries, cols=cols)

    def hstack(self, other: "SymMatrix") -> "SymMatrix":
        if self.rows != other.rows:
            raise ValueError("row mismatch in hstack")
        return SymMatrix([a + b for a, b in zip(self.entries, other.entries)],
                         cols=self.cols + other.cols)

    def map(self, fn: Callable) -> "SymMatrix":
        return SymMatrix([[fn(v) for v in row] for row in self.entries], cols=self.cols)

    def transpose(self) -> "SymMatrix":
        return SymMatrix([list(c) for c in zip(*self.entries)], cols=self.rows) if self.rows else SymMatrix([], cols=0)

    def __add__(self, other: "SymMatrix") -> "SymMatrix":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        return SymMatrix([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)],
                         cols=self.cols)

    def __neg__(self) -> "SymMatrix":
        return self.map(lambda v: -v)

    def __sub__(self, other: "SymMatrix") -> "SymMatrix":
        return self + (-other)

    def __matmul__(self, other: "SymMatrix") -> "SymMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = RationalFn.const(0)
                for k in range(self.cols):
                    a = self.entries[i][k]
                    if a.is_zero():
                        continue
                    b = other.entries[k][j]
                    if b.is_zero():
                        continue
                    acc = acc + a * b
                row.append(acc)
            out.append(row)
        return SymMatrix(out, cols=other.cols)

    def scale(self, c) -> "SymMatrix":
        c = RationalFn.coerce(c)
        return self.map(lambda v: v * c)

    def is_zero(self) -> bool:
        return all(v.is_zero() for row in self.entries for v in row)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymMatrix):
            return NotImplemented
        return self.shape == other.shape and (self - other).is_zero()

    __hash__ = None

    def symbols(self) -> set:
        out = set()
        for row in self.entries:
            for v in row:
                out |= v.symbols()
        return out

    def to_strings(self) -> list[list[str]]:
        return [[str(v) for v in row] for row in self.entries]

    def __repr__(self) -> str:
        return f"SymMatrix({self.to_strings()})"


# ---------------------------------------------------------------------------
# fraction-free elimination


def _clear_rows(M: SymMatrix) -> tuple[list[list[Polynomial]], list[Polynomial]]:
    """Scale each row by the product of its distinct denominators."""
    grid, mults = [], []
    for row in M.entries:
        dens: list[Polynomial] = []
        for v in row:
            if not v.den.is_constant() and all(v.den != d for d in dens):
                dens.append(v.den)
        mult = Polynomial.const(1)
        for d in dens:
            mult = mult * d
        prow = []
        for v in row:
            if v.den.is_constant():
                prow.append(v.as_polynomial() * mult)
            else:
                prow.append(v.num * mult.exact_divide(v.den))
        grid.append(prow)
        mults.append(mult)
    return grid, mults


def _bareiss(grid: list[list[Polynomial]]):
    """Row-priority fraction-free elimination.

    Pivot choice: the lowest unused row with a nonzero entry in an unused
    column, and within it the lowest such column.  Returns the pivot rows,
    pivot columns and the final pivot (the determinant of the pivot minor of
    the scaled matrix, up to sign).
    """
    a = [list(r) for r in grid]
    nrows = len(a)
    ncols = len(a[0]) if a else 0
    used_rows: list[int] = []
    used_cols: list[int] = []
    prev = Polynomial.const(1)
    while True:
        pivot = None
        for i in range(nrows):
            if i in used_rows:
                continue
            for j in range(ncols):
                if j not in used_cols and not a[i][j].is_zero():
                    pivot = (i, j)
                    break
            if pivot:
                break
        if pivot is None:
            break
        pr, pc = pivot
        p = a[pr][pc]
        for i in range(nrows):
            if i in used_rows or i == pr:
                continue
            factor = a[i][pc]
            for j in range(ncols):
                if j in used_cols:
                    continue
                val = p * a[i][j] - factor * a[pr][j]
                if not prev.is_constant() or prev.constant_value() != 1:
                    q = val.exact_divide(prev)
                    if q is None:
                        raise OistabError("fraction-free elimination lost exactness")
                    val = q
                a[i][j] = val
        used_rows.append(pr)
        used_cols.append(pc)
        prev = p
    return used_rows, used_cols, prev


def det(M: SymMatrix) -> RationalFn:
    if M.rows != M.cols:
        raise ValueError("determinant of non-square matrix")
    n = M.rows
    if n == 0:
        return RationalFn.const(1)
    if n == 1:
        return M[0, 0]
    if n == 2:
        return M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    grid, mults = _clear_rows(M)
    rows, cols, last = _bareiss(grid)
    if len(rows) < n:
        return RationalFn.const(0)
    sign = _perm_sign(rows) * _perm_sign(cols)
    denom = Polynomial.const(1)
    for mlt in mults:
        denom = denom * mlt
    return RationalFn(last * sign, denom)


def _perm_sign(order: Sequence[int]) -> int:
    sign = 1
    seen = list(order)
    for i in range(len(seen)):
        for j in range(i + 1, len(seen)):
            if seen[i] > seen[j]:
                sign = -sign
    return sign


def inverse(M: SymMatrix) -> SymMatrix:
    """Exact inverse through the adjugate."""
    n = M.rows
    if n != M.cols:
        raise ValueError("inverse of non-square matrix")
    d = det(M)
    if d.is_zero():
        raise ZeroDivisionError("matrix is singular over the function field")
    if n == 1:
        return SymMatrix([[RationalFn.const(1) / d]])
    adj = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = M.select([r for r in range(n) if r != i], [c for c in range(n) if c != j])
            cof = det(minor)
            if (i + j) % 2:
                cof = -cof
            adj[j][i] = cof / d
    return SymMatrix(adj, cols=n)


@dataclass
class RankWitness:
    rank: int
    pivot_rows: list[int]
    pivot_cols: list[int]
    pivot_minor: Polynomial
    locus: list[Polynomial] = field(default_factory=list)


def minor(M: SymMatrix, rows: Sequence[int], cols: Sequence[int]) -> RationalFn:
    return det(M.select(sorted(rows), sorted(cols)))


def witness_for(M: SymMatrix, rows: Sequence[int], cols: Sequence[int]) -> RankWitness:
    rows, cols = sorted(rows), sorted(cols)
    pm = reduced_numerator(minor(M, rows, cols))
    if pm.is_constant():
        pm = Polynomial.const(1) if pm.constant_value() > 0 else Polynomial.const(-1)
    return RankWitness(len(rows), rows, cols, pm, squarefree_factors(pm))


def generic_rank(M: SymMatrix) -> RankWitness:
    """Rank over the rational-function field with a checkable witness."""
    if M.rows == 0 or M.cols == 0:
        return RankWitness(0, [], [], Polynomial.const(1), [])
    grid, _ = _clear_rows(M)
    rows, cols, _ = _bareiss(grid)
    return witness_for(M, rows, cols)


def witness_is_valid(M: SymMatrix, w: RankWitness) -> bool:
    """Pivot minor nonzero and every adjoined (rank+1)-minor identically zero."""
    if len(w.pivot_rows) != w.rank or len(w.pivot_cols) != w.rank:
        return False
    if minor(M, w.pivot_rows, w.pivot_cols).is_zero():
        return False
    for i in range(M.rows):
        if i in w.pivot_rows:
            continue
        for j in range(M.cols):
            if j in w.pivot_cols:
                continue
            if not minor(M, w.pivot_rows + [i], w.pivot_cols + [j]).is_zero():
                return False
    return True


def constant_minor_selection(M: SymMatrix, rank: int, keep_rows: Sequence[int] = ()):
    """First (rows, cols) of size ``rank`` whose minor is a nonzero constant.

    Row sets must contain ``keep_rows``; candidates are scanned in
    lexicographic order.  Returns None when every candidate minor is
    nonconstant or zero.
    """
    keep = sorted(keep_rows)
    free = [i for i in range(M.rows) if i not in keep]
    for extra in itertools.combinations(free, rank - len(keep)):
        rows = sorted(keep + list(extra))
        for cols in itertools.combinations(range(M.cols), rank):
            m = minor(M, rows, cols)
            if not m.is_zero() and m.is_constant():
                return rows, list(cols)
    return None


def solve_annihilator(Jbar: SymMatrix, Jtilde: SymMatrix, pivot_cols: Sequence[int] | None = None) -> SymMatrix:
    """F with ``F @ Jbar + Jtilde == 0``, using an invertible column block of Jbar."""
    r = Jbar.rows
    if Jtilde.rows == 0:
        return SymMatrix.zeros(0, r)
    if r == 0:
        if not Jtilde.is_zero():
            raise AnnihilatorInfeasible("Jbar is empty but Jtilde is nonzero")
        return SymMatrix.zeros(Jtilde.rows, 0)
    if pivot_cols is None:
        w = generic_rank(Jbar)
        if w.rank != r:
            raise AnnihilatorInfeasible("Jbar does not have full row rank")
        pivot_cols = w.pivot_cols
    block = Jbar.select(None, pivot_cols)
    F = -(Jtilde.select(None, pivot_cols) @ inverse(block))
    if not (F @ Jbar + Jtilde).is_zero():
        raise AnnihilatorInfeasible("rows of Jtilde are not in the row space of Jbar")
    return F
