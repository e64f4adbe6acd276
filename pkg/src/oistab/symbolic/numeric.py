"""Floating-point evaluation of exact expressions through generated source.

Used by the simulator and the bound sampler, where exact arithmetic is too
slow.  Generated functions accept scalars or numpy arrays; ``dtype`` selects
the working precision (the simulator uses ``np.longdouble``).
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .poly import Polynomial
from .rational import RationalFn


class _Consts:
    def __init__(self, dtype):
        self.dtype = dtype
        self.values: list = []
        self.index: dict = {}

    def ref(self, c) -> str:
        if c not in self.index:
            self.index[c] = len(self.values)
            self.values.append(self.dtype(c.numerator) / self.dtype(c.denominator))
        return f"c[{self.index[c]}]"


def _poly_source(p: Polynomial, names: dict, consts: _Consts) -> str:
    if p.is_zero():
        return "0"
    parts = []
    for mono, c in p.sorted_terms():
        factors = [consts.ref(c)]
        for s, e in mono:
            factors.append(names[s] if e == 1 else f"{names[s]}**{e}")
        parts.append("*".join(factors))
    return "(" + " + ".join(parts) + ")"


def expr_source(expr, names: dict, consts: _Consts) -> str:
    expr = RationalFn.coerce(expr)
    if expr.den.is_constant():
        return _poly_source(expr.as_polynomial(), names, consts)
    return f"({_poly_source(expr.num, names, consts)} / {_poly_source(expr.den, names, consts)})"


def compile_vector(exprs: Sequence, args: Sequence, dtype=float):
    """Return ``fn(values) -> np.ndarray`` evaluating ``exprs`` at ``args``.

    ``values`` is indexable in the order of ``args``.
    """
    names = {s: f"v[{i}]" for i, s in enumerate(args)}
    missing = set()
    for e in exprs:
        missing |= RationalFn.coerce(e).symbols() - set(names)
    if missing:
        raise KeyError(f"unbound symbols {sorted(str(s) for s in missing)}")
    consts = _Consts(dtype)
    # adding _z broadcasts constant entries against array arguments
    body = ", ".join(f"{expr_source(e, names, consts)} + _z" for e in exprs)
    zero = "_zero * v[0]" if args else "_zero"
    src = f"def _fn(v):\n    _z = {zero}\n    return _np.array([{body}], dtype=_dt)\n"
    scope = {"_np": np, "_dt": dtype, "_zero": dtype(0), "c": consts.values}
    exec(compile(src, "<oistab-numeric>", "exec"), scope)
    return scope["_fn"]


def compile_denominators(exprs: Sequence, args: Sequence, dtype=float):
    """Evaluator for the denominators of ``exprs`` (1 for polynomials)."""
    dens = [RationalFn.coerce(e).den for e in exprs]
    return compile_vector([RationalFn(d, normalize=False) for d in dens], args, dtype)
