"""Reference systems: the worked examples plus seeded random linear systems."""

from __future__ import annotations

import random

import sympy

from .model import AffineSystem
from .symbolic import Polynomial, state


def _x(n):
    syms = [state(i) for i in range(1, n + 1)]
    return syms, [Polynomial.sym(s) for s in syms]


def example1() -> AffineSystem:
    s, (x1, x2, x3, x4) = _x(4)
    return AffineSystem.build(s, [0, x3, 0, -x4 + x1 ** 2], [[1, 0], [x4, 0], [0, 1], [0, 0]], [x1, x2], "example1")


def example2() -> AffineSystem:
    s, (x1, x2, x3, x4) = _x(4)
    return AffineSystem.build(s, [0, x3, 0, -x4 + x1 ** 2], [[1, 0], [0, x2], [0, 1], [0, 0]], [x1, x2], "example2")


def example3() -> AffineSystem:
    s, (x1, x2, x3) = _x(3)
    return AffineSystem.build(s, [0, x3, 0], [[1, 0], [x2, 0], [0, 1]], [x1, x2], "example3")


def example3_extended() -> AffineSystem:
    """Example 3 with x3' = x4, x4' = u2."""
    s, (x1, x2, x3, x4) = _x(4)
    return AffineSystem.build(s, [0, x3, x4, 0], [[1, 0], [x2, 0], [0, 0], [0, 1]], [x1, x2], "example3_extended")


def example4() -> AffineSystem:
    s, (x1, x2, x3, x4, x5) = _x(5)
    G = [[1, 0, 0], [0, x4, 0], [0, 0, 0], [0, 1, 0], [0, 0, 1]]
    return AffineSystem.build(s, [0, x5, x4, 0, 0], G, [x1, x2, x3], "example4")


def double_integrator() -> AffineSystem:
    s, (x1, x2) = _x(2)
    return AffineSystem.build(s, [x2, 0], [[0], [1]], [x1], "double_integrator")


def exponential_decay() -> AffineSystem:
    s, (x1,) = _x(1)
    return AffineSystem.build(s, [-x1], [[0]], [x1], "exponential_decay")


def _rank(rows) -> int:
    return sympy.Matrix(rows).rank() if rows else 0


def _controllable(A, B) -> bool:
    M = sympy.Matrix(B)
    blocks = [M]
    An = sympy.Matrix(A)
    for _ in range(len(A) - 1):
        blocks.append(An * blocks[-1])
    return sympy.Matrix.hstack(*blocks).rank() == len(A)


def _observable(A, C) -> bool:
    return _controllable(sympy.Matrix(A).T.tolist(), sympy.Matrix(C).T.tolist())


def _left_invertible(A, B, C) -> bool:
    n, m = len(A), len(B[0])
    An, Bn, Cn = sympy.Matrix(A), sympy.Matrix(B), sympy.Matrix(C)
    markov = [Cn * An ** i * Bn for i in range(2 * n)]
    p = Cn.rows
    k = 2 * n
    T = sympy.zeros(p * k, m * k)
    for i in range(k):
        for j in range(i + 1):
            T[i * p:(i + 1) * p, j * m:(j + 1) * m] = markov[i - j]
    return T.rank() - T[:, m:].rank() == m


def linear_matrices(seed: int, n: int, m: int, entries=(-1, 0, 0, 1, 2)):
    """Integer (A, B, C) with m = p that are controllable, observable and left invertible."""
    rng = random.Random(seed)
    while True:
        A = [[rng.choice(entries) for _ in range(n)] for _ in range(n)]
        B = [[rng.choice(entries) for _ in range(m)] for _ in range(n)]
        C = [[rng.choice(entries) for _ in range(n)] for _ in range(m)]
        if _controllable(A, B) and _observable(A, C) and _left_invertible(A, B, C):
            return A, B, C


def linear_system(A, B, C, name: str = "") -> AffineSystem:
    n = len(A)
    s, xs = _x(n)
    f = [sum((Polynomial.const(a) * x for a, x in zip(row, xs)), Polynomial()) for row in A]
    h = [sum((Polynomial.const(c) * x for c, x in zip(row, xs)), Polynomial()) for row in C]
    return AffineSystem.build(s, f, B, h, name)


# (seed, n, m); chosen so the corpus covers k* = 2 and 3 and a repeated rank
LINEAR_SEEDS = ((4, 4, 1), (31, 4, 2), (1, 3, 2))


def random_linear_system(seed: int, n: int, m: int) -> AffineSystem:
    A, B, C = linear_matrices(seed, n, m)
    return linear_system(A, B, C, f"linear_seed{seed}")


def corpus() -> dict:
    out = {
        "example1": example1(),
        "example2": example2(),
        "example3": example3(),
        "example3_extended": example3_extended(),
        "example4": example4(),
        "double_integrator": double_integrator(),
    }
    for seed, n, m in LINEAR_SEEDS:
        out[f"linear_seed{seed}"] = random_linear_system(seed, n, m)
    return out
