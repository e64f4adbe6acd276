"""System validation, Lie derivatives and the output-derivative chain."""

import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import P, X
from oistab.errors import ValidationError
from oistab.fixtures import double_integrator, example1, example2, example3, linear_system
from oistab.model import AffineSystem, GeneralSystem, derivative_chain, lie_derivative, validate
from oistab.symbolic import Polynomial, SymMatrix, TIME_SYM, input_, state
from oistab.verify import InputSignal, integrate

x1, x2, x3, x4 = X


def _example1_with(f=None, h=None):
    s = example1()
    return AffineSystem.build(s.states, f or list(s.f), [list(r) for r in s.G], h or list(s.h), "variant")


def test_validate_example1_clean():
    rep = validate(example1())
    assert rep.ok and rep.errors == [] and rep.warnings == []


def test_validate_warns_on_nonzero_output_at_origin():
    rep = validate(_example1_with(h=[P("x1"), P("x2 + 1")]))
    assert rep.ok
    assert len(rep.warnings) == 1 and "h(0)" in rep.warnings[0]


def test_validate_rejects_nonzero_drift_at_origin():
    f = list(example1().f)
    f[3] = P("-x4 + x1^2 + 1")
    rep = validate(_example1_with(f=f))
    assert not rep.ok
    assert any("f(0)" in e for e in rep.errors)
    with pytest.raises(ValidationError):
        rep.raise_if_failed()


def test_validate_rejects_more_inputs_than_outputs():
    s = AffineSystem.build([x1], [P("-x1")], [[1, 1]], [P("x1")])
    assert any("m" in e for e in validate(s).errors)


def test_validate_rejects_stray_symbols():
    s = AffineSystem.build([x1, x2], [P("x2"), P("x3")], [[0], [1]], [P("x1")])
    assert not validate(s).ok


def test_validate_dimension_mismatch():
    s = AffineSystem(states=(x1, x2), f=(P("x2"),), G=((Polynomial(),), (Polynomial.const(1),)), h=(P("x1"),))
    assert not validate(s).ok


def test_validate_general_system():
    g = GeneralSystem(states=(x1,), m=1, f=(P("-x1 + u1"),), h=(P("x1"),))
    assert validate(g).ok


# -- lie derivative ----------------------------------------------------------


def test_lie_derivative_example1():
    s = example1()
    assert lie_derivative(P("x3"), list(s.f), s.states).is_zero()
    assert lie_derivative(P("x4"), list(s.f), s.states) == P("-x4 + x1^2")


@given(st.fractions(-10, 10))
def test_lie_derivative_of_constant(c):
    s = example1()
    assert lie_derivative(Polynomial.const(c), list(s.f), s.states).is_zero()


def test_lie_derivative_componentwise_on_matrix():
    s = example1()
    M = SymMatrix([[P("x4"), P("x2")], [P("1"), P("x1")]])
    out = lie_derivative(M, list(s.f), s.states)
    assert out.to_strings() == [["x1^2 - x4", "x3"], ["0", "0"]]


def test_lie_derivative_dimension_mismatch():
    with pytest.raises(ValueError):
        lie_derivative(P("x1"), [P("x1")], (x1, x2))


# -- chain -------------------------------------------------------------------


def test_chain_base_case():
    for sys_ in (example1(), example2(), double_integrator()):
        assert list(derivative_chain(sys_, 0).H[0]) == list(sys_.h)


def test_chain_example1_first_level():
    H1 = derivative_chain(example1(), 1).H[1]
    assert [str(e) for e in H1] == ["u1", "x4*u1 + x3"]


def test_chain_example2_first_level():
    H1 = derivative_chain(example2(), 1).H[1]
    assert [str(e) for e in H1] == ["u1", "x2*u2 + x3"]


def test_chain_example1_second_level_uses_input_derivatives():
    H2 = derivative_chain(example1(), 2).H[2]
    assert [str(e) for e in H2] == ["du1", "x1^2*u1 - x4*u1 + x4*du1 + u2"]


def test_chain_is_memoized():
    s = example3()
    assert derivative_chain(s, 3) is derivative_chain(s, 3)


def test_chain_rejects_negative_depth():
    with pytest.raises(ValueError):
        derivative_chain(example1(), -1)


def _markov_chain_check(A, B, C, depth):
    """H_i = C A^i x + sum_j C A^(i-1-j) B u_j, compared entrywise."""
    sys_ = linear_system(A, B, C)
    chain = derivative_chain(sys_, depth)
    An, Bn, Cn = sympy.Matrix(A), sympy.Matrix(B), sympy.Matrix(C)
    n, m = An.shape[0], Bn.shape[1]
    xs = [state(i) for i in range(1, n + 1)]
    for i in range(depth + 1):
        CA = Cn * An ** i
        for row in range(Cn.shape[0]):
            expect = Polynomial()
            for col in range(n):
                expect = expect + Polynomial.const(Fraction(str(CA[row, col]))) * Polynomial.sym(xs[col])
            for j in range(i):
                CAB = Cn * An ** (i - 1 - j) * Bn
                for c in range(m):
                    expect = expect + Polynomial.const(Fraction(str(CAB[row, c]))) * Polynomial.sym(input_(c + 1, j))
            assert chain.H[i][row] == expect


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 4), st.integers(1, 2), st.data())
def test_linear_chain_matches_markov_form(n, m, data):
    ints = st.integers(-2, 2)
    A = [[data.draw(ints) for _ in range(n)] for _ in range(n)]
    B = [[data.draw(ints) for _ in range(m)] for _ in range(n)]
    C = [[data.draw(ints) for _ in range(n)] for _ in range(m)]
    _markov_chain_check(A, B, C, 3)


@settings(max_examples=15, deadline=None)
@given(st.fractions(-3, 3, max_denominator=4).filter(lambda c: c != 0), st.data())
def test_linear_chain_scales_with_drift(c, data):
    n = 3
    ints = st.integers(-2, 2)
    A = [[data.draw(ints) for _ in range(n)] for _ in range(n)]
    B = [[data.draw(ints)] for _ in range(n)]
    C = [[data.draw(ints) for _ in range(n)]]
    scaled = [[c * a for a in row] for row in A]
    H = derivative_chain(linear_system(A, B, C), 3).H
    Hs = derivative_chain(linear_system(scaled, B, C), 3).H
    for i in range(4):
        # the free response C A^i x scales by c^i
        free = H[i][0].partial_evaluate({s: 0 for s in H[i][0].symbols() if s.kind == "u"})
        free_s = Hs[i][0].partial_evaluate({s: 0 for s in Hs[i][0].symbols() if s.kind == "u"})
        assert free_s == free * Polynomial.const(c ** i)


def test_chain_consistency_finite_difference_slope():
    """Central differences of sampled H_i converge to H_{i+1} at second order."""
    sys_ = example1()
    t = Polynomial.sym(TIME_SYM)
    u = InputSignal.from_polys([Polynomial.const(1) + t, t ** 2])
    order, p = 2, sys_.p
    traj = integrate(sys_, [1.0, 0.5, -1.0, 2.0], u, 1.0, 1e-4, order=order)
    mid = int(round(0.5 / traj.dt))
    steps = (1e-2, 5e-3, 2.5e-3)
    errs = []
    for h in steps:
        j = int(round(h / traj.dt))
        fd = (traj.y[mid + j] - traj.y[mid - j]) / (2 * h)
        errs.append(float(np.max(np.abs(fd[: order * p] - traj.y[mid, p:]))))
    slopes = [math.log(errs[i] / errs[i + 1]) / math.log(steps[i] / steps[i + 1]) for i in range(2)]
    for s in slopes:
        assert 1.8 <= s <= 2.2, (errs, slopes)
