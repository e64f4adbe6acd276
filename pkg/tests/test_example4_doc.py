"""Example 4: closed-form recovery formulas obtained by differentiation.

The system is output-input stable although its decoupling matrix loses rank
on x4 = 0.  Reading the dynamics directly gives

    x4 = dy3,  x5 = dy2 - dy3*d2y3,
    u1 = dy1,  u2 = d2y3,  u3 = d2y2 - d2y3^2 - dy3*d3y3.

The recovery formula for u3 commonly quoted for this example has
``dy3*d2y3`` in place of ``dy3*d3y3``, and quotes ``x5 = dy2 - dy3*dy3``.
Both disagree with formal differentiation; the tests below record the
derived formulas and show the quoted ones fail the substitution oracle.
"""

import pytest

from helpers import P
from oistab.fixtures import example4
from oistab.inversion import build_inverse, verify_inverse_symbolic
from oistab.model import derivative_chain
from oistab.structure import Assumption2Violation, StructureConfig, run
from oistab.symbolic import RationalFn, input_family, state, substitute

DERIVED_U = ["dy1", "d2y3", "d2y2 - d2y3^2 - dy3*d3y3"]
DERIVED_X = {4: "dy3", 5: "dy2 - dy3*d2y3"}
QUOTED_U3 = "d2y2 - d2y3^2 - dy3*d2y3"
QUOTED_X5 = "dy2 - dy3*dy3"


def through_chain(text, depth=3):
    sub = derivative_chain(example4(), depth).substitution(depth)
    return substitute(P(text), sub)


@pytest.mark.parametrize("i, text", list(enumerate(DERIVED_U)))
def test_derived_input_formulas(i, text):
    u0 = input_family(3, 0)[i]
    assert through_chain(text) == RationalFn.sym(u0)


@pytest.mark.parametrize("idx, text", list(DERIVED_X.items()))
def test_derived_state_formulas(idx, text):
    assert through_chain(text) == RationalFn.sym(state(idx))


def test_quoted_u3_fails_the_oracle():
    residual = through_chain(QUOTED_U3) - RationalFn.sym(input_family(3, 0)[2])
    assert not residual.is_zero()


def test_quoted_x5_fails_the_oracle():
    residual = through_chain(QUOTED_X5) - RationalFn.sym(state(5))
    assert not residual.is_zero()


def test_strict_run_reports_locus():
    rep = run(example4())
    assert isinstance(rep.outcome, Assumption2Violation)
    assert [str(q) for q in rep.outcome.locus] == ["x4"]


def test_permissive_inverse_agrees_off_the_locus():
    """Off x4 = 0 the generic run inverts; with x4, x5 eliminated it is the derived u."""
    sys_ = example4()
    rep = run(sys_, StructureConfig(strict=False))
    inv = build_inverse(rep, sys_)
    assert verify_inverse_symbolic(inv, sys_).ok
    elim = {state(i): RationalFn(P(t)) for i, t in DERIVED_X.items()}
    for expr, text in zip(inv.u, DERIVED_U):
        assert expr.substitute(elim) == RationalFn(P(text))
