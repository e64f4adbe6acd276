"""Structure algorithm, assumption diagnostics and Singh's variant."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oistab.fixtures import (
    LINEAR_SEEDS,
    double_integrator,
    example1,
    example2,
    example3,
    example3_extended,
    example4,
    linear_system,
    random_linear_system,
)
from oistab.structure import (
    AFFINE,
    SINGH,
    Assumption1Violation,
    Assumption2Violation,
    IterationCap,
    StructureConfig,
    Terminated,
    check_assumption1,
    defining_relation_residual,
    init,
    run,
    step,
)
from oistab.symbolic import OUTPUT, SymMatrix, witness_is_valid

ALL_FIXTURES = [example1, example2, example3, example3_extended, example4, double_integrator] + [
    (lambda s=s, n=n, m=m: random_linear_system(s, n, m)) for s, n, m in LINEAR_SEEDS
]


# -- init --------------------------------------------------------------------


def test_init_example1():
    st0 = init(example1())
    assert [str(e) for e in st0.hhat] == ["x1", "x2"]
    assert st0.r == 0 and st0.k == 0 and st0.mode == AFFINE
    assert st0.Jbar.rows == 0


def test_init_example4():
    assert [str(e) for e in init(example4()).hhat] == ["x1", "x2", "x3"]


@pytest.mark.parametrize("fixture", ALL_FIXTURES)
def test_init_identity(fixture):
    sys_ = fixture()
    assert (init(sys_).M - SymMatrix.identity(sys_.p)).is_zero()


# -- assumption 1 ------------------------------------------------------------


def test_assumption1_example1_step1_holds():
    sys_ = example1()
    st1 = step(init(sys_), sys_, singh=False)
    assert [str(e) for e in st1.Mhat.row(0)] == ["0", "0", "-x4", "1"]
    assert check_assumption1(st1, sys_) == []


def test_assumption1_example3_step1_fails():
    sys_ = example3()
    st1 = step(init(sys_), sys_, singh=False)
    viol = check_assumption1(st1, sys_)
    assert len(viol) == 1
    row, inp, col, expr = viol[0]
    # the dy1 coefficient -x2 of the unreduced row has L_g1(-x2) = -x2
    assert (row, inp, col, str(expr)) == (1, 0, 2, "-x2")


@pytest.mark.parametrize("fixture", ALL_FIXTURES)
def test_assumption1_trivial_at_step0(fixture):
    sys_ = fixture()
    assert check_assumption1(init(sys_), sys_) == []


# -- step --------------------------------------------------------------------


def test_step_example1():
    sys_ = example1()
    st1 = step(init(sys_), sys_, singh=False)
    assert st1.r == 1
    assert st1.R.to_strings() == [["1", "0"], ["-x4", "1"]]
    assert [str(e) for e in st1.hhat] == ["x3"]
    assert st1.E == [0, 1]
    assert st1.F.to_strings() == [["-x4"]]


def test_step_example2_violation():
    sys_ = example2()
    out = step(init(sys_), sys_, singh=False)
    assert isinstance(out, Assumption2Violation)
    assert [str(q) for q in out.locus] == ["x2"]
    assert out.step == 0


def test_step_example4_violation():
    sys_ = example4()
    out = step(init(sys_), sys_, singh=False)
    assert isinstance(out, Assumption2Violation)
    assert [str(q) for q in out.locus] == ["x4"]


def test_step_permissive_continues_past_locus():
    sys_ = example2()
    out = step(init(sys_), sys_, singh=False, strict=False)
    assert not isinstance(out, Assumption2Violation)
    assert out.r == 2
    assert [str(q) for q in out.locus] == ["x2"]


# -- run ---------------------------------------------------------------------


def test_run_example1():
    rep = run(example1())
    assert rep.outcome == Terminated(2)
    assert rep.ranks == [0, 1, 2]
    assert rep.singh_activated_at is None
    assert rep.steps[1].R.to_strings() == [["1", "0"], ["-x4", "1"]]


def test_run_example2():
    rep = run(example2())
    assert isinstance(rep.outcome, Assumption2Violation)
    assert [str(q) for q in rep.outcome.locus] == ["x2"]


def test_run_example3_singh():
    rep = run(example3())
    assert rep.outcome == Terminated(2)
    assert rep.singh_activated_at == 1
    assert rep.steps[-1].mode == SINGH


def test_run_example3_affine_only():
    rep = run(example3(), StructureConfig(affine_only=True))
    assert isinstance(rep.outcome, Assumption1Violation)
    assert rep.outcome.step == 1


def test_run_example3_extended():
    rep = run(example3_extended())
    assert rep.terminated
    assert rep.outcome.k_star == 3


def test_run_double_integrator():
    rep = run(double_integrator())
    assert rep.outcome == Terminated(2)
    assert rep.ranks == [0, 0, 1]


def test_run_iteration_cap():
    rep = run(double_integrator(), StructureConfig(max_iter=1))
    assert rep.outcome == IterationCap(1)


def test_run_rejects_invalid_cap():
    with pytest.raises(ValueError):
        run(example1(), StructureConfig(max_iter=0))


def test_run_default_cap_is_n_plus_p():
    # no input reaches the output: the cap is the only way out
    sys_ = linear_system([[0, 0], [0, -1]], [[0], [1]], [[1, 0]])
    rep = run(sys_)
    assert rep.outcome == IterationCap(3)


# -- invariants --------------------------------------------------------------


@pytest.mark.parametrize("fixture", ALL_FIXTURES)
def test_defining_relation_and_monotone_ranks(fixture):
    sys_ = fixture()
    rep = run(sys_, StructureConfig(strict=False))
    for st_ in rep.steps:
        assert all(r.is_zero() for r in defining_relation_residual(st_, sys_))
        assert st_.Jbar.rows == st_.r
    assert rep.ranks == sorted(rep.ranks)
    if rep.terminated:
        assert rep.ranks[-1] == sys_.m


@pytest.mark.parametrize("fixture", ALL_FIXTURES)
def test_witness_valid_at_every_step(fixture):
    sys_ = fixture()
    rep = run(sys_, StructureConfig(strict=False))
    for prev, st_ in zip(rep.steps, rep.steps[1:]):
        stacked = prev.Jbar.vstack(st_.Jhat)
        assert st_.rank_witness.rank == st_.r
        assert witness_is_valid(stacked, st_.rank_witness)


@pytest.mark.parametrize("fixture", ALL_FIXTURES)
def test_affine_mode_never_touches_output_symbols(fixture):
    sys_ = fixture()
    rep = run(sys_)
    if rep.singh_activated_at is None:
        for st_ in rep.steps:
            for row in st_.M.entries:
                for e in row:
                    assert all(s.kind != OUTPUT for s in e.symbols())


@pytest.mark.parametrize("fixture", ALL_FIXTURES)
def test_runs_are_deterministic(fixture):
    a, b = run(fixture()), run(fixture())
    assert a.ranks == b.ranks
    assert a.outcome == b.outcome
    for sa, sb in zip(a.steps, b.steps):
        assert sa.M.to_strings() == sb.M.to_strings()
        assert sa.E == sb.E
        assert [str(e) for e in sa.h] == [str(e) for e in sb.h]


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 3), st.integers(1, 2), st.data())
def test_random_linear_systems_keep_invariants(n, m, data):
    ints = st.integers(-1, 2)
    A = [[data.draw(ints) for _ in range(n)] for _ in range(n)]
    B = [[data.draw(ints) for _ in range(m)] for _ in range(n)]
    C = [[data.draw(ints) for _ in range(n)] for _ in range(m)]
    sys_ = linear_system(A, B, C)
    rep = run(sys_)
    # linear systems have constant decoupling matrices: never an A1/A2 violation
    assert isinstance(rep.outcome, (Terminated, IterationCap))
    assert rep.ranks == sorted(rep.ranks)
    for prev, st_ in zip(rep.steps, rep.steps[1:]):
        assert witness_is_valid(prev.Jbar.vstack(st_.Jhat), st_.rank_witness)
        assert all(r.is_zero() for r in defining_relation_residual(st_, sys_))
