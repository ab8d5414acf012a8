from __future__ import annotations

import itertools
import math

import pytest
from hypothesis import given, strategies as st

from gfe_lab.core import (
    ADD2,
    FunTuple,
    Gfe,
    GfeSystem,
    MatrixMapping,
    NamedOp,
    OpFamily,
    SampleSet,
    Table,
    identity,
    is_v_solution,
    lift_set,
    max_residual,
    projection,
    residual,
    residual_rows,
    satisfies,
    satisfies_verdict,
    tensor_apply,
    eval_side,
)
from gfe_lab.errors import ArityError, CapExceeded, EvaluationError, OutOfTableError, PreconditionError
from gfe_lab.spaces import INTEGERS, NATURALS, REALS
from gfe_lab.zoo import cauchy, exponential, fibonacci_equation, gamma_equation, jensen, sincos_system

from helpers import brute_force_max, grid, real_fun

finite_reals = st.floats(min_value=-100, max_value=100, allow_nan=False)


# -- tensor products ---------------------------------------------------------

def test_tensor_sincos_at_origin():
    f = FunTuple((math.sin, math.cos))
    assert tensor_apply(f, OpFamily(2, (ADD2,)), (0, 0)) == ((0.0,), (1.0,))


def test_tensor_identity_projections():
    f = FunTuple((lambda x: x,))
    assert tensor_apply(f, OpFamily.projections(2), (3, 5)) == ((3, 5),)


def test_tensor_mixed_family():
    f = FunTuple((lambda x: 2 * x,))
    assert tensor_apply(f, OpFamily(2, (ADD2, projection(1, 2))), (1, 4)) == ((10, 2),)


@given(st.lists(finite_reals, min_size=1, max_size=4))
def test_tensor_identity_gives_column(vals):
    x = vals[0]
    comps = tuple((lambda c: (lambda t: t * c))(c) for c in vals)
    f = FunTuple(comps)
    out = tensor_apply(f, OpFamily(1, (identity(),)), (x,))
    assert out == tuple((fi(x),) for fi in comps)


@given(st.lists(finite_reals, min_size=1, max_size=4))
def test_tensor_projections_give_value_matrix(xs):
    f = FunTuple((lambda t: t + 1, lambda t: t * t))
    out = tensor_apply(f, OpFamily.projections(len(xs)), tuple(xs))
    assert out == tuple(tuple(fi(x) for x in xs) for fi in f.components)


def test_tensor_arity_mismatch():
    with pytest.raises(ArityError):
        tensor_apply(FunTuple((abs,)), OpFamily.projections(2), (1,))


# -- combining maps ------------------------------------------------------------

def test_eval_side_examples():
    f2 = FunTuple((lambda x: 2 * x,))
    G = MatrixMapping.from_row(2, 2, lambda a, b: a + b)
    assert eval_side(G, f2, OpFamily.projections(2), (1, 4)) == 10
    gamma_G = gamma_equation().G
    table = FunTuple((Table({4: 6}),))
    assert eval_side(gamma_G, table, OpFamily(1, (identity(),)), (4,)) == 24
    per = sincos_system()["sin-add"].G
    assert eval_side(per, FunTuple((math.sin, math.cos)), OpFamily.projections(2), (math.pi / 2, 0)) == pytest.approx(1.0)


def test_matrix_shape_checked():
    G = MatrixMapping.entry(1, 2, 1)
    with pytest.raises(ArityError):
        G(((1,),), (0,))


def test_table_outside_keys():
    with pytest.raises(OutOfTableError):
        Table({0: 1})(3)


# -- residuals -----------------------------------------------------------------

def test_residual_examples():
    eq = cauchy()["cauchy"]
    assert residual(eq, real_fun(lambda x: 2 * x), (1, 2)) == 0
    assert residual(eq, real_fun(lambda x: x * x), (1, 1)) == 2
    assert residual(jensen()["jensen"], real_fun(lambda x: x**3), (0, 2)) == 3


def test_residual_nan_is_inf():
    eq = cauchy()["cauchy"]
    assert residual(eq, real_fun(lambda x: math.nan), (0, 0)) == math.inf


def test_division_by_zero_is_evaluation_error():
    alphas = OpFamily(1, (identity(),))
    G = MatrixMapping(1, 1, 1, lambda a, x: a[0][0] / x[0], True, "y/x")
    eq = Gfe("div", alphas, alphas, MatrixMapping.entry(1, 1, 1), G, REALS, REALS)
    with pytest.raises(EvaluationError):
        residual(eq, real_fun(lambda x: x), (0.0,))


@given(finite_reals, finite_reals)
def test_residual_depends_only_on_images(x, y):
    # symmetric operations: (x, y) and (y, x) have the same images
    alphas = OpFamily(2, (ADD2,))
    betas = OpFamily(2, (NamedOp("mul", 2, lambda u, v: u * v), ADD2))
    G = MatrixMapping.from_row(2, 2, lambda a, b: a - 3 * b)
    eq = Gfe("sym", alphas, betas, MatrixMapping.entry(1, 1, 2), G, REALS, REALS)
    f = real_fun(lambda t: t * t - 3 * t)
    assert residual(eq, f, (x, y)) == residual(eq, f, (y, x))


def test_max_residual_matches_brute_force():
    f = real_fun(lambda x: 2 * x + 0.001 * math.sin(x))
    S = grid(-1, 1, 0.01)
    res = max_residual(cauchy(), f, S)
    pts = lift_set(S, 2).points
    best, where = brute_force_max([residual(cauchy()["cauchy"], f, x) for x in pts])
    assert res.value == best
    assert res.witness == pts[where]
    assert res.value == pytest.approx(7.7e-4, abs=5e-6)
    # (1, 1) attains the same value; generation order puts (-1, -1) first
    assert residual(cauchy()["cauchy"], f, (1.0, 1.0)) == res.value


def test_max_residual_parallel_agrees(monkeypatch):
    f = real_fun(lambda x: 2 * x + 0.001 * math.sin(7 * x))
    S = grid(-1, 1, 0.02)
    serial = max_residual(cauchy(), f, S, workers=1)
    monkeypatch.setenv("GFE_LAB_THREADS", "4")
    assert max_residual(cauchy(), f, S) == serial
    assert max_residual(cauchy(), f, S, workers=3) == serial


def test_max_residual_empty_sample():
    S = SampleSet(REALS, (), "empty")
    assert max_residual(cauchy(), real_fun(lambda x: x * x), S).value == 0


def test_residual_rows_in_generation_order():
    S = grid(0, 1, 0.5)
    rows = list(residual_rows(cauchy(), real_fun(lambda x: x * x), S))
    assert [r[1] for r in rows] == list(itertools.product(S.points, repeat=2))


# -- approximate and exact satisfaction ---------------------------------------

def test_is_v_solution_examples():
    S = grid(-1, 1, 0.1)
    assert is_v_solution(cauchy(), real_fun(lambda x: 2 * x), S, 1e-9)
    v = is_v_solution(cauchy(), real_fun(lambda x: x * x), SampleSet(REALS, (1.0,), "one"), 1)
    assert not v.passed and v.witness.point == (1.0, 1.0)
    noisy = real_fun(lambda x: 2 * x + 0.001 * math.sin(x))
    assert is_v_solution(cauchy(), noisy, grid(-1, 1, 0.01), 1e-3)


def test_is_v_solution_needs_positive_eps():
    with pytest.raises(PreconditionError):
        is_v_solution(cauchy(), real_fun(abs), grid(0, 1, 0.5), 0)


@given(st.floats(1e-6, 10), st.floats(1, 100), st.integers(0, 5))
def test_v_solution_monotone_in_eps(eps, factor, power):
    f = real_fun(lambda x: x ** power)
    S = grid(-1, 1, 0.25)
    if is_v_solution(cauchy(), f, S, eps):
        assert is_v_solution(cauchy(), f, S, eps * factor)


@given(st.floats(1e-4, 3), st.integers(0, 8))
def test_v_solution_restricts(eps, drop):
    f = real_fun(lambda x: x * x)
    S = grid(-1, 1, 0.25)
    sub = SampleSet(REALS, S.points[drop:], "sub")
    if is_v_solution(cauchy(), f, S, eps):
        assert is_v_solution(cauchy(), f, sub, eps)


def test_satisfies_examples():
    assert satisfies(jensen(), real_fun(lambda x: 3 * x + 1), grid(-2, 2, 0.1), 1e-9)
    assert satisfies(exponential(), real_fun(math.exp), grid(-1, 1, 0.05), 1e-12)
    assert not satisfies(cauchy(), real_fun(lambda x: x * x), grid(-1, 1, 0.5))


@given(st.integers(-5, 5), st.integers(-5, 5), st.integers(0, 3))
def test_satisfies_exact_integers_matches_equality(f0, f1, perturb_at):
    fib = fibonacci_equation()
    vals = [f0, f1]
    for _ in range(10):
        vals.append(vals[-1] + vals[-2])
    vals[perturb_at + 2] += perturb_at % 2  # sometimes break the recurrence
    f = FunTuple((lambda n: vals[n],), NATURALS, INTEGERS)
    S = SampleSet(NATURALS, tuple(range(10)), "n")
    brute = all(vals[n + 2] == vals[n] + vals[n + 1] for n in range(10))
    assert satisfies(fib, f, S, 0) == brute
    assert satisfies_verdict(fib, f, S).passed == brute


def test_satisfies_verdict_witness():
    v = satisfies_verdict(cauchy(), real_fun(lambda x: x * x), grid(0, 1, 0.5))
    assert not v.passed
    assert v.witness.point == (0.5, 0.5) and v.witness.label == "cauchy"


# -- sample sets and lifting ------------------------------------------------------

def test_lift_set_examples():
    A = SampleSet(NATURALS, (0, 1), "a")
    assert lift_set(A, 2).points == ((0, 0), (0, 1), (1, 0), (1, 1))
    assert lift_set(SampleSet(NATURALS, (5,), "b"), 3).points == ((5, 5, 5),)
    assert lift_set(A, 0).points == ((),)
    with pytest.raises(CapExceeded):
        lift_set(SampleSet(NATURALS, tuple(range(100)), "c"), 4, cap=10**7)


def test_sample_set_rejects_duplicates_and_foreign_points():
    with pytest.raises(ValueError):
        SampleSet(NATURALS, (1, 1), "dup")
    with pytest.raises(ValueError):
        SampleSet(NATURALS, (-1,), "neg")


# -- systems ----------------------------------------------------------------------

def test_system_checks():
    eq = cauchy()["cauchy"]
    with pytest.raises(ValueError):
        GfeSystem((eq, eq))
    with pytest.raises(ArityError):
        GfeSystem((eq, sincos_system()["sin-add"]))


def test_gfe_type_validation():
    alphas = OpFamily(2, (ADD2,))
    with pytest.raises(ArityError):
        Gfe("bad", alphas, OpFamily.projections(1), MatrixMapping.entry(1, 1, 2),
            MatrixMapping.entry(1, 1, 1), REALS, REALS)


def test_nullary_equation_evaluates_once():
    c = NamedOp("zero", 0, lambda: 0)
    eq = Gfe("pin", OpFamily(0, (c,)), OpFamily(0, (c,)), MatrixMapping.entry(1, 1, 0),
             MatrixMapping(1, 1, 0, lambda a, x: 1, False, "1"), NATURALS, INTEGERS)
    S = SampleSet(NATURALS, (0, 1, 2), "n")
    v = satisfies_verdict(eq, FunTuple((lambda n: 1,)), S)
    assert v.passed and v.checked_count == 1
