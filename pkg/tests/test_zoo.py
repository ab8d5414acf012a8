from __future__ import annotations

import math

import pytest
from hypothesis import given, strategies as st

from gfe_lab.core import MatrixMapping, SampleSet, max_residual, satisfies
from gfe_lab.errors import ArityError
from gfe_lab.spaces import NATURALS, REALS
from gfe_lab.special import lanczos_gamma
from gfe_lab.zoo import (
    PRESETS,
    TABLE_DEPTH,
    ZOO_CASES,
    cauchy,
    homomorphism_system,
    pascal_table,
    preset,
    real_linear,
    recursion_equation,
    reference_solution,
    run_zoo_case,
    stirling1_table,
    stirling2_table,
)

from helpers import grid
from oracles import (
    binomial_oracle,
    block_count_histogram,
    gamma_oracle,
    sincos_residual_oracle,
    stirling1_oracle,
    stirling2_by_sets,
)


def test_every_preset_builds():
    for name in PRESETS:
        assert len(preset(name)) >= 1


def test_preset_types():
    assert preset("cauchy")["cauchy"].typ == (1, 1, 2, 2)
    assert {eq.typ for eq in preset("sincos")} == {(2, 1, 2, 2)}
    assert preset("gamma")["gamma"].typ == (1, 1, 1, 1)
    assert preset("fib")["fib"].typ == (1, 1, 2, 1)
    assert preset("factorial")["factorial"].typ == (1, 1, 1, 1)


@given(st.integers(1, 6))
def test_recursion_type(n):
    G = MatrixMapping.from_row(n, 1, lambda *ys: sum(ys))
    assert recursion_equation(n, G).typ == (1, 1, n, 1)


def test_recursion_shape_checked():
    with pytest.raises(ArityError):
        recursion_equation(2, MatrixMapping.from_row(3, 1, lambda *ys: 0))
    with pytest.raises(ArityError):
        recursion_equation(0, MatrixMapping.from_row(1, 1, lambda y: y))


@pytest.mark.parametrize("case", ZOO_CASES, ids=lambda c: c.name)
def test_zoo_case(case):
    passed, worst, _ = run_zoo_case(case)
    assert passed, f"{case.name}: worst residual {worst}"


def test_homomorphism_with_constant():
    # f(0) = 1 together with f(x + y) = f(x) f(y)
    sys = homomorphism_system([("add", 2), ("zero", 0)], [lambda x, y: x + y, 0.0],
                              [lambda a, b: a * b, 1.0])
    assert [eq.typ for eq in sys] == [(1, 1, 2, 2), (1, 1, 1, 0)]
    assert satisfies(sys, reference_solution("exp"), grid(-1, 1, 0.25), 1e-12)
    assert not satisfies(sys, reference_solution("zero"), grid(-1, 1, 0.25), 1e-12)


def test_real_linear_scalars():
    sys = real_linear((2, 3))
    assert sys.labels == ("add", "scale[2]", "scale[3]")
    assert satisfies(sys, reference_solution("linear", 5.0), grid(-2, 2, 0.1), 1e-9)
    assert not satisfies(sys, reference_solution("affine", 5.0, 1.0), grid(-2, 2, 0.1), 1e-9)


def test_sincos_against_high_precision():
    xs = grid(-5, 5, 0.1).points
    assert sincos_residual_oracle(1.0, xs, xs) < 1e-15
    assert max_residual(preset("sincos"), reference_solution("sincos", 1.0), grid(-5, 5, 0.1)).value <= 1e-12


def test_sincos_other_frequency():
    assert satisfies(preset("sincos"), reference_solution("sincos", 3.0), grid(-2, 2, 0.1), 1e-9)


def test_lanczos_matches_factorials_and_mpmath():
    for n in range(1, 11):
        assert abs(lanczos_gamma(n) - math.factorial(n - 1)) <= 1e-10 * math.factorial(n - 1)
    assert abs(lanczos_gamma(5) - 24) <= 24e-10
    for z in (0.5, 1.5, 7.25, 19.5, 0.5 + 2j, 3 - 1j, -0.5, -2.5 + 0.5j):
        ref = gamma_oracle(z)
        assert abs(lanczos_gamma(z) - ref) <= 1e-12 * abs(ref)


def test_lanczos_pole():
    with pytest.raises(ZeroDivisionError):
        lanczos_gamma(-1)


def test_gamma_relative_residual_at_integers():
    case = next(c for c in ZOO_CASES if c.preset == "gamma" and c.relative)
    passed, worst, _ = run_zoo_case(case)
    assert passed and worst <= 1e-8


def test_combinatorial_spot_values():
    assert pascal_table()[(2, 3)] == 10  # C(5, 2)
    assert stirling1_table()[(4, 2)] == 11
    assert stirling2_table()[(4, 2)] == 7
    assert stirling2_by_sets(4, 2) == 7
    assert stirling1_oracle(4, 2) == 11


def test_pascal_matches_closed_form():
    table = pascal_table()
    assert all(v == binomial_oracle(k, l) for (k, l), v in table.items())
    assert len(table) == (TABLE_DEPTH + 1) * (TABLE_DEPTH + 2) // 2


def test_stirling_tables_match_brute_force():
    s1, s2 = stirling1_table(), stirling2_table()
    for n in range(TABLE_DEPTH + 1):
        hist = block_count_histogram(n)
        for k in range(TABLE_DEPTH + 1):
            assert s1[(n, k)] == stirling1_oracle(n, k)
            assert s2[(n, k)] == (int(hist[k]) if k <= n else 0)


def test_factorial_and_fibonacci_solutions():
    fact = reference_solution("factorial")
    assert satisfies(preset("factorial"), fact, SampleSet(NATURALS, tuple(range(13)), "n"), 0)
    fib = reference_solution("fibonacci", 1, 1)
    assert fib(10) == (89,)
    assert satisfies(preset("fib"), fib, SampleSet(NATURALS, tuple(range(21)), "n"), 0)


def test_unknown_names():
    with pytest.raises(KeyError):
        preset("nope")
    with pytest.raises(KeyError):
        reference_solution("nope")


def test_cauchy_rejects_nonlinear():
    assert not satisfies(cauchy(), reference_solution("exp"), SampleSet(REALS, (0.5, 1.0), "pts"))
