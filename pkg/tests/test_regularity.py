from __future__ import annotations

import math
import warnings

import pytest
from hypothesis import given, strategies as st

from gfe_lab.core import FunTuple, SampleSet
from gfe_lab.errors import NonIsotoneScale, PreconditionError, UnsupportedStalk
from gfe_lab.regularity import (
    Ball,
    BoundingRel,
    ContinuityScale,
    EpsLadder,
    FiniteStalk,
    Interval,
    Union,
    are_v_close,
    check_precontinuity,
    check_r_bounded,
    check_uniform_precontinuity,
    induced_scale,
    sup_distance,
)
from gfe_lab.spaces import INTEGERS, NATURALS, REALS
from gfe_lab.zoo import reference_solution

from helpers import grid, real_fun, step_at_zero

half = ContinuityScale.pointwise(lambda a, eps: eps / 2, "eps/2")
uniform_half = ContinuityScale.uniform(lambda eps: eps / 2, "eps/2")


def brute_precontinuity(f, gamma, eps0, anchors, probes, rungs):
    """Independent oracle: test every rung and every pair's own value gap."""
    for a in anchors:
        for x in probes:
            d = abs(x - a)
            for fi in f.components:
                e = abs(fi(x) - fi(a))
                for eps in [r for r in rungs if r >= eps0] + [e]:
                    if eps < eps0:
                        continue
                    g = gamma(eps) if gamma.kind == "uniform" else gamma(a, eps)
                    if d < g and e >= eps:
                        return False
    return True


# -- ladders ------------------------------------------------------------------

def test_ladder_values():
    lad = EpsLadder(0.1, 2, 3, extra=(0.05, 0.15))
    assert lad.values == pytest.approx((0.1, 0.15, 0.2, 0.4))
    with pytest.raises(PreconditionError):
        EpsLadder(0)
    with pytest.raises(PreconditionError):
        EpsLadder(1, multiplier=1)


# -- pointwise precontinuity ------------------------------------------------------

def test_linear_map_is_precontinuous():
    S = grid(-1, 1, 0.05)
    assert check_precontinuity(real_fun(lambda x: 2 * x), half, 0.01, S, S)


def test_step_fails_with_witness():
    A = SampleSet(REALS, (0.0,), "a")
    probes = SampleSet(REALS, (-0.01,), "p")
    v = check_precontinuity(real_fun(step_at_zero), half, 0.1, A, probes)
    assert not v.passed
    assert (v.witness.point, v.witness.anchor, v.witness.eps) == (-0.01, 0.0, 0.1)


def test_step_passes_above_jump():
    S = grid(-1, 1, 0.01)
    assert check_precontinuity(real_fun(step_at_zero), half, 3, S, S)


def test_non_isotone_scale_rejected():
    bad = ContinuityScale.pointwise(lambda a, eps: 1 / eps)
    S = grid(0, 1, 0.5)
    with pytest.raises(NonIsotoneScale):
        check_precontinuity(real_fun(abs), bad, 0.1, S, S)


def test_scale_kind_enforced():
    S = grid(0, 1, 0.5)
    with pytest.raises(PreconditionError):
        check_precontinuity(real_fun(abs), uniform_half, 0.1, S, S)
    with pytest.raises(PreconditionError):
        check_uniform_precontinuity(real_fun(abs), half, 0.1, S)


def test_scalar_fallback_for_non_vector_scale():
    # math.sqrt rejects arrays, so the scan falls back to scalar calls
    g = ContinuityScale.pointwise(lambda a, eps: math.sqrt(eps) / 10)
    S = grid(-1, 1, 0.1)
    assert check_precontinuity(real_fun(lambda x: x), g, 0.01, S, S)


@given(
    st.lists(st.floats(-2, 2), min_size=1, max_size=6, unique=True),
    st.floats(0.01, 3),
    st.floats(0.1, 4),
)
def test_precontinuity_matches_brute_force(points, eps0, slope):
    pts = tuple(sorted(points))
    S = SampleSet(REALS, pts, "pts")
    f = real_fun(lambda x: slope * x * x + step_at_zero(x))
    lad = EpsLadder(eps0, 2, 6)
    got = check_precontinuity(f, half, eps0, S, S, lad).passed
    assert got == brute_precontinuity(f, half, eps0, pts, pts, lad.values)


@given(st.floats(1e-3, 2), st.floats(1.0, 10), st.sampled_from([0.5, 0.9, 1.0]))
def test_precontinuity_monotone_in_eps0(eps0, factor, jump):
    f = real_fun(lambda x: 3 * x + (jump if x >= 0 else 0))
    S = grid(-0.2, 0.2, 0.05)
    if check_precontinuity(f, half, eps0, S, S):
        assert check_precontinuity(f, half, eps0 * factor, S, S)


# -- uniform precontinuity ---------------------------------------------------------

def test_uniform_examples():
    assert check_uniform_precontinuity(real_fun(lambda x: 2 * x), uniform_half, 0.01, grid(-1, 1, 0.05))
    v = check_uniform_precontinuity(real_fun(lambda x: x * x), uniform_half, 0.01, grid(0, 10, 0.001))
    assert not v.passed
    w = v.witness
    assert abs(w.point - w.anchor) < w.eps / 2 and w.distance >= w.eps >= 0.01
    singleton = SampleSet(REALS, (3.0,), "one")
    assert check_uniform_precontinuity(real_fun(step_at_zero), uniform_half, 1e-6, singleton)


def test_uniform_x_squared_oracle_pair():
    # the pair (10, 9.996) violates at eps = 0.01
    d, e = 0.004, 10**2 - 9.996**2
    assert d < 0.005 and e >= 0.01


# -- induced scale -----------------------------------------------------------------

def test_induced_scale_linear():
    S = grid(-1, 1, 0.05)
    lad = EpsLadder(1, 2, 3)
    g = induced_scale(real_fun(lambda x: 2 * x), SampleSet(REALS, (0.0,), "a"), S, lad,
                      delta_grid=[0.1, 0.2, 0.4, 0.8])
    assert g(0.0, 1) >= 0.4


def test_induced_scale_sin():
    S = grid(-1, 1, 0.01)
    lad = EpsLadder(0.1, 2, 3)
    g = induced_scale(real_fun(math.sin), SampleSet(REALS, (0.0,), "a"), S, lad,
                      delta_grid=[0.01 * i for i in range(1, 20)])
    assert g(0.0, 0.1) >= 0.09


def test_induced_scale_flags_jump():
    S = grid(-1, 1, 0.01)
    with pytest.warns(UserWarning):
        g = induced_scale(real_fun(step_at_zero), SampleSet(REALS, (0.0,), "a"), S, EpsLadder(0.5, 2, 1))
    assert g.warning
    assert g(0.0, 0.5) == g.floor


@given(st.sampled_from([math.sin, math.exp, abs, step_at_zero]))
def test_induced_scale_isotone(fn):
    S = grid(-1, 1, 0.1)
    lad = EpsLadder(0.05, 2, 8)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        g = induced_scale(real_fun(fn), S, S, lad)
    for a in S.points:
        row = [g(a, e) for e in lad.values]
        assert row == sorted(row)


def test_induced_scale_passes_its_own_check():
    S = grid(-1, 1, 0.1)
    lad = EpsLadder(0.05, 2, 6)
    # a delta below the spacing is always admissible, so nothing is flagged
    g = induced_scale(real_fun(math.sin), S, S, lad, delta_grid=[0.05, 0.1, 0.2, 0.4, 0.8])
    assert not g.warning
    assert check_precontinuity(real_fun(math.sin), g, 0.05, S, S, lad)


# -- bounding relations -------------------------------------------------------------

def test_r_bounded_examples():
    R = BoundingRel.interval(-10, 10)
    assert check_r_bounded(real_fun(lambda x: 2 * x), R, grid(-1, 1, 0.1))
    v = check_r_bounded(real_fun(math.exp), R, SampleSet(REALS, (0.0, 3.0), "a"))
    assert not v.passed and v.witness.point == 3.0
    fib = reference_solution("fibonacci", 1, 1)
    R100 = BoundingRel.finite(range(101))
    assert check_r_bounded(fib, R100, SampleSet(NATURALS, tuple(range(11)), "n"))
    assert not check_r_bounded(fib, R100, SampleSet(NATURALS, (11,), "n"))


def test_stalk_kinds():
    assert 3 in FiniteStalk([1, 3]) and 2 not in FiniteStalk(range(0, 2))
    assert 0.5 in Interval(0, 1) and "a" not in Interval(0, 1)
    assert (1.0, 0.0) in Ball((0.0, 0.0), 1) and 1 + 1j in Ball(0, 2)
    assert 7 in Union((FiniteStalk([7]), Interval(0, 1)))
    with pytest.raises(UnsupportedStalk):
        BoundingRel.constant({1, 2})


@given(
    st.lists(st.integers(-5, 5), min_size=1, max_size=8),
    st.integers(-5, 5),
    st.integers(0, 5),
    st.integers(0, 5),
)
def test_r_bounded_antitone_in_stalks(values, lo, width, grow):
    f = FunTuple((lambda n: values[n],), NATURALS, INTEGERS)
    A = SampleSet(NATURALS, tuple(range(len(values))), "n")
    small = BoundingRel.finite(range(lo, lo + width + 1))
    big = BoundingRel.finite(range(lo - grow, lo + width + grow + 1))
    if check_r_bounded(f, small, A):
        assert check_r_bounded(f, big, A)


# -- closeness ------------------------------------------------------------------------

def test_v_close_examples():
    S = grid(-1, 1, 0.1)
    f = real_fun(lambda x: 2 * x)
    assert are_v_close(f, f, S, 1e-12)
    assert not are_v_close(f, real_fun(lambda x: 2 * x + 0.5), S, 0.4)
    assert are_v_close(real_fun(math.sin), real_fun(lambda x: x), grid(-0.1, 0.1, 0.01), 1e-3)


@given(st.floats(-1, 1), st.floats(1e-6, 2), st.floats(1, 10))
def test_v_close_symmetric_and_monotone(shift, eps, factor):
    S = grid(-1, 1, 0.25)
    f = real_fun(math.sin)
    g = real_fun(lambda x: math.sin(x) + shift * x)
    assert are_v_close(f, g, S, eps).passed == are_v_close(g, f, S, eps).passed
    if are_v_close(f, g, S, eps):
        assert are_v_close(f, g, S, eps * factor)


def test_sup_distance_nan_is_inf():
    S = grid(0, 1, 0.5)
    assert sup_distance(real_fun(lambda x: math.nan), real_fun(abs), S) == math.inf
    assert sup_distance(real_fun(lambda x: x), real_fun(lambda x: x + 0.25), S) == 0.25
