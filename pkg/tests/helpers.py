"""Small builders shared by the test modules."""
from __future__ import annotations

import math

from gfe_lab.core import FunTuple, SampleSet
from gfe_lab.spaces import REALS


def real_fun(fn, name="f") -> FunTuple:
    return FunTuple((fn,), REALS, REALS, name)


def grid(lo, hi, step) -> SampleSet:
    n = round((hi - lo) / step)
    return SampleSet(REALS, tuple(round(lo + i * step, 12) for i in range(n + 1)), "test-grid")


def step_at_zero(x):
    return 0.0 if x < 0 else 1.0


def brute_force_max(values):
    """Largest value and the index of its first occurrence."""
    best, where = -math.inf, None
    for i, v in enumerate(values):
        if v > best:
            best, where = v, i
    return best, where


def residual_gap(sys_a, sys_b, f, S) -> float:
    """Largest pointwise difference between the residuals of two systems on S^p."""
    import itertools

    from gfe_lab.core import as_system, residual

    worst = 0.0
    for ea, eb in zip(as_system(sys_a).equations, as_system(sys_b).equations):
        for x in itertools.product(S.points, repeat=ea.p):
            worst = max(worst, abs(residual(ea, f, x) - residual(eb, f, x)))
    return worst
