"""Ready-made equations and their reference solutions.

Covers homomorphy equations (groupoids, universal algebras, modules), the
sine/cosine addition system, the Gamma recursion, one-variable recursions
and two-variable grid recursions (binomial, Stirling numbers).
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

from .core import (
    FunTuple,
    Gfe,
    GfeSystem,
    MatrixMapping,
    NamedOp,
    OpFamily,
    SampleSet,
    as_system,
    constant,
    lift_set,
    max_residual,
    pair_shift,
    relative_residual,
    satisfies,
    shift,
)
from .errors import ArityError
from .spaces import COMPLEX, INTEGERS, NATURAL_PAIRS, NATURALS, REALS, SpaceDesc
from .special import lanczos_gamma

GAMMA_DOMAIN = SpaceDesc.complex_halfplane(0.5)
TABLE_DEPTH = 12


# ---------------------------------------------------------------------------
# homomorphisms
# ---------------------------------------------------------------------------

def homomorphism_system(
    signature: Sequence[tuple],
    x_ops: Sequence[Callable],
    y_ops: Sequence[Callable],
    domain: SpaceDesc = REALS,
    codomain: SpaceDesc = REALS,
) -> GfeSystem:
    """``f(op_X(x_1..x_p)) = op_Y(f(x_1)..f(x_p))`` for each symbol.

    Each equation has type ``(1, 1, p, p)``.  A nullary symbol pins
    ``f(c_X) = c_Y``; ``x_ops``/``y_ops`` then hold the constants.
    """
    if not len(signature) == len(x_ops) == len(y_ops):
        raise ArityError("need one X-operation and one Y-operation per symbol")
    eqs = []
    for (symbol, p), xop, yop in zip(signature, x_ops, y_ops):
        if p == 0:
            alpha = constant(xop, str(symbol))
            G = MatrixMapping(1, 1, 0, lambda a, x, c=yop: c, False, f"{symbol}_Y")
            betas = OpFamily(0, (alpha,))
        else:
            alpha = NamedOp(str(symbol), p, xop)
            G = MatrixMapping(1, p, p, lambda a, x, op=yop: op(*a[0]), False, f"{symbol}_Y")
            betas = OpFamily.projections(p)
        eqs.append(Gfe(str(symbol), OpFamily(p, (alpha,)), betas, MatrixMapping.entry(1, 1, p), G, domain, codomain))
    return GfeSystem(tuple(eqs))


def _relabel(system: GfeSystem, label: str) -> GfeSystem:
    (eq,) = system.equations
    return GfeSystem((Gfe(label, eq.alphas, eq.betas, eq.F, eq.G, eq.domain, eq.codomain),))


def cauchy() -> GfeSystem:
    """``f(x + y) = f(x) + f(y)``."""
    sys = homomorphism_system([("add", 2)], [lambda x, y: x + y], [lambda a, b: a + b])
    return _relabel(sys, "cauchy")


def exponential() -> GfeSystem:
    """``f(x + y) = f(x) f(y)``."""
    sys = homomorphism_system([("add", 2)], [lambda x, y: x + y], [lambda a, b: a * b])
    return _relabel(sys, "exponential")


def jensen() -> GfeSystem:
    """``f((x + y)/2) = (f(x) + f(y))/2``."""
    mean = lambda u, v: (u + v) / 2
    sys = homomorphism_system([("mean", 2)], [mean], [mean])
    return _relabel(sys, "jensen")


def real_linear(scalars: Sequence[float] = (2, 3)) -> GfeSystem:
    """Additivity plus ``f(c x) = c f(x)`` for a finite sample of scalars."""
    signature = [("add", 2)] + [(f"scale[{c:g}]", 1) for c in scalars]
    x_ops = [lambda x, y: x + y] + [lambda x, c=c: c * x for c in scalars]
    y_ops = [lambda a, b: a + b] + [lambda y, c=c: c * y for c in scalars]
    return homomorphism_system(signature, x_ops, y_ops)


# ---------------------------------------------------------------------------
# analytic examples
# ---------------------------------------------------------------------------

def sincos_system() -> GfeSystem:
    """Addition formulas for an unknown pair (f1, f2) = (sine, cosine).

    The right-hand sides are the permanent and the column-swapped
    determinant of the matrix ``[[f1(x), f1(y)], [f2(x), f2(y)]]``.
    """
    alphas = OpFamily(2, (NamedOp("add", 2, lambda x, y: x + y),))
    betas = OpFamily.projections(2)
    per = MatrixMapping(2, 2, 2, lambda a, x: a[0][0] * a[1][1] + a[1][0] * a[0][1], False, "per")
    det = MatrixMapping(2, 2, 2, lambda a, x: a[1][0] * a[1][1] - a[0][0] * a[0][1], False, "det")
    return GfeSystem(
        (
            Gfe("sin-add", alphas, betas, MatrixMapping.entry(2, 1, 2, 0, 0, "pi1"), per, REALS, REALS),
            Gfe("cos-add", alphas, betas, MatrixMapping.entry(2, 1, 2, 1, 0, "pi2"), det, REALS, REALS),
        )
    )


def gamma_equation() -> Gfe:
    """``f(x + 1) = f(x) x`` on ``Re x >= 1/2``."""
    sigma = OpFamily(1, (NamedOp("sigma", 1, lambda x: x + 1),))
    ident = OpFamily(1, (NamedOp("id", 1, lambda x: x),))
    G = MatrixMapping(1, 1, 1, lambda a, x: a[0][0] * x[0], True, "y*x")
    return Gfe("gamma", sigma, ident, MatrixMapping.entry(1, 1, 1), G, GAMMA_DOMAIN, COMPLEX)


# ---------------------------------------------------------------------------
# recursions
# ---------------------------------------------------------------------------

def recursion_equation(n: int, G: MatrixMapping, label="recursion",
                       domain=NATURALS, codomain=INTEGERS) -> Gfe:
    """``f(x + n) = G(f(x), ..., f(x + n - 1) [, x])``, type (1, 1, n, 1)."""
    if n < 1:
        raise ArityError("recursion order must be >= 1")
    if (G.k, G.m, G.p) != (1, n, 1):
        raise ArityError(f"recursion of order {n} needs G of shape (1, {n}, 1)")
    alphas = OpFamily(1, (shift(n),))
    betas = OpFamily(1, tuple(shift(j) for j in range(n)))
    return Gfe(label, alphas, betas, MatrixMapping.entry(1, 1, 1), G, domain, codomain)


def fibonacci_equation() -> Gfe:
    return recursion_equation(2, MatrixMapping.from_row(2, 1, lambda a, b: a + b, name="y1+y2"), "fib")


def factorial_equation() -> Gfe:
    G = MatrixMapping(1, 1, 1, lambda a, x: a[0][0] * (x[0] + 1), True, "y*(x+1)")
    return recursion_equation(1, G, "factorial")


def grid_recursion_equation(G: MatrixMapping, label="grid-recursion",
                            domain=NATURAL_PAIRS, codomain=INTEGERS) -> Gfe:
    """``f(x+1, y+1) = G(f(x, y), f(x+1, y), f(x, y+1) [, (x, y)])``."""
    if (G.k, G.m, G.p) != (1, 3, 1):
        raise ArityError("grid recursion needs G of shape (1, 3, 1)")
    alphas = OpFamily(1, (pair_shift(1, 1),))
    betas = OpFamily(1, (pair_shift(0, 0), pair_shift(1, 0), pair_shift(0, 1)))
    return Gfe(label, alphas, betas, MatrixMapping.entry(1, 1, 1), G, domain, codomain)


def pascal_c() -> Gfe:
    """``c(k+1, l+1) = c(k+1, l) + c(k, l+1)``."""
    G = MatrixMapping(1, 3, 1, lambda a, x: a[0][1] + a[0][2], False, "y1+y2")
    return grid_recursion_equation(G, "pascal-c")


def stirling1() -> Gfe:
    """``s(n+1, k+1) = s(n, k) - n s(n, k+1)`` (signed, first kind)."""
    G = MatrixMapping(1, 3, 1, lambda a, x: a[0][0] - x[0][0] * a[0][2], True, "y0-n*y2")
    return grid_recursion_equation(G, "stirling1")


def stirling2() -> Gfe:
    """``S(n+1, k+1) = S(n, k) + (k+1) S(n, k+1)``."""
    G = MatrixMapping(1, 3, 1, lambda a, x: a[0][0] + (x[0][1] + 1) * a[0][2], True, "y0+(k+1)*y2")
    return grid_recursion_equation(G, "stirling2")


PRESETS: dict[str, Callable[[], GfeSystem | Gfe]] = {
    "cauchy": cauchy,
    "exponential": exponential,
    "jensen": jensen,
    "real-linear": real_linear,
    "sincos": sincos_system,
    "gamma": gamma_equation,
    "fib": fibonacci_equation,
    "factorial": factorial_equation,
    "pascal-c": pascal_c,
    "stirling1": stirling1,
    "stirling2": stirling2,
}


def preset(name: str) -> GfeSystem:
    try:
        builder = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return as_system(builder())


# ---------------------------------------------------------------------------
# reference solutions
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _fib_pair(f0: int, f1: int, n: int) -> int:
    a, b = f0, f1
    for _ in range(n):
        a, b = b, a + b
    return a


def _grid_table(step: Callable, boundary: Callable, depth: int, in_table: Callable) -> dict:
    """Fill a table on N^2 row by row from boundary values and a recursion."""
    table = {}
    for i in range(depth + 1):
        for j in range(depth + 1):
            if not in_table(i, j):
                continue
            if i == 0 or j == 0:
                table[(i, j)] = boundary(i, j)
            else:
                table[(i, j)] = step(table, i - 1, j - 1)
    return table


def pascal_table(depth: int = TABLE_DEPTH) -> dict:
    """``c(k, l) = C(k + l, k)`` for ``k + l <= depth``, built by recursion."""
    return _grid_table(
        lambda t, k, l: t[(k + 1, l)] + t[(k, l + 1)],
        lambda k, l: 1,
        depth,
        lambda k, l: k + l <= depth,
    )


def stirling1_table(depth: int = TABLE_DEPTH) -> dict:
    """Signed Stirling numbers of the first kind for ``n, k <= depth``."""
    return _stirling(depth, lambda n, k: n - 1)


def stirling2_table(depth: int = TABLE_DEPTH) -> dict:
    """Stirling numbers of the second kind for ``n, k <= depth``."""
    return _stirling(depth, lambda n, k: -k)


def _stirling(depth: int, weight: Callable) -> dict:
    # t(n, k) = t(n-1, k-1) - weight(n, k) * t(n-1, k), rows filled in order
    t = {(0, k): int(k == 0) for k in range(depth + 1)}
    for n in range(1, depth + 1):
        t[(n, 0)] = 0
        for k in range(1, depth + 1):
            t[(n, k)] = t[(n - 1, k - 1)] - weight(n, k) * t[(n - 1, k)]
    return t


def _real(fn, name) -> FunTuple:
    return FunTuple((fn,), REALS, REALS, name)


def reference_solution(name: str, *params) -> FunTuple:
    """Exact solutions used as ground truth.

    ``name`` is one of linear(c), exp([rate]), affine(a, b), sincos(c),
    gamma-lanczos, factorial, fibonacci(f0, f1), pascal, stirling1,
    stirling2, zero([k]).
    """
    if name == "linear":
        (c,) = params or (1.0,)
        return _real(lambda x: c * x, f"linear({c:g})")
    if name == "exp":
        (rate,) = params or (1.0,)
        return _real(lambda x: math.exp(rate * x), "exp" if rate == 1 else f"exp({rate:g})")
    if name == "affine":
        a, b = params
        return _real(lambda x: a * x + b, f"affine({a:g},{b:g})")
    if name == "sincos":
        (c,) = params or (1.0,)
        return FunTuple((lambda x: math.sin(c * x), lambda x: math.cos(c * x)), REALS, REALS, f"sincos({c:g})")
    if name == "gamma-lanczos":
        return FunTuple((lanczos_gamma,), GAMMA_DOMAIN, COMPLEX, "gamma-lanczos")
    if name == "factorial":
        return FunTuple((math.factorial,), NATURALS, INTEGERS, "factorial")
    if name == "fibonacci":
        f0, f1 = (int(p) for p in (params or (1, 1)))
        return FunTuple((lambda n: _fib_pair(f0, f1, n),), NATURALS, INTEGERS, f"fibonacci({f0},{f1})")
    if name == "pascal":
        return FunTuple.tabulated([pascal_table(*params)], NATURAL_PAIRS, INTEGERS, "pascal")
    if name == "stirling1":
        return FunTuple.tabulated([stirling1_table(*params)], NATURAL_PAIRS, INTEGERS, "stirling1")
    if name == "stirling2":
        return FunTuple.tabulated([stirling2_table(*params)], NATURAL_PAIRS, INTEGERS, "stirling2")
    if name == "zero":
        (k,) = params or (1,)
        return FunTuple(tuple(lambda x: 0 for _ in range(int(k))), name="zero")
    raise KeyError(f"unknown reference solution {name!r}")


# ---------------------------------------------------------------------------
# default validation pairs
# ---------------------------------------------------------------------------

def _grid(lo, hi, step, space=REALS) -> SampleSet:
    n = round((hi - lo) / step)
    return SampleSet(space, tuple(round(lo + i * step, 12) for i in range(n + 1)), ("interval", lo, hi, step))


def _naturals(lo, hi) -> SampleSet:
    return SampleSet(NATURALS, tuple(range(lo, hi + 1)), ("integer-range", lo, hi))


def _pair_anchors(keep) -> SampleSet:
    pts = tuple((i, j) for i in range(TABLE_DEPTH + 1) for j in range(TABLE_DEPTH + 1) if keep(i, j))
    return SampleSet(NATURAL_PAIRS, pts, "interior")


def _complex_grid() -> SampleSet:
    pts = tuple(complex(re / 2, im / 2) for re in range(1, 7) for im in range(-2, 3))
    return SampleSet(GAMMA_DOMAIN, pts, "complex-grid")


@dataclass(frozen=True)
class ZooCase:
    preset: str
    solution: str
    params: tuple
    grid: Callable[[], SampleSet]
    atol: float
    relative: bool = False

    @property
    def name(self) -> str:
        p = ",".join(f"{v:g}" if isinstance(v, float) else str(v) for v in self.params)
        return f"{self.preset} / {self.solution}" + (f"({p})" if p else "")


ZOO_CASES = (
    ZooCase("cauchy", "linear", (2.0,), lambda: _grid(-2, 2, 0.1), 1e-9),
    ZooCase("exponential", "exp", (), lambda: _grid(-1, 1, 0.05), 1e-12),
    ZooCase("jensen", "affine", (3.0, 1.0), lambda: _grid(-2, 2, 0.1), 1e-9),
    ZooCase("real-linear", "linear", (5.0,), lambda: _grid(-2, 2, 0.1), 1e-9),
    ZooCase("sincos", "sincos", (1.0,), lambda: _grid(-5, 5, 0.1), 1e-12),
    ZooCase("sincos", "sincos", (3.0,), lambda: _grid(-2, 2, 0.1), 1e-9),
    ZooCase("gamma", "gamma-lanczos", (), _complex_grid, 1e-9),
    ZooCase("gamma", "gamma-lanczos", (), lambda: SampleSet(GAMMA_DOMAIN, tuple(range(1, 11))), 1e-8, True),
    ZooCase("gamma", "zero", (), _complex_grid, 1e-9),
    ZooCase("fib", "fibonacci", (1, 1), lambda: _naturals(0, 20), 0),
    ZooCase("factorial", "factorial", (), lambda: _naturals(0, 12), 0),
    ZooCase("pascal-c", "pascal", (), lambda: _pair_anchors(lambda k, l: k + l + 2 <= TABLE_DEPTH), 0),
    ZooCase("stirling1", "stirling1", (), lambda: _pair_anchors(lambda n, k: n < TABLE_DEPTH and k < TABLE_DEPTH), 0),
    ZooCase("stirling2", "stirling2", (), lambda: _pair_anchors(lambda n, k: n < TABLE_DEPTH and k < TABLE_DEPTH), 0),
)


def run_zoo_case(case: ZooCase) -> tuple[bool, float, float]:
    """``(passed, worst residual, seconds)`` for one validation pair.

    Relative cases compare ``|lhs - rhs| / |rhs|`` against ``atol``.
    """
    t0 = time.perf_counter()
    sys = preset(case.preset)
    f = reference_solution(case.solution, *case.params)
    S = case.grid()
    if case.relative:
        worst = max(relative_residual(eq, f, x) for eq in sys for x in lift_set(S, eq.p))
        passed = worst <= case.atol
    else:
        worst = max_residual(sys, f, S).value
        passed = satisfies(sys, f, S, case.atol)
    return passed, worst, time.perf_counter() - t0
