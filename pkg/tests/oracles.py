"""Independent reference computations used to validate the library.

None of these reuse the recursions under test.
"""
from __future__ import annotations

import math
from itertools import product

import mpmath
import numpy as np


def binomial_oracle(k: int, l: int) -> int:
    """``c(k, l) = (k + l)! / (k! l!)`` from factorials."""
    return math.factorial(k + l) // (math.factorial(k) * math.factorial(l))


def falling_factorial_coefficients(n: int) -> list[int]:
    """Coefficients of ``x (x - 1) ... (x - n + 1)`` by polynomial multiplication."""
    poly = [1]
    for j in range(n):
        nxt = [0] * (len(poly) + 1)
        for i, c in enumerate(poly):
            nxt[i + 1] += c  # times x
            nxt[i] -= j * c  # times -j
        poly = nxt
    return poly


def stirling1_oracle(n: int, k: int) -> int:
    coeffs = falling_factorial_coefficients(n)
    return coeffs[k] if k < len(coeffs) else 0


def set_partitions(items):
    """Every partition of ``items`` into nonempty blocks."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for smaller in set_partitions(rest):
        yield [[first]] + smaller
        for i in range(len(smaller)):
            yield smaller[:i] + [[first] + smaller[i]] + smaller[i + 1:]


def block_count_histogram(n: int) -> np.ndarray:
    """``hist[k]`` = number of partitions of an n-set into k blocks.

    Every partition is generated once as a restricted growth string; only
    the running block count of each string is stored, so n = 12 (4.2 million
    partitions) fits in memory.
    """
    if n == 0:
        hist = np.zeros(1, dtype=np.int64)
        hist[0] = 1
        return hist
    # first element always opens block 1
    counts = np.ones(1, dtype=np.int8)
    for _ in range(1, n):
        # a string with m blocks has m children that keep m blocks and one that opens block m + 1
        stay = np.repeat(counts, counts.astype(np.int64))
        counts = np.concatenate([stay, counts + 1])
    return np.bincount(counts, minlength=n + 1).astype(np.int64)


def stirling2_by_sets(n: int, k: int) -> int:
    return sum(1 for p in set_partitions(range(n)) if len(p) == k)


def gamma_oracle(z) -> complex:
    with mpmath.workdps(40):
        return complex(mpmath.gamma(mpmath.mpmathify(z)))


def sincos_residual_oracle(c: float, xs, ys) -> float:
    """Largest error of double-precision sin/cos against 40-digit values.

    Bounds how far the library's evaluation can stray from the exact
    addition formulas on the grid.
    """
    worst = 0.0
    with mpmath.workdps(40):
        for x in xs:
            for v in (math.sin(c * x) - mpmath.sin(c * mpmath.mpf(x)),
                      math.cos(c * x) - mpmath.cos(c * mpmath.mpf(x))):
                worst = max(worst, abs(float(v)))
    return worst


def lower_bound_scan(objective, lo: float, hi: float, step: float):
    """Best objective value over a uniform parameter grid."""
    n = round((hi - lo) / step)
    best_v, best_c = math.inf, None
    for i in range(n + 1):
        c = lo + i * step
        v = objective(c)
        if v < best_v:
            best_v, best_c = v, c
    return best_c, best_v


def brute_force_extension(stalks: dict, check_global, pinned: dict):
    """Lexicographically first global function (dict x -> value) matching ``pinned``.

    ``stalks`` maps each point of X (in order) to its candidate values.
    """
    points = list(stalks)
    for values in product(*(sorted(stalks[x]) for x in points)):
        g = dict(zip(points, values))
        if any(g[x] != v for x, v in pinned.items()):
            continue
        if check_global(g):
            return g
    return None



def linear_fit_oracle(xs, ys, lo=-10.0, hi=10.0, fine=1e-5):
    """Best sup gap ``max |y - c x|`` over c, scanned on a grid of step ``fine``.

    The gap is convex in c, so a coarse scan at step 0.01 followed by a fine
    scan around its minimizer finds the global grid optimum.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)

    def scan(a, b, step):
        cs = np.arange(a, b + step / 2, step)
        gaps = np.abs(ys[None, :] - cs[:, None] * xs[None, :]).max(axis=1)
        i = int(np.argmin(gaps))
        return cs[i], gaps[i]

    c0, _ = scan(lo, hi, 0.01)
    return scan(max(lo, c0 - 0.02), min(hi, c0 + 0.02), fine)
