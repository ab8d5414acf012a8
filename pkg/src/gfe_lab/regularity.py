"""Continuity scales, approximate continuity, bounding relations, closeness.

Checks quantify over a continuum of tolerances ``eps >= eps0``.  On finite
samples that quantifier can be decided exactly: for a pair at distance
``d`` whose values are ``e`` apart, some admissible ``eps`` is violated iff
``e >= eps0`` and ``d < gamma(e)`` (gamma is isotone, so ``eps = e`` is the
worst case).  The scans therefore test every rung of an :class:`EpsLadder`
plus every such critical value, which keeps the verdicts monotone in
``eps0``.  All checks are sampling-based necessary conditions, not proofs.
"""
from __future__ import annotations

import bisect
import math
import numbers
import warnings
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from .core import FunTuple, SampleSet, Verdict, Witness
from .errors import NonIsotoneScale, PreconditionError, UnsupportedStalk

__all__ = [
    "BoundingRel",
    "ContinuityScale",
    "EpsLadder",
    "Verdict",
    "are_v_close",
    "check_precontinuity",
    "check_r_bounded",
    "check_uniform_precontinuity",
    "induced_scale",
]

# rows of the anchor set processed per numpy block
_BLOCK = 256


@dataclass(frozen=True)
class EpsLadder:
    eps0: float
    multiplier: float = 2.0
    count: int = 20
    extra: tuple = ()

    def __post_init__(self):
        if not self.eps0 > 0:
            raise PreconditionError("eps0 must be positive")
        if not self.multiplier > 1:
            raise PreconditionError("ladder multiplier must exceed 1")
        if self.count < 1:
            raise PreconditionError("ladder needs at least one rung")

    @property
    def values(self) -> tuple:
        rungs = {self.eps0 * self.multiplier**i for i in range(self.count)}
        rungs.update(e for e in self.extra if e >= self.eps0)
        return tuple(sorted(rungs))

    def describe(self) -> dict:
        return {
            "eps0": self.eps0,
            "multiplier": self.multiplier,
            "count": self.count,
            "extra": list(self.extra),
        }


class ContinuityScale:
    """A modulus ``gamma(x, eps)`` (pointwise) or ``gamma(eps)`` (uniform).

    Bodies written with numpy-friendly arithmetic are evaluated on whole
    arrays of tolerances; anything else falls back to scalar calls.
    """

    def __init__(self, kind: str, body: Callable, description: str = ""):
        if kind not in ("pointwise", "uniform"):
            raise ValueError("kind must be 'pointwise' or 'uniform'")
        self.kind = kind
        self.body = body
        self.description = description or getattr(body, "__name__", "gamma")
        self._vectorized: bool | None = None

    @classmethod
    def pointwise(cls, body, description=""):
        return cls("pointwise", body, description)

    @classmethod
    def uniform(cls, body, description=""):
        return cls("uniform", body, description)

    @classmethod
    def linear(cls, factor: float, kind="pointwise"):
        """``gamma(x, eps) = factor * eps`` (or its uniform version)."""
        if kind == "uniform":
            return cls.uniform(lambda eps: factor * eps, f"uniform {factor:g}*eps")
        return cls.pointwise(lambda x, eps: factor * eps, f"{factor:g}*eps")

    def __call__(self, *args):
        return self.body(*args)

    def _args(self, a, eps):
        return (eps,) if self.kind == "uniform" else (a, eps)

    def many(self, a, eps: np.ndarray) -> np.ndarray:
        """``gamma(a, eps_i)`` for an array of tolerances."""
        eps = np.asarray(eps, dtype=float)
        if self._vectorized is not False:
            try:
                out = self.body(*self._args(a, eps))
                out = np.broadcast_to(np.asarray(out, dtype=float), eps.shape)
                self._vectorized = True
                return out
            except Exception:
                self._vectorized = False
        flat = [float(self.body(*self._args(a, float(e)))) for e in eps.ravel()]
        return np.asarray(flat, dtype=float).reshape(eps.shape)

    def describe(self) -> dict:
        return {"kind": self.kind, "description": self.description}

    def __repr__(self):
        return f"ContinuityScale({self.kind}, {self.description})"


class TabulatedScale(ContinuityScale):
    """Scale known on a ladder of tolerances, extended as a step function.

    ``gamma(a, eps)`` is the table value at the largest rung ``<= eps``;
    below the first rung it is the smallest value of the delta grid.
    """

    def __init__(self, table: dict, rungs: Sequence[float], floor: float, flagged=(), description=""):
        self.table = table
        self.rungs = tuple(rungs)
        self.floor = floor
        self.flagged = frozenset(flagged)
        super().__init__("pointwise", self._lookup, description or "induced")
        self._vectorized = False

    def _lookup(self, a, eps):
        i = bisect.bisect_right(self.rungs, eps) - 1
        if i < 0:
            return self.floor
        return self.table[a][i]

    def many(self, a, eps):
        eps = np.asarray(eps, dtype=float)
        idx = np.searchsorted(np.asarray(self.rungs), eps, side="right") - 1
        row = np.asarray((self.floor,) + tuple(self.table[a]), dtype=float)
        return row[idx + 1]

    @property
    def warning(self) -> bool:
        return bool(self.flagged)


# ---------------------------------------------------------------------------
# continuity checks
# ---------------------------------------------------------------------------

def _values(f: FunTuple, points) -> list:
    return [[fi(x) for x in points] for fi in f.components]


def _check_isotone(gamma: ContinuityScale, anchors, rungs: np.ndarray):
    for a in anchors:
        g = gamma.many(a, rungs)
        bad = np.nonzero(np.diff(g) < 0)[0]
        if bad.size:
            j = int(bad[0])
            where = "" if gamma.kind == "uniform" else f" at {a!r}"
            raise NonIsotoneScale(
                f"gamma decreases from eps={rungs[j]:g} to eps={rungs[j + 1]:g}{where}"
            )
        if np.any(~(g > 0)):
            raise NonIsotoneScale("gamma must be positive")
        if gamma.kind == "uniform":
            break


def _first_eps(gamma, a, d, e, eps0, rungs):
    """Smallest tested tolerance violated by a pair (d, e)."""
    for r in rungs:
        if r > e:
            break
        if d < gamma(*gamma._args(a, r)):
            return float(r)
    return float(e)


def _scan(f, gamma, eps0, anchors, probes, space, codomain, ladder):
    """Shared body of the pointwise and uniform precontinuity checks."""
    rungs = np.asarray(ladder.values, dtype=float)
    _check_isotone(gamma, anchors, rungs)
    anchors = list(anchors)
    probes = list(probes)
    k = f.k
    a_vals = _values(f, anchors)
    p_vals = _values(f, probes)
    checked = 0
    for lo in range(0, len(anchors), _BLOCK):
        block = anchors[lo : lo + _BLOCK]
        dist = space.distance_matrix(block, probes)
        hits = None  # (row, col, component) of the first violation in scan order
        for i in range(k):
            e = codomain.distance_matrix(a_vals[i][lo : lo + _BLOCK], p_vals[i])
            cand = e >= eps0
            if not cand.any():
                continue
            viol = np.zeros_like(cand)
            rows, cols = np.nonzero(cand)
            if gamma.kind == "uniform":
                g = gamma.many(None, e[rows, cols])
            else:
                g = np.empty(rows.size)
                for r in np.unique(rows):
                    sel = rows == r
                    g[sel] = gamma.many(block[r], e[r, cols[sel]])
            viol[rows, cols] = dist[rows, cols] < g
            flat = np.flatnonzero(viol)
            if flat.size:
                r, c = divmod(int(flat[0]), len(probes))
                if hits is None or (r, c) < hits[:2]:
                    hits = (r, c, i)
        if hits is not None:
            r, c, i = hits
            checked += r * len(probes) * k + c * k + i + 1
            a, x = block[r], probes[c]
            d = space.distance(x, a)
            e_val = codomain.distance(p_vals[i][c], a_vals[i][lo + r])
            eps = _first_eps(gamma, a, d, e_val, eps0, rungs)
            w = Witness(point=x, anchor=a, eps=eps, distance=float(e_val), component=i)
            return Verdict(False, w, checked, {"ladder": ladder.describe()})
        checked += len(block) * len(probes) * k
    return Verdict(True, None, checked, {"ladder": ladder.describe()})


def _spaces(f: FunTuple, A: SampleSet):
    space = A.space
    codomain = f.codomain
    if codomain is None:
        raise PreconditionError("function tuple needs a declared codomain for continuity checks")
    return space, codomain


def check_precontinuity(
    f: FunTuple,
    gamma: ContinuityScale,
    eps0: float,
    A: SampleSet,
    probes: SampleSet,
    ladder: EpsLadder | None = None,
) -> Verdict:
    """Approximate continuity at the points of ``A`` for tolerances >= eps0.

    Fails on the first (anchor, probe, eps, component) in scan order with
    ``d(x, a) < gamma(a, eps)`` but ``e(f_i(x), f_i(a)) >= eps``.
    """
    if gamma.kind != "pointwise":
        raise PreconditionError("check_precontinuity needs a pointwise scale")
    ladder = ladder or EpsLadder(eps0)
    if ladder.eps0 != eps0:
        raise PreconditionError("ladder must start at eps0")
    space, codomain = _spaces(f, A)
    return _scan(f, gamma, eps0, A.points, probes.points, space, codomain, ladder)


def check_uniform_precontinuity(
    f: FunTuple,
    gamma: ContinuityScale,
    eps0: float,
    A: SampleSet,
    ladder: EpsLadder | None = None,
) -> Verdict:
    """Uniform version over all ordered pairs of ``A``."""
    if gamma.kind != "uniform":
        raise PreconditionError("check_uniform_precontinuity needs a uniform scale")
    ladder = ladder or EpsLadder(eps0)
    space, codomain = _spaces(f, A)
    return _scan(f, gamma, eps0, A.points, A.points, space, codomain, ladder)


def induced_scale(
    f: FunTuple,
    A: SampleSet,
    probes: SampleSet,
    ladder: EpsLadder,
    delta_grid: Sequence[float] | None = None,
) -> TabulatedScale:
    """Empirical modulus of continuity of ``f`` on the sample.

    ``gamma(a, eps)`` is the largest grid delta such that every probe within
    delta of ``a`` has all components within eps of ``f(a)``.  Anchors where
    no grid delta works get the smallest grid value and are listed in
    ``flagged`` (a warning is emitted).  The default grid halves from the
    probe diameter down to twice the finest probe spacing, so the smallest
    delta still reaches the nearest neighbours.
    """
    space, codomain = _spaces(f, A)
    probe_pts = list(probes.points)
    if delta_grid is None:
        delta_grid = _default_delta_grid(space, probe_pts)
    grid = np.asarray(sorted(set(delta_grid), reverse=True), dtype=float)
    if grid.size == 0 or np.any(grid <= 0):
        raise PreconditionError("delta grid must be nonempty and positive")
    rungs = ladder.values
    a_vals = _values(f, A.points)
    p_vals = _values(f, probe_pts)
    table, flagged = {}, []
    for r, a in enumerate(A.points):
        d = space.distance_matrix([a], probe_pts)[0]
        spread = np.zeros(len(probe_pts))
        for i in range(f.k):
            e = codomain.distance_matrix([a_vals[i][r]], p_vals[i])[0]
            spread = np.maximum(spread, e)
        row = []
        for eps in rungs:
            # largest delta whose open ball holds no probe with spread >= eps
            bad = d[spread >= eps]
            limit = bad.min() if bad.size else math.inf
            ok = grid[grid <= limit]
            if ok.size:
                row.append(float(ok[0]))
            else:
                row.append(float(grid[-1]))
                flagged.append((a, eps))
        table[a] = tuple(row)
    if flagged:
        warnings.warn(f"induced scale: no admissible delta at {len(flagged)} (point, eps) pair(s)")
    return TabulatedScale(table, rungs, float(grid[-1]), flagged)


def _default_delta_grid(space, pts) -> list:
    if len(pts) < 2:
        return [1.0]
    dm = space.distance_matrix(pts, pts)
    np.fill_diagonal(dm, np.inf)
    finest = float(dm.min())
    np.fill_diagonal(dm, 0)
    diameter = float(dm.max())
    out, delta = [], diameter
    while delta >= 2 * finest and len(out) < 64:
        out.append(delta)
        delta /= 2
    return out or [diameter]


# ---------------------------------------------------------------------------
# bounding relations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FiniteStalk:
    elements: Any  # any finite container with fast membership, e.g. range or frozenset

    def __post_init__(self):
        if isinstance(self.elements, (list, tuple, set)):
            object.__setattr__(self, "elements", frozenset(self.elements))
        if len(self.elements) == 0:
            raise ValueError("stalks must be nonempty")

    def __contains__(self, y):
        try:
            return y in self.elements
        except TypeError:
            return False

    def __iter__(self):
        if isinstance(self.elements, range):
            return iter(self.elements)
        return iter(sorted(self.elements))

    def __len__(self):
        return len(self.elements)

    def issubset(self, other) -> bool:
        return all(y in other for y in self)


@dataclass(frozen=True)
class Interval:
    lo: Any
    hi: Any

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError("interval stalk must satisfy lo <= hi")

    def __contains__(self, y):
        return isinstance(y, numbers.Real) and self.lo <= y <= self.hi


@dataclass(frozen=True)
class Ball:
    center: Any
    radius: float

    def __post_init__(self):
        if not self.radius >= 0:
            raise ValueError("ball radius must be nonnegative")

    def __contains__(self, y):
        if isinstance(self.center, tuple):
            return isinstance(y, tuple) and len(y) == len(self.center) and math.dist(y, self.center) <= self.radius
        if not isinstance(y, numbers.Number):
            return False
        return abs(y - self.center) <= self.radius


@dataclass(frozen=True)
class Union:
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if not self.parts:
            raise ValueError("a union stalk needs at least one part")
        for p in self.parts:
            _require_supported(p)

    def __contains__(self, y):
        return any(y in p for p in self.parts)


_STALK_KINDS = (FiniteStalk, Interval, Ball, Union)


def _require_supported(stalk):
    if not isinstance(stalk, _STALK_KINDS):
        raise UnsupportedStalk(f"unsupported stalk descriptor {type(stalk).__name__}")


class BoundingRel:
    """A relation ``R`` given stalk by stalk: ``x -> R[x]``."""

    def __init__(self, stalk: Callable[[Any], Any], description: str = ""):
        self.stalk = stalk
        self.description = description or "R"

    def __getitem__(self, x):
        return self.stalk(x)

    @classmethod
    def constant(cls, stalk, description=""):
        _require_supported(stalk)
        return cls(lambda x: stalk, description or repr(stalk))

    @classmethod
    def interval(cls, lo, hi):
        return cls.constant(Interval(lo, hi), f"[{lo}, {hi}]")

    @classmethod
    def finite(cls, elements, description=""):
        return cls.constant(FiniteStalk(elements), description or "finite")

    def stalkwise_finite_on(self, points) -> bool:
        return all(isinstance(self.stalk(x), FiniteStalk) for x in points)

    def describe(self) -> dict:
        return {"description": self.description}


def check_r_bounded(f: FunTuple, R: BoundingRel, A: SampleSet) -> Verdict:
    """``f_i(a) in R[a]`` for every component and sample point."""
    count = 0
    for a in A.points:
        stalk = R[a]
        _require_supported(stalk)
        for i, fi in enumerate(f.components):
            count += 1
            y = fi(a)
            if y not in stalk:
                return Verdict(False, Witness(point=a, component=i, value=y), count)
    return Verdict(True, None, count)


def are_v_close(f: FunTuple, g: FunTuple, A: SampleSet, eps: float, codomain=None) -> Verdict:
    """``e(f_i(a), g_i(a)) < eps`` for every component and sample point."""
    if f.k != g.k:
        raise PreconditionError("function tuples have different k")
    codomain = codomain or f.codomain or g.codomain
    if codomain is None:
        raise PreconditionError("a codomain is needed to measure closeness")
    count = 0
    for a in A.points:
        for i, (fi, gi) in enumerate(zip(f.components, g.components)):
            count += 1
            d = codomain.distance(fi(a), gi(a))
            if not d < eps:
                return Verdict(False, Witness(point=a, component=i, distance=d, eps=eps), count)
    return Verdict(True, None, count, {"eps": eps})


def sup_distance(f: FunTuple, g: FunTuple, A: SampleSet, codomain=None) -> float:
    codomain = codomain or f.codomain or g.codomain
    best = 0.0
    for a in A.points:
        for fi, gi in zip(f.components, g.components):
            d = codomain.distance(fi(a), gi(a))
            if math.isnan(d):
                return math.inf
            best = max(best, d)
    return float(best)
