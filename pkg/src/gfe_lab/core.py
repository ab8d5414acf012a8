"""Data model and evaluation semantics for general functional equations.

A GFE of type ``(k, m, n, p)`` relates a k-tuple of unknown functions
``f = (f_1, ..., f_k): X -> Y^k`` through two families of p-ary operations
on ``X`` and two combining maps on ``Y``::

    F((f (x) alpha)(x), x) == G((f (x) beta)(x), x)      for x in X^p

where ``(f (x) alpha)(x)`` is the k-by-m matrix ``f_i(alpha_j(x))``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Mapping, NamedTuple, Sequence

from .errors import ArityError, CapExceeded, EvaluationError, OutOfTableError, PreconditionError
from .parallel import ordered_chunks, thread_count
from .spaces import SpaceDesc

DEFAULT_CAP = 10**7

Matrix = tuple  # tuple of k rows, each a tuple of m values


# ---------------------------------------------------------------------------
# operations on X
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NamedOp:
    """A p-ary operation ``X^p -> X`` carrying a printable name."""

    name: str
    arity: int
    fn: Callable

    def __call__(self, *x):
        if len(x) != self.arity:
            raise ArityError(f"{self.name} takes {self.arity} argument(s), got {len(x)}")
        if self.arity == 0:
            return self.fn() if callable(self.fn) else self.fn
        return self.fn(*x)

    def __repr__(self):
        return self.name


def projection(j: int, p: int) -> NamedOp:
    """The j-th projection ``X^p -> X`` (1-based)."""
    if not 1 <= j <= p:
        raise ArityError(f"projection index {j} out of range for arity {p}")
    return NamedOp(f"pi{j}", p, lambda *x: x[j - 1])


def identity() -> NamedOp:
    return NamedOp("id", 1, lambda x: x)


def constant(value, name=None) -> NamedOp:
    return NamedOp(name or repr(value), 0, lambda: value)


def shift(j: int) -> NamedOp:
    """``x -> x + j`` on the naturals (or any additive carrier)."""
    return NamedOp("id" if j == 0 else f"sigma^{j}", 1, lambda x: x + j)


def pair_shift(dx: int, dy: int) -> NamedOp:
    names = {(0, 0): "sigma0", (1, 0): "sigma1", (0, 1): "sigma2", (1, 1): "sigma12"}
    name = names.get((dx, dy), f"sigma({dx},{dy})")
    return NamedOp(name, 1, lambda x: (x[0] + dx, x[1] + dy))


def binary(name: str, fn: Callable) -> NamedOp:
    return NamedOp(name, 2, fn)


ADD2 = binary("add", lambda x, y: x + y)


@dataclass(frozen=True)
class OpFamily:
    arity: int
    members: tuple

    def __post_init__(self):
        if self.arity < 0:
            raise ArityError("arity must be nonnegative")
        object.__setattr__(self, "members", tuple(self.members))
        for op in self.members:
            a = getattr(op, "arity", None)
            if a is not None and a != self.arity:
                raise ArityError(f"member {op!r} has arity {a}, family has {self.arity}")

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def images(self, x: Sequence) -> tuple:
        if len(x) != self.arity:
            raise ArityError(f"expected a {self.arity}-tuple, got {len(x)} coordinate(s)")
        return tuple(op(*x) for op in self.members)

    @classmethod
    def projections(cls, p: int) -> "OpFamily":
        return cls(p, tuple(projection(j, p) for j in range(1, p + 1)))


# ---------------------------------------------------------------------------
# combining maps on Y
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MatrixMapping:
    """A map ``Y^{k x m} x X^p -> Y``.

    ``selector`` is set when the map just returns one matrix entry; the
    extension engine uses it to propagate forced values.
    """

    k: int
    m: int
    p: int
    body: Callable[[Matrix, tuple], Any]
    depends_on_x: bool = False
    name: str = ""
    selector: tuple | None = None

    def __call__(self, matrix: Matrix, x: tuple = ()):
        if len(matrix) != self.k or any(len(row) != self.m for row in matrix):
            raise ArityError(f"{self.name or 'mapping'} expects a {self.k}x{self.m} matrix")
        return self.body(matrix, x)

    @classmethod
    def entry(cls, k: int, m: int, p: int, i: int = 0, j: int = 0, name=None):
        """The map returning matrix entry ``(i, j)`` (0-based)."""
        return cls(k, m, p, lambda a, x: a[i][j], False, name or f"y[{i + 1},{j + 1}]", (i, j))

    @classmethod
    def from_row(cls, m: int, p: int, fn: Callable, depends_on_x=False, name=""):
        """Build a k=1 mapping from ``fn(y_1, ..., y_m)`` or ``fn(y..., x=x)``."""
        if depends_on_x:
            body = lambda a, x: fn(*a[0], x=x)
        else:
            body = lambda a, x: fn(*a[0])
        return cls(1, m, p, body, depends_on_x, name)


# ---------------------------------------------------------------------------
# equations and systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Gfe:
    label: str
    alphas: OpFamily
    betas: OpFamily
    F: MatrixMapping
    G: MatrixMapping
    domain: SpaceDesc
    codomain: SpaceDesc

    def __post_init__(self):
        k, m, n, p = self.typ
        if k < 1 or m < 1 or n < 1:
            raise ArityError(f"{self.label}: k, m, n must be >= 1, got {self.typ}")
        if self.betas.arity != p:
            raise ArityError(f"{self.label}: alphas are {p}-ary but betas are {self.betas.arity}-ary")
        if (self.F.m, self.F.p) != (m, p) or (self.G.m, self.G.p) != (n, p):
            raise ArityError(f"{self.label}: combining maps disagree with type {self.typ}")
        if self.G.k != k:
            raise ArityError(f"{self.label}: F has k={k}, G has k={self.G.k}")

    @property
    def typ(self) -> tuple:
        return (self.F.k, len(self.alphas), len(self.betas), self.alphas.arity)

    @property
    def k(self) -> int:
        return self.F.k

    @property
    def p(self) -> int:
        return self.alphas.arity

    def operations(self) -> tuple:
        return tuple(self.alphas) + tuple(self.betas)


@dataclass(frozen=True)
class GfeSystem:
    equations: tuple

    def __post_init__(self):
        eqs = tuple(self.equations)
        object.__setattr__(self, "equations", eqs)
        if not eqs:
            raise ValueError("a system needs at least one equation")
        first = eqs[0]
        labels = set()
        for eq in eqs:
            if eq.k != first.k:
                raise ArityError(f"equation {eq.label} has k={eq.k}, system has k={first.k}")
            if eq.domain != first.domain or eq.codomain != first.codomain:
                raise ValueError(f"equation {eq.label} lives on different spaces")
            if eq.label in labels:
                raise ValueError(f"duplicate equation label {eq.label!r}")
            labels.add(eq.label)

    @property
    def k(self) -> int:
        return self.equations[0].k

    @property
    def domain(self) -> SpaceDesc:
        return self.equations[0].domain

    @property
    def codomain(self) -> SpaceDesc:
        return self.equations[0].codomain

    @property
    def labels(self) -> tuple:
        return tuple(eq.label for eq in self.equations)

    def __iter__(self):
        return iter(self.equations)

    def __len__(self):
        return len(self.equations)

    def __getitem__(self, label):
        for eq in self.equations:
            if eq.label == label:
                return eq
        raise KeyError(label)


def as_system(obj) -> GfeSystem:
    if isinstance(obj, GfeSystem):
        return obj
    if isinstance(obj, Gfe):
        return GfeSystem((obj,))
    return GfeSystem(tuple(obj))


# ---------------------------------------------------------------------------
# unknown function tuples
# ---------------------------------------------------------------------------

class Table:
    """A function known only on a finite subset of X."""

    def __init__(self, values: Mapping, name="table"):
        self.values = dict(values)
        self.name = name

    def __call__(self, x):
        try:
            return self.values[x]
        except (KeyError, TypeError):
            raise OutOfTableError(f"{self.name} is not tabulated at {x!r}") from None

    def __contains__(self, x):
        return x in self.values

    def __repr__(self):
        return f"Table({self.name}, {len(self.values)} points)"


@dataclass(frozen=True)
class FunTuple:
    components: tuple
    domain: SpaceDesc | None = None
    codomain: SpaceDesc | None = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise ArityError("a function tuple needs at least one component")

    @property
    def k(self) -> int:
        return len(self.components)

    def __call__(self, x) -> tuple:
        return tuple(fi(x) for fi in self.components)

    @classmethod
    def tabulated(cls, tables: Sequence[Mapping], domain=None, codomain=None, name="tabulated"):
        comps = tuple(Table(t, f"{name}[{i + 1}]") for i, t in enumerate(tables))
        return cls(comps, domain, codomain, name)


# ---------------------------------------------------------------------------
# sample sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SampleSet:
    """A finite, ordered stand-in for a compact set.

    ``arity`` is None for a subset of X and p for a subset of X^p, whose
    points are then p-tuples.
    """

    space: SpaceDesc
    points: tuple
    origin: Any = None
    arity: int | None = None
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        pts = tuple(self.points)
        object.__setattr__(self, "points", pts)
        if not self.check:
            return
        if len(set(pts)) != len(pts):
            raise ValueError("sample set contains duplicate points")
        for pt in pts:
            coords = (pt,) if self.arity is None else pt
            if self.arity is not None and (not isinstance(pt, tuple) or len(pt) != self.arity):
                raise ArityError(f"point {pt!r} is not a {self.arity}-tuple")
            for c in coords:
                if not self.space.contains(c):
                    raise ValueError(f"point {c!r} is not in {self.space.name}")

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, pt):
        return pt in self.points

    def restrict(self, keep: Callable[[Any], bool]) -> "SampleSet":
        return SampleSet(self.space, tuple(p for p in self.points if keep(p)), self.origin, self.arity, False)


def lift_set(A: SampleSet, p: int, cap: int = DEFAULT_CAP) -> SampleSet:
    """The Cartesian power ``A^p`` in lexicographic order of A's order."""
    if p < 0:
        raise ArityError("p must be nonnegative")
    if A.arity is not None:
        raise ArityError("can only lift a subset of X")
    size = len(A) ** p
    if size > cap:
        raise CapExceeded(f"|A|^p = {len(A)}^{p} = {size} exceeds cap {cap}")
    pts = tuple(itertools.product(A.points, repeat=p))
    return SampleSet(A.space, pts, origin=("lift", A.origin, p), arity=p, check=False)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def tensor_apply(f: FunTuple, alphas: OpFamily, x: Sequence) -> Matrix:
    """The k-by-m matrix ``f_i(alpha_j(x))``, rows in component order."""
    images = alphas.images(tuple(x))
    return tuple(tuple(fi(z) for z in images) for fi in f.components)


def eval_side(F: MatrixMapping, f: FunTuple, alphas: OpFamily, x: Sequence):
    if F.k != f.k:
        raise ArityError(f"mapping expects k={F.k}, function tuple has k={f.k}")
    x = tuple(x)
    return F(tensor_apply(f, alphas, x), x)


def _sides(eq: Gfe, f: FunTuple, x: tuple):
    try:
        lhs = eval_side(eq.F, f, eq.alphas, x)
        rhs = eval_side(eq.G, f, eq.betas, x)
    except ZeroDivisionError as exc:
        raise EvaluationError(f"{eq.label}: division by zero at {x!r}") from exc
    except (OverflowError, ValueError) as exc:
        raise EvaluationError(f"{eq.label}: {exc} at {x!r}") from exc
    return lhs, rhs


def residual(eq: Gfe, f: FunTuple, x: Sequence) -> float:
    """Codomain distance between the two sides of ``eq`` at ``x``.

    Non-finite distances are reported as ``inf``.
    """
    lhs, rhs = _sides(eq, f, tuple(x))
    try:
        d = eq.codomain.distance(lhs, rhs)
    except TypeError as exc:
        raise EvaluationError(f"{eq.label}: cannot compare {lhs!r} and {rhs!r}") from exc
    if isinstance(d, float) and math.isnan(d):
        return math.inf
    return d


def relative_residual(eq: Gfe, f: FunTuple, x: Sequence, floor: float = 1e-300) -> float:
    """Residual divided by the magnitude of the right-hand side."""
    x = tuple(x)
    lhs, rhs = _sides(eq, f, x)
    return eq.codomain.distance(lhs, rhs) / max(abs(rhs), floor)


def _samples_for(eq: Gfe, S) -> SampleSet:
    if isinstance(S, Mapping):
        S = S[eq.label]
    if S.arity is None:
        return lift_set(S, eq.p)
    if S.arity != eq.p:
        raise ArityError(f"{eq.label} is {eq.p}-ary but the sample set has arity {S.arity}")
    return S


class ResidualMax(NamedTuple):
    value: float
    witness: Any
    label: str | None


@dataclass(frozen=True)
class Witness:
    """Where a check failed; unused fields stay None."""

    point: Any = None
    anchor: Any = None
    eps: float | None = None
    distance: float | None = None
    label: str | None = None
    component: int | None = None
    value: Any = None


@dataclass(frozen=True)
class Verdict:
    passed: bool
    witness: Witness | None = None
    checked_count: int = 0
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.passed and self.witness is None:
            raise ValueError("a failing verdict needs a witness")

    def __bool__(self):
        return self.passed


def _scan_max(eq, f, points, start):
    best, best_i = -1.0, None
    for i, x in enumerate(points):
        r = residual(eq, f, x)
        if r > best:
            best, best_i = r, start + i
    return best, best_i


def max_residual(sys, f: FunTuple, S, workers: int | None = None) -> ResidualMax:
    """Largest residual over all sampled points of all equations.

    Ties go to the first point in generation order (equations outer).
    """
    sys = as_system(sys)
    workers = thread_count(workers)
    best = ResidualMax(0, None, None)
    for eq in sys:
        pts = _samples_for(eq, S).points
        results = ordered_chunks(lambda chunk, start: _scan_max(eq, f, chunk, start), pts, workers)
        for value, idx in results:
            if idx is not None and (best.label is None or value > best.value):
                best = ResidualMax(value, pts[idx], eq.label)
    return best


def residual_rows(sys, f: FunTuple, S) -> Iterator[tuple]:
    """Yield ``(label, point, residual)`` in generation order."""
    for eq in as_system(sys):
        for x in _samples_for(eq, S).points:
            yield eq.label, x, residual(eq, f, x)


def _first_violation(sys, f, S, bad: Callable[[float], bool]):
    count = 0
    for eq in as_system(sys):
        for x in _samples_for(eq, S).points:
            r = residual(eq, f, x)
            count += 1
            if bad(r):
                return Witness(point=x, distance=r, label=eq.label), count
    return None, count


def is_v_solution(sys, f: FunTuple, S, eps: float) -> Verdict:
    """Both sides within ``eps`` (strictly) at every sampled point."""
    if not eps > 0:
        raise PreconditionError("eps must be positive")
    w, count = _first_violation(sys, f, S, lambda r: not r < eps)
    return Verdict(w is None, w, count, {"eps": eps})


def default_atol(space: SpaceDesc) -> float:
    return 0 if space.exact else 1e-9


def satisfies(sys, f: FunTuple, S, atol: float | None = None) -> bool:
    """Exact satisfaction up to ``atol`` (inclusive) on the sample."""
    sys = as_system(sys)
    if atol is None:
        atol = default_atol(sys.codomain)
    if atol < 0:
        raise PreconditionError("atol must be nonnegative")
    w, _ = _first_violation(sys, f, S, lambda r: not r <= atol)
    return w is None


def satisfies_verdict(sys, f: FunTuple, S, atol: float | None = None) -> Verdict:
    sys = as_system(sys)
    if atol is None:
        atol = default_atol(sys.codomain)
    w, count = _first_violation(sys, f, S, lambda r: not r <= atol)
    return Verdict(w is None, w, count, {"atol": atol})
