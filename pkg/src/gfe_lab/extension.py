"""Exact extension of partial solutions on finite carriers.

For a finite truncation ``X`` of the domain and a stalkwise finite bounding
relation ``R``, this module enumerates the R-bounded partial solutions on a
set ``C`` and decides whether each one extends to a solution on all of
``X`` agreeing with it on ``D``.

Conventions (recorded in every report):

* an *anchor* is a point ``x`` of ``X^p`` at which an equation is enforced;
  anchors whose operation images leave ``X`` sit on the truncation boundary
  and are skipped;
* a partial solution on ``C`` lives on ``dependency_closure(C)``, is
  R-bounded there, and satisfies every equation at the anchors in ``C^p``.

All comparisons are exact (residual == 0).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .core import FunTuple, Gfe, GfeSystem, as_system
from .errors import CapExceeded, OperationLeavesCarrier, PreconditionError, UnsupportedStalk
from .regularity import BoundingRel, FiniteStalk

DEFAULT_NODE_CAP = 10**7

CLOSURE_CONVENTION = (
    "partial solutions live on dependency_closure(C), are R-bounded there and satisfy "
    "every equation at the anchors in C^p whose images lie in X; anchors whose images "
    "leave X are truncation boundary and are not enforced"
)


def _sort_key(pt):
    return (0, pt) if isinstance(pt, (int, tuple)) else (1, repr(pt))


def _sorted(points: Iterable) -> list:
    return sorted(set(points), key=_sort_key)


@dataclass(frozen=True)
class PartialFun:
    """Values of a k-tuple on a finite set: ``values[x] = (f_1(x), ..., f_k(x))``."""

    k: int
    values: dict = field(hash=False)

    @property
    def dom(self) -> tuple:
        return tuple(_sorted(self.values))

    @property
    def tables(self) -> tuple:
        return tuple({x: v[i] for x, v in self.values.items()} for i in range(self.k))

    def restrict(self, points: Iterable) -> "PartialFun":
        return PartialFun(self.k, {x: self.values[x] for x in points})

    def key_on(self, points: Sequence) -> tuple:
        return tuple(self.values[x] for x in points)

    def as_funtuple(self, domain=None, codomain=None, name="partial") -> FunTuple:
        return FunTuple.tabulated(self.tables, domain, codomain, name)

    def to_json(self) -> list:
        return [[x, list(v) if self.k > 1 else v[0]] for x, v in ((x, self.values[x]) for x in self.dom)]


# ---------------------------------------------------------------------------
# anchors and closures
# ---------------------------------------------------------------------------

def _anchors(sys: GfeSystem, C: Sequence, X: set | None, strict: bool):
    """Yield ``(eq, x, left_images, right_images)`` for x in C^p."""
    domain = sys.domain
    for eq in sys:
        for x in itertools.product(C, repeat=eq.p):
            left = eq.alphas.images(x)
            right = eq.betas.images(x)
            outside = [z for z in left + right if not domain.contains(z)]
            if outside:
                raise OperationLeavesCarrier(
                    f"{eq.label}: operation maps {x!r} to {outside[0]!r}, outside {domain.name}",
                    witness={"equation": eq.label, "anchor": x, "image": outside[0]},
                )
            if X is not None and any(z not in X for z in left + right):
                if strict:
                    bad = next(z for z in left + right if z not in X)
                    raise OperationLeavesCarrier(
                        f"{eq.label}: operation maps {x!r} to {bad!r}, outside the finite carrier",
                        witness={"equation": eq.label, "anchor": x, "image": bad},
                    )
                continue
            yield eq, x, left, right


def dependency_closure(sys, C0: Iterable, X: Iterable | None = None, strict: bool = False) -> tuple:
    """Smallest superset of ``C0`` holding every operation image at anchors in C0^p.

    One pass suffices because unknowns are never composed.  With
    ``strict=True`` an anchor whose images leave ``X`` raises instead of
    being skipped.
    """
    sys = as_system(sys)
    C0 = _sorted(C0)
    Xs = set(X) if X is not None else None
    if Xs is not None and not set(C0) <= Xs:
        raise PreconditionError("C0 must be a subset of X")
    out = set(C0)
    for _, _, left, right in _anchors(sys, C0, Xs, strict):
        out.update(left)
        out.update(right)
    return tuple(_sorted(out))


# ---------------------------------------------------------------------------
# constraint search
# ---------------------------------------------------------------------------

class _Constraint:
    __slots__ = ("eq", "x", "left", "right", "vars", "left_vars", "right_vars")

    def __init__(self, eq: Gfe, x, left, right):
        self.eq, self.x, self.left, self.right = eq, x, left, right
        k = eq.k
        self.left_vars = {(z, i) for z in left for i in range(k)}
        self.right_vars = {(z, i) for z in right for i in range(k)}
        self.vars = self.left_vars | self.right_vars

    def _matrix(self, images, val):
        k = self.eq.k
        return tuple(tuple(val[(z, i)] for z in images) for i in range(k))

    def holds(self, val) -> bool:
        try:
            lhs = self.eq.F(self._matrix(self.left, val), self.x)
            rhs = self.eq.G(self._matrix(self.right, val), self.x)
            return self.eq.codomain.distance(lhs, rhs) == 0
        except (ArithmeticError, ValueError, TypeError):
            return False

    def forced(self, var, val):
        """``(True, value)`` when ``var`` is forced, ``(False, None)`` otherwise.

        Applies when one side is a plain matrix entry that is exactly
        ``var`` and the other side does not involve ``var``.
        """
        for mapping, images, other_map, other_images, other_vars in (
            (self.eq.F, self.left, self.eq.G, self.right, self.right_vars),
            (self.eq.G, self.right, self.eq.F, self.left, self.left_vars),
        ):
            sel = mapping.selector
            if sel is None or var in other_vars:
                continue
            i, j = sel
            if (images[j], i) != var:
                continue
            try:
                return True, other_map(self._matrix(other_images, val), self.x)
            except (ArithmeticError, ValueError, TypeError):
                return True, _NO_VALUE
        return False, None


_NO_VALUE = object()


class _Search:
    """Depth-first search over variables ``(point, component)`` in order.

    Values are tried in stalk order, so solutions come out in lexicographic
    order of the value vector.  ``nodes`` counts attempted assignments.
    """

    def __init__(self, variables, stalks, constraints, cap):
        self.order = list(variables)
        self.stalks = stalks
        self.cap = cap
        self.nodes = 0
        self.val: dict = {}
        self.by_var: dict = {v: [] for v in self.order}
        self.open: dict = {}
        known = set(self.order)
        for c in constraints:
            missing = c.vars - known
            if missing:
                raise PreconditionError(f"constraint at {c.x!r} touches unknown points {sorted(missing, key=repr)[:3]}")
            self.open[id(c)] = len(c.vars)
            for v in c.vars:
                self.by_var[v].append(c)
        self.trail: list = []

    def _tick(self):
        self.nodes += 1
        if self.nodes > self.cap:
            raise CapExceeded(f"search visited more than {self.cap} candidates")

    def _assign(self, var, value) -> bool:
        """Assign and propagate; on failure the caller undoes via the trail."""
        queue = [(var, value)]
        while queue:
            v, x = queue.pop()
            if v in self.val:
                if self.val[v] != x:
                    return False
                continue
            self._tick()
            if x not in self.stalks[v]:
                return False
            self.val[v] = x
            self.trail.append(v)
            # decrement every counter first so _undo stays balanced on failure
            for c in self.by_var[v]:
                self.open[id(c)] -= 1
            for c in self.by_var[v]:
                n = self.open[id(c)]
                if n == 0:
                    if not c.holds(self.val):
                        return False
                elif n == 1:
                    (last,) = [u for u in c.vars if u not in self.val]
                    is_forced, fv = c.forced(last, self.val)
                    if is_forced:
                        if fv is _NO_VALUE:
                            return False
                        queue.append((last, fv))
        return True

    def _undo(self, mark):
        while len(self.trail) > mark:
            v = self.trail.pop()
            del self.val[v]
            for c in self.by_var[v]:
                self.open[id(c)] += 1

    def run(self, pinned: dict) -> Iterator[dict]:
        mark = len(self.trail)
        ok = True
        for v, x in pinned.items():
            if not self._assign(v, x):
                ok = False
                break
        if ok:
            yield from self._dfs(0)
        self._undo(mark)

    def _dfs(self, pos):
        while pos < len(self.order) and self.order[pos] in self.val:
            pos += 1
        if pos == len(self.order):
            yield dict(self.val)
            return
        var = self.order[pos]
        for value in self.stalks[var]:
            mark = len(self.trail)
            if self._assign(var, value):
                yield from self._dfs(pos + 1)
            self._undo(mark)


def _finite_stalks(R: BoundingRel, points, k) -> dict:
    stalks = {}
    for z in points:
        s = R[z]
        if not isinstance(s, FiniteStalk):
            raise UnsupportedStalk(f"stalk at {z!r} is not finite")
        for i in range(k):
            stalks[(z, i)] = s
    return stalks


def _to_partial(k, points, assignment) -> PartialFun:
    return PartialFun(k, {z: tuple(assignment[(z, i)] for i in range(k)) for z in points})


def enumerate_partials(
    sys, R: BoundingRel, C: Iterable, X: Iterable | None = None, cap: int = DEFAULT_NODE_CAP
) -> Iterator[PartialFun]:
    """Every R-bounded partial solution on C, in lexicographic order."""
    sys = as_system(sys)
    Xs = set(X) if X is not None else None
    C = _sorted(C)
    dom = dependency_closure(sys, C, Xs)
    k = sys.k
    variables = [(z, i) for z in dom for i in range(k)]
    stalks = _finite_stalks(R, dom, k)
    constraints = [_Constraint(*a) for a in _anchors(sys, C, Xs, False)]
    search = _Search(variables, stalks, constraints, cap)
    for assignment in search.run({}):
        yield _to_partial(k, dom, assignment)


def count_partials(sys, R, C, X=None, cap=DEFAULT_NODE_CAP) -> int:
    return sum(1 for _ in enumerate_partials(sys, R, C, X, cap))


def extend(
    sys, partial: PartialFun, D: Iterable, X: Iterable, R: BoundingRel, cap: int = DEFAULT_NODE_CAP,
    domain=None,
) -> FunTuple | None:
    """Lexicographically first solution on ``X`` that agrees with ``partial`` on ``D``.

    Equations are enforced at every anchor of ``X^p`` whose images stay in X.
    """
    sys = as_system(sys)
    X = _sorted(X)
    Xs = set(X)
    D = _sorted(D)
    if not set(D) <= set(partial.values):
        raise PreconditionError("D must lie inside the partial function's domain")
    if not set(D) <= Xs:
        raise PreconditionError("D must be a subset of X")
    k = sys.k
    variables = [(z, i) for z in X for i in range(k)]
    stalks = _finite_stalks(R, X, k)
    constraints = [_Constraint(*a) for a in _anchors(sys, X, Xs, False)]
    search = _Search(variables, stalks, constraints, cap)
    pinned = {(z, i): partial.values[z][i] for z in D for i in range(k)}
    for assignment in search.run(pinned):
        sol = _to_partial(k, X, assignment)
        return sol.as_funtuple(domain or sys.domain, sys.codomain, "extension")
    return None


# ---------------------------------------------------------------------------
# minimal witnessing set
# ---------------------------------------------------------------------------

@dataclass
class ExtensionReport:
    D: list
    X: list
    C: list | None
    closure: list | None
    enumerated: int
    extendable: int
    counterexamples: int
    certificate: dict | None
    chain: list
    convention: str = CLOSURE_CONVENTION

    @property
    def passed(self) -> bool:
        return self.C is not None


def prefix_chain(D: Sequence, X: Sequence) -> list:
    """``D``, then ``D`` joined with growing prefixes of X, ending at X."""
    X = _sorted(X)
    chain = [tuple(_sorted(D))]
    for c in range(len(X)):
        cand = tuple(_sorted(set(D) | set(X[: c + 1])))
        if set(cand) != set(chain[-1]):
            chain.append(cand)
    return chain


def _check_chain(chain, D, X):
    if not chain:
        raise PreconditionError("candidate chain is empty")
    if set(chain[0]) != set(D):
        raise PreconditionError("candidate chain must start at D")
    if set(chain[-1]) != set(X):
        raise PreconditionError("candidate chain must end at X")
    for a, b in zip(chain, chain[1:]):
        if not set(a) < set(b):
            raise PreconditionError("candidate chain is not increasing")


def minimal_extension_set(
    sys,
    R: BoundingRel,
    D: Iterable,
    X: Iterable,
    chain: Sequence | None = None,
    cap: int = DEFAULT_NODE_CAP,
) -> ExtensionReport:
    """First chain element C on which every partial solution extends.

    The certificate is the first non-extendable partial on the preceding
    chain element, so minimality is relative to the chain.
    """
    sys = as_system(sys)
    X = _sorted(X)
    D = _sorted(D)
    if not set(D) <= set(X):
        raise PreconditionError("D must be a subset of X")
    chain = [tuple(_sorted(c)) for c in (chain if chain is not None else prefix_chain(D, X))]
    _check_chain(chain, D, X)

    cache: dict = {}
    rows = []
    previous_failure = None
    for C in chain:
        enumerated = extendable = 0
        first_bad = None
        for partial in enumerate_partials(sys, R, C, X, cap):
            enumerated += 1
            key = partial.key_on(D)
            if key not in cache:
                cache[key] = extend(sys, partial, D, X, R, cap) is not None
            if cache[key]:
                extendable += 1
            elif first_bad is None:
                first_bad = partial
        row = {
            "C": list(C),
            "enumerated": enumerated,
            "extendable": extendable,
            "counterexamples": enumerated - extendable,
            "counterexample": first_bad.to_json() if first_bad is not None else None,
        }
        rows.append(row)
        if first_bad is None:
            cert = None
            if previous_failure is not None:
                cert = {"candidate": previous_failure["C"], "partial": previous_failure["counterexample"]}
            return ExtensionReport(
                list(D), list(X), list(C), list(dependency_closure(sys, C, X)),
                enumerated, extendable, 0, cert, rows,
            )
        previous_failure = row
    last = rows[-1]
    return ExtensionReport(list(D), list(X), None, None, last["enumerated"], last["extendable"],
                           last["counterexamples"], None, rows)
