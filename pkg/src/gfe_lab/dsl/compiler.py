"""Compile a parsed system into :class:`~gfe_lab.core.GfeSystem` normal form.

For each equation the distinct inner x-expressions under unknowns on the
left become the alpha family (first-occurrence order, distinct after
canonical normalization), those on the right become the beta family, and
each side expression becomes a combining map with matrix entry ``(i, j)``
standing for ``f_i(inner_j)``.
"""
from __future__ import annotations

import cmath
import math
import operator
from dataclasses import dataclass

from ..core import Gfe, GfeSystem, MatrixMapping, NamedOp, OpFamily
from ..errors import DslCompileError
from ..spaces import COMPLEX, INTEGERS, NATURAL_PAIRS, NATURALS, REALS, SpaceDesc
from .formatter import format_expr
from .nodes import App, Bin, Call, Const, Neg, Num, SpaceDecl, SystemAst, Var, walk
from .normalize import canonical
from .parser import ACCESSORS, SHIFTS, parse_system

DEFAULT_HALFPLANE = 0.5

# carrier families, by what arithmetic they admit
_FIELD = "field"      # reals, complex, half-planes
_RING = "ring"        # integers
_SEMIRING = "semiring"  # naturals
_PAIRS = "pairs"

_SPACE_FAMILY = {
    "reals": _FIELD, "complex": _FIELD, "halfplane": _FIELD,
    "integers": _RING, "naturals": _SEMIRING, "pairs": _PAIRS,
}


def space_for(decl: SpaceDecl | None, default: str = "reals") -> SpaceDesc:
    kw = decl.keyword if decl is not None else default
    if kw == "reals":
        return REALS
    if kw == "complex":
        return COMPLEX
    if kw == "halfplane":
        lo = decl.param if decl is not None and decl.param is not None else DEFAULT_HALFPLANE
        return SpaceDesc.complex_halfplane(float(lo))
    if kw == "naturals":
        return NATURALS
    if kw == "integers":
        return INTEGERS
    if kw == "pairs":
        return NATURAL_PAIRS
    raise DslCompileError(f"unknown space {kw!r}")


@dataclass(frozen=True)
class Derivation:
    """How one written equation maps onto the normal form."""

    label: str
    typ: tuple
    variables: tuple
    left_inner: tuple
    right_inner: tuple
    F: str
    G: str
    F_depends_on_x: bool
    G_depends_on_x: bool

    def as_dict(self) -> dict:
        return {
            "label": self.label, "type": list(self.typ), "variables": list(self.variables),
            "alpha": list(self.left_inner), "beta": list(self.right_inner),
            "F": self.F, "G": self.G,
            "F_depends_on_x": self.F_depends_on_x, "G_depends_on_x": self.G_depends_on_x,
        }


@dataclass(frozen=True)
class CompiledSystem:
    system: GfeSystem
    derivations: tuple
    ast: SystemAst

    def derivation(self, label: str) -> Derivation:
        for d in self.derivations:
            if d.label == label:
                return d
        raise KeyError(label)


def _fail(msg, node=None):
    line, col = (node.pos if node is not None and node.pos else (None, None))
    raise DslCompileError(msg, line, col)


# ---------------------------------------------------------------------------
# carrier checks
# ---------------------------------------------------------------------------

def _check_x_expr(e, family: str):
    for node in walk(e):
        if family == _PAIRS:
            if not isinstance(node, (Var, Call)):
                _fail("only variables and shifts act on pairs", node)
            continue
        if isinstance(node, Call):
            _fail(f"{node.fn} needs the pairs domain", node)
        if isinstance(node, Num) and family in (_RING, _SEMIRING):
            if not isinstance(node.value, int):
                _fail("real literal on an integer carrier", node)
        if isinstance(node, Neg) and family == _SEMIRING:
            _fail("negation is not supported on naturals", node)
        if isinstance(node, Bin):
            if node.op == "/" and family != _FIELD:
                _fail("'/' is not supported on this carrier", node)
            if node.op == "-" and family == _SEMIRING:
                _fail("'-' is not supported on naturals", node)


def _check_y_expr(e, y_family: str, x_family: str):
    if y_family == _PAIRS:
        _fail("pairs cannot be a codomain", e)
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, App):
            continue  # inner expression already checked
        if isinstance(node, Call):
            if node.fn in ACCESSORS:
                if x_family != _PAIRS:
                    _fail(f"{node.fn} needs the pairs domain", node)
                _check_x_expr(node.arg, _PAIRS)
                continue
            if node.fn in SHIFTS:
                _fail(f"{node.fn} yields a pair; wrap it in fst or snd", node)
            if y_family != _FIELD:
                _fail(f"{node.fn} is not supported on an integer codomain", node)
        elif isinstance(node, Var):
            if x_family == _PAIRS:
                _fail(f"bare pair variable {node.name}; use fst or snd", node)
        elif isinstance(node, Const) and y_family != _FIELD:
            _fail(f"constant {node.name} on an integer codomain", node)
        elif isinstance(node, Num) and y_family != _FIELD and not isinstance(node.value, int):
            _fail("real literal on an integer codomain", node)
        elif isinstance(node, Bin) and node.op == "/" and y_family != _FIELD:
            _fail("'/' is not supported on an integer codomain", node)
        if isinstance(node, Neg):
            stack.append(node.operand)
        elif isinstance(node, Bin):
            stack.extend((node.right, node.left))
        elif isinstance(node, Call):
            stack.append(node.arg)


# ---------------------------------------------------------------------------
# closures
# ---------------------------------------------------------------------------

_BINOPS = {"+": operator.add, "-": operator.sub, "*": operator.mul, "/": operator.truediv, "^": operator.pow}
_CONSTS = {"pi": math.pi, "e": math.e}


def _shift(fn):
    dx, dy = {"sh1": (1, 0), "sh2": (0, 1), "sh12": (1, 1)}[fn]
    return lambda v: (v[0] + dx, v[1] + dy)


def _math(fn, complex_carrier: bool):
    if fn == "abs":
        return abs
    return getattr(cmath if complex_carrier else math, fn)


def _closure(e, var_index: dict, cell=None, complex_carrier=False):
    """``fn(a, x)``: evaluate ``e`` with matrix ``a`` and argument tuple ``x``.

    ``cell`` maps an App node's canonical key to its ``(i, j)`` entry; x-only
    expressions ignore ``a``.
    """
    if isinstance(e, Num):
        v = e.value
        return lambda a, x: v
    if isinstance(e, Const):
        v = _CONSTS[e.name]
        return lambda a, x: v
    if isinstance(e, Var):
        idx = var_index[e.name]
        return lambda a, x: x[idx]
    if isinstance(e, Neg):
        inner = _closure(e.operand, var_index, cell, complex_carrier)
        return lambda a, x: -inner(a, x)
    if isinstance(e, Bin):
        op = _BINOPS[e.op]
        lf = _closure(e.left, var_index, cell, complex_carrier)
        rf = _closure(e.right, var_index, cell, complex_carrier)
        return lambda a, x: op(lf(a, x), rf(a, x))
    if isinstance(e, Call):
        inner = _closure(e.arg, var_index, cell, complex_carrier)
        if e.fn in SHIFTS:
            sh = _shift(e.fn)
            return lambda a, x: sh(inner(a, x))
        if e.fn in ACCESSORS:
            idx = 0 if e.fn == "fst" else 1
            return lambda a, x: inner(a, x)[idx]
        fn = _math(e.fn, complex_carrier)
        return lambda a, x: fn(inner(a, x))
    if isinstance(e, App):
        i, j = cell[("app", e.unknown, canonical(e.arg))]
        return lambda a, x: a[i][j]
    raise TypeError(f"not an expression node: {e!r}")


def _collect(side, unknowns) -> tuple[list, dict]:
    """Distinct inner expressions (first occurrence) and the App -> cell map."""
    inner_keys: list = []
    inner_nodes: list = []
    cells: dict = {}
    for node in walk(side):
        if isinstance(node, App):
            key = canonical(node.arg)
            if key not in inner_keys:
                inner_keys.append(key)
                inner_nodes.append(node.arg)
            cells[("app", node.unknown, key)] = (unknowns.index(node.unknown), inner_keys.index(key))
    return inner_nodes, cells


def _depends_on_x(side) -> bool:
    """True when a variable occurs outside every unknown application."""
    stack = [side]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            return True
        if isinstance(node, Neg):
            stack.append(node.operand)
        elif isinstance(node, Bin):
            stack.extend((node.left, node.right))
        elif isinstance(node, Call):
            stack.append(node.arg)
    return False


def _rendered(side, unknowns, cells) -> str:
    """The side expression with ``y[i,j]`` in place of each application."""

    def sub(e):
        if isinstance(e, App):
            i, j = cells[("app", e.unknown, canonical(e.arg))]
            return Var(f"y[{i + 1},{j + 1}]")
        if isinstance(e, Neg):
            return Neg(sub(e.operand))
        if isinstance(e, Bin):
            return Bin(e.op, sub(e.left), sub(e.right))
        if isinstance(e, Call):
            return Call(e.fn, sub(e.arg))
        return e

    return format_expr(sub(side))


def _mapping(side, k, inner, cells, var_index, p, complex_carrier, name) -> MatrixMapping:
    body = _closure(side, var_index, cells, complex_carrier)
    selector = None
    if isinstance(side, App):
        selector = cells[("app", side.unknown, canonical(side.arg))]
    return MatrixMapping(k, len(inner), p, body, _depends_on_x(side), name, selector)


def _ops(inner, var_index, p) -> OpFamily:
    members = []
    for e in inner:
        fn = _closure(e, var_index)
        members.append(NamedOp(format_expr(e), p, lambda *x, fn=fn: fn(None, x)))
    return OpFamily(p, tuple(members))


def compile_system(ast: SystemAst, domain: SpaceDesc | None = None,
                   codomain: SpaceDesc | None = None) -> CompiledSystem:
    """Compile ``ast``; explicit ``domain``/``codomain`` override the declarations."""
    if not ast.equations:
        raise DslCompileError("the system has no equations")
    if not ast.unknowns:
        raise DslCompileError("no unknowns declared")
    dom_decl = ast.domain.keyword if ast.domain is not None else "reals"
    cod_decl = ast.codomain.keyword if ast.codomain is not None else "reals"
    X = domain or space_for(ast.domain)
    Y = codomain or space_for(ast.codomain)
    x_family = _family_of(X, dom_decl if domain is None else None)
    y_family = _family_of(Y, cod_decl if codomain is None else None)
    complex_carrier = Y.kind == "complex-halfplane"
    k = len(ast.unknowns)
    equations, derivations = [], []
    for eq in ast.equations:
        used = {n.name for side in (eq.lhs, eq.rhs) for n in walk(side) if isinstance(n, Var)}
        variables = tuple(v for v in ast.variables if v in used)
        var_index = {v: i for i, v in enumerate(variables)}
        p = len(variables)
        for side in (eq.lhs, eq.rhs):
            for node in walk(side):
                if isinstance(node, App):
                    _check_x_expr(node.arg, x_family)
            _check_y_expr(side, y_family, x_family)
        left_inner, left_cells = _collect(eq.lhs, ast.unknowns)
        right_inner, right_cells = _collect(eq.rhs, ast.unknowns)
        if not left_inner or not right_inner:
            _fail(f"{eq.label}: each side must apply an unknown at least once", eq)
        F = _mapping(eq.lhs, k, left_inner, left_cells, var_index, p, complex_carrier,
                     _rendered(eq.lhs, ast.unknowns, left_cells))
        G = _mapping(eq.rhs, k, right_inner, right_cells, var_index, p, complex_carrier,
                     _rendered(eq.rhs, ast.unknowns, right_cells))
        gfe = Gfe(eq.label, _ops(left_inner, var_index, p), _ops(right_inner, var_index, p), F, G, X, Y)
        equations.append(gfe)
        derivations.append(Derivation(
            eq.label, gfe.typ, variables,
            tuple(format_expr(e) for e in left_inner), tuple(format_expr(e) for e in right_inner),
            F.name, G.name, F.depends_on_x, G.depends_on_x,
        ))
    return CompiledSystem(GfeSystem(tuple(equations)), tuple(derivations), ast)


def _family_of(space: SpaceDesc, keyword: str | None) -> str:
    if keyword is not None:
        return _SPACE_FAMILY[keyword]
    return {
        "real-line": _FIELD, "complex-halfplane": _FIELD, "integers": _RING,
        "naturals": _SEMIRING, "natural-pairs": _PAIRS,
    }.get(space.kind) or _fail(f"carrier {space.kind} is not supported by the language")


def compile_text(text: str, domain=None, codomain=None) -> CompiledSystem:
    return compile_system(parse_system(text), domain, codomain)
