"""Canonical text rendering; ``parse_system(format_system(ast)) == ast``."""
from __future__ import annotations

from .nodes import App, Bin, Call, Const, Neg, Num, SpaceDecl, SystemAst, Var

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_NEG_PREC = 3
_ATOM_PREC = 5


def _prec(e) -> int:
    if isinstance(e, Bin):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return _NEG_PREC
    if isinstance(e, Num) and e.value < 0:
        return _NEG_PREC
    return _ATOM_PREC


def _num(v) -> str:
    if isinstance(v, bool):
        raise TypeError("booleans are not numeric literals")
    if isinstance(v, int):
        return str(v)
    text = repr(float(v))
    # keep a float a float on re-parse
    return text if any(c in text for c in ".eE") else text + ".0"


def format_expr(e) -> str:
    if isinstance(e, Num):
        return _num(e.value)
    if isinstance(e, (Const, Var)):
        return e.name
    if isinstance(e, (Call, App)):
        name = e.fn if isinstance(e, Call) else e.unknown
        return f"{name}({format_expr(e.arg)})"
    if isinstance(e, Neg):
        inner = format_expr(e.operand)
        if _prec(e.operand) < _NEG_PREC:
            inner = f"({inner})"
        return "-" + inner
    if isinstance(e, Bin):
        p = _PREC[e.op]
        left, right = format_expr(e.left), format_expr(e.right)
        if e.op == "^":
            # right-associative: the base needs parentheses at equal precedence
            if _prec(e.left) <= p:
                left = f"({left})"
            if _prec(e.right) < _NEG_PREC:
                right = f"({right})"
            return f"{left}^{right}"
        if _prec(e.left) < p:
            left = f"({left})"
        if _prec(e.right) <= p:
            right = f"({right})"
        return f"{left} {e.op} {right}"
    raise TypeError(f"not an expression node: {e!r}")


def _space(s: SpaceDecl) -> str:
    return s.keyword if s.param is None else f"{s.keyword} {_num(s.param)}"


def format_system(ast: SystemAst) -> str:
    lines = []
    if ast.unknowns:
        lines.append("unknown " + " ".join(ast.unknowns))
    if ast.variables:
        lines.append("vars " + " ".join(ast.variables))
    if ast.domain is not None:
        lines.append("domain " + _space(ast.domain))
    if ast.codomain is not None:
        lines.append("codomain " + _space(ast.codomain))
    for eq in ast.equations:
        lines.append(f"eq {eq.label}: {format_expr(eq.lhs)} = {format_expr(eq.rhs)}")
    return "\n".join(lines) + "\n"
