"""Canonical keys for x-expressions.

Two inner expressions give the same operation when their keys agree.  The
normal form flattens ``+`` and ``*``, sorts their operands, folds literal
arithmetic and rewrites ``a - b`` as ``a + (-1) b``.  It does not
distribute products over sums.
"""
from __future__ import annotations

from .nodes import App, Bin, Call, Const, Neg, Num, Var


def _num_key(v):
    if isinstance(v, float) and v.is_integer() and abs(v) < 2**53:
        v = int(v)
    return ("num", v)


def _is_num(key) -> bool:
    return key[0] == "num"


def _flatten(op: str, keys):
    out = []
    for k in keys:
        if k[0] == op:
            out.extend(k[1])
        else:
            out.append(k)
    return out


def _assoc(op: str, keys):
    keys = _flatten(op, keys)
    unit = 0 if op == "add" else 1
    acc = unit
    rest = []
    for k in keys:
        if _is_num(k):
            acc = acc + k[1] if op == "add" else acc * k[1]
        else:
            rest.append(k)
    if op == "mul" and acc == 0:
        return _num_key(0)
    if acc != unit or not rest:
        rest.append(_num_key(acc))
    if len(rest) == 1:
        return rest[0]
    return (op, tuple(sorted(rest, key=repr)))


def canonical(e):
    """Hashable canonical key of an expression tree."""
    if isinstance(e, Num):
        return _num_key(e.value)
    if isinstance(e, Var):
        return ("var", e.name)
    if isinstance(e, Const):
        return ("const", e.name)
    if isinstance(e, Neg):
        return _assoc("mul", [_num_key(-1), canonical(e.operand)])
    if isinstance(e, Call):
        return ("call", e.fn, canonical(e.arg))
    if isinstance(e, App):
        return ("app", e.unknown, canonical(e.arg))
    if isinstance(e, Bin):
        a, b = canonical(e.left), canonical(e.right)
        if e.op == "+":
            return _assoc("add", [a, b])
        if e.op == "-":
            return _assoc("add", [a, _assoc("mul", [_num_key(-1), b])])
        if e.op == "*":
            return _assoc("mul", [a, b])
        if e.op == "/":
            if _is_num(a) and _is_num(b) and b[1] != 0:
                q = a[1] / b[1]
                if isinstance(a[1], int) and isinstance(b[1], int) and a[1] % b[1] == 0:
                    q = a[1] // b[1]
                return _num_key(q)
            if _is_num(b) and b[1] == 1:
                return a
            return ("div", a, b)
        if e.op == "^":
            if _is_num(a) and _is_num(b):
                try:
                    return _num_key(a[1] ** b[1])
                except (OverflowError, ZeroDivisionError):
                    pass
            return ("pow", a, b)
    raise TypeError(f"not an expression node: {e!r}")

