"""AST node types.  Source positions never take part in equality."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

Pos = tuple  # (line, col)


@dataclass(frozen=True)
class Num:
    value: int | float
    pos: Pos | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Const:
    name: str
    pos: Pos | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    pos: Pos | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Bin:
    op: str
    left: "Expr"
    right: "Expr"
    pos: Pos | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    """A builtin applied to one argument: math functions, shifts, accessors."""

    fn: str
    arg: "Expr"
    pos: Pos | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class App:
    """An unknown applied to an x-expression."""

    unknown: str
    arg: "Expr"
    pos: Pos | None = field(default=None, compare=False, repr=False)


Expr = Union[Num, Const, Var, Neg, Bin, Call, App]


@dataclass(frozen=True)
class SpaceDecl:
    keyword: str
    param: int | float | None = None
    pos: Pos | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Equation:
    label: str
    lhs: Expr
    rhs: Expr
    pos: Pos | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class SystemAst:
    unknowns: tuple
    variables: tuple
    domain: SpaceDecl | None
    codomain: SpaceDecl | None
    equations: tuple

    @property
    def k(self) -> int:
        return len(self.unknowns)

    @property
    def p(self) -> int:
        return len(self.variables)


def walk(e: Expr):
    """Pre-order traversal, left to right."""
    yield e
    if isinstance(e, Neg):
        yield from walk(e.operand)
    elif isinstance(e, Bin):
        yield from walk(e.left)
        yield from walk(e.right)
    elif isinstance(e, (Call, App)):
        yield from walk(e.arg)
