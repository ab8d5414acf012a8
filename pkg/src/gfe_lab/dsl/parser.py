"""Recursive-descent parser for ``.gfe`` sources.

Grammar (``;`` between statements is optional, ``#`` starts a comment)::

    system   := stmt*
    stmt     := "unknown" IDENT+ | "vars" IDENT+
              | ("domain" | "codomain") SPACE [NUMBER]
              | "eq" LABEL ":" expr "=" expr
    expr     := term (("+" | "-") term)*
    term     := unary (("*" | "/") unary)*
    unary    := "-" unary | power
    power    := atom ["^" unary]
    atom     := NUMBER | CONST | VAR | "(" expr ")" | NAME "(" expr ")"

``NAME`` is either a builtin or a declared unknown.  An unknown's argument
must be an x-expression: variables, literals, arithmetic and shifts.
"""
from __future__ import annotations

from ..errors import DslError, UndeclaredIdentifier
from .lexer import Token, tokenize
from .nodes import App, Bin, Call, Const, Equation, Neg, Num, SpaceDecl, SystemAst, Var, walk

MATH_FUNCS = ("sin", "cos", "tan", "exp", "log", "sqrt", "abs")
SHIFTS = ("sh1", "sh2", "sh12")
ACCESSORS = ("fst", "snd")
BUILTINS = frozenset(MATH_FUNCS + SHIFTS + ACCESSORS)
CONSTANTS = ("pi", "e")
SPACE_KEYWORDS = ("reals", "complex", "halfplane", "naturals", "integers", "pairs")
RESERVED = BUILTINS | frozenset(CONSTANTS) | frozenset(SPACE_KEYWORDS)


def _number(text: str):
    if any(c in text for c in ".eE"):
        return float(text)
    return int(text)


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0
        self.unknowns: list[str] = []
        self.variables: list[str] = []
        self.domain = None
        self.codomain = None
        self.equations: list[Equation] = []

    # token helpers ----------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def _advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def _error(self, message, expected=(), tok=None, cls=DslError):
        t = tok or self.tok
        raise cls(message, t.line, t.col, expected)

    def _is_op(self, text) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    def _expect_op(self, text) -> Token:
        if not self._is_op(text):
            found = self.tok.text or "end of input"
            self._error(f"expected {text!r}, found {found!r}", (text,))
        return self._advance()

    # statements -------------------------------------------------------
    def parse(self) -> SystemAst:
        while self.tok.kind != "eof":
            if self._is_op(";"):
                self._advance()
                continue
            if self.tok.kind != "keyword":
                self._error(
                    f"expected a statement, found {self.tok.text!r}",
                    ("unknown", "vars", "domain", "codomain", "eq"),
                )
            kw = self._advance()
            getattr(self, f"_stmt_{kw.text}")(kw)
        return SystemAst(tuple(self.unknowns), tuple(self.variables), self.domain, self.codomain,
                         tuple(self.equations))

    def _names(self, kw: Token, into: list):
        if self.tok.kind != "ident":
            self._error(f"'{kw.text}' needs at least one name", ("identifier",))
        while self.tok.kind == "ident":
            t = self._advance()
            if t.text in RESERVED:
                self._error(f"{t.text!r} is reserved", ("identifier",), t)
            if t.text in self.unknowns or t.text in self.variables:
                self._error(f"{t.text!r} declared twice", (), t)
            into.append(t.text)

    def _stmt_unknown(self, kw):
        self._names(kw, self.unknowns)

    def _stmt_vars(self, kw):
        self._names(kw, self.variables)

    def _space(self, kw) -> SpaceDecl:
        t = self.tok
        if t.kind != "ident" or t.text not in SPACE_KEYWORDS:
            self._error(f"unknown space {t.text!r}", SPACE_KEYWORDS)
        self._advance()
        param = None
        if self.tok.kind == "number":
            if t.text != "halfplane":
                self._error(f"space {t.text!r} takes no parameter", (";",))
            param = _number(self._advance().text)
        elif self._is_op("-") and self.tokens[self.i + 1].kind == "number" and t.text == "halfplane":
            self._advance()
            param = -_number(self._advance().text)
        return SpaceDecl(t.text, param, (t.line, t.col))

    def _stmt_domain(self, kw):
        if self.domain is not None:
            self._error("domain declared twice", (), kw)
        self.domain = self._space(kw)

    def _stmt_codomain(self, kw):
        if self.codomain is not None:
            self._error("codomain declared twice", (), kw)
        self.codomain = self._space(kw)

    def _label(self) -> str:
        t = self.tok
        if t.kind not in ("ident", "keyword"):
            self._error("expected an equation label", ("label",))
        self._advance()
        parts = [t.text]
        end = t.end
        # hyphenated labels such as sin-add: pieces must touch
        while self._is_op("-") and self.tok.offset == end:
            nxt = self.tokens[self.i + 1]
            if nxt.kind not in ("ident", "keyword", "number") or nxt.offset != self.tok.end:
                break
            self._advance()
            self._advance()
            parts.append(nxt.text)
            end = nxt.end
        return "-".join(parts)

    def _stmt_eq(self, kw):
        label = self._label()
        if any(e.label == label for e in self.equations):
            self._error(f"duplicate equation label {label!r}", (), kw)
        self._expect_op(":")
        lhs = self._expr()
        self._expect_op("=")
        rhs = self._expr()
        self.equations.append(Equation(label, lhs, rhs, (kw.line, kw.col)))

    # expressions ------------------------------------------------------
    def _expr(self):
        node = self._term()
        while self.tok.kind == "op" and self.tok.text in "+-" :
            t = self._advance()
            node = Bin(t.text, node, self._term(), (t.line, t.col))
        return node

    def _term(self):
        node = self._unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            t = self._advance()
            node = Bin(t.text, node, self._unary(), (t.line, t.col))
        return node

    def _unary(self):
        if self._is_op("-"):
            t = self._advance()
            return Neg(self._unary(), (t.line, t.col))
        return self._power()

    def _power(self):
        base = self._atom()
        if self._is_op("^"):
            t = self._advance()
            return Bin("^", base, self._unary(), (t.line, t.col))
        return base

    def _atom(self):
        t = self.tok
        pos = (t.line, t.col)
        if t.kind == "number":
            self._advance()
            return Num(_number(t.text), pos)
        if self._is_op("("):
            self._advance()
            node = self._expr()
            self._expect_op(")")
            return node
        if t.kind != "ident":
            found = t.text or "end of input"
            self._error(f"unexpected {found!r}", ("number", "identifier", "(", "-"))
        self._advance()
        if self._is_op("("):
            return self._call(t)
        if t.text in self.variables:
            return Var(t.text, pos)
        if t.text in CONSTANTS:
            return Const(t.text, pos)
        if t.text in self.unknowns or t.text in BUILTINS:
            self._error(f"{t.text} requires one argument", ("(",), t)
        self._error(f"undeclared identifier {t.text!r}", (), t, UndeclaredIdentifier)

    def _call(self, name: Token):
        self._expect_op("(")
        args = []
        if not self._is_op(")"):
            args.append(self._expr())
            while self._is_op(","):
                self._advance()
                args.append(self._expr())
        self._expect_op(")")
        if len(args) != 1:
            self._error(f"{name.text} requires one argument", (), name)
        pos = (name.line, name.col)
        if name.text in BUILTINS:
            return Call(name.text, args[0], pos)
        if name.text not in self.unknowns:
            self._error(f"undeclared identifier {name.text!r}", (), name, UndeclaredIdentifier)
        _check_x_expression(args[0], name)
        return App(name.text, args[0], pos)


def _check_x_expression(e, owner: Token):
    for node in walk(e):
        bad = None
        if isinstance(node, App):
            bad = "unknowns cannot appear inside x-expressions"
        elif isinstance(node, Call) and node.fn not in SHIFTS:
            bad = f"{node.fn} is not allowed inside x-expressions"
        elif isinstance(node, Const):
            bad = f"constant {node.name} is not allowed inside x-expressions"
        elif isinstance(node, Bin) and node.op == "^":
            bad = "'^' is not allowed inside x-expressions"
        if bad:
            line, col = node.pos or (owner.line, owner.col)
            raise DslError(bad, line, col)


def parse_system(text: str) -> SystemAst:
    """Parse ``.gfe`` source text into a :class:`SystemAst`."""
    return _Parser(text).parse()
