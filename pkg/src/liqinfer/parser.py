"""Parser for the tiny-ML input format: a qualifier set followed by val
bindings, plus a parser for printed types (used by the JSON round trip).

A file looks like::

    Qualifiers { v >= 0, v <= 0 }

    val mul = \\x . * x x
    val neg = \\x. - x

Inside qualifiers ``v`` is the reserved value-variable spelling.  Line
comments start with ``--``.  Every binder is made globally unique during
parsing (names only change when they would collide).
"""

from __future__ import annotations

from dataclasses import dataclass

from .syntax import (
    AddExp,
    App,
    Arm,
    BaseArm,
    BOOL,
    BoolConst,
    BoolRef,
    BoolVarRef,
    CmpRef,
    ConjRef,
    Const,
    FunArm,
    IffRef,
    INT,
    IntConst,
    IntExp,
    IntExpr,
    Lam,
    Let,
    LiqError,
    LiquidType,
    NameSource,
    NegExp,
    PrimConst,
    Refinement,
    Scheme,
    SubExp,
    MulExp,
    Term,
    TOP,
    Var,
    VarArm,
    VarExp,
    VALUE_VAR,
    make_type,
)


class ParseError(LiqError):
    def __init__(self, message: str, line: int, col: int) -> None:
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Program:
    qualifiers: tuple[Refinement, ...]
    bindings: tuple[tuple[str, Term], ...]


KEYWORDS = {"Qualifiers", "val", "let", "in", "true", "false", "if", "fix"}

PRIM_TOKENS = {
    "+": "add",
    "-": "neg",
    "*": "mul",
    "<=": "le",
    ">=": "ge",
    "<": "lt",
    ">": "gt",
    "=": "eq",
    "if": "ite",
    "fix": "fix",
    "neg": "neg",
    "add": "add",
    "sub": "sub",
    "mul": "mul",
}

SYMBOLS = ("<=>", "&&", "/\\", "->", "<=", ">=", "{", "}", "(", ")", ",", "\\", ".",
           "+", "-", "*", "<", ">", "=", "|", ":")


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "ident", "sym", "eof"
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if c in " \t\r":
            i, col = i + 1, col + 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_'%"):
                j += 1
            toks.append(Token("ident", text[i:j], line, col))
            col += j - i
            i = j
            continue
        for sym in SYMBOLS:
            if text.startswith(sym, i):
                toks.append(Token("sym", sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks


class _Tokens:
    def __init__(self, toks: list[Token]) -> None:
        self.toks = toks
        self.i = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.peek()
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.peek()
        if t.text != text or t.kind == "eof":
            raise ParseError(f"expected {text!r}, found {t.text or 'end of input'!r}", t.line, t.col)
        return self.next()

    def fail(self, message: str) -> ParseError:
        t = self.peek()
        return ParseError(message, t.line, t.col)


# ---------------------------------------------------------------------------
# Qualifier expressions (infix comparison grammar)
# ---------------------------------------------------------------------------


def _parse_int_atom(ts: _Tokens) -> IntExpr:
    t = ts.peek()
    if t.kind == "int":
        ts.next()
        return IntExp(int(t.text))
    if t.text == "-":
        ts.next()
        return NegExp(_parse_int_atom(ts))
    if t.kind == "ident" and t.text not in KEYWORDS:
        ts.next()
        return VarExp(t.text)
    if t.text == "(":
        ts.next()
        e = _parse_int_sum(ts)
        ts.expect(")")
        return e
    raise ts.fail(f"expected an integer expression, found {t.text!r}")


def _parse_int_sum(ts: _Tokens) -> IntExpr:
    e = _parse_int_atom(ts)
    while ts.peek().text in ("+", "-"):
        op = ts.next().text
        rhs = _parse_int_atom(ts)
        e = AddExp(e, rhs) if op == "+" else SubExp(e, rhs)
    return e


def _parse_qualifier(ts: _Tokens) -> Refinement:
    t = ts.peek()
    if t.text == "true":
        ts.next()
        return TOP
    if t.text == "false":
        ts.next()
        return BoolRef(False)
    if t.text == "(":
        # could be a parenthesized qualifier or grouping inside an expression
        mark = ts.i
        try:
            ts.next()
            q = _parse_qualifier(ts)
            ts.expect(")")
            return q
        except ParseError:
            ts.i = mark
    lhs = _parse_int_sum(ts)
    op = ts.peek().text
    if op in ("=", "<=", ">=", "<", ">"):
        ts.next()
        rhs = _parse_int_sum(ts)
        return CmpRef(op, lhs, rhs)
    if isinstance(lhs, VarExp):
        # a bare variable is a boolean atom
        return BoolVarRef(lhs.name)
    raise ts.fail("a qualifier must be a comparison or a boolean expression")


def parse_qualifier(text: str) -> Refinement:
    ts = _Tokens(tokenize(text))
    q = _parse_qualifier(ts)
    if ts.peek().kind != "eof":
        raise ts.fail("trailing input after qualifier")
    return q


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------


class _TermParser:
    def __init__(self, ts: _Tokens, names: NameSource) -> None:
        self.ts = ts
        self.names = names

    def _bind(self, surface: str, line: int, col: int) -> str:
        if surface == VALUE_VAR:
            raise ParseError(f"{VALUE_VAR!r} is reserved for the value variable", line, col)
        if surface in KEYWORDS or surface in PRIM_TOKENS:
            raise ParseError(f"{surface!r} cannot be used as a binder", line, col)
        return self.names.fresh(surface)

    def term(self, scope: dict[str, str]) -> Term:
        t = self.ts.peek()
        if t.text == "\\":
            self.ts.next()
            b = self.ts.peek()
            if b.kind != "ident":
                raise self.ts.fail("expected a binder after \\")
            self.ts.next()
            fresh = self._bind(b.text, b.line, b.col)
            self.ts.expect(".")
            body = self.term({**scope, b.text: fresh})
            return Lam(fresh, body, pos=(t.line, t.col))
        if t.text == "let":
            self.ts.next()
            b = self.ts.peek()
            if b.kind != "ident":
                raise self.ts.fail("expected a binder after let")
            self.ts.next()
            fresh = self._bind(b.text, b.line, b.col)
            self.ts.expect("=")
            bound = self.term(scope)
            self.ts.expect("in")
            body = self.term({**scope, b.text: fresh})
            return Let(fresh, bound, body, pos=(t.line, t.col))
        return self.app(scope)

    def app(self, scope: dict[str, str]) -> Term:
        head = self.atom(scope)
        while True:
            nxt = self.ts.peek()
            if nxt.kind in ("int", "ident") or nxt.text in ("(", "\\") or nxt.text in PRIM_TOKENS:
                if nxt.text in ("in", "val") or nxt.kind == "eof":
                    break
                arg = self.atom(scope)
                head = App(head, arg, pos=(nxt.line, nxt.col))
            else:
                break
        return head

    def atom(self, scope: dict[str, str]) -> Term:
        t = self.ts.peek()
        if t.kind == "int":
            self.ts.next()
            return Const(IntConst(int(t.text)), pos=(t.line, t.col))
        if t.text == "true" or t.text == "false":
            self.ts.next()
            return Const(BoolConst(t.text == "true"), pos=(t.line, t.col))
        if t.text == "(":
            self.ts.next()
            inner = self.term(scope)
            self.ts.expect(")")
            return inner
        if t.text == "\\" or t.text == "let":
            return self.term(scope)
        if t.text in PRIM_TOKENS and (t.kind == "sym" or t.text in ("if", "fix", "neg", "add", "sub", "mul")):
            self.ts.next()
            return Const(PrimConst(PRIM_TOKENS[t.text]), pos=(t.line, t.col))
        if t.kind == "ident" and t.text not in KEYWORDS:
            self.ts.next()
            return Var(scope.get(t.text, t.text), pos=(t.line, t.col))
        raise self.ts.fail(f"expected a term, found {t.text or 'end of input'!r}")


def parse_term(text: str, names: NameSource | None = None) -> Term:
    ts = _Tokens(tokenize(text))
    names = names if names is not None else NameSource("x")
    t = _TermParser(ts, names).term({})
    if ts.peek().kind != "eof":
        raise ts.fail("trailing input after term")
    return t


def parse_program(text: str) -> Program:
    ts = _Tokens(tokenize(text))
    quals: list[Refinement] = []
    ts.expect("Qualifiers")
    ts.expect("{")
    if ts.peek().text != "}":
        quals.append(_parse_qualifier(ts))
        while ts.peek().text == ",":
            ts.next()
            quals.append(_parse_qualifier(ts))
    ts.expect("}")
    bindings: list[tuple[str, Term]] = []
    seen: set[str] = set()
    while ts.peek().text == "val":
        ts.next()
        nm = ts.peek()
        if nm.kind != "ident":
            raise ts.fail("expected a binding name after val")
        if nm.text in seen:
            raise ParseError(f"duplicate binding name {nm.text!r}", nm.line, nm.col)
        if nm.text == VALUE_VAR:
            raise ParseError(f"{VALUE_VAR!r} is reserved for the value variable", nm.line, nm.col)
        ts.next()
        seen.add(nm.text)
        ts.expect("=")
        # binders are unique within one binding; bindings do not share names
        parser = _TermParser(ts, NameSource("x"))
        bindings.append((nm.text, parser.term({})))
    if ts.peek().kind != "eof":
        raise ts.fail(f"expected 'val' or end of input, found {ts.peek().text!r}")
    return Program(tuple(quals), tuple(bindings))


def pretty_print(program: Program) -> str:
    """Inverse of parse_program on canonical ASTs."""
    from .syntax import render_refinement, render_term

    lines = ["Qualifiers { " + ", ".join(render_refinement(q) for q in program.qualifiers) + " }"]
    if not program.qualifiers:
        lines = ["Qualifiers { }"]
    lines.append("")
    for name, term in program.bindings:
        lines.append(f"val {name} = {render_term(term)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Printed-type parser (for the machine-readable output round trip)
# ---------------------------------------------------------------------------


def parse_scheme(text: str) -> Scheme:
    ts = _Tokens(tokenize(text))
    qvars: list[str] = []
    if ts.peek().text == "forall":
        ts.next()
        while ts.peek().kind == "ident" and ts.peek().text != ".":
            qvars.append(ts.next().text)
        ts.expect(".")
    body = _parse_liquid(ts)
    if ts.peek().kind != "eof":
        raise ts.fail("trailing input after type")
    return Scheme(tuple(qvars), body)


def parse_type(text: str) -> LiquidType:
    ts = _Tokens(tokenize(text))
    t = _parse_liquid(ts)
    if ts.peek().kind != "eof":
        raise ts.fail("trailing input after type")
    return t


def _parse_liquid(ts: _Tokens) -> LiquidType:
    arms = [_parse_arm(ts)]
    while ts.peek().text == "/\\":
        ts.next()
        arms.append(_parse_arm(ts))
    return make_type(arms)


def _parse_arm(ts: _Tokens) -> Arm:
    t = ts.peek()
    if t.text == "{":
        ts.next()
        ts.expect(VALUE_VAR)
        ts.expect(":")
        base_tok = ts.next()
        if base_tok.text not in ("int", "bool"):
            raise ParseError(f"unknown base type {base_tok.text!r}", base_tok.line, base_tok.col)
        ts.expect("|")
        ref = _parse_ref(ts)
        ts.expect("}")
        return BaseArm(INT if base_tok.text == "int" else BOOL, ref)
    if t.text == "(":
        ts.next()
        binder = ts.next()
        if binder.kind != "ident":
            raise ParseError("expected a binder in a function arm", binder.line, binder.col)
        ts.expect(":")
        dom = _parse_liquid(ts)
        ts.expect("->")
        cod = _parse_liquid(ts)
        ts.expect(")")
        return FunArm(binder.text, dom, cod)
    if t.kind == "ident":
        ts.next()
        return VarArm(t.text)
    raise ts.fail(f"expected a type arm, found {t.text!r}")


def _ref_from_expr(e: IntExpr, ts: _Tokens) -> Refinement:
    if isinstance(e, VarExp):
        return BoolVarRef(e.name)
    raise ts.fail("expected a boolean expression")


def _parse_ref(ts: _Tokens) -> Refinement:
    t = ts.peek()
    if t.text == "true":
        ts.next()
        return TOP
    if t.text == "false":
        ts.next()
        return BoolRef(False)
    if t.text == "(":
        ts.next()
        inner = _parse_ref_body(ts)
        ts.expect(")")
        return inner
    if t.kind == "ident":
        ts.next()
        return BoolVarRef(t.text)
    raise ts.fail(f"expected a refinement, found {t.text!r}")


def _parse_ref_body(ts: _Tokens) -> Refinement:
    # already inside parentheses: comparison, biconditional or conjunction
    t = ts.peek()
    first: Refinement | None = None
    if t.text in ("true", "false") or t.text == "(":
        first = _parse_ref(ts)
    else:
        lhs = _parse_type_expr(ts)
        op = ts.peek().text
        if op in ("=", "<=", ">=", "<", ">"):
            ts.next()
            rhs = _parse_type_expr(ts)
            first = CmpRef(op, lhs, rhs)
        else:
            first = _ref_from_expr(lhs, ts)
    if ts.peek().text == "<=>":
        ts.next()
        rhs_ref = _parse_ref(ts) if ts.peek().text in ("true", "false", "(") else _parse_ref_tail(ts)
        return IffRef(first, rhs_ref)
    if ts.peek().text == "&&":
        parts = [first]
        while ts.peek().text == "&&":
            ts.next()
            parts.append(_parse_ref(ts) if ts.peek().text in ("true", "false", "(") else _parse_ref_tail(ts))
        return ConjRef(tuple(parts))
    return first


def _parse_ref_tail(ts: _Tokens) -> Refinement:
    lhs = _parse_type_expr(ts)
    op = ts.peek().text
    if op in ("=", "<=", ">=", "<", ">"):
        ts.next()
        return CmpRef(op, lhs, _parse_type_expr(ts))
    return _ref_from_expr(lhs, ts)


def _parse_type_expr(ts: _Tokens) -> IntExpr:
    t = ts.peek()
    if t.kind == "int":
        ts.next()
        return IntExp(int(t.text))
    if t.text == "-":
        ts.next()
        return NegExp(_parse_type_expr(ts))
    if t.kind == "ident":
        ts.next()
        return VarExp(t.text)
    if t.text == "(":
        ts.next()
        lhs = _parse_type_expr(ts)
        op = ts.next()
        if op.text not in ("+", "-", "*"):
            raise ParseError(f"expected an arithmetic operator, found {op.text!r}", op.line, op.col)
        rhs = _parse_type_expr(ts)
        ts.expect(")")
        if op.text == "+":
            return AddExp(lhs, rhs)
        if op.text == "-":
            return SubExp(lhs, rhs)
        return MulExp(lhs, rhs)
    raise ts.fail(f"expected an integer expression, found {t.text!r}")
