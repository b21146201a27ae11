"""Abstract syntax, parser and pretty-printer for SMPI programs.

The concrete grammar::

    program := stmt*
    stmt    := "int" ID ";"
             | ID ":=" expr ";"
             | "if" "(" cond ")" "{" program "}"
             | "while" "(" cond ")" "{" program "}"
             | "send" "(" expr "," expr ")" ";"
             | "recv" "(" ID "," (expr | "any") ")" ";"
    cond    := "not" "(" cond ")" | expr ("=" | ">") expr
    expr    := term (("+" | "-") term)*
    term    := atom ("*" atom)*
    atom    := INT | ID | "(" expr ")"

User variables are single lowercase letters. ``pid`` and ``np`` may be read
but never declared or assigned. ``//`` starts a line comment.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

__all__ = [
    "ANY",
    "AnySource",
    "Assign",
    "BinOp",
    "Compare",
    "Cond",
    "Decl",
    "Expr",
    "If",
    "IntLit",
    "Not",
    "ParseError",
    "Program",
    "Recv",
    "RESERVED",
    "Send",
    "Stmt",
    "Var",
    "While",
    "parse_program",
    "pretty_cond",
    "pretty_expr",
    "pretty_program",
    "pretty_stmt",
]

RESERVED = frozenset({"pid", "np"})
KEYWORDS = frozenset({"int", "if", "while", "send", "recv", "any", "not"})


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str  # one of "+", "-", "*"
    left: "Expr"
    right: "Expr"


Expr = Union[IntLit, Var, BinOp]


@dataclass(frozen=True)
class Compare:
    op: str  # "=" or ">"
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Not:
    cond: "Cond"


Cond = Union[Compare, Not]


@dataclass(frozen=True)
class AnySource:
    """Wildcard source of ``recv(x, any)``."""

    def __repr__(self) -> str:
        return "ANY"

    def __reduce__(self):
        # copies and pickles resolve to the module singleton, so `is ANY` holds
        return "ANY"


ANY = AnySource()


@dataclass(frozen=True)
class Decl:
    var: str


@dataclass(frozen=True)
class Assign:
    var: str
    rhs: Expr


@dataclass(frozen=True)
class If:
    guard: Cond
    body: "Program"


@dataclass(frozen=True)
class While:
    guard: Cond
    body: "Program"


@dataclass(frozen=True)
class Send:
    message: Expr
    dest: Expr


@dataclass(frozen=True)
class Recv:
    target: str
    source: Union[Expr, AnySource]


Stmt = Union[Decl, Assign, If, While, Send, Recv]
Program = tuple  # tuple[Stmt, ...]; the empty tuple is the terminated program


class ParseError(Exception):
    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.message = message


# ---------------------------------------------------------------------------
# Lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|//[^\n]*)
  | (?P<int>[0-9]+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>:=|[-+*=>(){};,])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "name", "kw", "op", "eof"
    text: str
    line: int
    column: int


def _tokenize(text: str) -> Iterator[Token]:
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(line, col, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        value = m.group()
        if kind == "ws":
            nl = value.count("\n")
            if nl:
                line += nl
                line_start = pos + value.rindex("\n") + 1
        elif kind == "name":
            if value in KEYWORDS:
                yield Token("kw", value, line, col)
            elif value in RESERVED or re.fullmatch(r"[a-z]", value):
                yield Token("name", value, line, col)
            else:
                raise ParseError(
                    line, col,
                    f"invalid identifier {value!r}: variables are single lowercase letters",
                )
        else:
            yield Token(kind, value, line, col)
        pos = m.end()
    yield Token("eof", "", line, pos - line_start + 1)


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, text: str):
        self.tokens = list(_tokenize(text))
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        return ParseError(tok.line, tok.column, f"{message}, found {found}")

    def accept(self, text: str) -> bool:
        if self.tok.kind in ("op", "kw") and self.tok.text == text:
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> None:
        if not self.accept(text):
            raise self.error(f"expected {text!r}")

    def target(self, what: str) -> str:
        tok = self.tok
        if tok.kind != "name":
            raise self.error("expected a variable")
        if tok.text in RESERVED:
            raise ParseError(tok.line, tok.column, f"{tok.text!r} is reserved and cannot be {what}")
        self.pos += 1
        return tok.text

    def program(self, closing: str | None) -> Program:
        stmts = []
        while True:
            if closing is None and self.tok.kind == "eof":
                return tuple(stmts)
            if closing is not None and self.accept(closing):
                return tuple(stmts)
            if self.tok.kind == "eof":
                raise self.error(f"expected {closing!r}")
            stmts.append(self.stmt())

    def stmt(self) -> Stmt:
        tok = self.tok
        if self.accept("int"):
            var = self.target("declared")
            self.expect(";")
            return Decl(var)
        if self.accept("if") or self.accept("while"):
            self.expect("(")
            guard = self.cond()
            self.expect(")")
            self.expect("{")
            body = self.program("}")
            return If(guard, body) if tok.text == "if" else While(guard, body)
        if self.accept("send"):
            self.expect("(")
            message = self.expr()
            self.expect(",")
            dest = self.expr()
            self.expect(")")
            self.expect(";")
            return Send(message, dest)
        if self.accept("recv"):
            self.expect("(")
            var = self.target("assigned")
            self.expect(",")
            source = ANY if self.accept("any") else self.expr()
            self.expect(")")
            self.expect(";")
            return Recv(var, source)
        if tok.kind == "name":
            var = self.target("assigned")
            self.expect(":=")
            rhs = self.expr()
            self.expect(";")
            return Assign(var, rhs)
        raise self.error("expected a statement")

    def cond(self) -> Cond:
        if self.accept("not"):
            self.expect("(")
            inner = self.cond()
            self.expect(")")
            return Not(inner)
        left = self.expr()
        op = self.tok.text
        if not (self.accept("=") or self.accept(">")):
            raise self.error("expected '=' or '>'")
        return Compare(op, left, self.expr())

    def expr(self) -> Expr:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.pos += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.atom()
        while self.accept("*"):
            node = BinOp("*", node, self.atom())
        return node

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "int":
            self.pos += 1
            return IntLit(int(tok.text))
        if tok.kind == "name":
            self.pos += 1
            return Var(tok.text)
        if self.accept("("):
            inner = self.expr()
            self.expect(")")
            return inner
        raise self.error("expected an expression")


def parse_program(text: str) -> Program:
    """Parse SMPI source into a tuple of statements.

    Raises :class:`ParseError` pointing at the first offending token.
    """
    return _Parser(text).program(None)


# ---------------------------------------------------------------------------
# Pretty-printer

_PREC = {"+": 1, "-": 1, "*": 2}


def pretty_expr(e: Expr, prec: int = 0) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    p = _PREC[e.op]
    # left-associative: right operand of equal precedence needs parens
    text = f"{pretty_expr(e.left, p)} {e.op} {pretty_expr(e.right, p + 1)}"
    return f"({text})" if p < prec else text


def pretty_cond(c: Cond) -> str:
    if isinstance(c, Not):
        return f"not({pretty_cond(c.cond)})"
    return f"{pretty_expr(c.left)} {c.op} {pretty_expr(c.right)}"


def pretty_stmt(s: Stmt) -> str:
    if isinstance(s, Decl):
        return f"int {s.var};"
    if isinstance(s, Assign):
        return f"{s.var} := {pretty_expr(s.rhs)};"
    if isinstance(s, (If, While)):
        kw = "if" if isinstance(s, If) else "while"
        body = pretty_program(s.body)
        return f"{kw} ({pretty_cond(s.guard)}) {{ {body} }}" if body else f"{kw} ({pretty_cond(s.guard)}) {{ }}"
    if isinstance(s, Send):
        return f"send({pretty_expr(s.message)}, {pretty_expr(s.dest)});"
    if isinstance(s, Recv):
        src = "any" if s.source is ANY else pretty_expr(s.source)
        return f"recv({s.target}, {src});"
    raise TypeError(f"not a statement: {s!r}")


def pretty_program(p: Program, indent: int | None = None) -> str:
    """Render a program as canonical SMPI text.

    With ``indent=None`` the result is a single line (used in state keys);
    otherwise one statement per line, nested bodies indented by ``indent``.
    """
    if indent is None:
        return " ".join(pretty_stmt(s) for s in p)
    return "\n".join(_block_lines(p, indent, 0))


def _block_lines(p: Program, indent: int, depth: int) -> Iterator[str]:
    pad = " " * (indent * depth)
    for s in p:
        if isinstance(s, (If, While)) and s.body:
            kw = "if" if isinstance(s, If) else "while"
            yield f"{pad}{kw} ({pretty_cond(s.guard)}) {{"
            yield from _block_lines(s.body, indent, depth + 1)
            yield f"{pad}}}"
        else:
            yield pad + pretty_stmt(s)
