"""Conditions over normal forms, for filtering search results.

Grammar (``and`` binds tighter than ``or``)::

    q    := disj
    disj := conj ("or" conj)*
    conj := unit ("and" unit)*
    unit := "not" unit | "(" q ")" | atom
    atom := "p" INT "." ID OP INT | "done(p" INT ")" | "blocked(p" INT ")"
    OP   := "=" | "!=" | ">" | "<"
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Union

from .explorer import NormalForm
from .semantics import NA, Status

__all__ = [
    "And", "Blocked", "Done", "Not", "Or", "Query", "QueryError",
    "QueryErrorKind", "VarCompare", "eval_query", "parse_query",
]


class QueryErrorKind(enum.Enum):
    SYNTAX = "Syntax"
    UNKNOWN_PROCESS = "UnknownProcess"
    UNBOUND_VARIABLE = "UnboundVariable"


class QueryError(Exception):
    def __init__(self, kind: QueryErrorKind, detail: str):
        super().__init__(f"{kind.value}: {detail}")
        self.kind = kind
        self.detail = detail


@dataclass(frozen=True)
class VarCompare:
    proc: int
    var: str
    op: str
    value: int


@dataclass(frozen=True)
class Done:
    proc: int


@dataclass(frozen=True)
class Blocked:
    proc: int


@dataclass(frozen=True)
class Not:
    q: "Query"


@dataclass(frozen=True)
class And:
    left: "Query"
    right: "Query"


@dataclass(frozen=True)
class Or:
    left: "Query"
    right: "Query"


Query = Union[VarCompare, Done, Blocked, Not, And, Or]

_TOKEN_RE = re.compile(r"\s*(?:(?P<int>-?\d+)|(?P<word>[A-Za-z_]\w*)|(?P<op>!=|[=<>().]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens, pos = [], 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise QueryError(QueryErrorKind.SYNTAX, f"unexpected character {text[pos]!r} at {pos + 1}")
        tokens.append((m.lastgroup, m.group(m.lastgroup), m.start(m.lastgroup) + 1))
        pos = m.end()
    tokens.append(("eof", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def fail(self, expected: str) -> QueryError:
        kind, text, col = self.peek()
        found = "end of query" if kind == "eof" else repr(text)
        return QueryError(QueryErrorKind.SYNTAX, f"expected {expected} at column {col}, found {found}")

    def take(self, text: str) -> bool:
        if self.peek()[1] == text and self.peek()[0] != "eof":
            self.pos += 1
            return True
        return False

    def need(self, text: str) -> None:
        if not self.take(text):
            raise self.fail(repr(text))

    def proc(self) -> int:
        kind, text, _ = self.peek()
        m = re.fullmatch(r"p(\d+)", text) if kind == "word" else None
        if m is None:
            raise self.fail("a process reference like p0")
        self.pos += 1
        return int(m.group(1))

    def disj(self) -> Query:
        node = self.conj()
        while self.take("or"):
            node = Or(node, self.conj())
        return node

    def conj(self) -> Query:
        node = self.unit()
        while self.take("and"):
            node = And(node, self.unit())
        return node

    def unit(self) -> Query:
        if self.take("not"):
            return Not(self.unit())
        if self.take("("):
            node = self.disj()
            self.need(")")
            return node
        for word, ctor in (("done", Done), ("blocked", Blocked)):
            if self.take(word):
                self.need("(")
                k = self.proc()
                self.need(")")
                return ctor(k)
        k = self.proc()
        self.need(".")
        kind, var, _ = self.peek()
        if kind != "word":
            raise self.fail("a variable name")
        self.pos += 1
        kind, op, _ = self.peek()
        if op not in ("=", "!=", ">", "<") or kind != "op":
            raise self.fail("a comparison operator")
        self.pos += 1
        kind, value, _ = self.peek()
        if kind != "int":
            raise self.fail("an integer")
        self.pos += 1
        return VarCompare(k, var, op, int(value))


def parse_query(text: str) -> Query:
    parser = _Parser(text)
    q = parser.disj()
    if parser.peek()[0] != "eof":
        raise parser.fail("end of query")
    return q


def _process(nf: NormalForm, k: int):
    if k >= nf.state.np:
        raise QueryError(QueryErrorKind.UNKNOWN_PROCESS, f"p{k} does not exist (np = {nf.state.np})")
    return nf.state.procs[k]


def eval_query(q: Query, nf: NormalForm) -> bool:
    if isinstance(q, Done):
        return _process(nf, q.proc).status is Status.TERMINATED
    if isinstance(q, Blocked):
        return _process(nf, q.proc).status is Status.BLOCKED
    if isinstance(q, VarCompare):
        store = _process(nf, q.proc).store
        if q.var not in store:
            raise QueryError(QueryErrorKind.UNBOUND_VARIABLE, f"p{q.proc}.{q.var} is not declared")
        v = store[q.var]
        if v is NA:
            # an unassigned variable equals no integer
            return q.op == "!="
        return {"=": v == q.value, "!=": v != q.value, ">": v > q.value, "<": v < q.value}[q.op]
    if isinstance(q, Not):
        return not eval_query(q.q, nf)
    if isinstance(q, And):
        return eval_query(q.left, nf) and eval_query(q.right, nf)
    return eval_query(q.left, nf) or eval_query(q.right, nf)
