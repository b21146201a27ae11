"""Store-based small-step semantics of SMPI.

Each process owns a store and a remaining program. Local statements are
executed by :func:`local_step`; ``send``/``recv`` block the process with an
evaluated communication intent, and :func:`apply_rendezvous` completes a
matching send/recv pair atomically (synchronous send, no buffering).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Iterable, Iterator, Mapping, Union

from .syntax import (
    ANY,
    AnySource,
    Assign,
    Cond,
    Decl,
    Expr,
    If,
    IntLit,
    Not,
    Program,
    Recv,
    Send,
    Stmt,
    Var,
    While,
    pretty_program,
)


class _NA:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "na"

    def __reduce__(self):
        return (_NA, ())


NA = _NA()
Value = Union[int, _NA]


class FaultKind(enum.Enum):
    UNDECLARED_VARIABLE = "UndeclaredVariable"
    NA_VALUE_READ = "NAValueRead"
    REDECLARATION = "Redeclaration"
    PEER_OUT_OF_RANGE = "PeerOutOfRange"
    SELF_COMMUNICATION = "SelfCommunication"
    # Only reachable from fixed-width backends; Python ints never wrap.
    OVERFLOW = "Overflow"


@dataclass(frozen=True)
class Fault:
    kind: FaultKind
    pid: int
    at: object  # the offending Stmt or Expr
    message: str


class FaultError(Exception):
    """Raised by the evaluators; :func:`local_step` turns it into a Faulted state."""

    def __init__(self, fault: Fault):
        super().__init__(fault.message)
        self.fault = fault


class Store:
    """Immutable finite map from identifiers to values.

    ``bind`` returns a new store; the original is never modified.
    """

    __slots__ = ("_vars", "_hash")

    def __init__(self, bindings: Mapping[str, Value] | Iterable[tuple[str, Value]] = ()):
        self._vars = dict(bindings)
        self._hash = None

    def __getitem__(self, name: str) -> Value:
        return self._vars[name]

    def __contains__(self, name: object) -> bool:
        return name in self._vars

    def __iter__(self) -> Iterator[str]:
        return iter(self._vars)

    def __len__(self) -> int:
        return len(self._vars)

    def get(self, name: str, default=None):
        return self._vars.get(name, default)

    def items(self):
        return self._vars.items()

    def bind(self, name: str, value: Value) -> "Store":
        new = dict(self._vars)
        new[name] = value
        return Store(new)

    @property
    def pid(self) -> int:
        return self._vars.get("pid", -1)

    def user_vars(self) -> list[str]:
        return sorted(k for k in self._vars if k not in ("pid", "np"))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Store) and self._vars == other._vars

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._vars.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"Store({render_store(self)})"


def render_value(v: Value) -> str:
    return "na" if v is NA else str(v)


def render_store(s: Store) -> str:
    """``(i :: 1) (x :: 4) (pid :: 0) (np :: 5)``: user variables sorted, then pid, np."""
    names = s.user_vars() + [k for k in ("pid", "np") if k in s]
    return " ".join(f"({k} :: {render_value(s[k])})" for k in names)


# ---------------------------------------------------------------------------
# Expression and condition evaluation


def eval_expr(s: Store, e: Expr) -> int:
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, Var):
        if e.name not in s:
            raise FaultError(Fault(FaultKind.UNDECLARED_VARIABLE, s.pid, e,
                                   f"variable {e.name!r} is not declared"))
        v = s[e.name]
        if v is NA:
            raise FaultError(Fault(FaultKind.NA_VALUE_READ, s.pid, e,
                                   f"variable {e.name!r} is read before assignment"))
        return v
    left = eval_expr(s, e.left)
    right = eval_expr(s, e.right)
    if e.op == "+":
        return left + right
    if e.op == "-":
        return left - right
    return left * right


def eval_cond(s: Store, c: Cond) -> bool:
    if isinstance(c, Not):
        return not eval_cond(s, c.cond)
    left = eval_expr(s, c.left)
    right = eval_expr(s, c.right)
    return left == right if c.op == "=" else left > right


# ---------------------------------------------------------------------------
# Process and system states


class Status(enum.Enum):
    RUNNING = "running"
    BLOCKED = "blocked"
    TERMINATED = "terminated"
    FAULTED = "faulted"


@dataclass(frozen=True)
class SendIntent:
    value: int
    dest: int


@dataclass(frozen=True)
class RecvIntent:
    target: str
    source: Union[int, AnySource]


CommIntent = Union[SendIntent, RecvIntent]


@dataclass(frozen=True)
class ProcessState:
    store: Store
    remaining: Program
    status: Status = Status.RUNNING
    intent: CommIntent | None = None
    fault: Fault | None = None

    @property
    def pid(self) -> int:
        return self.store.pid

    def render(self) -> str:
        """Store followed by status and remaining program; injective per process."""
        parts = [render_store(self.store)]
        if self.status is Status.FAULTED:
            parts.append(f"faulted[{self.fault.kind.value}]:")
        elif self.status is not Status.TERMINATED:
            parts.append(f"{self.status.value}:")
        if self.remaining:
            parts.append(pretty_program(self.remaining))
        return " ".join(parts)


@dataclass(frozen=True)
class GlobalState:
    procs: tuple  # tuple[ProcessState, ...], index k is pid k

    @property
    def np(self) -> int:
        return len(self.procs)

    def __iter__(self) -> Iterator[ProcessState]:
        return iter(self.procs)

    def __getitem__(self, k: int) -> ProcessState:
        return self.procs[k]

    def replace_procs(self, updates: Mapping[int, ProcessState]) -> "GlobalState":
        procs = list(self.procs)
        for k, p in updates.items():
            procs[k] = p
        return GlobalState(tuple(procs))


def render_state(g: GlobalState) -> str:
    """Stores of all processes in pid order, joined by `` | ``."""
    return " | ".join(render_store(p.store) for p in g.procs)


def canonical_key(g: GlobalState) -> str:
    """Textual state rendering used for deduplication; injective on states."""
    return " | ".join(p.render() for p in g.procs)


def _settle(store: Store, remaining: Program) -> ProcessState:
    status = Status.RUNNING if remaining else Status.TERMINATED
    return ProcessState(store, remaining, status)


def _fault(p: ProcessState, kind: FaultKind, at: object, message: str) -> ProcessState:
    return replace(p, status=Status.FAULTED, intent=None,
                   fault=Fault(kind, p.pid, at, message))


def _peer(p: ProcessState, e: Expr, stmt: Stmt) -> int:
    peer = eval_expr(p.store, e)
    np = p.store.get("np")
    if not (isinstance(np, int) and 0 <= peer < np):
        raise FaultError(Fault(FaultKind.PEER_OUT_OF_RANGE, p.pid, stmt,
                               f"peer {peer} outside 0..{np - 1 if isinstance(np, int) else '?'}"))
    if peer == p.pid:
        raise FaultError(Fault(FaultKind.SELF_COMMUNICATION, p.pid, stmt,
                               f"process {peer} communicates with itself"))
    return peer


def local_step(p: ProcessState) -> ProcessState:
    """Execute the head statement of a running process.

    Send and receive heads only evaluate their operands and block; the
    statement stays at the head until a rendezvous consumes it.
    """
    if p.status is not Status.RUNNING:
        raise ValueError(f"local_step on a {p.status.value} process")
    if not p.remaining:
        return replace(p, status=Status.TERMINATED)
    head, rest = p.remaining[0], p.remaining[1:]
    s = p.store
    try:
        if isinstance(head, Decl):
            if head.var in s:
                return _fault(p, FaultKind.REDECLARATION, head,
                              f"variable {head.var!r} is already declared")
            return _settle(s.bind(head.var, NA), rest)
        if isinstance(head, Assign):
            if head.var not in s:
                return _fault(p, FaultKind.UNDECLARED_VARIABLE, head,
                              f"assignment to undeclared variable {head.var!r}")
            return _settle(s.bind(head.var, eval_expr(s, head.rhs)), rest)
        if isinstance(head, If):
            return _settle(s, head.body + rest if eval_cond(s, head.guard) else rest)
        if isinstance(head, While):
            if eval_cond(s, head.guard):
                return _settle(s, head.body + (head,) + rest)
            return _settle(s, rest)
        if isinstance(head, Send):
            value = eval_expr(s, head.message)
            dest = _peer(p, head.dest, head)
            return replace(p, status=Status.BLOCKED, intent=SendIntent(value, dest))
        if isinstance(head, Recv):
            if head.target not in s:
                return _fault(p, FaultKind.UNDECLARED_VARIABLE, head,
                              f"receive into undeclared variable {head.target!r}")
            source = ANY if head.source is ANY else _peer(p, head.source, head)
            return replace(p, status=Status.BLOCKED, intent=RecvIntent(head.target, source))
    except FaultError as exc:
        return replace(p, status=Status.FAULTED, intent=None, fault=exc.fault)
    raise TypeError(f"not a statement: {head!r}")


def enabled_pairs(g: GlobalState) -> list[tuple[int, int]]:
    """Matching (sender, receiver) pairs, sorted by receiver then sender."""
    pairs = []
    for r, recv in enumerate(g.procs):
        if recv.status is not Status.BLOCKED or not isinstance(recv.intent, RecvIntent):
            continue
        for s, send in enumerate(g.procs):
            if (send.status is Status.BLOCKED and isinstance(send.intent, SendIntent)
                    and send.intent.dest == r
                    and (recv.intent.source is ANY or recv.intent.source == s)):
                pairs.append((s, r))
    return pairs


def apply_rendezvous(g: GlobalState, pair: tuple[int, int]) -> GlobalState:
    s, r = pair
    if pair not in enabled_pairs(g):
        raise ValueError(f"pair {pair} is not enabled")
    sender, receiver = g.procs[s], g.procs[r]
    new_store = receiver.store.bind(receiver.intent.target, sender.intent.value)
    return g.replace_procs({
        s: _settle(sender.store, sender.remaining[1:]),
        r: _settle(new_store, receiver.remaining[1:]),
    })


def init_system(n: int, p: Program) -> GlobalState:
    """``mpirun(n, p)``: processes 0..n-1, each starting with ``{pid, np}``."""
    if n < 1:
        raise ValueError(f"number of processes must be at least 1, got {n}")
    return GlobalState(tuple(
        _settle(Store({"pid": k, "np": n}), tuple(p)) for k in range(n)
    ))
