"""Schedule execution and exhaustive normal-form search.

By default exploration is *compressed*: each process runs its local
statements up to its next communication point, and the search branches
only on the choice of rendezvous. Local steps of different processes touch
disjoint stores, so this yields the same normal forms as full interleaving
(``Reduction.FULL``), which is kept as a cross-check.
"""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterator, Protocol, Sequence

import networkx as nx

from .syntax import ANY, Program, pretty_program
from .semantics import (
    GlobalState,
    ProcessState,
    RecvIntent,
    SendIntent,
    Status,
    Store,
    apply_rendezvous,
    canonical_key,
    enabled_pairs,
    init_system,
    local_step,
)


class BoundExceeded(Exception):
    def __init__(self, message: str, stats: "ExploreStats | None" = None):
        super().__init__(message)
        self.stats = stats


class Reduction(enum.Enum):
    COMPRESSED = "compressed"
    FULL = "full"


class Collect(enum.Enum):
    TERMINAL = "terminal"
    STUCK = "stuck"
    ALL = "all"


class Kind(enum.Enum):
    TERMINAL = "terminal"
    DEADLOCK = "deadlock"
    FAULT = "fault"


@dataclass(frozen=True)
class ExploreOptions:
    max_states: int = 1_000_000
    reduction: Reduction = Reduction.COMPRESSED
    collect: Collect = Collect.ALL

    def __post_init__(self):
        if self.max_states < 1:
            raise ValueError("max_states must be positive")


@dataclass
class ExploreStats:
    states_visited: int = 0
    normal_forms_found: int = 0
    dedup_hits: int = 0
    frontier_peak: int = 0


@dataclass(frozen=True)
class StepEvent:
    sender: int
    receiver: int
    value: int
    mode: str  # "specific" or "any"


@dataclass(frozen=True)
class NormalForm:
    kind: Kind
    state: GlobalState
    canonical_key: str
    witness: tuple = ()  # tuple[StepEvent, ...]


# ---------------------------------------------------------------------------
# Scheduler policies

Pair = tuple[int, int]


class SchedulerPolicy(Protocol):
    def picker(self) -> Callable[[Sequence[Pair]], Pair]:
        """Return a fresh chooser; called once per run."""


@dataclass(frozen=True)
class LowestPid:
    """Always take the smallest (receiver, sender) pair."""

    def picker(self):
        return lambda pairs: min(pairs, key=lambda sr: (sr[1], sr[0]))


_LCG_MUL = 6364136223846793005
_LCG_INC = 1442695040888963407
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class Random:
    """Uniform choice driven by a 64-bit LCG so seeds reproduce anywhere.

    The state starts at ``seed``; each decision advances it once and picks
    index ``(state >> 33) % k`` of the pairs sorted by (receiver, sender).
    """

    seed: int

    def picker(self):
        state = self.seed & _MASK64

        def pick(pairs):
            nonlocal state
            state = (state * _LCG_MUL + _LCG_INC) & _MASK64
            ordered = sorted(pairs, key=lambda sr: (sr[1], sr[0]))
            return ordered[(state >> 33) % len(ordered)]

        return pick


# ---------------------------------------------------------------------------
# Transitions


def classify(g: GlobalState) -> Kind | None:
    """Kind of normal form ``g`` is, or None if some transition still applies."""
    statuses = [p.status for p in g.procs]
    if Status.RUNNING in statuses:
        return None
    if all(s is Status.TERMINATED for s in statuses):
        return Kind.TERMINAL
    if enabled_pairs(g):
        return None
    if Status.FAULTED in statuses:
        return Kind.FAULT
    return Kind.DEADLOCK


def _run_local(p: ProcessState, budget: int) -> ProcessState:
    steps = 0
    while p.status is Status.RUNNING:
        if steps >= budget:
            raise BoundExceeded(
                f"process {p.pid} exceeded {budget} local steps without communicating"
            )
        p = local_step(p)
        steps += 1
    return p


def compress(g: GlobalState, budget: int = ExploreOptions.max_states) -> GlobalState:
    """Advance every running process until it blocks, terminates or faults."""
    updates = {k: _run_local(p, budget) for k, p in enumerate(g.procs)
               if p.status is Status.RUNNING}
    return g.replace_procs(updates) if updates else g


def _event(g: GlobalState, pair: Pair) -> StepEvent:
    s, r = pair
    mode = "any" if g.procs[r].intent.source is ANY else "specific"
    return StepEvent(s, r, g.procs[s].intent.value, mode)


def transitions(g: GlobalState, opts: ExploreOptions = ExploreOptions()
                ) -> Iterator[tuple[StepEvent | None, GlobalState]]:
    """Yield ``(event, successor)``; ``event`` is None for a local step."""
    if opts.reduction is Reduction.FULL:
        for k, p in enumerate(g.procs):
            if p.status is Status.RUNNING:
                yield None, g.replace_procs({k: local_step(p)})
        for pair in enabled_pairs(g):
            yield _event(g, pair), apply_rendezvous(g, pair)
    else:
        for pair in enabled_pairs(g):
            yield _event(g, pair), compress(apply_rendezvous(g, pair), opts.max_states)


def successors(g: GlobalState, opts: ExploreOptions = ExploreOptions()) -> set[GlobalState]:
    return {succ for _, succ in transitions(g, opts)}


def initial_state(n: int, p: Program, opts: ExploreOptions = ExploreOptions()) -> GlobalState:
    g = init_system(n, p)
    if opts.reduction is Reduction.COMPRESSED:
        g = compress(g, opts.max_states)
    return g


def _wanted(kind: Kind, collect: Collect) -> bool:
    if collect is Collect.ALL:
        return True
    if collect is Collect.TERMINAL:
        return kind is Kind.TERMINAL
    return kind is not Kind.TERMINAL


def explore(n: int, p: Program, opts: ExploreOptions = ExploreOptions()
            ) -> tuple[list[NormalForm], ExploreStats]:
    """Breadth-first search for every reachable normal form.

    States are deduplicated by canonical key; each returned normal form
    carries the rendezvous trace of the first path that reached it.
    """
    stats = ExploreStats()
    start = initial_state(n, p, opts)
    start_key = canonical_key(start)
    seen = {start_key}
    frontier = deque([(start, start_key, ())])
    stats.states_visited = 1
    stats.frontier_peak = 1
    found = []
    while frontier:
        g, key, trace = frontier.popleft()
        kind = classify(g)
        if kind is not None:
            if _wanted(kind, opts.collect):
                found.append(NormalForm(kind, g, key, trace))
                stats.normal_forms_found += 1
            continue
        for event, succ in transitions(g, opts):
            succ_key = canonical_key(succ)
            if succ_key in seen:
                stats.dedup_hits += 1
                continue
            seen.add(succ_key)
            stats.states_visited += 1
            if stats.states_visited > opts.max_states:
                raise BoundExceeded(f"explored more than {opts.max_states} states", stats)
            frontier.append((succ, succ_key, trace + (event,) if event else trace))
        stats.frontier_peak = max(stats.frontier_peak, len(frontier))
    return found, stats


def run_schedule(n: int, p: Program, policy: SchedulerPolicy = LowestPid(),
                 opts: ExploreOptions = ExploreOptions()) -> NormalForm:
    """Follow a single schedule from ``mpirun(n, p)`` to a normal form."""
    pick = policy.picker()
    budget = opts.max_states
    g = compress(init_system(n, p), budget)
    trace = []
    while True:
        kind = classify(g)
        if kind is not None:
            return NormalForm(kind, g, canonical_key(g), tuple(trace))
        if len(trace) >= budget:
            raise BoundExceeded(f"schedule exceeded {budget} rendezvous steps")
        pair = pick(enabled_pairs(g))
        trace.append(_event(g, pair))
        g = compress(apply_rendezvous(g, pair), budget)


def replay(n: int, p: Program, trace: Sequence[StepEvent],
           max_states: int = ExploreOptions.max_states) -> GlobalState:
    """Re-apply a witness trace from the initial state, compressing between steps."""
    g = compress(init_system(n, p), max_states)
    for ev in trace:
        g = compress(apply_rendezvous(g, (ev.sender, ev.receiver)), max_states)
    return g


# ---------------------------------------------------------------------------
# Deadlock analysis


@dataclass(frozen=True)
class BlockedProcess:
    pid: int
    intent: SendIntent | RecvIntent
    store: Store
    remaining: str


@dataclass(frozen=True)
class DeadlockReport:
    blocked: tuple  # tuple[BlockedProcess, ...]
    wait_for_edges: tuple  # tuple[(waiter, peer), ...]
    cycles: tuple  # tuple[tuple[int, ...], ...], each rotated to start at its lowest pid


def _rotate(cycle: list[int]) -> tuple[int, ...]:
    i = cycle.index(min(cycle))
    return tuple(cycle[i:] + cycle[:i])


def classify_deadlock(nf: NormalForm) -> DeadlockReport:
    if nf.kind is not Kind.DEADLOCK:
        raise ValueError(f"expected a deadlock normal form, got {nf.kind.value}")
    procs = nf.state.procs
    blocked, edges = [], []
    for k, p in enumerate(procs):
        if p.status is not Status.BLOCKED:
            continue
        blocked.append(BlockedProcess(k, p.intent, p.store, pretty_program(p.remaining)))
        if isinstance(p.intent, SendIntent):
            edges.append((k, p.intent.dest))
        elif p.intent.source is ANY:
            edges.extend((k, j) for j, q in enumerate(procs)
                         if j != k and q.status is not Status.TERMINATED)
        else:
            edges.append((k, p.intent.source))
    graph = nx.DiGraph(edges)
    cycles = sorted(_rotate(c) for c in nx.simple_cycles(graph))
    return DeadlockReport(tuple(blocked), tuple(edges), tuple(cycles))


# ---------------------------------------------------------------------------
# Determinacy


UNBOUND = "unbound"


@dataclass(frozen=True)
class Verdict:
    determinate: bool
    observations: tuple  # tuple[(pid, var), ...]
    outcomes: dict = field(hash=False)  # observed value vector -> number of terminal forms
    terminal: int = 0
    deadlock: int = 0
    fault: int = 0

    @property
    def values(self) -> set:
        return set(self.outcomes)


def _observe(nf: NormalForm, observations) -> tuple:
    vec = []
    for pid, var in observations:
        v = nf.state.procs[pid].store.get(var, UNBOUND)
        vec.append(v if isinstance(v, int) or v == UNBOUND else "na")
    return tuple(vec)


def check_determinacy(n: int, p: Program, observations: Sequence[tuple[int, str]],
                      opts: ExploreOptions = ExploreOptions()) -> Verdict:
    """Determinate iff all terminal forms agree on the observations and nothing gets stuck."""
    observations = tuple(observations)
    for pid, _ in observations:
        if not 0 <= pid < n:
            raise ValueError(f"observed process p{pid} does not exist with np={n}")
    opts = ExploreOptions(opts.max_states, opts.reduction, Collect.ALL)
    forms, _ = explore(n, p, opts)
    outcomes: dict = {}
    counts = {k: 0 for k in Kind}
    for nf in forms:
        counts[nf.kind] += 1
        if nf.kind is Kind.TERMINAL:
            vec = _observe(nf, observations)
            outcomes[vec] = outcomes.get(vec, 0) + 1
    determinate = (len(outcomes) == 1 and counts[Kind.DEADLOCK] == 0
                   and counts[Kind.FAULT] == 0)
    return Verdict(determinate, observations, outcomes,
                   counts[Kind.TERMINAL], counts[Kind.DEADLOCK], counts[Kind.FAULT])
