"""Command-line front end: ``smpi {run,search,deadlocks,check}``.

Exit status: 0 property holds, 1 property violated, 2 usage/parse/query
error, 3 program fault or exploration bound exceeded.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path
from typing import Sequence

from . import corpus
from .explorer import (
    BoundExceeded,
    Collect,
    ExploreOptions,
    ExploreStats,
    Kind,
    LowestPid,
    NormalForm,
    Random,
    Reduction,
    check_determinacy,
    classify_deadlock,
    explore,
    run_schedule,
)
from .query import QueryError, eval_query, parse_query
from .semantics import NA, ProcessState, SendIntent, Status, render_state, render_store
from .syntax import ANY, ParseError, parse_program, pretty_program

EXIT_OK, EXIT_VIOLATED, EXIT_USAGE, EXIT_FAULT = 0, 1, 2, 3
SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


def _parse_observation(text: str) -> tuple[int, str]:
    m = re.fullmatch(r"\s*p(\d+)\.([a-z]|pid|np)\s*", text)
    if m is None:
        raise UsageError(f"bad observation {text!r}; expected pK.v, e.g. p0.y")
    return int(m.group(1)), m.group(2)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smpi", description="Run and model-check SMPI programs.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("-np", "--np", dest="np", type=int, required=True, help="number of processes")
        p.add_argument("file", help="SMPI source file (corpus/<name>.smpi resolves to the bundled corpus)")
        p.add_argument("--max-states", type=int, default=1_000_000)
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--trace", action="store_true", help="print the rendezvous witness trace")

    def explored(p: argparse.ArgumentParser) -> None:
        p.add_argument("--reduction", choices=("compressed", "full"), default="compressed")
        p.add_argument("--where", help='query over normal forms, e.g. "p0.y != 24"')

    run = sub.add_parser("run", help="execute one schedule to a normal form")
    common(run)
    run.add_argument("--schedule", choices=("lowest-pid", "random"), default="lowest-pid")
    run.add_argument("--seed", type=int, default=None)

    search = sub.add_parser("search", help="list normal forms matching a query")
    common(search)
    explored(search)
    search.add_argument("--kind", choices=("terminal", "stuck", "all"), default="all")

    deadlocks = sub.add_parser("deadlocks", help="enumerate deadlocked normal forms")
    common(deadlocks)
    explored(deadlocks)

    check = sub.add_parser("check", help="decide determinacy of observed variables")
    common(check)
    check.add_argument("--reduction", choices=("compressed", "full"), default="compressed")
    check.add_argument("--observe", action="append", default=[],
                       help="pK.v projection; repeatable or comma-separated")
    return parser


def _resolve(path: str) -> str:
    p = Path(path)
    if p.exists():
        return p.read_text(encoding="utf-8")
    if p.parent.name == "corpus" and p.stem in corpus.NAMES and p.suffix == ".smpi":
        return corpus.source(p.stem)
    raise UsageError(f"cannot read {path}")


# ---------------------------------------------------------------------------
# Structured results


def _blocked_on(p: ProcessState):
    if p.status is not Status.BLOCKED:
        return None
    if isinstance(p.intent, SendIntent):
        return {"op": "send", "peer": p.intent.dest, "value": p.intent.value}
    src = "any" if p.intent.source is ANY else p.intent.source
    return {"op": "recv", "peer": src, "var": p.intent.target}


def _process_json(k: int, p: ProcessState) -> dict:
    d = {
        "pid": k,
        "status": p.status.value,
        "store": {name: ("na" if v is NA else v)
                  for name, v in sorted(p.store.items(), key=lambda kv: _store_order(kv[0]))},
        "remaining": pretty_program(p.remaining) if p.remaining else None,
        "blocked_on": _blocked_on(p),
    }
    if p.fault is not None:
        d["fault"] = {"kind": p.fault.kind.value, "message": p.fault.message}
    return d


def _store_order(name: str):
    return (1, ("pid", "np").index(name)) if name in ("pid", "np") else (0, name)


def _solution_json(nf: NormalForm, trace: bool) -> dict:
    d = {
        "kind": nf.kind.value,
        "processes": [_process_json(k, p) for k, p in enumerate(nf.state.procs)],
    }
    if trace:
        d["trace"] = [{"sender": e.sender, "receiver": e.receiver, "value": e.value, "mode": e.mode}
                      for e in nf.witness]
    return d


def _stats_json(stats: ExploreStats) -> dict:
    return {
        "states_visited": stats.states_visited,
        "normal_forms_found": stats.normal_forms_found,
        "dedup_hits": stats.dedup_hits,
        "frontier_peak": stats.frontier_peak,
    }


# ---------------------------------------------------------------------------
# Text rendering


def _intent_text(p: ProcessState) -> str:
    i = p.intent
    if isinstance(i, SendIntent):
        return f"blocked sending {i.value} to p{i.dest}"
    src = "any process" if i.source is ANY else f"p{i.source}"
    return f"blocked receiving {i.target} from {src}"


def _solution_text(nf: NormalForm, header: str, trace: bool) -> list[str]:
    lines = [header, render_state(nf.state)]
    for k, p in enumerate(nf.state.procs):
        if p.status is Status.TERMINATED:
            continue
        lines.append(f"  p{k}: {render_store(p.store)}")
        if p.status is Status.BLOCKED:
            lines.append(f"      {_intent_text(p)}")
        elif p.status is Status.FAULTED:
            lines.append(f"      fault {p.fault.kind.value}: {p.fault.message}")
        lines.append(f"      remaining: {pretty_program(p.remaining)}")
    if trace:
        lines.append("trace:")
        lines.extend(f"  p{e.sender} -> p{e.receiver}: {e.value} ({e.mode})" for e in nf.witness)
    return lines


def _stats_text(stats: ExploreStats) -> str:
    return ("stats (this tool): states_visited={0.states_visited} normal_forms_found={0.normal_forms_found} "
            "dedup_hits={0.dedup_hits} frontier_peak={0.frontier_peak}").format(stats)


def _render_value(v) -> str:
    return "na" if v is NA else str(v)


# ---------------------------------------------------------------------------
# Commands


def _options(args, collect: Collect = Collect.ALL) -> ExploreOptions:
    reduction = Reduction(getattr(args, "reduction", "compressed"))
    return ExploreOptions(max_states=args.max_states, reduction=reduction, collect=collect)


def _filter(forms: list[NormalForm], where: str | None) -> list[NormalForm]:
    if not where:
        return forms
    q = parse_query(where)
    return [nf for nf in forms if eval_query(q, nf)]


def cmd_run(args, program) -> tuple[dict, list[str], int]:
    if args.schedule == "random":
        policy = Random(args.seed if args.seed is not None else 0)
    else:
        policy = LowestPid()
    nf = run_schedule(args.np, program, policy, _options(args))
    stats = ExploreStats(len(nf.witness) + 1, 1, 0, 1)
    result = {"solutions": [_solution_json(nf, args.trace)], "stats": _stats_json(stats)}
    text = _solution_text(nf, f"result: {nf.kind.value}", args.trace)
    code = {Kind.TERMINAL: EXIT_OK, Kind.DEADLOCK: EXIT_VIOLATED, Kind.FAULT: EXIT_FAULT}[nf.kind]
    return result, text, code


def cmd_search(args, program) -> tuple[dict, list[str], int]:
    if args.where:
        parse_query(args.where)  # report syntax errors before exploring
    forms, stats = explore(args.np, program, _options(args, Collect(args.kind)))
    hits = _filter(forms, args.where)
    text = []
    for i, nf in enumerate(hits, 1):
        text += _solution_text(nf, f"Solution {i} ({nf.kind.value})", args.trace) + [""]
    text.append("No more solutions." if hits else "No solution.")
    text.append(_stats_text(stats))
    result = {"solutions": [_solution_json(nf, args.trace) for nf in hits], "stats": _stats_json(stats)}
    return result, text, EXIT_VIOLATED if hits else EXIT_OK


def cmd_deadlocks(args, program) -> tuple[dict, list[str], int]:
    if args.where:
        parse_query(args.where)
    forms, stats = explore(args.np, program, _options(args, Collect.STUCK))
    hits = _filter([nf for nf in forms if nf.kind is Kind.DEADLOCK], args.where)
    text, solutions = [], []
    for i, nf in enumerate(hits, 1):
        report = classify_deadlock(nf)
        edges = ", ".join(f"{a}->{b}" for a, b in report.wait_for_edges)
        cycles = "; ".join(" -> ".join(map(str, c + c[:1])) for c in report.cycles) or "none"
        text += _solution_text(nf, f"Deadlock {i}", args.trace)
        text += [f"wait-for: {edges}", f"cycles: {cycles}", ""]
        sol = _solution_json(nf, args.trace)
        sol["wait_for"] = [list(e) for e in report.wait_for_edges]
        sol["cycles"] = [list(c) for c in report.cycles]
        solutions.append(sol)
    faults = sum(nf.kind is Kind.FAULT for nf in forms)
    text.append("No more deadlocks." if hits else "No deadlock.")
    if faults:
        text.append(f"note: {faults} faulted normal form(s) not shown; use search --kind stuck")
    text.append(_stats_text(stats))
    result = {"solutions": solutions, "stats": _stats_json(stats)}
    return result, text, EXIT_VIOLATED if hits else EXIT_OK


def cmd_check(args, program) -> tuple[dict, list[str], int]:
    observations = [_parse_observation(part)
                    for item in args.observe for part in item.split(",") if part.strip()]
    if not observations:
        raise UsageError("check requires at least one --observe pK.v")
    for pid, _ in observations:
        if pid >= args.np:
            raise UsageError(f"observed process p{pid} does not exist with -np {args.np}")
    verdict = check_determinacy(args.np, program, observations, _options(args))
    names = [f"p{k}.{v}" for k, v in observations]
    outcomes = sorted(verdict.outcomes.items(),
                      key=lambda kv: [(0, x) if isinstance(x, int) else (1, x) for x in kv[0]])

    def vec_text(vec) -> str:
        return ", ".join(f"{n} = {_render_value(v)}" for n, v in zip(names, vec))

    if verdict.determinate:
        text = [f"Determinate: {vec_text(outcomes[0][0])}"]
    else:
        text = ["Nondeterminate"]
        text += [f"  {vec_text(vec)}  ({count} terminal form(s))" for vec, count in outcomes]
    text.append(f"terminal: {verdict.terminal}  deadlock: {verdict.deadlock}  fault: {verdict.fault}")
    result = {
        "solutions": [],
        "verdict": {
            "determinate": verdict.determinate,
            "observations": names,
            "outcomes": [{"values": dict(zip(names, vec)), "count": count} for vec, count in outcomes],
            "terminal": verdict.terminal,
            "deadlock": verdict.deadlock,
            "fault": verdict.fault,
        },
    }
    return result, text, EXIT_OK if verdict.determinate else EXIT_VIOLATED


COMMANDS = {"run": cmd_run, "search": cmd_search, "deadlocks": cmd_deadlocks, "check": cmd_check}


def _options_json(args) -> dict:
    skip = {"command", "np", "file", "format"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.np < 1:
            raise UsageError(f"-np must be at least 1, got {args.np}")
        if args.max_states < 1:
            raise UsageError("--max-states must be positive")
        program = parse_program(_resolve(args.file))
        result, text, code = COMMANDS[args.command](args, program)
    except (UsageError, QueryError) as exc:
        print(f"smpi: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"{args.file}:{exc}", file=sys.stderr)
        return EXIT_USAGE
    except BoundExceeded as exc:
        print(f"smpi: bound exceeded: {exc}", file=sys.stderr)
        return EXIT_FAULT
    if args.format == "json":
        doc = {
            "schema": SCHEMA_VERSION,
            "command": args.command,
            "np": args.np,
            "program": args.file,
            "options": _options_json(args),
            **result,
        }
        print(json.dumps(doc, indent=2))
    else:
        print("\n".join(text))
    return code


def entry() -> None:
    sys.exit(main())
