"""Interpreter and explicit-state model checker for SMPI, a tiny MPI-like language."""
from .syntax import ParseError, parse_program, pretty_program
from .semantics import GlobalState, Store, init_system
from .explorer import (
    BoundExceeded,
    ExploreOptions,
    Kind,
    LowestPid,
    Random,
    check_determinacy,
    classify_deadlock,
    explore,
    run_schedule,
)
from .query import QueryError, eval_query, parse_query

__version__ = "0.1.0"

__all__ = [
    "BoundExceeded", "ExploreOptions", "GlobalState", "Kind", "LowestPid", "ParseError",
    "QueryError", "Random", "Store", "check_determinacy", "classify_deadlock", "eval_query",
    "explore", "init_system", "parse_program", "parse_query", "pretty_program", "run_schedule",
]
