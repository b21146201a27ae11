"""Bundled example programs: ``p1``, ``p2``, ``p2sub`` and ``p3``."""
from __future__ import annotations

from importlib import resources

from ..syntax import Program, parse_program

NAMES = ("p1", "p2", "p2sub", "p3")


def source(name: str) -> str:
    return resources.files(__name__).joinpath(f"{name}.smpi").read_text(encoding="utf-8")


def load(name: str) -> Program:
    return parse_program(source(name))
