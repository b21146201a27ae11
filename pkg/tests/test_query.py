import pytest
from hypothesis import given, strategies as st

from smpi.explorer import Collect, ExploreOptions, Kind, explore
from smpi.query import (
    And,
    Blocked,
    Done,
    Not,
    Or,
    QueryError,
    QueryErrorKind,
    VarCompare,
    eval_query,
    parse_query,
)


@pytest.mark.parametrize("text, ast", [
    ("done(p0) and p0.y != 24", And(Done(0), VarCompare(0, "y", "!=", 24))),
    ("not done(p0)", Not(Done(0))),
    ("blocked(p12)", Blocked(12)),
    ("p0.y = -3", VarCompare(0, "y", "=", -3)),
    ("p1.x > 1 or p1.x < 0 and done(p1)",
     Or(VarCompare(1, "x", ">", 1), And(VarCompare(1, "x", "<", 0), Done(1)))),
    ("(p1.x > 1 or p1.x < 0) and done(p1)",
     And(Or(VarCompare(1, "x", ">", 1), VarCompare(1, "x", "<", 0)), Done(1))),
    ("not not blocked(p0)", Not(Not(Blocked(0)))),
])
def test_parse(text, ast):
    assert parse_query(text) == ast


@pytest.mark.parametrize("text", [
    "p0.y", "p0.y !=", "done(0)", "x.y = 1", "p0.y = 1 and", "(done(p0)", "done(p0))", "p0.y == 1", "",
    "p0.y = 1 #",
])
def test_syntax_errors(text):
    with pytest.raises(QueryError) as info:
        parse_query(text)
    assert info.value.kind is QueryErrorKind.SYNTAX


@pytest.fixture(scope="module")
def p2_forms(p2):
    return explore(5, p2)[0]


@pytest.fixture(scope="module")
def p3_forms(p3):
    return explore(5, p3)[0]


def test_nothing_differs_from_24(p2_forms):
    q = parse_query("done(p0) and p0.y != 24")
    assert not any(eval_query(q, nf) for nf in p2_forms)


def test_blocked_p0_in_deadlock(p3_forms):
    q = parse_query("blocked(p0) and p0.i = 3 and p0.x = 4")
    assert sum(eval_query(q, nf) for nf in p3_forms) == 1
    assert sum(eval_query(parse_query("blocked(p0)"), nf) for nf in p3_forms) == 6


def test_unbound_variable(p2_forms):
    with pytest.raises(QueryError) as info:
        eval_query(parse_query("p0.q > 0"), p2_forms[0])
    assert info.value.kind is QueryErrorKind.UNBOUND_VARIABLE


def test_unknown_process(p2_forms):
    with pytest.raises(QueryError) as info:
        eval_query(parse_query("done(p5)"), p2_forms[0])
    assert info.value.kind is QueryErrorKind.UNKNOWN_PROCESS


def test_na_value_matches_no_integer(p3_forms):
    nf = next(nf for nf in p3_forms if nf.kind is Kind.DEADLOCK)
    assert eval_query(parse_query("p4.x != 0"), nf)
    assert not eval_query(parse_query("p4.x = 0 or p4.x > 0 or p4.x < 0"), nf)


def test_subtraction_variant_filter(p2sub):
    forms = explore(5, p2sub, ExploreOptions(collect=Collect.TERMINAL))[0]
    q = parse_query("done(p0) and p0.y != 3")
    assert sum(eval_query(q, nf) for nf in forms) == 10


atoms = st.sampled_from(["done(p0)", "blocked(p0)", "done(p3)", "blocked(p4)",
                         "p1.x = 1", "p2.x != 2", "p0.pid = 0", "p3.np > 4"])


@given(a=atoms, b=atoms)
def test_de_morgan(p3_forms, a, b):
    lhs = parse_query(f"not ({a} and {b})")
    rhs = parse_query(f"not {a} or not {b}")
    lhs_or = parse_query(f"not ({a} or {b})")
    rhs_or = parse_query(f"not {a} and not {b}")
    for nf in p3_forms:
        assert eval_query(lhs, nf) == eval_query(rhs, nf)
        assert eval_query(lhs_or, nf) == eval_query(rhs_or, nf)
