import pytest

from smpi.semantics import (
    NA,
    FaultKind,
    GlobalState,
    ProcessState,
    RecvIntent,
    SendIntent,
    Status,
    Store,
    apply_rendezvous,
    enabled_pairs,
    eval_cond,
    eval_expr,
    init_system,
    local_step,
    render_store,
)
from smpi.syntax import ANY, parse_program


def expr(text):
    return parse_program(f"x := {text};")[0].rhs


def cond(text):
    return parse_program(f"if ({text}) {{ }}")[0].guard


def proc(pid, np, text, **bindings):
    store = Store({**bindings, "pid": pid, "np": np})
    return ProcessState(store, parse_program(text))


def run_local(p):
    while p.status is Status.RUNNING:
        p = local_step(p)
    return p


# --- expressions and conditions -------------------------------------------

def test_eval_expr_examples():
    assert eval_expr(Store({"i": 1}), expr("i + 1")) == 2
    assert eval_expr(Store({"x": 2, "y": 3}), expr("(10 + x) * y")) == 36
    assert eval_expr(Store({}), expr("2 - 5 * 3")) == -13


def test_eval_expr_faults():
    from smpi.semantics import FaultError

    with pytest.raises(FaultError) as info:
        eval_expr(Store({"x": NA}), expr("x * 2"))
    assert info.value.fault.kind is FaultKind.NA_VALUE_READ
    with pytest.raises(FaultError) as info:
        eval_expr(Store({"pid": 2}), expr("q + 1"))
    assert info.value.fault.kind is FaultKind.UNDECLARED_VARIABLE
    assert info.value.fault.pid == 2


def test_big_integers_do_not_wrap():
    s = Store({"x": 2 ** 62})
    assert eval_expr(s, expr("x * x * x")) == 2 ** 186


def test_eval_cond_examples():
    from smpi.semantics import FaultError

    assert eval_cond(Store({"pid": 3}), cond("not(pid = 0)")) is True
    assert eval_cond(Store({"i": 1}), cond("i > 1")) is False
    with pytest.raises(FaultError) as info:
        eval_cond(Store({}), cond("q > 0"))
    assert info.value.fault.kind is FaultKind.UNDECLARED_VARIABLE


# --- local steps -------------------------------------------------------------

def test_store_sequence_of_sample_program():
    p = proc(0, 1, "int i ; int x ; i := 1 ; x := i + 1 ;")
    seen = []
    for _ in range(4):
        p = local_step(p)
        seen.append({k: v for k, v in p.store.items() if k not in ("pid", "np")})
    assert seen == [
        {"i": NA},
        {"i": NA, "x": NA},
        {"i": 1, "x": NA},
        {"i": 1, "x": 2},
    ]
    assert p.status is Status.TERMINATED and p.remaining == ()
    assert render_store(p.store) == "(i :: 1) (x :: 2) (pid :: 0) (np :: 1)"


def test_while_false_guard_drops_loop():
    p = proc(0, 1, "while (i > 1) { i := i - 1; } i := 7;", i=1)
    q = local_step(p)
    assert q.store == p.store
    assert q.remaining == parse_program("i := 7;")


def test_while_true_guard_unrolls_once():
    p = proc(0, 1, "while (i > 1) { i := i - 1; }", i=2)
    q = local_step(p)
    assert q.remaining == parse_program("i := i - 1;") + p.remaining


def test_if_splices_or_drops():
    p = proc(1, 2, "if (pid = 1) { int x; } int y;")
    assert local_step(p).remaining == parse_program("int x; int y;")
    p = proc(0, 2, "if (pid = 1) { int x; } int y;")
    assert local_step(p).remaining == parse_program("int y;")


def test_send_blocks_with_evaluated_intent():
    p = local_step(proc(2, 5, "send(pid, 0);"))
    assert p.status is Status.BLOCKED
    assert p.intent == SendIntent(2, 0)
    assert p.remaining == parse_program("send(pid, 0);")


def test_recv_any_blocks():
    p = local_step(proc(0, 5, "recv(x, any);", x=NA))
    assert p.intent == RecvIntent("x", ANY)


@pytest.mark.parametrize("text, bindings, kind", [
    ("int x; int x;", {}, FaultKind.REDECLARATION),
    ("x := 1;", {}, FaultKind.UNDECLARED_VARIABLE),
    ("int x; x := x + 1;", {}, FaultKind.NA_VALUE_READ),
    ("send(1, 5);", {}, FaultKind.PEER_OUT_OF_RANGE),
    ("send(1, 0 - 1);", {}, FaultKind.PEER_OUT_OF_RANGE),
    ("send(1, pid);", {}, FaultKind.SELF_COMMUNICATION),
    ("recv(x, pid);", {"x": NA}, FaultKind.SELF_COMMUNICATION),
    ("recv(x, 1);", {}, FaultKind.UNDECLARED_VARIABLE),
    ("if (q > 0) { }", {}, FaultKind.UNDECLARED_VARIABLE),
])
def test_local_faults(text, bindings, kind):
    p = run_local(proc(0, 2, text, **bindings))
    assert p.status is Status.FAULTED
    assert p.fault.kind is kind
    assert p.fault.pid == 0
    assert p.remaining  # frozen at the faulting statement
    with pytest.raises(ValueError):
        local_step(p)


def test_local_step_is_deterministic():
    p = proc(0, 3, "int x; x := pid + np; while (x > 0) { x := x - 1; }")
    for _ in range(8):
        assert local_step(p) == local_step(p)
        p = local_step(p)


# --- system --------------------------------------------------------------------

def test_init_system(p1):
    g = init_system(5, p1)
    assert g.np == 5
    assert render_store(g[3].store) == "(pid :: 3) (np :: 5)"
    assert all(p.remaining == p1 and p.status is Status.RUNNING for p in g)


def test_init_system_rejects_zero(p1):
    with pytest.raises(ValueError):
        init_system(0, p1)


def test_single_process_p1_computes_empty_product(p1):
    g = init_system(1, p1)
    p0 = run_local(g[0])
    assert p0.status is Status.TERMINATED
    assert p0.store["y"] == 1


def _blocked_system(source):
    senders = [local_step(proc(k, 5, "send(pid, 0);")) for k in range(1, 5)]
    receiver = run_local(proc(0, 5, f"recv(x, {source});", x=NA))
    return GlobalState((receiver, *senders))


def test_enabled_pairs_specific_source():
    assert set(enabled_pairs(_blocked_system("4"))) == {(4, 0)}


def test_enabled_pairs_any_source():
    assert set(enabled_pairs(_blocked_system("any"))) == {(1, 0), (2, 0), (3, 0), (4, 0)}


def test_enabled_pairs_none_when_nobody_blocked(p1):
    assert enabled_pairs(init_system(3, p1)) == []


def test_rendezvous_specific_source():
    g = _blocked_system("4")
    h = apply_rendezvous(g, (4, 0))
    assert h[0].store["x"] == 4
    assert h[0].status is Status.TERMINATED and h[4].status is Status.TERMINATED
    assert h[4].store == g[4].store
    assert h.procs[1:4] == g.procs[1:4]


def test_rendezvous_any_source():
    g = _blocked_system("any")
    h = apply_rendezvous(g, (2, 0))
    assert h[0].store["x"] == 2
    assert h[2].store == g[2].store
    assert [h[k] for k in (1, 3, 4)] == [g[k] for k in (1, 3, 4)]


def test_rendezvous_rejects_disabled_pair():
    with pytest.raises(ValueError):
        apply_rendezvous(_blocked_system("4"), (3, 0))


def test_store_is_immutable():
    s = Store({"x": 1})
    t = s.bind("x", 2)
    assert s["x"] == 1 and t["x"] == 2
    assert s != t and hash(s) == hash(Store({"x": 1}))
