import pytest
from hypothesis import given

from gen import as_oracle_table, family, wps_strategy
from pushmean.examples import deep_closure_wps, fig2_wps, push_pop, skip_loop
from pushmean.model import Edge, SKIP, Wps
from pushmean.oracle import oracle_bounded_summary
from pushmean.summary import (NEG_INF, OMEGA, SummaryEngine, SummaryFn, base_summary, bounded_summary,
                              build_step_graph, build_summary_graph, ext_str, full_summary, next_bounded_summary,
                              omega_closure)

SMALL = family(40, seed=7)


def test_extended_order():
    assert NEG_INF < -10 ** 30 < 10 ** 30 < OMEGA
    assert NEG_INF + 5 is NEG_INF and 5 + OMEGA is OMEGA
    assert max([3, OMEGA, NEG_INF]) is OMEGA
    assert ext_str(NEG_INF) == "-inf" and ext_str(OMEGA) == "omega" and ext_str(-3) == "-3"


def test_fig2_summary_values():
    # checked by hand: pushes cost 1, pops pay 1, skips cost 1
    s = full_summary(fig2_wps())
    assert s[("q1", "γ", "q2")] == -1
    assert s[("q1", "⊥", "q1")] == -2
    assert s[("q2", "⊥", "q2")] == -2
    assert s[("q1", "γ", "q1")] is NEG_INF       # q1 never returns to q1 without popping γ
    assert s.counts() == {"-inf": 3, "finite": 5, "omega": 0}


def test_trivial_tables():
    assert full_summary(skip_loop(1))[("q", "⊥", "q")] is OMEGA
    assert full_summary(skip_loop(-1))[("q", "⊥", "q")] == -1
    empty = Wps(("q",), ("⊥",), "⊥", "q", ())
    assert all(v is NEG_INF for _, v in full_summary(empty).items())
    # push then pop at the bottom
    assert full_summary(push_pop(-1, 3))[("p", "⊥", "p")] is OMEGA
    assert full_summary(push_pop(-1, 1))[("p", "⊥", "p")] == 0


def test_base_summary_uses_no_push():
    s0 = base_summary(push_pop(5, -6))
    assert s0[("p", "⊥", "p")] is NEG_INF
    assert bounded_summary(push_pop(5, -6), 1)[("p", "⊥", "p")] == -1
    # a profitable loop at height one is already unbounded
    assert bounded_summary(push_pop(5, 5), 1)[("p", "⊥", "p")] is OMEGA


def test_next_bounded_summary_steps():
    wps = fig2_wps()
    s = base_summary(wps)
    for d in range(1, 4):
        s = next_bounded_summary(wps, s)
        assert s == bounded_summary(wps, d)


def test_deep_closure_needs_closure():
    """The outer triple only turns omega through the nested climb."""
    wps = deep_closure_wps(1000)
    eng = SummaryEngine(wps)
    assert eng.bounded(eng.d)[("q1", "⊥", "q1")] != OMEGA
    assert eng.full()[("q1", "⊥", "q1")] is OMEGA


@pytest.mark.parametrize("idx", range(len(SMALL)))
def test_bounded_matches_oracle(idx):
    wps = SMALL[idx]
    eng = SummaryEngine(wps)
    for d in range(5):
        assert as_oracle_table(eng.table(d)) == oracle_bounded_summary(wps, d)


@given(wps_strategy())
def test_bounded_monotone(wps):
    eng = SummaryEngine(wps)
    prev = eng.bounded(0)
    for d in range(1, eng.d + 2):
        cur = eng.bounded(d)
        assert prev <= cur
        prev = cur


@given(wps_strategy())
def test_closure_idempotent(wps):
    eng = SummaryEngine(wps)
    full = eng.full()
    assert omega_closure(wps, full, eng.bounded(eng.d)) == full
    # closure only adds omega marks on top of the bounded values
    assert eng.bounded(eng.d) <= full


@given(wps_strategy(max_edges=6))
def test_bounded_matches_oracle_hypothesis(wps):
    for d in range(3):
        assert as_oracle_table(bounded_summary(wps, d).table) == oracle_bounded_summary(wps, d)


def test_summary_graph_shape():
    wps = fig2_wps()
    gr = build_summary_graph(wps, full_summary(wps))
    assert gr.initial == ("q1", "⊥")
    assert len(gr.push_edges) == 2
    assert (("q1", "γ"), ("q2", "γ"), -1) in gr.skip_edges
    assert gr.reachable == {("q1", "⊥"), ("q1", "γ"), ("q2", "γ"), ("q2", "⊥")}


def test_summary_fn_table_drops_neg_inf():
    s = SummaryFn(("q",), ("⊥",), {("q", "⊥", "q"): NEG_INF})
    assert s.table == {} and s[("q", "⊥", "q")] is NEG_INF
    assert SummaryFn(("q",), ("⊥",), {("q", "⊥", "q"): 1}) <= SummaryFn(("q",), ("⊥",), {("q", "⊥", "q"): OMEGA})


def test_skip_only_system():
    e = (Edge("a", "⊥", "b", SKIP, 2), Edge("b", "⊥", "a", SKIP, -3))
    s = full_summary(Wps(("a", "b"), ("⊥",), "⊥", "a", e))
    assert s[("a", "⊥", "a")] == -1 and s[("a", "⊥", "b")] == 2


def test_step_graph():
    g = build_step_graph(fig2_wps())
    assert len(g.vertices) == 2 * (2 + 4)
    wps = push_pop(0, 0)
    g = build_step_graph(wps)
    assert any(u == (("⊥", "⊥"), "p") and v == (("⊥", "⊥", "γ"), "p") for u, v, _w, _e in g.edges)
    flat = Wps(("p",), ("⊥", "γ"), "⊥", "p", (Edge("p", "⊥", "p", SKIP, 1),))
    assert all(len(u[0]) == len(v[0]) for u, v, _w, _e in build_step_graph(flat).edges)


def test_fig2_documented_values():
    wps = fig2_wps()
    assert base_summary(wps)[("q1", "γ", "q2")] == -1
    s16 = bounded_summary(wps, 16)
    assert s16[("q1", "⊥", "q1")] == -2
    assert s16[("q2", "γ", "q2")] is NEG_INF
    assert full_summary(wps)[("q1", "⊥", "q2")] == -1
    assert oracle_bounded_summary(wps, 16)[("q1", "⊥", "q1")] == -2


def test_push_pop_only_base():
    s0 = base_summary(push_pop(1, 1))
    assert all(v is NEG_INF for _, v in s0.items())
