from collections import deque

import pytest

from wrgs import loop_game, recursive_game
from pushmean.model import Configuration, step
from pushmean.reductions import CnfFormula, sat_to_wrg
from pushmean.rsm import (Call, InvalidStrategy, ModularStrategy, Ret, RsmModule, Transition, Wrg,
                          apply_strategy, local_history, reachable_dead_ends, to_wps, validate_wrg)


def wrg_successors(wrg, boxes, node):
    """Moves of a WRG configuration straight from the definitions."""
    labels = wrg.box_labels()
    mi = labels[boxes[-1]] if boxes else wrg.initial_module
    m = wrg.modules[mi]
    out = []
    for t in m.transitions:
        if t.source != node:
            continue
        if isinstance(t.target, Call):
            out.append(((boxes + (t.target.box,), t.target.entry), t.weight))
        else:
            out.append(((boxes, t.target), t.weight))
    if boxes and node in m.exits:
        caller = wrg.modules[next(i for i, mm in enumerate(wrg.modules) if boxes[-1] in mm.boxes)]
        for t in caller.transitions:
            if t.source == Ret(boxes[-1], node):
                rest = boxes[:-1]
                if isinstance(t.target, Call):
                    out.append(((rest + (t.target.box,), t.target.entry), t.weight))
                else:
                    out.append(((rest, t.target), t.weight))
    return sorted(out, key=str)


def wps_successors(wps, cmap, boxes, node):
    """WPS moves, with auxiliary states collapsed into a single step."""
    out = []
    c = cmap.to_wps(boxes, node)
    for e in wps.edges_at(c.state, c.top):
        n = step(c, e)
        if n.state in cmap.aux_states:
            for e2 in wps.edges_at(n.state, n.top):
                n2 = step(n, e2)
                out.append((cmap.to_wrg(n2), e.weight + e2.weight))
        else:
            out.append((cmap.to_wrg(n), e.weight))
    return sorted(out, key=str)


@pytest.mark.parametrize("wrg", [recursive_game(), sat_to_wrg(CnfFormula(3, ((1, 2, -3), (-1, -2, 3))))],
                         ids=["recursive", "sat"])
def test_translation_isomorphic_to_height_3(wrg):
    wps, cmap = to_wps(wrg)
    start = ((), wrg.initial_entry)
    assert cmap.to_wps(*start) == wps.initial_configuration
    seen = {start}
    dq = deque([start])
    checked = 0
    while dq:
        boxes, node = dq.popleft()
        mine = wrg_successors(wrg, boxes, node)
        assert wps_successors(wps, cmap, boxes, node) == mine
        checked += 1
        for (b2, n2), _w in mine:
            if len(b2) <= 3 and (b2, n2) not in seen:
                seen.add((b2, n2))
                dq.append((b2, n2))
    assert checked > 5


def test_translation_tops_and_aux():
    wps, cmap = to_wps(recursive_game())
    assert wps.alphabet == ("⊥", "b1", "b2", "c")
    assert len(cmap.aux_states) == 1
    aux = next(iter(cmap.aux_states))
    # the aux state pops with the transition's weight, then pushes for free
    into = [e for e in wps.edges if e.to_state == aux]
    assert [e.weight for e in into] == [-1]
    assert {e.weight for e in wps.edges if e.from_state == aux} == {0}


def test_validate_ok():
    rep = validate_wrg(recursive_game())
    assert rep.ok, rep.violations


@pytest.mark.parametrize("mutate, needle", [
    (lambda m: RsmModule(m.name, m.nodes, m.entries, m.exits, {"b1": 7, "b2": 1}, m.player1, m.transitions),
     "missing module"),
    (lambda m: RsmModule(m.name, m.nodes, (), m.exits, m.boxes, m.player1, m.transitions), "no entry"),
    (lambda m: RsmModule(m.name, m.nodes, m.entries, m.exits, m.boxes, m.player1 | {"zz"}, m.transitions),
     "unknown places"),
])
def test_validate_violations(mutate, needle):
    g = recursive_game()
    bad = Wrg((mutate(g.modules[0]),) + g.modules[1:])
    rep = validate_wrg(bad)
    assert not rep.ok
    assert any(needle in v for v in rep.violations), rep.violations


def test_validate_dead_end_warning():
    m = RsmModule("m", ("s", "x"), ("s",), ("x",), {}, {"s"}, (Transition("s", "x", 0),))
    rep = validate_wrg(Wrg((m,)))
    assert rep.ok and rep.warnings
    assert reachable_dead_ends(Wrg((m,))) == ["x"]
    assert reachable_dead_ends(loop_game(0)) == []


def test_owner_of_return_is_box_owner():
    main = recursive_game().modules[0]
    assert main.owner(Ret("b2", "ex1")) == 1
    assert main.owner(Ret("b1", "ex1")) == 2
    assert main.player2 == frozenset({"ex0", "b1"})


def test_apply_strategy():
    g = recursive_game()
    sigma = ModularStrategy(((0, "a", 2), (1, "en1", 1)))
    sub = apply_strategy(g, sigma)
    assert [t.target for t in sub.modules[0].transitions if t.source == "a"] == [Call("b2", "en1")]
    assert [t.target for t in sub.modules[1].transitions if t.source == "en1"] == ["ex1"]
    # player-2 choices survive
    assert len([t for t in sub.modules[1].transitions if t.source == "m"]) == 2


@pytest.mark.parametrize("choices", [
    ((0, "a", 0),),              # transition 0 leaves en0, not a
    ((1, "m", 3),),              # m belongs to player 2
    ((0, "nowhere", 0),),
])
def test_apply_strategy_rejects(choices):
    with pytest.raises(InvalidStrategy):
        apply_strategy(recursive_game(), ModularStrategy(choices))


def test_strategy_map_roundtrip():
    s = ModularStrategy(((0, "a", 2), (1, "en1", 1)))
    assert ModularStrategy.from_map(s.as_map()) == s
    assert len(s) == 2


def _configs(*pairs):
    return [Configuration(("⊥",) + tuple(b), n) for b, n in pairs]


@pytest.mark.parametrize("pairs, expected", [
    # still inside the first call
    ([((), "en0"), (("b1",), "en1"), (("b1",), "m")], ["en1", "m"]),
    # back in main after the worker returned
    ([((), "en0"), (("b1",), "en1"), (("b1",), "ex1"), ((), "a")], ["en0", "a"]),
    # a second invocation at the same height starts a fresh frame
    ([((), "a"), (("b2",), "en1"), (("b2",), "ex1"), (("b1",), "en1"), (("b1",), "m")], ["en1", "m"]),
    # nested call returned inside the worker
    ([(("b1",), "en1"), (("b1",), "m"), (("b1", "c"), "en1"), (("b1", "c"), "ex1"), (("b1",), "ex1")],
     ["en1", "m", "ex1"]),
    ([], []),
])
def test_local_history(pairs, expected):
    assert local_history(recursive_game(), _configs(*pairs)) == expected


def test_local_history_skips_aux():
    g = recursive_game()
    wps, cmap = to_wps(g)
    aux = next(iter(cmap.aux_states))
    cs = [Configuration(("⊥", "b2"), "ex1"), Configuration(("⊥",), aux), Configuration(("⊥", "b1"), "en1")]
    assert local_history(g, cs) == ["en1"]
