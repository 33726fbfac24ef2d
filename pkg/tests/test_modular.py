import itertools
import random

import pytest

from wrgs import loop_game, random_wrg, recursive_game
from pushmean.decide import Objective, Relation, trim
from pushmean.modular import (CounterWitness, MultiEntryUnsupported, SearchSpaceTooLarge, Winning,
                              _ChoiceFree, _fast_verdict, _shift, search_modular, search_positions,
                              strategy_space_size, verify_modular)
from pushmean.oracle import oracle_decide_strict
from pushmean.reductions import CnfFormula, sat_brute, sat_to_wrg, strict_variant
from pushmean.rsm import (Call, InvalidStrategy, ModularStrategy, RsmModule, Transition, Wrg,
                          apply_strategy, reachable_dead_ends, to_wps)

GE = Objective(relation=Relation.GE)
GT = Objective(relation=Relation.GT)


def all_strategies(wrg):
    pos = wrg.player1_positions()
    for picks in itertools.product(*[idxs for _, _, idxs in pos]):
        yield ModularStrategy(tuple((mi, p, ti) for (mi, p, _), ti in zip(pos, picks)))


def oracle_wins(wrg, sigma, strict):
    """Player 1 wins iff no dead end and no bad lasso in the negated subgame (explicit search)."""
    sub = apply_strategy(wrg, sigma)
    if reachable_dead_ends(sub):
        return False
    wps, _ = to_wps(sub)
    neg = trim(wps.map_weights(lambda w: -w))
    if strict:
        # a path with average <= 0: a small perturbation turns it strict
        return not oracle_decide_strict(neg.map_weights(lambda w: w * 10 ** 4 + 1))
    return not oracle_decide_strict(neg)


@pytest.mark.parametrize("w", [-1, 0, 1])
def test_loop_game(w):
    g = loop_game(w)
    sigma = ModularStrategy(((0, "s", 0),))
    assert bool(verify_modular(g, sigma, GE)) is (w >= 0)
    assert bool(verify_modular(g, sigma, GT)) is (w > 0)


def test_counter_witness_cycle():
    g = loop_game(-2)
    res = verify_modular(g, ModularStrategy(((0, "s", 0),)), GE)
    assert isinstance(res, CounterWitness) and res.kind == "cycle"
    lasso = res.game_lasso()
    lasso.validate()
    assert lasso.cycle.weight < 0


def test_counter_witness_dead_end():
    m = RsmModule("m", ("s", "t", "x"), ("s",), ("x",), {}, {"s"},
                  (Transition("s", "s", 5), Transition("s", "t", 5)))
    g = Wrg((m,))
    assert verify_modular(g, ModularStrategy(((0, "s", 0),)), GE)
    res = verify_modular(g, ModularStrategy(((0, "s", 1),)), GE)
    assert res.kind == "dead-end"
    assert res.dead_end_path.end.state == "t"


def test_counter_witness_unbounded():
    # a module calling itself forever earns weight but the stack grows
    m = RsmModule("r", ("e", "x"), ("e",), ("x",), {"k": 0}, {"e"}, (Transition("e", Call("k", "e"), 1),))
    g = Wrg((m,))
    sigma = ModularStrategy(((0, "e", 0),))
    assert verify_modular(g, sigma, GE)
    bounded = Objective(relation=Relation.GE, stack_bounded=True)
    res = verify_modular(g, sigma, bounded)
    assert res.kind == "unbounded"


def test_strict_loss_on_zero_cycle():
    g = loop_game(0)
    res = verify_modular(g, ModularStrategy(((0, "s", 0),)), GT)
    assert res.kind == "cycle" and res.game_lasso().cycle.weight == 0


def test_recursive_game_oracle():
    g = recursive_game()
    for sigma in all_strategies(g):
        for obj, strict in ((GE, False), (GT, True)):
            assert bool(verify_modular(g, sigma, obj)) == oracle_wins(g, sigma, strict), sigma


@pytest.mark.parametrize("seed", range(40))
def test_random_games_match_oracle(seed):
    g = random_wrg(random.Random(seed))
    for sigma in all_strategies(g):
        assert bool(verify_modular(g, sigma, GE)) == oracle_wins(g, sigma, False), sigma


@pytest.mark.parametrize("seed", range(40))
def test_search_matches_enumeration(seed):
    g = random_wrg(random.Random(100 + seed))
    for obj in (GE, GT):
        found = search_modular(g, obj)
        winners = [s for s in all_strategies(g) if verify_modular(g, s, obj)]
        assert (found is not None) == bool(winners)
        if found is not None:
            assert verify_modular(g, found, obj)


def test_fast_path_agrees_with_full_check():
    phi = CnfFormula(3, ((1, 2, 3), (-1, 2, -3)))
    g = sat_to_wrg(phi)
    shifted = _shift(g, GE.threshold)
    plan = _ChoiceFree(shifted)
    assert plan.ok
    checked = 0
    for k, sigma in enumerate(all_strategies(g)):
        if k % 7:
            continue
        for obj in (GE, GT):
            fast = _fast_verdict(shifted, sigma, obj, plan)
            assert fast is not None
            assert fast[0] == bool(verify_modular(g, sigma, obj))
            checked += 1
    assert checked > 50


def test_search_sat_small():
    phi = CnfFormula(3, ((1, 2, 3),))
    g = sat_to_wrg(phi)
    assert strategy_space_size(g) == 192
    stats = {}
    sigma = search_modular(g, GE, stats=stats)
    assert isinstance(verify_modular(g, sigma, GE), Winning)
    assert stats["space"] == 192 and 1 <= stats["candidates"] <= 192
    assert search_modular(strict_variant(g), GT) is not None


def test_search_order_is_stable():
    g = recursive_game()
    assert search_modular(g, GE) == search_modular(g, GE)
    pos = search_positions(g)
    assert pos[0][0] == g.initial_module


def test_jobs_agree():
    phi = CnfFormula(3, ((1, 2, 3), (-1, -2, -3), (1, -2, 3)))
    g = sat_to_wrg(phi)
    assert search_modular(g, GE, jobs=2) == search_modular(g, GE)


def test_cap(monkeypatch):
    g = sat_to_wrg(CnfFormula(3, ((1, 2, 3),)))
    with pytest.raises(SearchSpaceTooLarge):
        search_modular(g, GE, cap=100)
    monkeypatch.setenv("PUSHMEAN_SEARCH_CAP", "10")
    with pytest.raises(SearchSpaceTooLarge):
        search_modular(g, GE)


def test_multi_entry_rejected():
    m = RsmModule("m", ("a", "b", "x"), ("a", "b"), ("x",), {}, {"a"}, (Transition("a", "b", 0), Transition("b", "a", 0)))
    g = Wrg((m,))
    with pytest.raises(MultiEntryUnsupported):
        search_modular(g, GE)
    with pytest.raises(MultiEntryUnsupported):
        verify_modular(g, ModularStrategy(((0, "a", 0),)), GE)


def test_partial_strategy_rejected():
    g = recursive_game()
    with pytest.raises(InvalidStrategy):
        verify_modular(g, ModularStrategy(((0, "a", 2),)), GE)


def test_translation_is_total_for_generated():
    wps, _ = to_wps(sat_to_wrg(CnfFormula(2, ((1, 2, -1),))))
    assert wps.states[0] == "A0.en"


UNSAT = CnfFormula(3, tuple(
    tuple(v if (mask >> (v - 1)) & 1 else -v for v in (1, 2, 3)) for mask in range(8)))


@pytest.mark.slow
def test_unsat_search_none():
    assert sat_brute(UNSAT) is None
    assert search_modular(sat_to_wrg(UNSAT), GE) is None


@pytest.mark.slow
def test_unsat_strict_search_none():
    assert search_modular(strict_variant(sat_to_wrg(UNSAT)), GT) is None
