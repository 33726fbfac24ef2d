from fractions import Fraction

import pytest

from pushmean.examples import fig2_wps, fig3_wpg, skip_loop
from pushmean.games import PlayView, StrategyMisbehaved, Wpg, first_edge, iteration_sums, simulate
from pushmean.model import SKIP, Configuration, Edge, Path, Wps


def dead_end_game():
    wps = Wps(("a", "b"), ("⊥",), "⊥", "a", (Edge("a", "⊥", "b", SKIP, 3),))
    return Wpg(wps, frozenset({"a"}))


def test_partition_checked():
    with pytest.raises(ValueError):
        Wpg(fig2_wps(), frozenset({"q1"}), frozenset({"q1", "q2"}))
    g = Wpg(fig2_wps(), frozenset({"q1"}))
    assert g.owner("q1") == 1 and g.owner("q2") == 2


def test_zero_steps():
    sim = simulate(fig3_wpg(), first_edge, first_edge, 0)
    assert sim.play.edges == () and sim.prefix_avgs == []
    assert sim.running_max() is None and sim.dead_end is None


def test_dead_end_truncates():
    sim = simulate(dead_end_game(), first_edge, first_edge, 10)
    assert len(sim.play) == 1
    assert sim.dead_end == Configuration(("⊥",), "b")
    assert sim.prefix_avgs == [Fraction(3)]


def test_prefix_averages_exact():
    g = Wpg(skip_loop(-3), frozenset({"q"}))
    sim = simulate(g, first_edge, first_edge, 5)
    assert sim.prefix_avgs == [Fraction(-3)] * 5


def test_owner_decides_who_moves():
    calls = []

    def s1(view):
        calls.append(1)
        return view.options()[-1]

    def s2(view):
        calls.append(2)
        return view.options()[-1]

    simulate(fig3_wpg(), s1, s2, 6)
    # push, skip, pop and the hand-over belong to player 1; then player 2 pushes and skips
    assert calls == [1, 1, 1, 1, 2, 2]


def test_misbehaving_strategy():
    bogus = Edge("zz", "⊥", "zz", SKIP, 0)
    with pytest.raises(StrategyMisbehaved):
        simulate(fig3_wpg(), lambda v: bogus, first_edge, 3)


def test_play_view():
    view = PlayView(fig2_wps())
    assert view.top == "⊥" and view.height == 1
    view._apply(view.options()[0])
    assert view.configuration == Configuration(("⊥", "γ"), "q1")


def test_iteration_sums():
    g = Wpg(skip_loop(2), frozenset({"q"}))
    sim = simulate(g, first_edge, first_edge, 4)
    assert iteration_sums(sim.play, Configuration(("⊥",), "q")) == [2, 2, 2, 2]
    p = Path(Configuration(("⊥",), "q"), ())
    assert iteration_sums(p, Configuration(("⊥",), "q")) == []
