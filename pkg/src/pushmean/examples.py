"""Small systems used in documentation, tests and the CLI."""

from __future__ import annotations

from .games import Wpg
from .model import POP, SKIP, Edge, Push, Wps


def fig2_wps() -> Wps:
    """Two states; pushes cost 1, pops earn 1, the two skips cost 1 each.

    Averages of zero are approached only by paths whose push phases keep
    growing, so no lasso attains them.
    """
    return Wps(
        states=("q1", "q2"),
        alphabet=("⊥", "γ"),
        bottom="⊥",
        initial_state="q1",
        edges=(
            Edge("q1", "⊥", "q1", Push("γ"), -1),
            Edge("q1", "γ", "q1", Push("γ"), -1),
            Edge("q1", "γ", "q2", SKIP, -1),
            Edge("q2", "γ", "q2", POP, 1),
            Edge("q2", "⊥", "q1", SKIP, -1),
        ),
    )


def fig3_edges() -> tuple:
    return (
        Edge("qI1", "⊥", "qI1", Push("γ"), -2),
        Edge("qI1", "γ", "qI1", Push("γ"), -2),
        Edge("qI1", "γ", "qI2", SKIP, 0),
        Edge("qI2", "γ", "qI2", POP, 4),
        Edge("qI2", "⊥", "qII1", SKIP, 0),
        Edge("qII1", "⊥", "qII1", Push("γ"), 2),
        Edge("qII1", "γ", "qII1", Push("γ"), 2),
        Edge("qII1", "γ", "qII2", SKIP, 0),
        Edge("qII2", "γ", "qII2", POP, -4),
        Edge("qII2", "⊥", "qI1", SKIP, 0),
    )


def fig3_wps() -> Wps:
    return Wps(("qI1", "qI2", "qII1", "qII2"), ("⊥", "γ"), "⊥", "qI1", fig3_edges())


def skip_loop(weight: int) -> Wps:
    """One state with a single skip self-loop at the bottom."""
    return Wps(("q",), ("⊥",), "⊥", "q", (Edge("q", "⊥", "q", SKIP, weight),))


def push_pop(push_weight: int, pop_weight: int) -> Wps:
    """One state that pushes γ at the bottom and pops it again."""
    return Wps(("p",), ("⊥", "γ"), "⊥", "p",
               (Edge("p", "⊥", "p", Push("γ"), push_weight), Edge("p", "γ", "p", POP, pop_weight)))


def deep_closure_wps(penalty: int = 1000) -> Wps:
    """A cycle whose only profitable route nests an unbounded climb.

    The climb at top z gains one per extra level, so its value only
    overtakes `penalty` far beyond any fixed height bound; the cheap
    direct skip keeps every bounded summary of the outer triple finite.
    """
    return Wps(
        states=("q1", "q2", "r", "p"),
        alphabet=("⊥", "z"),
        bottom="⊥",
        initial_state="q1",
        edges=(
            Edge("q1", "⊥", "q2", SKIP, 0),
            Edge("q1", "⊥", "r", Push("z"), -penalty),
            Edge("r", "z", "r", Push("z"), 1),
            Edge("r", "z", "p", SKIP, 0),
            Edge("p", "z", "p", POP, 0),
            Edge("p", "⊥", "q2", SKIP, 0),
            Edge("q2", "⊥", "q1", SKIP, -1),
        ),
    )


def fig3_wpg() -> Wpg:
    """The two-phase game: player 1 owns the qI states, player 2 the qII states."""
    return Wpg(fig3_wps(), frozenset({"qI1", "qI2"}))
