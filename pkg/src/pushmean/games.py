"""Weighted pushdown games and bounded play simulation."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .model import Configuration, Edge, Path, Pop, Push, Wps


class StrategyMisbehaved(RuntimeError):
    pass


@dataclass(frozen=True)
class Wpg:
    wps: Wps
    player1: frozenset
    player2: frozenset = None
    edge_tags: tuple = ()       # optional label per edge, parallel to wps.edges

    def __post_init__(self):
        p1 = frozenset(self.player1)
        p2 = frozenset(self.wps.states) - p1 if self.player2 is None else frozenset(self.player2)
        object.__setattr__(self, "player1", p1)
        object.__setattr__(self, "player2", p2)
        if p1 & p2 or (p1 | p2) != set(self.wps.states):
            raise ValueError("player state sets must partition the states")

    def owner(self, state: str) -> int:
        return 1 if state in self.player1 else 2

    def tagged_edges(self):
        return list(zip(self.wps.edges, self.edge_tags))


class PlayView:
    """Read-only window on a play in progress, handed to strategies.

    `stack` is the live bottom-first stack; strategies must not mutate it.
    """

    def __init__(self, wps: Wps):
        self.wps = wps
        self.stack = [wps.bottom]
        self.state = wps.initial_state
        self.edges: list = []

    @property
    def top(self) -> str:
        return self.stack[-1]

    @property
    def height(self) -> int:
        return len(self.stack)

    @property
    def configuration(self) -> Configuration:
        return Configuration(tuple(self.stack), self.state)

    def options(self) -> list:
        return self.wps.edges_at(self.state, self.stack[-1])

    def _apply(self, e: Edge) -> None:
        if isinstance(e.command, Push):
            self.stack.append(e.command.symbol)
        elif isinstance(e.command, Pop):
            self.stack.pop()
        self.state = e.to_state
        self.edges.append(e)


StrategyFn = Callable[[PlayView], Edge]


@dataclass
class Simulation:
    """A finite play; prefix_avgs[i] is the average of the first i+1 edges."""

    play: Path
    prefix_avgs: list = field(default_factory=list)
    dead_end: Configuration | None = None

    def running_max(self) -> Fraction | None:
        return max(self.prefix_avgs, default=None)

    def running_min(self) -> Fraction | None:
        return min(self.prefix_avgs, default=None)


def simulate(g: Wpg, s1: StrategyFn, s2: StrategyFn, steps: int) -> Simulation:
    view = PlayView(g.wps)
    start = g.wps.initial_configuration
    avgs = []
    total = 0
    for k in range(steps):
        opts = view.options()
        if not opts:
            return Simulation(Path(start, list(view.edges)), avgs, view.configuration)
        chooser = s1 if view.state in g.player1 else s2
        e = chooser(view)
        if e not in opts:
            raise StrategyMisbehaved(f"round {k}: {e} cannot fire at {view.configuration}")
        view._apply(e)
        total += e.weight
        avgs.append(Fraction(total, k + 1))
    return Simulation(Path(start, list(view.edges)), avgs)


def iteration_sums(play: Path, anchor: Configuration) -> list:
    """Weights summed between consecutive visits to `anchor`."""
    stack = list(play.start.stack)
    state = play.start.state
    target = list(anchor.stack)
    sums = []
    running = None

    def at_anchor() -> bool:
        return state == anchor.state and len(stack) == len(target) and stack == target

    if at_anchor():
        running = 0
    for e in play.edges:
        if isinstance(e.command, Push):
            stack.append(e.command.symbol)
        elif isinstance(e.command, Pop):
            stack.pop()
        state = e.to_state
        if running is not None:
            running += e.weight
        if at_anchor():
            if running is not None:
                sums.append(running)
            running = 0
    return sums


def first_edge(view: PlayView) -> Edge:
    """Strategy that always takes the first listed option."""
    return view.options()[0]
