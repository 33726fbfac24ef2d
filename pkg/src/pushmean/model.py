"""Weighted pushdown systems, configurations and paths."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence, Union


class NotApplicable(ValueError):
    """Raised when an edge cannot fire at a configuration."""


class EmptyPath(ValueError):
    """Raised when a measure needs at least one edge."""


@dataclass(frozen=True)
class Skip:
    def __str__(self) -> str:
        return "skip"


@dataclass(frozen=True)
class Pop:
    def __str__(self) -> str:
        return "pop"


@dataclass(frozen=True)
class Push:
    symbol: str

    def __str__(self) -> str:
        return f"push({self.symbol})"


StackCommand = Union[Skip, Pop, Push]
SKIP = Skip()
POP = Pop()


@dataclass(frozen=True)
class Edge:
    from_state: str
    top: str
    to_state: str
    command: StackCommand
    weight: int

    def with_weight(self, weight: int) -> "Edge":
        return Edge(self.from_state, self.top, self.to_state, self.command, weight)

    def __str__(self) -> str:
        return f"({self.from_state},{self.top},{self.to_state},{self.command},{self.weight})"


@dataclass(frozen=True)
class Wps:
    """A weighted pushdown system.

    States and symbols are kept as ordered tuples so every algorithm
    iterates them in a fixed order.
    """

    states: tuple
    alphabet: tuple
    bottom: str
    initial_state: str
    edges: tuple = ()

    def __post_init__(self):
        # accept any iterables but store tuples
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "edges", tuple(self.edges))

    @cached_property
    def max_abs_weight(self) -> int:
        return max((abs(e.weight) for e in self.edges), default=0)

    @cached_property
    def outgoing(self) -> dict:
        """Edges grouped by (state, top), in declaration order."""
        out: dict = {}
        for e in self.edges:
            out.setdefault((e.from_state, e.top), []).append(e)
        return out

    def edges_at(self, state: str, top: str) -> list:
        return self.outgoing.get((state, top), [])

    @property
    def initial_configuration(self) -> "Configuration":
        return Configuration((self.bottom,), self.initial_state)

    def map_weights(self, fn) -> "Wps":
        """Return a copy with every weight replaced by fn(weight)."""
        return Wps(self.states, self.alphabet, self.bottom, self.initial_state,
                   tuple(e.with_weight(fn(e.weight)) for e in self.edges))

    def restricted(self, states: Iterable[str], symbols: Iterable[str]) -> "Wps":
        """Sub-system on the given states and symbols (bottom and q0 always kept)."""
        keep_q = set(states) | {self.initial_state}
        keep_g = set(symbols) | {self.bottom}
        edges = [e for e in self.edges
                 if e.from_state in keep_q and e.to_state in keep_q and e.top in keep_g
                 and (not isinstance(e.command, Push) or e.command.symbol in keep_g)]
        return Wps(tuple(q for q in self.states if q in keep_q),
                   tuple(g for g in self.alphabet if g in keep_g),
                   self.bottom, self.initial_state, tuple(edges))


@dataclass(frozen=True)
class Configuration:
    stack: tuple
    state: str

    def __post_init__(self):
        object.__setattr__(self, "stack", tuple(self.stack))
        if not self.stack:
            raise ValueError("configuration stack must be nonempty")

    @property
    def top(self) -> str:
        return self.stack[-1]

    @property
    def height(self) -> int:
        return len(self.stack)

    def __str__(self) -> str:
        return f"({''.join(self.stack) if all(len(s) == 1 for s in self.stack) else ' '.join(self.stack)}, {self.state})"


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_wps(wps: Wps, check_dead_ends: bool = True) -> ValidationReport:
    """List every broken structural invariant of `wps`."""
    report = ValidationReport()
    states, symbols = set(wps.states), set(wps.alphabet)
    if len(states) != len(wps.states):
        report.violations.append("duplicate state declaration")
    if len(symbols) != len(wps.alphabet):
        report.violations.append("duplicate symbol declaration")
    if wps.bottom not in symbols:
        report.violations.append(f"bottom symbol {wps.bottom!r} not in alphabet")
    if wps.initial_state not in states:
        report.violations.append(f"initial state {wps.initial_state!r} not declared")
    seen = set()
    for i, e in enumerate(wps.edges):
        where = f"edge {i} {e}"
        if e.from_state not in states or e.to_state not in states:
            report.violations.append(f"{where}: dangling state")
        if e.top not in symbols:
            report.violations.append(f"{where}: dangling symbol {e.top!r}")
        if not isinstance(e.weight, int) or isinstance(e.weight, bool):
            report.violations.append(f"{where}: weight is not an integer")
        if isinstance(e.command, Push):
            if e.command.symbol == wps.bottom:
                report.violations.append(f"{where}: push of bottom")
            elif e.command.symbol not in symbols:
                report.violations.append(f"{where}: dangling symbol {e.command.symbol!r}")
        elif isinstance(e.command, Pop):
            if e.top == wps.bottom:
                report.violations.append(f"{where}: pop of bottom")
        elif not isinstance(e.command, Skip):
            report.violations.append(f"{where}: unknown command")
        if e in seen:
            report.violations.append(f"{where}: duplicate edge")
        seen.add(e)
    if report.ok and check_dead_ends:
        from .reachability import dead_end_reachable
        if dead_end_reachable(wps):
            report.warnings.append("a configuration without outgoing edges is reachable")
    return report


def step(c: Configuration, e: Edge) -> Configuration:
    """Fire `e` at `c`."""
    if e.from_state != c.state or e.top != c.stack[-1]:
        raise NotApplicable(f"edge {e} cannot fire at {c}")
    cmd = e.command
    if isinstance(cmd, Skip):
        return Configuration(c.stack, e.to_state)
    if isinstance(cmd, Pop):
        if len(c.stack) == 1:
            raise NotApplicable("cannot pop the bottom symbol")
        return Configuration(c.stack[:-1], e.to_state)
    return Configuration(c.stack + (cmd.symbol,), e.to_state)


def replay(start: Configuration, edges: Iterable[Edge]) -> list:
    """Configurations visited when firing `edges` from `start`."""
    out = [start]
    stack = list(start.stack)
    state = start.state
    for e in edges:
        if e.from_state != state or e.top != stack[-1]:
            raise NotApplicable(f"edge {e} cannot fire at {Configuration(stack, state)}")
        cmd = e.command
        if isinstance(cmd, Pop):
            if len(stack) == 1:
                raise NotApplicable("cannot pop the bottom symbol")
            stack.pop()
        elif isinstance(cmd, Push):
            stack.append(cmd.symbol)
        state = e.to_state
        out.append(Configuration(tuple(stack), state))
    return out


def _heights(start: Configuration, edges: Sequence[Edge]) -> list:
    h = len(start.stack)
    out = [h]
    for e in edges:
        if isinstance(e.command, Push):
            h += 1
        elif isinstance(e.command, Pop):
            h -= 1
        out.append(h)
    return out


@dataclass(frozen=True)
class Path:
    start: Configuration
    edges: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(self.edges))

    @cached_property
    def configs(self) -> list:
        return replay(self.start, self.edges)

    @cached_property
    def heights(self) -> list:
        return _heights(self.start, self.edges)

    @property
    def end(self) -> Configuration:
        return self.configs[-1]

    @property
    def weight(self) -> int:
        return sum(e.weight for e in self.edges)

    def __len__(self) -> int:
        return len(self.edges)

    def validate(self) -> None:
        """Raise NotApplicable unless every edge fires in turn."""
        replay(self.start, self.edges)


@dataclass(frozen=True)
class PathMeasures:
    weight: int
    avg: Fraction | None
    sh: int
    ash: int


def path_measures(p: Path) -> PathMeasures:
    """Weight, average, stack height and additional stack height of `p`."""
    hs = p.heights
    w = p.weight
    sh = max(hs)
    avg = Fraction(w, len(p.edges)) if p.edges else None
    return PathMeasures(w, avg, sh, sh - max(hs[0], hs[-1]))


def path_avg(p: Path) -> Fraction:
    if not p.edges:
        raise EmptyPath("average of an empty path")
    return Fraction(p.weight, len(p.edges))


def local_minima(p: Path) -> list:
    """0-based indices of configurations whose stack prefixes every later stack.

    Along a valid path the stack only changes at its top, so the prefix
    test reduces to comparing heights against the suffix minimum.
    """
    hs = p.heights
    out = []
    lowest = None
    for i in range(len(hs) - 1, -1, -1):
        if lowest is None or hs[i] <= lowest:
            out.append(i)
            lowest = hs[i]
    out.reverse()
    return out
