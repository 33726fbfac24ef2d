"""Weighted recursive game graphs and their pushdown translation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .model import POP, SKIP, Configuration, Edge, Push, ValidationReport, Wps


class InvalidStrategy(ValueError):
    pass


@dataclass(frozen=True)
class Call:
    box: str
    entry: str

    def __str__(self) -> str:
        return f"({self.box},{self.entry})"


@dataclass(frozen=True)
class Ret:
    box: str
    exit: str

    def __str__(self) -> str:
        return f"({self.box},{self.exit})"


Position = Union[str, Ret]
Target = Union[str, Call]


@dataclass(frozen=True)
class Transition:
    source: Position
    target: Target
    weight: int

    def __str__(self) -> str:
        return f"{self.source} -> {self.target} [{self.weight}]"


@dataclass(frozen=True)
class RsmModule:
    name: str
    nodes: tuple
    entries: tuple
    exits: tuple
    boxes: dict = field(default_factory=dict)          # box -> module index
    player1: frozenset = frozenset()                   # nodes and boxes owned by player 1
    transitions: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "entries", tuple(self.entries))
        object.__setattr__(self, "exits", tuple(self.exits))
        object.__setattr__(self, "player1", frozenset(self.player1))
        object.__setattr__(self, "transitions", tuple(self.transitions))

    def __hash__(self) -> int:
        return hash((self.name, self.nodes, self.transitions))

    @property
    def player2(self) -> frozenset:
        return (frozenset(self.nodes) | frozenset(self.boxes)) - self.player1

    def owner(self, pos: Position) -> int:
        place = pos.box if isinstance(pos, Ret) else pos
        return 1 if place in self.player1 else 2

    def outgoing(self) -> dict:
        """Transition indices per source position, in first-appearance order."""
        out: dict = {}
        for i, t in enumerate(self.transitions):
            out.setdefault(t.source, []).append(i)
        return out


@dataclass(frozen=True)
class Wrg:
    modules: tuple
    initial_module: int = 0
    initial_entry: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "modules", tuple(self.modules))
        if self.initial_entry is None and 0 <= self.initial_module < len(self.modules):
            entries = self.modules[self.initial_module].entries
            if entries:
                object.__setattr__(self, "initial_entry", entries[0])

    def box_labels(self) -> dict:
        """Box -> index of the module it invokes."""
        return {b: j for m in self.modules for b, j in m.boxes.items()}

    def module_of_node(self) -> dict:
        return {u: i for i, m in enumerate(self.modules) for u in m.nodes}

    def player1_positions(self) -> list:
        """(module index, position, transition indices) for player-1 positions with successors."""
        out = []
        for i, m in enumerate(self.modules):
            for pos, idxs in m.outgoing().items():
                if m.owner(pos) == 1:
                    out.append((i, pos, idxs))
        return out

    def is_one_player(self) -> bool:
        owners = {m.owner(t.source) for m in self.modules for t in m.transitions}
        return len(owners) <= 1


@dataclass(frozen=True)
class ModularStrategy:
    """Chosen transition index per player-1 position, grouped by module."""

    choices: tuple = ()      # ((module index, position, transition index), ...)

    @classmethod
    def from_map(cls, mapping: dict) -> "ModularStrategy":
        items = []
        for mi in sorted(mapping):
            for pos, ti in mapping[mi].items():
                items.append((mi, pos, ti))
        return cls(tuple(items))

    def as_map(self) -> dict:
        out: dict = {}
        for mi, pos, ti in self.choices:
            out.setdefault(mi, {})[pos] = ti
        return out

    def __len__(self) -> int:
        return len(self.choices)


def validate_wrg(wrg: Wrg, check_dead_ends: bool = True) -> ValidationReport:
    report = ValidationReport()
    bad = report.violations.append
    n = len(wrg.modules)
    seen_places: dict = {}
    for i, m in enumerate(wrg.modules):
        for place in tuple(m.nodes) + tuple(m.boxes):
            if place in seen_places:
                bad(f"module {m.name}: {place!r} also declared in module {seen_places[place]}")
            seen_places[place] = m.name
    if not 0 <= wrg.initial_module < n:
        bad("initial module index out of range")
    elif wrg.initial_entry not in wrg.modules[wrg.initial_module].entries:
        bad("initial node is not an entry of the initial module")
    for m in wrg.modules:
        where = f"module {m.name}"
        nodes = set(m.nodes)
        if not m.entries:
            bad(f"{where}: no entry nodes")
        if not m.exits:
            bad(f"{where}: no exit nodes")
        for u in tuple(m.entries) + tuple(m.exits):
            if u not in nodes:
                bad(f"{where}: entry/exit {u!r} is not a node")
        places = nodes | set(m.boxes)
        if not m.player1 <= places:
            bad(f"{where}: player-1 set mentions unknown places")
        for b, j in m.boxes.items():
            if not 0 <= j < n:
                bad(f"{where}: box {b!r} labelled with missing module {j}")
        for t in m.transitions:
            src, dst = t.source, t.target
            if isinstance(src, Ret):
                if src.box not in m.boxes:
                    bad(f"{where}: return {src} uses a foreign box")
                elif 0 <= m.boxes[src.box] < n and src.exit not in wrg.modules[m.boxes[src.box]].exits:
                    bad(f"{where}: return {src} is not from an exit of the callee")
            elif src not in nodes:
                bad(f"{where}: transition source {src!r} is not a node")
            if isinstance(dst, Call):
                if dst.box not in m.boxes:
                    bad(f"{where}: call {dst} uses a foreign box")
                elif 0 <= m.boxes[dst.box] < n and dst.entry not in wrg.modules[m.boxes[dst.box]].entries:
                    bad(f"{where}: call {dst} does not target an entry of the callee")
            elif dst not in nodes:
                bad(f"{where}: transition target {dst!r} is not a node")
            if not isinstance(t.weight, int):
                bad(f"{where}: weight of {t} is not an integer")
    if report.ok and check_dead_ends:
        for pos in reachable_dead_ends(wrg):
            report.warnings.append(f"reachable dead end at {pos}")
    return report


def apply_strategy(wrg: Wrg, sigma: ModularStrategy) -> Wrg:
    """Drop every transition that sigma does not choose at a player-1 position."""
    chosen = sigma.as_map()
    modules = []
    for mi, m in enumerate(wrg.modules):
        picks = chosen.get(mi, {})
        out = m.outgoing()
        for pos, ti in picks.items():
            if pos not in out or ti not in out[pos]:
                raise InvalidStrategy(f"module {m.name}: no transition {ti} at {pos}")
            if m.owner(pos) != 1:
                raise InvalidStrategy(f"module {m.name}: {pos} is not a player-1 position")
        keep = []
        for i, t in enumerate(m.transitions):
            if m.owner(t.source) == 1 and t.source in picks and picks[t.source] != i:
                continue
            keep.append(t)
        modules.append(RsmModule(m.name, m.nodes, m.entries, m.exits, dict(m.boxes), m.player1, tuple(keep)))
    return Wrg(tuple(modules), wrg.initial_module, wrg.initial_entry)


@dataclass
class ConfigurationMap:
    """Correspondence between WRG configurations (boxes, node) and WPS configurations."""

    bottom: str
    aux_states: dict = field(default_factory=dict)     # aux state -> the transition it splits

    def to_wps(self, boxes, node) -> Configuration:
        return Configuration((self.bottom,) + tuple(boxes), node)

    def to_wrg(self, c: Configuration):
        return tuple(c.stack[1:]), c.state


def _fresh(base: str, taken: set) -> str:
    name = base
    k = 1
    while name in taken:
        k += 1
        name = f"{base}#{k}"
    taken.add(name)
    return name


def to_wps(wrg: Wrg, bottom: str = "⊥"):
    """Pushdown system whose configurations mirror the WRG's; returns (wps, map).

    A transition from a return straight into a call needs a pop and a
    push; it is split through an auxiliary state whose second edge has
    weight zero.
    """
    labels = wrg.box_labels()
    tops_of = {i: [b for b, j in labels.items() if j == i] for i in range(len(wrg.modules))}
    tops_of[wrg.initial_module] = [bottom] + tops_of[wrg.initial_module]
    states = [u for m in wrg.modules for u in m.nodes]
    taken = set(states) | {bottom}
    alphabet = [bottom] + [b for m in wrg.modules for b in m.boxes]
    cmap = ConfigurationMap(bottom)
    edges = []
    for mi, m in enumerate(wrg.modules):
        tops = tops_of[mi]
        for t in m.transitions:
            src, dst = t.source, t.target
            if isinstance(src, Ret):
                if isinstance(dst, Call):
                    aux = _fresh(f"{src.exit}>{src.box}>{dst.box}", taken)
                    states.append(aux)
                    cmap.aux_states[aux] = t
                    edges.append(Edge(src.exit, src.box, aux, POP, t.weight))
                    for top in tops:
                        edges.append(Edge(aux, top, dst.entry, Push(dst.box), 0))
                else:
                    edges.append(Edge(src.exit, src.box, dst, POP, t.weight))
            else:
                for top in tops:
                    if isinstance(dst, Call):
                        edges.append(Edge(src, top, dst.entry, Push(dst.box), t.weight))
                    else:
                        edges.append(Edge(src, top, dst, SKIP, t.weight))
    wps = Wps(tuple(states), tuple(alphabet), bottom, wrg.initial_entry, tuple(edges))
    return wps, cmap


def reachable_dead_ends(wrg: Wrg) -> list:
    """Reachable positions without any outgoing transition (nodes, or returns)."""
    from .reachability import reachable_heads
    wps, cmap = to_wps(wrg)
    out = []
    labels = wrg.box_labels()
    for q, g in sorted(reachable_heads(wps), key=str):
        if wps.edges_at(q, g) or q in cmap.aux_states:
            continue
        if g != wps.bottom and q in wrg.modules[labels[g]].exits:
            out.append(Ret(g, q))
        else:
            out.append(q)
    return out


def local_history(wrg: Wrg, configs) -> list:
    """Nodes visited by the current invocation frame.

    `configs` are WPS configurations (bottom-first stacks).  The frame
    starts after the last exit seen at the final height; the final
    configuration itself may sit at an exit.
    """
    configs = list(configs)
    if not configs:
        return []
    exits = {x for m in wrg.modules for x in m.exits}
    nodes = {u for m in wrg.modules for u in m.nodes}
    h = len(configs[-1].stack)
    start = 0
    for i in range(len(configs) - 1):
        c = configs[i]
        if len(c.stack) == h and c.state in exits:
            start = i + 1
    # auxiliary states of the translation are not nodes
    return [c.state for c in configs[start:] if len(c.stack) == h and c.state in nodes]
