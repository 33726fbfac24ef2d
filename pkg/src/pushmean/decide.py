"""Mean-payoff decisions on weighted pushdown systems."""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx

from .model import Path, Push, Wps
from .reachability import reachable_heads
from .summary import OMEGA, SummaryEngine, build_summary_graph
from .witness import WitnessBuilder, WitnessUnavailable

__all__ = [
    "Flavor", "Relation", "Objective", "Lasso", "Verdict", "Analysis",
    "has_good_cycle", "scale_for_epsilon", "epsilon_denominator", "normalize_threshold",
    "decide", "decide_trimmed", "unscale_lasso", "sup_stack_bounded_geq0", "extract_witness", "WitnessUnavailable", "trim",
]


class Flavor(enum.Enum):
    LIMINF = "liminf"
    LIMSUP = "limsup"


class Relation(enum.Enum):
    GT = "gt"
    GE = "ge"


@dataclass(frozen=True)
class Objective:
    flavor: Flavor = Flavor.LIMINF
    relation: Relation = Relation.GT
    threshold: Fraction = Fraction(0)
    stack_bounded: bool = False

    def __post_init__(self):
        object.__setattr__(self, "threshold", Fraction(self.threshold))

    @property
    def strict(self) -> bool:
        return self.relation is Relation.GT

    def describe(self) -> str:
        rel = ">" if self.strict else ">="
        name = "LimInfAvg" if self.flavor is Flavor.LIMINF else "LimSupAvg"
        tail = " (stack bounded)" if self.stack_bounded else ""
        return f"{name} {rel} {self.threshold}{tail}"


@dataclass(frozen=True)
class Lasso:
    prefix: Path
    cycle: Path

    def validate(self) -> None:
        """Replay both parts and check the lasso shape; raises ValueError."""
        self.prefix.validate()
        self.cycle.validate()
        if self.prefix.end != self.cycle.start:
            raise ValueError("cycle does not start where the prefix ends")
        if not self.cycle.edges:
            raise ValueError("empty cycle")
        end = self.cycle.end
        if end.state != self.cycle.start.state or end.top != self.cycle.start.top:
            raise ValueError("cycle does not return to its head")
        if min(self.cycle.heights) < self.cycle.heights[0]:
            raise ValueError("cycle start is not a local minimum")


@dataclass
class Verdict:
    answer: bool
    witness: Lasso | None = None
    stats: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.answer


class Analysis:
    """Summary data of one system, shared by its decisions and witnesses."""

    def __init__(self, wps: Wps):
        self.wps = wps
        self.engine = SummaryEngine(wps)
        self._gr = None
        self._builder = None

    @property
    def summary(self):
        return self.engine.full()

    @property
    def graph(self):
        if self._gr is None:
            self._gr = build_summary_graph(self.wps, self.summary)
        return self._gr

    @property
    def builder(self) -> WitnessBuilder:
        if self._builder is None:
            self._builder = WitnessBuilder(self.engine)
        return self._builder

    # -- Gr structure ----------------------------------------------------
    def _reachable_edges(self):
        gr = self.graph
        succ = gr.successors()
        return {u: [(v, w, t) for v, w, t in succ.get(u, ()) if v in gr.reachable]
                for u in gr.reachable}

    def good_cycle(self):
        """A Gr cycle as a list of (u, v, weight, tag), or None."""
        adj = self._reachable_edges()
        order = sorted(adj, key=str)
        # omega edge whose head reaches its tail
        for u in order:
            for v, w, t in adj[u]:
                if w is OMEGA:
                    back = [] if v == u else _gr_walk(adj, v, u)
                    if back is not None:
                        return [(u, v, w, t)] + back
        # positive cycle among finite edges
        index = {v: i for i, v in enumerate(order)}
        dist = [0] * len(order)
        pred: dict = {}
        fin = [(index[u], index[v], w, t, u, v) for u in order for v, w, t in adj[u] if w is not OMEGA]
        last = None
        for _ in range(len(order)):
            last = None
            for iu, iv, w, t, u, v in fin:
                nd = dist[iu] + w
                if nd > dist[iv]:
                    dist[iv] = nd
                    pred[iv] = (iu, w, t, u, v)
                    last = iv
            if last is None:
                return None
        x = last
        for _ in range(len(order)):
            x = pred[x][0]
        cyc = []
        v = x
        while True:
            iu, w, t, a, b = pred[v]
            cyc.append((a, b, w, t))
            v = iu
            if v == x:
                break
        cyc.reverse()
        assert sum(c[2] for c in cyc) > 0
        return cyc

    def zero_cycle(self):
        """A reachable Gr cycle of weight exactly 0, assuming no good cycle exists.

        With no positive cycles, longest-path potentials make every edge of
        a zero cycle tight, and every cycle of tight edges weighs 0.
        """
        adj = self._reachable_edges()
        pot = {u: 0 for u in adj}
        for _ in range(len(adj) + 1):
            changed = False
            for u in adj:
                for v, w, _t in adj[u]:
                    if w is not OMEGA and pot[u] + w > pot[v]:
                        pot[v] = pot[u] + w
                        changed = True
            if not changed:
                break
        tight = nx.DiGraph()
        for u in sorted(adj, key=str):
            for v, w, t in adj[u]:
                if w is not OMEGA and pot[u] + w == pot[v] and not tight.has_edge(u, v):
                    tight.add_edge(u, v, w=w, t=t)
        try:
            found = nx.find_cycle(tight)
        except nx.NetworkXNoCycle:
            return None
        return [(u, v, tight[u][v]["w"], tight[u][v]["t"]) for u, v in found]

    def self_loops(self):
        """Reachable skip self-loops of Gr as ((q, g), weight)."""
        gr = self.graph
        return [(u, w) for u, v, w in gr.skip_edges if u == v and u in gr.reachable]

    # -- expansion ---------------------------------------------------------
    def _expand(self, step, target=None) -> list:
        u, v, w, tag = step
        if tag[0] == "push":
            return [tag[1]]
        q1, g = u
        return self.builder.full_path((q1, g, v[0]), target)

    def prefix_to(self, vertex) -> Path:
        adj = self._reachable_edges()
        start = self.wps.initial_configuration
        steps = [] if vertex == self.graph.initial else _gr_walk(adj, self.graph.initial, vertex)
        edges = [e for st in steps for e in self._expand(st)]
        return Path(start, edges)

    def lasso(self, cycle_steps, target: int | None = 1) -> Lasso:
        """Concrete lasso through the given Gr cycle with weight at least `target`.

        With target None any weight is accepted.
        """
        prefix = self.prefix_to(cycle_steps[0][0])
        om = next((i for i, st in enumerate(cycle_steps) if st[2] is OMEGA), None)
        pieces = [None if i == om else self._expand(st) for i, st in enumerate(cycle_steps)]
        if om is not None:
            rest = sum(e.weight for pc in pieces if pc is not None for e in pc)
            pieces[om] = self._expand(cycle_steps[om], None if target is None else target - rest)
        edges = [e for pc in pieces for e in pc]
        if target is not None and sum(e.weight for e in edges) < target:
            raise WitnessUnavailable("internal: cycle weight below target")
        cycle = Path(prefix.end, edges)
        return Lasso(prefix, cycle)


def _gr_walk(adj: dict, src, goal):
    """Steps (u, v, w, tag) of a nonempty walk from src to goal, or None."""
    prev = {}
    dq = deque()
    for v, w, t in adj.get(src, ()):
        if v not in prev:
            prev[v] = (src, w, t)
            dq.append(v)
    while dq and goal not in prev:
        u = dq.popleft()
        for v, w, t in adj.get(u, ()):
            if v not in prev:
                prev[v] = (u, w, t)
                dq.append(v)
    if goal not in prev:
        return None
    steps = []
    v = goal
    while True:
        u, w, t = prev[v]
        steps.append((u, v, w, t))
        if u == src:
            break
        v = u
    steps.reverse()
    return steps


def trim(wps: Wps, heads: set | None = None) -> Wps:
    """Keep only the edges that fire at heads reachable from the initial configuration."""
    if heads is None:
        heads = reachable_heads(wps)
    edges = [e for e in wps.edges if (e.from_state, e.top) in heads]
    states = {wps.initial_state} | {e.from_state for e in edges} | {e.to_state for e in edges}
    symbols = {wps.bottom} | {g for _q, g in heads}
    for e in edges:
        if isinstance(e.command, Push):
            symbols.add(e.command.symbol)
    return Wps(tuple(q for q in wps.states if q in states),
               tuple(g for g in wps.alphabet if g in symbols),
               wps.bottom, wps.initial_state, tuple(edges))


def epsilon_denominator(wps: Wps) -> int:
    ell = len(wps.alphabet) * len(wps.states)
    return 2 * ell * ell ** ((ell + 1) ** 2)


def scale_for_epsilon(wps: Wps) -> Wps:
    """Replace each weight w by w*D + 1, an integer multiple of w + 1/D."""
    big = epsilon_denominator(wps)
    return wps.map_weights(lambda w: w * big + 1)


def normalize_threshold(wps: Wps, r) -> Wps:
    """Shift weights so that comparing averages against r becomes comparing against 0."""
    r = Fraction(r)
    a, b = r.numerator, r.denominator
    if a == 0 and b == 1:
        return wps
    return wps.map_weights(lambda w: w * b - a)


def has_good_cycle(wps: Wps, with_witness: bool = False) -> Verdict:
    an = Analysis(wps)
    cyc = an.good_cycle()
    if cyc is None:
        return Verdict(False, stats=_stats(an))
    witness = an.lasso(cyc) if with_witness else None
    return Verdict(True, witness, stats=_stats(an))


def _stats(an: Analysis) -> dict:
    eng = an.engine
    return {"d": eng.d, "ell": eng.ell, "rounds": len(eng.levels) - 1,
            "fixpoint": eng.fixpoint}


def extract_witness(wps: Wps, analysis: Analysis | None = None) -> Lasso:
    """Lasso whose cycle has positive weight; requires a good cycle."""
    an = analysis or Analysis(wps)
    cyc = an.good_cycle()
    if cyc is None:
        raise WitnessUnavailable("the system has no good cycle")
    return an.lasso(cyc)


def _self_loop_verdict(an: Analysis, allow_zero: bool, with_witness: bool) -> Verdict:
    for u, w in sorted(an.self_loops(), key=lambda item: str(item[0])):
        if w is OMEGA or w > 0 or (allow_zero and w == 0):
            witness = None
            if with_witness:
                target = 0 if allow_zero else 1
                witness = an.lasso([(u, u, w, ("skip", u, u))], target)
            return Verdict(True, witness, stats=_stats(an))
    return Verdict(False, stats=_stats(an))


def sup_stack_bounded_geq0(wps: Wps) -> bool:
    return _self_loop_verdict(Analysis(scale_for_epsilon(trim(wps))), False, False).answer


def decide(wps: Wps, obj: Objective, with_witness: bool = True) -> Verdict:
    """Is there an infinite path from the initial configuration satisfying `obj`?"""
    norm = trim(normalize_threshold(wps, obj.threshold))
    return decide_trimmed(norm, obj, with_witness)


def decide_trimmed(norm: Wps, obj: Objective, with_witness: bool = True) -> Verdict:
    """decide() for a system already trimmed and shifted to threshold 0."""
    if obj.stack_bounded:
        an = Analysis(norm)
        v = _self_loop_verdict(an, not obj.strict, with_witness)
    elif obj.strict:
        an = Analysis(norm)
        cyc = an.good_cycle()
        v = Verdict(cyc is not None, stats=_stats(an))
        if cyc is not None and with_witness:
            v.witness = an.lasso(cyc)
    else:
        # a strict good cycle is also one of the perturbed system
        quick = Analysis(norm)
        cyc = quick.good_cycle()
        if cyc is not None:
            v = Verdict(True, stats=dict(_stats(quick), shortcut="strict"))
            if with_witness:
                v.witness = quick.lasso(cyc)
        else:
            big = epsilon_denominator(norm)
            an = Analysis(norm.map_weights(lambda w: w * big + 1))
            v = Verdict(an.good_cycle() is not None, stats=_stats(an))
            v.stats["D_bits"] = big.bit_length()
            if v.answer and with_witness:
                # a scaled lasso may need about D pumping rounds; a zero
                # cycle of the plain system is the witness when one exists
                zero = quick.zero_cycle()
                if zero is not None:
                    v.witness = quick.lasso(zero, target=0)
    v.stats["objective"] = obj.describe()
    return v


def unscale_lasso(lasso: Lasso, big: int) -> Lasso:
    """Map a lasso of the w*big + 1 system back onto the original weights."""
    def back(p: Path) -> Path:
        return Path(p.start, [e.with_weight((e.weight - 1) // big) for e in p.edges])
    return Lasso(back(lasso.prefix), back(lasso.cycle))
