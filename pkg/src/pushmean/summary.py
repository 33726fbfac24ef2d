"""Summary functions of a weighted pushdown system.

For a fixed top symbol g, the paths that never pop g live on a two-level
graph: level one holds the configurations with g on top, level two the
ones with one more symbol z above it.  Everything deeper is folded into
level-two edges weighted by the previous summary, so each round is a
longest-path computation on that small graph.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from functools import total_ordering

from .model import SKIP, Configuration, Edge, Pop, Push, Skip, Wps
from .reachability import ConfigurationSetAutomaton, saturate


@total_ordering
class _Extreme:
    __slots__ = ("name", "sign")

    def __init__(self, name: str, sign: int):
        self.name = name
        self.sign = sign

    def __repr__(self) -> str:
        return self.name

    def __hash__(self) -> int:
        return hash(self.name)

    def __eq__(self, other) -> bool:
        return self is other

    def __lt__(self, other) -> bool:
        if self is other:
            return False
        if isinstance(other, _Extreme):
            return self.sign < other.sign
        return self.sign < 0

    def __add__(self, other):
        if self is NEG_INF or other is NEG_INF:
            return NEG_INF
        return OMEGA

    __radd__ = __add__


NEG_INF = _Extreme("-inf", -1)
OMEGA = _Extreme("omega", 1)


def ext_str(v) -> str:
    if v is NEG_INF:
        return "-inf"
    if v is OMEGA:
        return "omega"
    return str(v)


class SummaryFn:
    """Total map (q1, top, q2) -> extended weight; absent keys mean -inf."""

    def __init__(self, states, symbols, table: dict | None = None):
        self.states = tuple(states)
        self.symbols = tuple(symbols)
        self.table = {k: v for k, v in (table or {}).items() if v is not NEG_INF}

    def __getitem__(self, key):
        return self.table.get(key, NEG_INF)

    def triples(self):
        for q1 in self.states:
            for g in self.symbols:
                for q2 in self.states:
                    yield (q1, g, q2)

    def items(self):
        for t in self.triples():
            yield t, self[t]

    def __eq__(self, other) -> bool:
        return isinstance(other, SummaryFn) and self.table == other.table

    def __le__(self, other: "SummaryFn") -> bool:
        return all(v <= other[k] for k, v in self.table.items())

    def omega_triples(self) -> list:
        return [t for t, v in self.table.items() if v is OMEGA]

    def counts(self) -> dict:
        n = len(self.states) ** 2 * len(self.symbols)
        om = sum(1 for v in self.table.values() if v is OMEGA)
        return {"-inf": n - len(self.table), "finite": len(self.table) - om, "omega": om}

    def __repr__(self) -> str:
        return f"SummaryFn({len(self.table)} entries)"


@dataclass
class FiniteWeightedGraph:
    vertices: list = field(default_factory=list)
    edges: list = field(default_factory=list)   # (u, v, weight, label)


def build_step_graph(wps: Wps) -> FiniteWeightedGraph:
    """Configurations of height two and three over the bottom with their one-step edges."""
    g = FiniteWeightedGraph()
    bot = wps.bottom
    for top in wps.alphabet:
        for q in wps.states:
            g.vertices.append(((bot, top), q))
    for top in wps.alphabet:
        for z in wps.alphabet:
            for q in wps.states:
                g.vertices.append(((bot, top, z), q))
    for top in wps.alphabet:
        low = (bot, top)
        for e in wps.edges:
            cmd = e.command
            if isinstance(cmd, Skip):
                if e.top == top:
                    g.edges.append(((low, e.from_state), (low, e.to_state), e.weight, e))
                for z in wps.alphabet:
                    if e.top == z:
                        g.edges.append(((low + (z,), e.from_state), (low + (z,), e.to_state), e.weight, e))
            elif isinstance(cmd, Push) and e.top == top:
                g.edges.append(((low, e.from_state), (low + (cmd.symbol,), e.to_state), e.weight, e))
            elif isinstance(cmd, Pop):
                g.edges.append(((low + (e.top,), e.from_state), (low, e.to_state), e.weight, e))
    return g


# ---------------------------------------------------------------------------
# longest paths on one component


def _longest_from(nv: int, adj: list, src: int):
    """Maximum weight of nonempty walks from `src` to every vertex.

    Returns (values, pred) where values maps reached vertices to an int
    or OMEGA and pred maps finite vertices to (previous vertex or None,
    edge tag).
    """
    reach = []
    seen = bytearray(nv)
    dq = deque()
    for v, _w, _t in adj[src]:
        if not seen[v]:
            seen[v] = 1
            dq.append(v)
    while dq:
        u = dq.popleft()
        reach.append(u)
        for v, _w, _t in adj[u]:
            if not seen[v]:
                seen[v] = 1
                dq.append(v)
    dist: dict = {}
    pred: dict = {}
    seeds = set()
    for v, w, tag in adj[src]:
        if w is OMEGA:
            seeds.add(v)
        else:
            dv = dist.get(v)
            if dv is None or w > dv:
                dist[v] = w
                pred[v] = (None, tag)
    fin = []
    for u in reach:
        for v, w, tag in adj[u]:
            if w is OMEGA:
                seeds.add(v)
            else:
                fin.append((u, v, w, tag))
    n = len(reach)
    for rnd in range(n):
        changed = []
        for u, v, w, tag in fin:
            du = dist.get(u)
            if du is None:
                continue
            nd = du + w
            dv = dist.get(v)
            if dv is None or nd > dv:
                dist[v] = nd
                pred[v] = (u, tag)
                changed.append(v)
        if not changed:
            break
        if rnd == n - 1:
            seeds.update(changed)
    values = dict(dist)
    if seeds:
        tainted = set(seeds)
        dq = deque(seeds)
        while dq:
            u = dq.popleft()
            for v, _w, _t in adj[u]:
                if v not in tainted:
                    tainted.add(v)
                    dq.append(v)
        for v in tainted:
            values[v] = OMEGA
    return values, pred


class _Component:
    """Two-level graph for paths that keep a fixed symbol `top` on the stack."""

    def __init__(self, wps: Wps, top: str, lower_only: bool = False):
        self.top = top
        self.index: dict = {}
        self.keys: list = []
        self.static: list = []      # (u, v, w, tag)
        self.pushed: set = set()
        for q in wps.states:
            self._vertex(("L", q))
        for e in wps.edges:
            cmd = e.command
            if e.top == top and isinstance(cmd, Skip):
                self.static.append((self._vertex(("L", e.from_state)), self._vertex(("L", e.to_state)),
                                    e.weight, ("e", e)))
            elif not lower_only and e.top == top and isinstance(cmd, Push):
                self.pushed.add(cmd.symbol)
                self.static.append((self._vertex(("L", e.from_state)),
                                    self._vertex(("U", cmd.symbol, e.to_state)), e.weight, ("e", e)))
        if not lower_only:
            for e in wps.edges:
                if isinstance(e.command, Pop) and e.top in self.pushed:
                    self.static.append((self._vertex(("U", e.top, e.from_state)),
                                        self._vertex(("L", e.to_state)), e.weight, ("e", e)))

    def _vertex(self, key) -> int:
        i = self.index.get(key)
        if i is None:
            i = len(self.keys)
            self.index[key] = i
            self.keys.append(key)
        return i

    def adjacency(self, by_symbol: dict) -> list:
        """Adjacency lists with level-two edges taken from `by_symbol`."""
        edges = list(self.static)
        for z in sorted(self.pushed):
            for (qa, qb), val in by_symbol.get(z, ()):
                edges.append((self._vertex(("U", z, qa)), self._vertex(("U", z, qb)), val, ("s", qa, z, qb)))
        adj = [[] for _ in self.keys]
        for u, v, w, tag in edges:
            adj[u].append((v, w, tag))
        return adj

    def sources(self, adj: list) -> list:
        return [(i, k[1]) for i, k in enumerate(self.keys) if k[0] == "L" and adj[i]]


def _by_symbol(table: dict) -> dict:
    out = defaultdict(list)
    for (qa, z, qb), val in table.items():
        out[z].append(((qa, qb), val))
    for z in out:
        out[z].sort(key=lambda item: item[0])
    return out


class SummaryEngine:
    """Iterates bounded summaries and keeps each round for witness extraction."""

    def __init__(self, wps: Wps):
        self.wps = wps
        self.ell = len(wps.states) * len(wps.alphabet)
        self.d = self.ell ** 2
        self.components = {g: _Component(wps, g) for g in wps.alphabet}
        self.levels: list = []
        self.fixpoint: int | None = None
        self._changed_symbols: set = set(wps.alphabet)
        self._full: SummaryFn | None = None
        self._star: dict | None = None
        self._pumped: set = set()

    # -- bounded summaries --------------------------------------------
    def _base(self) -> dict:
        table = {}
        for g in self.wps.alphabet:
            comp = _Component(self.wps, g, lower_only=True)
            adj = comp.adjacency({})
            for i, q1 in comp.sources(adj):
                vals, _ = _longest_from(len(comp.keys), adj, i)
                for v, val in vals.items():
                    table[(q1, g, comp.keys[v][1])] = val
        return table

    def _next(self, prev: dict, changed: set) -> dict:
        table = {}
        by_sym = _by_symbol(prev)
        for g, comp in self.components.items():
            if self.levels and len(self.levels) > 1 and not (comp.pushed & changed):
                # inputs of this component did not move
                for q1 in self.wps.states:
                    for q2 in self.wps.states:
                        val = prev.get((q1, g, q2))
                        if val is not None:
                            table[(q1, g, q2)] = val
                continue
            adj = comp.adjacency(by_sym)
            for i, q1 in comp.sources(adj):
                vals, _ = _longest_from(len(comp.keys), adj, i)
                for v, val in vals.items():
                    key = comp.keys[v]
                    if key[0] == "L":
                        table[(q1, g, key[1])] = val
        return table

    def table(self, i: int) -> dict:
        """Table of s_i (computed on demand)."""
        if not self.levels:
            self.levels.append(self._base())
        if self.fixpoint is not None and i >= self.fixpoint:
            return self.levels[self.fixpoint]
        while len(self.levels) <= i:
            prev = self.levels[-1]
            nxt = self._next(prev, self._changed_symbols)
            if nxt == prev:
                self.fixpoint = len(self.levels) - 1
                return prev
            self._changed_symbols = {k[1] for k in set(nxt) | set(prev) if nxt.get(k) != prev.get(k)}
            self.levels.append(nxt)
        return self.levels[i]

    def bounded(self, i: int) -> SummaryFn:
        return SummaryFn(self.wps.states, self.wps.alphabet, self.table(i))

    def level_of(self, i: int) -> int:
        self.table(i)
        return i if self.fixpoint is None else min(i, self.fixpoint)

    # -- full summary ---------------------------------------------------
    def star(self) -> dict:
        if self._star is None:
            sd = self.table(self.d)
            sd1 = self.table(self.d + 1)
            star = dict(sd)
            for t, v in sd1.items():
                if sd.get(t, NEG_INF) < v:
                    star[t] = OMEGA
                    if v is not OMEGA and sd.get(t) is not OMEGA:
                        self._pumped.add(t)
            self._star = star
        return self._star

    def full(self) -> SummaryFn:
        if self._full is None:
            star = self.star()
            sd = self.table(self.d)
            self._full = omega_closure(self.wps, SummaryFn(self.wps.states, self.wps.alphabet, star),
                                       SummaryFn(self.wps.states, self.wps.alphabet, sd))
        return self._full


def omega_closure(wps: Wps, star: SummaryFn, base: SummaryFn) -> SummaryFn:
    """Mark as omega every triple joined by a non-decreasing path through an omega edge.

    Triples not marked keep their value from `base`; `star` supplies the
    omega edges.
    """
    table = dict(base.table)
    for t in star.omega_triples():
        table[t] = OMEGA
    omegas = star.omega_triples()
    if not omegas:
        return SummaryFn(wps.states, wps.alphabet, table)
    # candidates: a path must exist at all, which the bounded value records
    candidates = defaultdict(list)
    for t, v in base.table.items():
        if table.get(t) is not OMEGA:
            candidates[t[2]].append(t)
    if not candidates:
        return SummaryFn(wps.states, wps.alphabet, table)
    doubled = _doubled_system(wps, omegas)
    fresh = doubled.bottom
    for q2 in sorted(candidates):
        aut = ConfigurationSetAutomaton()
        for g in wps.alphabet:
            aut.add(("omega", q2), g, 0)
        aut.add(0, fresh, 1)
        aut.finals = frozenset({1})
        saturate(doubled, aut)
        for t in candidates[q2]:
            q1, g, _ = t
            if aut.accepts(Configuration((fresh, g), q1)):
                table[t] = OMEGA
    return SummaryFn(wps.states, wps.alphabet, table)


def _doubled_system(wps: Wps, omegas) -> Wps:
    fresh = ("fresh-bottom",)
    edges = list(wps.edges)
    for e in wps.edges:
        edges.append(Edge(("omega", e.from_state), e.top, ("omega", e.to_state), e.command, 0))
    for q1, g, q2 in omegas:
        edges.append(Edge(q1, g, ("omega", q2), SKIP, 0))
        edges.append(Edge(("omega", q1), g, ("omega", q2), SKIP, 0))
    states = tuple(wps.states) + tuple(("omega", q) for q in wps.states)
    return Wps(states, tuple(wps.alphabet) + (fresh,), fresh, wps.initial_state, tuple(edges))


# ---------------------------------------------------------------------------
# public operations


def base_summary(wps: Wps) -> SummaryFn:
    return SummaryEngine(wps).bounded(0)


def next_bounded_summary(wps: Wps, s_i: SummaryFn) -> SummaryFn:
    eng = SummaryEngine(wps)
    return SummaryFn(wps.states, wps.alphabet, eng._next(s_i.table, set(wps.alphabet)))


def bounded_summary(wps: Wps, d: int) -> SummaryFn:
    return SummaryEngine(wps).bounded(d)


def full_summary(wps: Wps) -> SummaryFn:
    return SummaryEngine(wps).full()


@dataclass
class SummaryGraph:
    vertices: list
    skip_edges: list        # ((q1, g), (q2, g), weight)
    push_edges: list        # ((q1, g1), (q2, g2), weight, edge)
    initial: tuple
    reachable: set = field(default_factory=set)

    def successors(self) -> dict:
        out = defaultdict(list)
        for u, v, w in self.skip_edges:
            out[u].append((v, w, ("skip", u, v)))
        for u, v, w, e in self.push_edges:
            out[u].append((v, w, ("push", e)))
        return out


def build_summary_graph(wps: Wps, s: SummaryFn) -> SummaryGraph:
    vertices = [(q, g) for q in wps.states for g in wps.alphabet]
    skips = []
    for (q1, g, q2), v in sorted(s.table.items(), key=lambda kv: (str(kv[0][0]), str(kv[0][1]), str(kv[0][2]))):
        skips.append(((q1, g), (q2, g), v))
    pushes = [((e.from_state, e.top), (e.to_state, e.command.symbol), e.weight, e)
              for e in wps.edges if isinstance(e.command, Push)]
    gr = SummaryGraph(vertices, skips, pushes, (wps.initial_state, wps.bottom))
    succ = gr.successors()
    seen = {gr.initial}
    dq = deque([gr.initial])
    while dq:
        u = dq.popleft()
        for v, _w, _t in succ.get(u, ()):
            if v not in seen:
                seen.add(v)
                dq.append(v)
    gr.reachable = seen
    return gr
