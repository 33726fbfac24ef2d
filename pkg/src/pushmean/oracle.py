"""Brute-force reference computations on explicit configuration graphs.

Nothing here reuses the summary machinery: bounded summaries come from a
length-indexed dynamic program over every configuration up to a height
cap, and the strict decision enumerates simple cycles with networkx.
"""

from __future__ import annotations

import itertools
from collections import defaultdict, deque
from dataclasses import dataclass, field

import networkx as nx

from .model import Configuration, Pop, Push, Skip, Wps
from .pumping import PreconditionFailed, PumpablePair, find_pumpable_pair, pump

__all__ = [
    "TooLarge", "ConfigGraph", "truncated_graph", "oracle_bounded_summary",
    "oracle_decide_strict", "oracle_depth", "find_pumpable_pair", "pump",
    "PumpablePair", "PreconditionFailed", "NEG", "OM",
]

MAX_VERTICES = 100_000

# oracle-local markers for -inf and omega
NEG = "-inf"
OM = "omega"


class TooLarge(RuntimeError):
    pass


@dataclass
class ConfigGraph:
    vertices: list = field(default_factory=list)       # Configuration
    edges: list = field(default_factory=list)          # (i, j, weight)


def truncated_graph(wps: Wps, base: Configuration, height_cap: int) -> ConfigGraph:
    """All configurations extending base's stack up to `height_cap`, with their moves.

    Pops below the base stack are not allowed.
    """
    pushable = [g for g in wps.alphabet if g != wps.bottom]
    extra = height_cap - len(base.stack)
    if extra < 0:
        raise ValueError("height cap below the base stack")
    count = len(wps.states) * sum(len(pushable) ** k for k in range(extra + 1))
    if count > MAX_VERTICES:
        raise TooLarge(f"{count} configurations")
    g = ConfigGraph()
    index = {}
    for k in range(extra + 1):
        for suffix in itertools.product(pushable, repeat=k):
            stack = tuple(base.stack) + suffix
            for q in wps.states:
                index[(stack, q)] = len(g.vertices)
                g.vertices.append(Configuration(stack, q))
    floor = len(base.stack)
    for i, c in enumerate(g.vertices):
        for e in wps.edges_at(c.state, c.stack[-1]):
            cmd = e.command
            if isinstance(cmd, Skip):
                stack = c.stack
            elif isinstance(cmd, Pop):
                if len(c.stack) <= floor:
                    continue
                stack = c.stack[:-1]
            else:
                if len(c.stack) >= height_cap:
                    continue
                stack = c.stack + (cmd.symbol,)
            g.edges.append((i, index[(stack, e.to_state)], e.weight))
    return g


def _longest_dp(n: int, edges: list, src: int, bound: int) -> dict:
    """Longest nonempty walks from `src`: vertex -> int or OM."""
    out_edges = defaultdict(list)
    for u, v, w in edges:
        out_edges[u].append((v, w))
    # restrict to vertices reachable from src
    reach = set()
    dq = deque(v for v, _ in out_edges[src])
    reach.update(dq)
    while dq:
        u = dq.popleft()
        for v, _ in out_edges[u]:
            if v not in reach:
                reach.add(v)
                dq.append(v)
    size = len(reach) + 1
    best: dict = {}
    for v, w in out_edges[src]:
        if v not in best or w > best[v]:
            best[v] = w
    # best holds the maximum over walks of length <= k after round k
    tainted = set()
    for k in range(1, size + 1):
        nxt = dict(best)
        for u, val in best.items():
            for v, w in out_edges[u]:
                cand = val + w
                if v not in nxt or cand > nxt[v]:
                    nxt[v] = cand
        if nxt == best:
            break
        if k == size:
            tainted = {v for v in nxt if v not in best or nxt[v] > best[v]}
        best = nxt
    result = dict(best)
    if tainted:
        seen = set(tainted)
        dq = deque(tainted)
        while dq:
            u = dq.popleft()
            for v, _ in out_edges[u]:
                if v not in seen:
                    seen.add(v)
                    dq.append(v)
        for v in seen:
            result[v] = OM
    for v, val in result.items():
        if val != OM and val > bound:
            raise AssertionError("finite longest path above the cycle-free bound")
    return result


def oracle_bounded_summary(wps: Wps, d: int) -> dict:
    """s_d as a dict (q1, top, q2) -> int | OM; absent entries are -inf."""
    table = {}
    for g in wps.alphabet:
        stack = (wps.bottom,) if g == wps.bottom else (wps.bottom, g)
        graph = truncated_graph(wps, Configuration(stack, wps.initial_state), len(stack) + d)
        n = len(graph.vertices)
        bound = n * max(1, wps.max_abs_weight)
        index = {(c.stack, c.state): i for i, c in enumerate(graph.vertices)}
        for q1 in wps.states:
            vals = _longest_dp(n, graph.edges, index[(stack, q1)], bound)
            for q2 in wps.states:
                v = vals.get(index[(stack, q2)])
                if v is not None:
                    table[(q1, g, q2)] = v
    return table


def oracle_depth(wps: Wps, budget: int = 4000) -> int:
    """Largest depth up to (|Q||Γ|)^2 whose truncated graphs stay within `budget` vertices."""
    full = (len(wps.states) * len(wps.alphabet)) ** 2
    k = max(1, len([g for g in wps.alphabet if g != wps.bottom]))
    d = 0
    while d < full:
        size = len(wps.states) * sum(k ** j for j in range(d + 3))
        if size > budget:
            break
        d += 1
    return d


def _closure_omega(wps: Wps, plain: set, star_omega: set) -> set:
    """Triples joined by a top-preserving walk that uses an omega step."""
    pushes = [(e.from_state, e.top, e.to_state, e.command.symbol) for e in wps.edges if isinstance(e.command, Push)]
    pops = defaultdict(list)
    for e in wps.edges:
        if isinstance(e.command, Pop):
            pops[(e.from_state, e.top)].append(e.to_state)
    reach = defaultdict(set)     # plain walks, possibly empty
    for q in wps.states:
        for g in wps.alphabet:
            reach[(q, g)].add(q)
    for (a, g, b) in plain:
        reach[(a, g)].add(b)
    omega = set(star_omega)
    while True:
        steps = set(omega)
        for p, g, qa, z in pushes:
            for (x, h, y) in omega:
                if h == z and x == qa:
                    for r in pops.get((y, z), ()):
                        steps.add((p, g, r))
        grown = set(omega)
        for (a, g, b) in steps:
            for q1 in wps.states:
                if a in reach[(q1, g)]:
                    for q2 in reach[(b, g)]:
                        grown.add((q1, g, q2))
        if grown == omega:
            return omega
        omega = grown


def oracle_decide_strict(wps: Wps, depth: int | None = None) -> bool:
    """Is there a reachable positive or omega-bearing simple cycle in the summary graph?"""
    d = oracle_depth(wps) if depth is None else depth
    lo = oracle_bounded_summary(wps, d)
    hi = oracle_bounded_summary(wps, d + 1)
    star_omega = {t for t, v in hi.items() if v == OM or t not in lo or (lo[t] != OM and v > lo[t])}
    star_omega |= {t for t, v in lo.items() if v == OM}
    omega = _closure_omega(wps, set(lo) | set(hi), star_omega)
    g = nx.DiGraph()
    start = (wps.initial_state, wps.bottom)
    g.add_node(start)

    def add(u, v, w):
        old = g.get_edge_data(u, v)
        if old is None or _gt(w, old["w"]):
            g.add_edge(u, v, w=w)

    for (q1, top, q2), v in lo.items():
        add((q1, top), (q2, top), OM if (q1, top, q2) in omega else v)
    for (q1, top, q2) in omega:
        add((q1, top), (q2, top), OM)
    for e in wps.edges:
        if isinstance(e.command, Push):
            add((e.from_state, e.top), (e.to_state, e.command.symbol), e.weight)
    live = nx.descendants(g, start) | {start}
    sub = g.subgraph(live)
    for cyc in nx.simple_cycles(sub):
        total = 0
        for u, v in zip(cyc, cyc[1:] + cyc[:1]):
            w = sub[u][v]["w"]
            if w == OM:
                return True
            total += w
        if total > 0:
            return True
    return False


def _gt(a, b) -> bool:
    if a == OM:
        return b != OM
    if b == OM:
        return False
    return a > b
