"""Configuration reachability for pushdown systems.

`pre_star` saturates a finite acceptor of a target configuration set
until it recognises every configuration that can reach the set.  The
acceptor's control part is the system's own state set; extra acceptor
states are integers, so they never collide with state names.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field

from .model import Configuration, Pop, Push, Skip, Wps


@dataclass
class ConfigurationSetAutomaton:
    """Acceptor reading a stack top-first from the configuration's state."""

    transitions: dict = field(default_factory=dict)  # (src, symbol) -> set of dst
    finals: frozenset = frozenset()

    def add(self, src, symbol, dst) -> bool:
        dsts = self.transitions.setdefault((src, symbol), set())
        if dst in dsts:
            return False
        dsts.add(dst)
        return True

    def size(self) -> int:
        return sum(len(v) for v in self.transitions.values())

    def accepts(self, c: Configuration) -> bool:
        current = {c.state}
        for sym in reversed(c.stack):
            nxt = set()
            for s in current:
                nxt |= self.transitions.get((s, sym), set())
            if not nxt:
                return False
            current = nxt
        return bool(current & self.finals)


def configuration_acceptor(target: Configuration) -> ConfigurationSetAutomaton:
    """Acceptor recognising exactly `target`."""
    aut = ConfigurationSetAutomaton()
    src = target.state
    for i, sym in enumerate(reversed(target.stack)):
        aut.add(src, sym, i)
        src = i
    aut.finals = frozenset({src})
    return aut


def saturate(wps: Wps, aut: ConfigurationSetAutomaton) -> ConfigurationSetAutomaton:
    """Extend `aut` in place to its pre* closure under `wps`."""
    skip_into = defaultdict(list)   # (q, top) -> [p] for skip edges p --top--> q
    push_into = defaultdict(list)   # (q, pushed) -> [(p, top)]
    worklist = deque()
    for e in wps.edges:
        cmd = e.command
        if isinstance(cmd, Skip):
            skip_into[(e.to_state, e.top)].append(e.from_state)
        elif isinstance(cmd, Push):
            push_into[(e.to_state, cmd.symbol)].append((e.from_state, e.top))
        elif isinstance(cmd, Pop):
            worklist.append((e.from_state, e.top, e.to_state))
    # seed: existing transitions are processed like new ones
    rel = defaultdict(set)
    for (src, sym), dsts in aut.transitions.items():
        for dst in dsts:
            worklist.append((src, sym, dst))
    derived = defaultdict(list)     # (q', top) -> [p] from partially matched pushes
    while worklist:
        src, sym, dst = worklist.popleft()
        if dst in rel[(src, sym)]:
            continue
        rel[(src, sym)].add(dst)
        aut.add(src, sym, dst)
        for p in skip_into.get((src, sym), ()):
            worklist.append((p, sym, dst))
        for p in derived.get((src, sym), ()):
            worklist.append((p, sym, dst))
        for p, top in push_into.get((src, sym), ()):
            # (p, top) pushes sym and moves to src; the remainder reads top from dst
            derived[(dst, top)].append(p)
            for d2 in tuple(rel.get((dst, top), ())):
                worklist.append((p, top, d2))
    return aut


def pre_star(wps: Wps, target: Configuration) -> ConfigurationSetAutomaton:
    """Acceptor of every configuration that can reach `target` (empty path included)."""
    return saturate(wps, configuration_acceptor(target))


def reachable(wps: Wps, source: Configuration, target: Configuration) -> bool:
    return pre_star(wps, target).accepts(source)


def nondecreasing_relation(wps: Wps) -> set:
    """Triples (q1, top, q2) joined by a nonempty path that never pops `top`."""
    rel: set = set()
    out = defaultdict(set)          # (q1, top) -> {q2}
    into = defaultdict(set)         # (q2, top) -> {q1}
    pushes = defaultdict(list)      # pushed symbol -> [(p, top, q)]
    pops = defaultdict(list)        # (q, symbol) -> [(q2, weightless)]
    worklist = deque()
    for e in wps.edges:
        if isinstance(e.command, Skip):
            worklist.append((e.from_state, e.top, e.to_state))
        elif isinstance(e.command, Push):
            pushes[e.command.symbol].append((e.from_state, e.top, e.to_state))
        else:
            pops[(e.from_state, e.top)].append(e.to_state)
    # push immediately followed by pop
    for z, plist in pushes.items():
        for p, top, q in plist:
            for r in pops.get((q, z), ()):
                worklist.append((p, top, r))
    while worklist:
        t = worklist.popleft()
        if t in rel:
            continue
        rel.add(t)
        a, g, b = t
        out[(a, g)].add(b)
        into[(b, g)].add(a)
        for c in tuple(out.get((b, g), ())):
            worklist.append((a, g, c))
        for c in tuple(into.get((a, g), ())):
            worklist.append((c, g, b))
        # t used as the inner part of push g ... pop g
        for p, top, q in pushes.get(g, ()):
            if q == a:
                for r in pops.get((b, g), ()):
                    worklist.append((p, top, r))
    return rel


def reachable_heads(wps: Wps, relation: set | None = None) -> set:
    """(state, top) pairs of configurations reachable from the initial one.

    Every reachable configuration is the last local minimum of the path
    reaching it, so its head is reached through non-decreasing segments
    and single pushes.
    """
    if relation is None:
        relation = nondecreasing_relation(wps)
    succ = defaultdict(set)
    for a, g, b in relation:
        succ[(a, g)].add((b, g))
    for e in wps.edges:
        if isinstance(e.command, Push):
            succ[(e.from_state, e.top)].add((e.to_state, e.command.symbol))
    start = (wps.initial_state, wps.bottom)
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in succ.get(v, ()):
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def dead_end_reachable(wps: Wps) -> bool:
    return any(not wps.edges_at(q, g) for q, g in reachable_heads(wps))
