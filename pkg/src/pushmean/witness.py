"""Concrete paths behind summary values.

Every summary entry can be turned back into an edge sequence that starts
at a configuration with the entry's top symbol and never pops it.  Finite
entries come from longest-path predecessor chains, omega entries from a
path through a positive cycle, an omega edge of the previous round, a
positive pumpable pair, or a ranked chain of omega steps.
"""

from __future__ import annotations

from collections import deque

from .model import Configuration, Path, Pop, Push, Wps
from .pumping import find_pumpable_pair, pump
from .summary import NEG_INF, OMEGA, SummaryEngine, _Component, _longest_from


class WitnessUnavailable(RuntimeError):
    """Raised when no witness can be produced for the requested value."""


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _bfs(adj: list, sources, goal, allowed) -> list | None:
    """Tags along a shortest walk (at least one edge) from any source to `goal`."""
    prev = {}
    dq = deque()
    for s in sources:
        for v, _w, tag in adj[s]:
            if v in allowed and v not in prev:
                prev[v] = (s, tag)
                dq.append(v)
    while dq and goal not in prev:
        u = dq.popleft()
        for v, _w, tag in adj[u]:
            if v in allowed and v not in prev:
                prev[v] = (u, tag)
                dq.append(v)
    if goal not in prev:
        return None
    tags = []
    v = goal
    srcs = set(sources)
    while True:
        u, tag = prev[v]
        tags.append(tag)
        if u in srcs:
            break
        v = u
    tags.reverse()
    return tags


def _walk(adj: list, start, goal, allowed) -> list:
    """Tags of a possibly empty walk from `start` to `goal`."""
    if start == goal:
        return []
    tags = _bfs(adj, [start], goal, allowed)
    if tags is None:
        raise WitnessUnavailable("internal: walk not found")
    return tags


def _closure(adj: list, seeds, reverse: bool = False) -> set:
    if reverse:
        radj = [[] for _ in adj]
        for u, out in enumerate(adj):
            for v, w, t in out:
                radj[v].append((u, w, t))
        adj = radj
    seen = set(seeds)
    dq = deque(seeds)
    while dq:
        u = dq.popleft()
        for v, _w, _t in adj[u]:
            if v not in seen:
                seen.add(v)
                dq.append(v)
    return seen


def positive_cycle(vertices, adj: list) -> list | None:
    """(start vertex, tags) of a positive-weight cycle among finite edges inside `vertices`."""
    vs = sorted(vertices)
    fin = [(u, v, w, t) for u in vs for v, w, t in adj[u] if v in vertices and w is not OMEGA]
    dist = {v: 0 for v in vs}
    pred: dict = {}
    last = None
    for _ in range(len(vs)):
        last = None
        for u, v, w, t in fin:
            nd = dist[u] + w
            if nd > dist[v]:
                dist[v] = nd
                pred[v] = (u, w, t)
                last = v
        if last is None:
            return None
    x = last
    for _ in range(len(vs)):
        x = pred[x][0]
    cycle = []
    v = x
    while True:
        u, w, t = pred[v]
        cycle.append((w, t))
        v = u
        if v == x:
            break
    cycle.reverse()
    if sum(w for w, _t in cycle) <= 0:
        raise WitnessUnavailable("internal: predecessor cycle is not positive")
    return x, [t for _w, t in cycle]


class WitnessBuilder:
    """Expands entries of the summaries computed by a `SummaryEngine`."""

    def __init__(self, engine: SummaryEngine):
        self.engine = engine
        self.wps: Wps = engine.wps
        self._finite: dict = {}
        self._lower: dict = {}
        self._ranks: dict | None = None

    # -- graphs of one round ------------------------------------------
    def _graph(self, level: int, g: str):
        if level == 0:
            comp = self._lower.get(g)
            if comp is None:
                comp = self._lower[g] = _Component(self.wps, g, lower_only=True)
            return comp, comp.adjacency({})
        from .summary import _by_symbol
        comp = self.engine.components[g]
        return comp, comp.adjacency(_by_symbol(self.engine.table(level - 1)))

    def _norm(self, level: int) -> int:
        return self.engine.level_of(level)

    def _expand_tag(self, tag, level: int, target=None) -> list:
        if tag[0] == "e":
            return [tag[1]]
        _, qa, z, qb = tag
        return self.value_path((qa, z, qb), level - 1, target)

    # -- bounded summaries ----------------------------------------------
    def value_path(self, t, level: int, target=None) -> list:
        """Path realising s_level(t); for omega entries its weight is at least `target`."""
        level = self._norm(level)
        val = self.engine.table(level).get(t, NEG_INF)
        if val is NEG_INF:
            raise WitnessUnavailable(f"no path for {t}")
        if val is OMEGA:
            return self._omega_at(t, level, target)
        return self._finite_at(t, level)

    def _finite_at(self, t, level: int) -> list:
        key = (t, level)
        hit = self._finite.get(key)
        if hit is not None:
            return hit
        q1, g, q2 = t
        comp, adj = self._graph(level, g)
        src = comp.index[("L", q1)]
        vals, pred = _longest_from(len(comp.keys), adj, src)
        v = comp.index[("L", q2)]
        tags = []
        while True:
            u, tag = pred[v]
            tags.append(tag)
            if u is None:
                break
            v = u
        tags.reverse()
        edges = []
        for tag in tags:
            edges.extend(self._expand_tag(tag, level))
        if sum(e.weight for e in edges) != vals[comp.index[("L", q2)]]:
            raise WitnessUnavailable("internal: witness weight mismatch")
        self._finite[key] = edges
        return edges

    def _omega_at(self, t, level: int, target) -> list:
        # earliest round at which t became omega
        while level > 0 and self.engine.table(level - 1).get(t) is OMEGA:
            level -= 1
        q1, g, q2 = t
        comp, adj = self._graph(level, g)
        nv = len(comp.keys)
        src, goal = comp.index[("L", q1)], comp.index[("L", q2)]
        adj = adj + [list(adj[src])]
        start = nv
        region = _closure(adj, [start]) & _closure(adj, [goal], reverse=True)
        for u in sorted(region):
            for v, w, tag in adj[u]:
                if w is OMEGA and v in region:
                    pre = _walk(adj, start, u, region)
                    post = _walk(adj, v, goal, region)
                    edges_pre = [e for tg in pre for e in self._expand_tag(tg, level)]
                    edges_post = [e for tg in post for e in self._expand_tag(tg, level)]
                    need = None
                    if target is not None:
                        need = target - sum(e.weight for e in edges_pre) - sum(e.weight for e in edges_post)
                    mid = self._expand_tag(tag, level, need)
                    return edges_pre + mid + edges_post
        found = positive_cycle(region - {start}, adj)
        if found is None:
            raise WitnessUnavailable(f"internal: no omega source for {t}")
        x, cyc = found
        pre = _walk(adj, start, x, region)
        post = _walk(adj, x, goal, region)
        edges_pre = [e for tg in pre for e in self._expand_tag(tg, level)]
        edges_post = [e for tg in post for e in self._expand_tag(tg, level)]
        edges_cyc = [e for tg in cyc for e in self._expand_tag(tg, level)]
        wc = sum(e.weight for e in edges_cyc)
        fixed = sum(e.weight for e in edges_pre) + sum(e.weight for e in edges_post)
        k = 1 if target is None else max(0, _ceil_div(target - fixed, wc))
        return edges_pre + edges_cyc * k + edges_post

    # -- full summary ---------------------------------------------------
    def full_path(self, t, target=None) -> list:
        """Path realising s(t) (weight at least `target` if s(t) is omega)."""
        eng = self.engine
        val = eng.full()[t]
        if val is NEG_INF:
            raise WitnessUnavailable(f"no path for {t}")
        if val is not OMEGA:
            return self.value_path(t, eng.d)
        star = eng.star()
        if star.get(t) is OMEGA:
            return self._star_path(t, target)
        return self._closure_path(t, target)

    def _star_path(self, t, target) -> list:
        eng = self.engine
        if eng.table(eng.d).get(t) is OMEGA:
            return self.value_path(t, eng.d, target)
        if t not in eng._pumped:
            return self.value_path(t, eng.d + 1, target)
        edges = self.value_path(t, eng.d + 1)
        q1, g, _ = t
        stack = (self.wps.bottom,) if g == self.wps.bottom else (self.wps.bottom, g)
        p = Path(Configuration(stack, q1), edges)
        while True:
            pair = find_pumpable_pair(p, self.wps)
            pw = pair.weight(p)
            if pw > 0:
                break
            p = pump(p, pair, 0)
        k = 1
        if target is not None and p.weight < target:
            k = 1 + _ceil_div(target - p.weight, pw)
        return list(pump(p, pair, k).edges)

    # -- closure entries ------------------------------------------------
    def _level_steps(self, g: str, ranked: dict):
        """Successor lists at top `g`: (next state, omega flag, step)."""
        eng = self.engine
        sd = eng.table(eng.d)
        star = eng.star()
        out: dict = {}
        for (a, h, b), _v in sd.items():
            if h == g:
                out.setdefault(a, []).append((b, False, ("plain", (a, h, b))))
        for (a, h, b), v in star.items():
            if h == g and v is OMEGA:
                out.setdefault(a, []).append((b, True, ("star", (a, h, b))))
        pops: dict = {}
        for e in self.wps.edges:
            if isinstance(e.command, Pop):
                pops.setdefault((e.from_state, e.top), []).append(e)
        for e in self.wps.edges:
            cmd = e.command
            if e.top != g or not isinstance(cmd, Push):
                continue
            z = cmd.symbol
            for (qa, h, qb) in ranked:
                if h == z and qa == e.to_state:
                    for pe in pops.get((qb, z), ()):
                        out.setdefault(e.from_state, []).append((pe.to_state, True, ("call", e, (qa, z, qb), pe)))
        return out

    def _rank_all(self) -> dict:
        if self._ranks is not None:
            return self._ranks
        eng = self.engine
        full = eng.full()
        star = eng.star()
        ranked = {t: None for t, v in star.items() if v is OMEGA}
        pending = [t for t in full.omega_triples() if t not in ranked]
        while pending:
            snapshot = dict(ranked)
            steps = {g: self._level_steps(g, snapshot) for g in {t[1] for t in pending}}
            progress = []
            for t in pending:
                route = self._route(t, steps[t[1]])
                if route is not None:
                    progress.append((t, route))
            if not progress:
                raise WitnessUnavailable("internal: unranked closure entries")
            for t, route in progress:
                ranked[t] = route
            pending = [t for t in pending if t not in ranked]
        self._ranks = ranked
        return ranked

    @staticmethod
    def _route(t, steps: dict):
        """Shortest chain of level steps from q1 to q2 using an omega step."""
        q1, _g, q2 = t
        goal = (q2, True)
        prev: dict = {}
        dq = deque()
        for b, om, step in steps.get(q1, ()):
            if (b, om) not in prev:
                prev[(b, om)] = (None, step)
                dq.append((b, om))
        while dq and goal not in prev:
            node = dq.popleft()
            for b, om, step in steps.get(node[0], ()):
                nxt = (b, node[1] or om)
                if nxt not in prev:
                    prev[nxt] = (node, step)
                    dq.append(nxt)
        if goal not in prev:
            return None
        route = []
        node = goal
        while node is not None:
            node, step = prev[node]
            route.append(step)
        route.reverse()
        return route

    def _closure_path(self, t, target) -> list:
        route = self._rank_all()[t]
        pieces = []
        om_index = None
        for i, step in enumerate(route):
            if step[0] == "plain":
                pieces.append(self.value_path(step[1], self.engine.d))
            elif om_index is None:
                om_index = i
                pieces.append(None)
            else:
                pieces.append(self._omega_step(step, None))
        need = None
        if target is not None:
            need = target - sum(e.weight for pc in pieces if pc is not None for e in pc)
        pieces[om_index] = self._omega_step(route[om_index], need)
        return [e for pc in pieces for e in pc]

    def _omega_step(self, step, target) -> list:
        if step[0] == "star":
            return self._star_path(step[1], target)
        _, push_e, inner, pop_e = step
        need = None if target is None else target - push_e.weight - pop_e.weight
        if self.engine.star().get(inner) is OMEGA:
            mid = self._star_path(inner, need)
        else:
            mid = self._closure_path(inner, need)
        return [push_e] + mid + [pop_e]

