"""Instance generators: weighted automata to pushdown games, 3-SAT to recursive games."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .games import PlayView, Wpg
from .model import POP, SKIP, Edge, Push, Wps
from .rsm import Call, ModularStrategy, Ret, RsmModule, Transition, Wrg

BOTTOM = "⊥"
DOLLAR = "$"

# gadget states
Q_DOLLAR = "q$"
Q_SIGMA = "qΣ"
Q_CHOICE = "qch"
Q_SHORT = "q<$"


class AssignmentNotSatisfying(ValueError):
    pass


class NotAGeneratedInstance(ValueError):
    pass


# ---------------------------------------------------------------------------
# weighted automata

@dataclass(frozen=True)
class Wfa:
    alphabet: tuple
    states: tuple
    initial: str
    transitions: tuple      # (q, symbol, q2, weight)

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "transitions", tuple(tuple(t) for t in self.transitions))
        for q, a, q2, w in self.transitions:
            if w not in (-1, 0, 1):
                raise ValueError(f"weight {w} outside {{-1, 0, 1}}")
            if a not in self.alphabet or q not in self.states or q2 not in self.states:
                raise ValueError(f"transition {(q, a, q2, w)} mentions unknown names")
        if DOLLAR in self.alphabet or BOTTOM in self.alphabet:
            raise ValueError("alphabet may not use the reserved symbols")

    def moves(self, q: str, a: str) -> list:
        return [(q2, w) for (p, b, q2, w) in self.transitions if p == q and b == a]


def _step_costs(a: Wfa, costs: dict, sym: str) -> dict:
    nxt: dict = {}
    for q, c in costs.items():
        for q2, w in a.moves(q, sym):
            if q2 not in nxt or c + w < nxt[q2]:
                nxt[q2] = c + w
    return nxt


def wfa_value(a: Wfa, word) -> int | None:
    """Minimum run weight on `word`; None when no run exists."""
    costs = {a.initial: 0}
    for sym in word:
        costs = _step_costs(a, costs, sym)
        if not costs:
            return None
    return min(costs.values())


def wfa_nonuniversal_bounded(a: Wfa, nu: int, max_len: int):
    """Shortest word (lexicographic among equals) of length <= max_len with value >= nu.

    The empty word counts, with value 0.  Words without a run are skipped.
    None only means nothing was found up to max_len.
    """
    layer = [((), {a.initial: 0})]
    for length in range(max_len + 1):
        for word, costs in layer:
            if costs and min(costs.values()) >= nu:
                return word
        if length == max_len:
            break
        layer = [(word + (sym,), _step_costs(a, costs, sym))
                 for word, costs in layer for sym in a.alphabet]
        layer = [(w, c) for w, c in layer if c]
    return None


def _run_state(q: str) -> str:
    return f"run:{q}"


def wfa_to_wpg(a: Wfa) -> Wpg:
    """The five-gadget game; each edge is tagged with (gadget, role[, automaton weight])."""
    tops = (BOTTOM, DOLLAR) + a.alphabet
    edges: list = []
    tags: list = []

    def add(e: Edge, tag: tuple) -> None:
        edges.append(e)
        tags.append(tag)

    for g in tops:
        add(Edge(Q_DOLLAR, g, Q_DOLLAR, Push(DOLLAR), -10), (1, "push$"))
        add(Edge(Q_DOLLAR, g, Q_SIGMA, Push(DOLLAR), -10), (1, "push$"))
    for g in tops:
        for s in a.alphabet:
            add(Edge(Q_SIGMA, g, Q_SIGMA, Push(s), -1), (2, "push"))
        add(Edge(Q_SIGMA, g, Q_CHOICE, SKIP, 0), (2, "exit"))
    for g in tops:
        add(Edge(Q_CHOICE, g, Q_SHORT, SKIP, 0), (3, "choose"))
        add(Edge(Q_CHOICE, g, _run_state(a.initial), SKIP, 0), (3, "choose"))
    for s in a.alphabet:
        add(Edge(Q_SHORT, s, Q_SHORT, POP, 0), (4, "pop"))
    add(Edge(Q_SHORT, DOLLAR, Q_SHORT, POP, 11), (4, "pop$"))
    add(Edge(Q_SHORT, BOTTOM, Q_DOLLAR, SKIP, 0), (4, "restart"))
    for q, s, q2, w in a.transitions:
        add(Edge(_run_state(q), s, _run_state(q2), POP, w + 1), (5, "run", w))
    for q in a.states:
        add(Edge(_run_state(q), DOLLAR, _run_state(q), POP, 10), (5, "pop$"))
        add(Edge(_run_state(q), BOTTOM, Q_DOLLAR, SKIP, 0), (5, "restart"))
    states = (Q_DOLLAR, Q_SIGMA, Q_CHOICE, Q_SHORT) + tuple(_run_state(q) for q in a.states)
    wps = Wps(states, (BOTTOM, DOLLAR) + a.alphabet, BOTTOM, Q_DOLLAR, tuple(edges))
    return Wpg(wps, frozenset({Q_DOLLAR, Q_SIGMA}), edge_tags=tuple(tags))


_EXPECTED = {
    (1, "push$"): -10, (2, "push"): -1, (2, "exit"): 0, (3, "choose"): 0,
    (4, "pop"): 0, (4, "pop$"): 11, (4, "restart"): 0, (5, "pop$"): 10, (5, "restart"): 0,
}


def audit_gadget_weights(g: Wpg) -> list:
    """Edges whose weight disagrees with their gadget's rule (empty when all is well)."""
    bad = []
    for e, tag in g.tagged_edges():
        want = tag[2] + 1 if tag[1] == "run" else _EXPECTED.get(tag[:2])
        if want is None or e.weight != want:
            bad.append((e, tag))
    if len(g.edge_tags) != len(g.wps.edges):
        bad.append(("untagged edges", len(g.wps.edges) - len(g.edge_tags)))
    return bad


def _pick(view: PlayView, to_state: str, command=None) -> Edge:
    for e in view.options():
        if e.to_state == to_state and (command is None or e.command == command):
            return e
    raise LookupError(f"no move to {to_state} at {view.configuration}")


def word_strategy(a: Wfa, word) -> "callable":
    """Player 1: push n+1 dollars, then the reversed word, then hand over."""
    word = tuple(word)
    if not word:
        raise ValueError("the word must be nonempty")
    n = len(word)
    rev = word[::-1]

    def choose(view: PlayView) -> Edge:
        above = view.height - 1
        if view.state == Q_DOLLAR:
            return _pick(view, Q_DOLLAR if above < n else Q_SIGMA)
        letters = above - (n + 1)
        if letters < n:
            return _pick(view, Q_SIGMA, Push(rev[letters]))
        return _pick(view, Q_CHOICE)

    return choose


class counter_strategy:
    """Player 2's reply: send short-on-dollars plays to q<$, otherwise follow a cheapest run.

    Runs are read off the stack top-first, i.e. on the reverse of the pushed
    word.  Ties between equally cheap moves go to the earlier-declared state.
    """

    def __init__(self, a: Wfa):
        self.a = a
        self.rank = {q: i for i, q in enumerate(a.states)}
        self.word: tuple = ()
        self.best: list = []

    def _plan(self, word: tuple) -> None:
        # best[i][q]: cheapest run from q reading word[i:]
        best = [dict() for _ in range(len(word) + 1)]
        best[len(word)] = {q: 0 for q in self.a.states}
        for i in range(len(word) - 1, -1, -1):
            for q in self.a.states:
                opts = [w + best[i + 1][q2] for q2, w in self.a.moves(q, word[i]) if q2 in best[i + 1]]
                if opts:
                    best[i][q] = min(opts)
        self.word, self.best = word, best

    def __call__(self, view: PlayView) -> Edge:
        if view.state == Q_CHOICE:
            letters = [s for s in view.stack if s not in (BOTTOM, DOLLAR)]
            dollars = sum(1 for s in view.stack if s == DOLLAR)
            word = tuple(reversed(letters))
            self._plan(word)
            if dollars <= len(letters) or self.a.initial not in self.best[0]:
                return _pick(view, Q_SHORT)
            return _pick(view, _run_state(self.a.initial))
        if view.state.startswith("run:") and view.top not in (BOTTOM, DOLLAR):
            q = view.state[4:]
            remaining = sum(1 for s in view.stack if s not in (BOTTOM, DOLLAR))
            i = len(self.word) - remaining
            sym = view.top
            cands = []
            for q2, w in self.a.moves(q, sym):
                rest = self.best[i + 1].get(q2) if i + 1 < len(self.best) else None
                if rest is not None:
                    cands.append((w + rest, self.rank[q2], q2, w))
            if not cands:
                return view.options()[0]
            _, _, q2, w = min(cands)
            for e in view.options():
                if e.to_state == _run_state(q2) and e.weight == w + 1:
                    return e
        return view.options()[0]


# ---------------------------------------------------------------------------
# 3-SAT

@dataclass(frozen=True)
class CnfFormula:
    """Clauses of three distinct nonzero literals; -k is the negation of variable k."""

    n: int
    clauses: tuple

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(tuple(c) for c in self.clauses))
        for c in self.clauses:
            if len(c) != 3 or len(set(c)) != 3:
                raise ValueError(f"clause {c} must have exactly three distinct literals")
            if any(lit == 0 or abs(lit) > self.n for lit in c):
                raise ValueError(f"clause {c} mentions an unknown variable")

    def satisfied_by(self, assignment) -> bool:
        return all(any(_lit_true(lit, assignment) for lit in c) for c in self.clauses)


def _lit_true(lit: int, assignment) -> bool:
    return assignment[abs(lit) - 1] == (lit > 0)


def parse_dimacs(text: str) -> CnfFormula:
    """Read a DIMACS CNF document; errors carry the offending line number."""
    n = None
    declared = None
    lits: list = []
    clauses = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"line {lineno}: malformed problem line")
            try:
                n, declared = int(parts[2]), int(parts[3])
            except ValueError:
                raise ValueError(f"line {lineno}: malformed problem line") from None
            continue
        if n is None:
            raise ValueError(f"line {lineno}: clause before the problem line")
        for tok in line.split():
            try:
                v = int(tok)
            except ValueError:
                raise ValueError(f"line {lineno}: bad literal {tok!r}") from None
            if v == 0:
                clauses.append(tuple(lits))
                lits = []
            else:
                lits.append(v)
    if lits:
        clauses.append(tuple(lits))
    if n is None:
        raise ValueError("missing problem line")
    if declared is not None and declared != len(clauses):
        raise ValueError(f"problem line declares {declared} clauses, found {len(clauses)}")
    return CnfFormula(n, tuple(clauses))


def to_dimacs(phi: CnfFormula) -> str:
    lines = [f"p cnf {phi.n} {len(phi.clauses)}"]
    lines += [" ".join(str(l) for l in c) + " 0" for c in phi.clauses]
    return "\n".join(lines) + "\n"


def sat_brute(phi: CnfFormula):
    """First satisfying assignment with False before True, x1 most significant."""
    for bits in itertools.product((False, True), repeat=phi.n):
        if phi.satisfied_by(bits):
            return bits
    return None


def _lit_name(lit: int) -> str:
    return f"x{lit}" if lit > 0 else f"~x{-lit}"


def sat_to_wrg(phi: CnfFormula) -> Wrg:
    """One-player recursive game that has a winning modular strategy iff phi is satisfiable.

    Modules: the driver A0, one per literal (x1, ~x1, x2, ...), one per clause.
    Everything belongs to player 1.
    """
    n, m = phi.n, len(phi.clauses)
    lits = [l for k in range(1, n + 1) for l in (k, -k)]
    index = {"A0": 0}
    for i, l in enumerate(lits):
        index[_lit_name(l)] = 1 + i
    for i in range(m):
        index[f"cl{i + 1}"] = 1 + 2 * n + i

    def module(name, nodes, boxes, transitions):
        places = list(nodes) + list(boxes)
        return RsmModule(name, nodes, (f"{name}.en",), (f"{name}.ex",), boxes, frozenset(places),
                         tuple(transitions))

    mods = []
    # driver: call each clause in turn, then jump back to the entry
    nodes = ["A0.en", "A0.ex"] + [f"A0.n{i}" for i in range(1, m)]
    boxes = {f"A0.b{i}": index[f"cl{i}"] for i in range(1, m + 1)}
    ts = []
    if m == 0:
        ts.append(Transition("A0.en", "A0.en", 0))
    for i in range(1, m + 1):
        src = "A0.en" if i == 1 else f"A0.n{i - 1}"
        ts.append(Transition(src, Call(f"A0.b{i}", f"cl{i}.en"), 0))
        back = f"A0.n{i}" if i < m else "A0.en"
        ts.append(Transition(Ret(f"A0.b{i}", f"cl{i}.ex"), back, 0))
    mods.append(module("A0", nodes, boxes, ts))
    for l in lits:
        name, neg = _lit_name(l), _lit_name(-l)
        box = f"{name}.box"
        ts = [
            Transition(f"{name}.en", f"{name}.ex", -1),                    # False
            Transition(f"{name}.en", Call(box, f"{neg}.en"), -1),          # True
            Transition(Ret(box, f"{neg}.ex"), f"{name}.mid", 1),
            Transition(f"{name}.mid", f"{name}.ex", 1),
        ]
        mods.append(module(name, [f"{name}.en", f"{name}.ex", f"{name}.mid"], {box: index[neg]}, ts))
    for i, c in enumerate(phi.clauses, 1):
        name = f"cl{i}"
        boxes = {f"{name}.b{j}": index[_lit_name(l)] for j, l in enumerate(c, 1)}
        ts = [Transition(f"{name}.en", Call(f"{name}.b{j}", f"{_lit_name(l)}.en"), 0)
              for j, l in enumerate(c, 1)]
        ts += [Transition(Ret(f"{name}.b{j}", f"{_lit_name(l)}.ex"), f"{name}.ex", 0)
               for j, l in enumerate(c, 1)]
        mods.append(module(name, [f"{name}.en", f"{name}.ex"], boxes, ts))
    return Wrg(tuple(mods), 0, "A0.en")


def _back_edge(wrg: Wrg) -> int:
    if not wrg.modules or wrg.modules[0].name != "A0" or wrg.initial_entry != "A0.en":
        raise NotAGeneratedInstance("no driver module A0")
    hits = [i for i, t in enumerate(wrg.modules[0].transitions)
            if t.target == "A0.en" and not (isinstance(t.source, str) and t.source != "A0.en")]
    if len(hits) != 1:
        raise NotAGeneratedInstance("expected exactly one edge back to the driver entry")
    return hits[0]


def strict_variant(wrg: Wrg) -> Wrg:
    """Same game with the driver's edge back to its entry reweighted to +1."""
    k = _back_edge(wrg)
    a0 = wrg.modules[0]
    if a0.transitions[k].weight != 0:
        raise NotAGeneratedInstance("driver back edge is not the zero-weight original")
    ts = list(a0.transitions)
    ts[k] = Transition(ts[k].source, ts[k].target, 1)
    a0 = RsmModule(a0.name, a0.nodes, a0.entries, a0.exits, dict(a0.boxes), a0.player1, tuple(ts))
    return Wrg((a0,) + wrg.modules[1:], wrg.initial_module, wrg.initial_entry)


def strategy_from_assignment(phi: CnfFormula, assignment, wrg: Wrg | None = None) -> ModularStrategy:
    """Each clause calls its first true literal; literal modules take True iff the literal holds."""
    assignment = tuple(assignment)
    if len(assignment) != phi.n:
        raise ValueError("assignment must cover every variable")
    if not phi.satisfied_by(assignment):
        raise AssignmentNotSatisfying("some clause has no true literal")
    wrg = wrg if wrg is not None else sat_to_wrg(phi)
    picks = []
    for mi, pos, idxs in wrg.player1_positions():
        name = wrg.modules[mi].name
        choice = idxs[0]
        if pos == f"{name}.en" and name.startswith("cl"):
            c = phi.clauses[int(name[2:]) - 1]
            j = next(j for j, l in enumerate(c) if _lit_true(l, assignment))
            choice = idxs[j]
        elif pos == f"{name}.en" and name.lstrip("~").startswith("x"):
            k = int(name.lstrip("~")[1:])
            lit = k if not name.startswith("~") else -k
            choice = idxs[1] if _lit_true(lit, assignment) else idxs[0]
        picks.append((mi, pos, choice))
    return ModularStrategy(tuple(picks))


# ---------------------------------------------------------------------------
# the two-phase example game

class doubling_strategy:
    """Each push phase runs as long as the whole play before it (plus one)."""

    def __init__(self, push_state: str):
        self.push_state = push_state
        self.target = 1

    def __call__(self, view: PlayView) -> Edge:
        if view.state == self.push_state:
            if view.height == 1:
                self.target = len(view.edges) + 1
            pushed = view.height - 1
            if pushed < self.target or view.top == BOTTOM:
                return next(e for e in view.options() if isinstance(e.command, Push))
            return next(e for e in view.options() if e.command == SKIP)
        return view.options()[0]
