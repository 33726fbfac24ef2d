"""Memoryless modular strategies: certificate check and exhaustive search."""

from __future__ import annotations

import os
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import prod

from .decide import (Analysis, Flavor, Lasso, Objective, Relation, _gr_walk, decide_trimmed,
                     trim)
from .model import Path, Wps
from .reachability import reachable_heads
from .rsm import (InvalidStrategy, ModularStrategy, Ret, RsmModule, Wrg, apply_strategy,
                  to_wps)

DEFAULT_CAP = 2 ** 24


class MultiEntryUnsupported(ValueError):
    pass


class SearchSpaceTooLarge(RuntimeError):
    pass


@dataclass
class Winning:
    strategy: ModularStrategy
    notes: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return True


@dataclass
class CounterWitness:
    """Why a strategy loses: a reachable dead end, or a bad cycle for player 2.

    `system` is the negated translation of the strategy's subgame; the
    lasso (computed on first access) lives there, so its cycle weight is
    positive (or, for strict objectives, non-negative) and the same path
    in the subgame has the opposite sign.  A loss that only shows in the
    limit has no such lasso, and `lasso` is then None.
    """

    kind: str                      # "dead-end", "cycle" or "unbounded"
    system: Wps
    head: tuple | None = None
    scaled: bool = False
    notes: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return False

    @cached_property
    def lasso(self) -> Lasso | None:
        if self.kind == "dead-end":
            return None
        if self.kind == "unbounded":
            an = Analysis(self.system)
            return an.lasso(_push_cycle(an), target=None)
        if not self.scaled:
            an = Analysis(self.system)
            return an.lasso(an.good_cycle())
        # only a limit-average loss: a zero cycle is the best lasso, if any
        an = Analysis(self.system)
        cyc = an.good_cycle()
        if cyc is not None:
            return an.lasso(cyc)
        zero = an.zero_cycle()
        return None if zero is None else an.lasso(zero, target=0)

    @cached_property
    def dead_end_path(self) -> Path | None:
        if self.kind != "dead-end":
            return None
        return Analysis(self.system).prefix_to(self.head)

    def game_lasso(self) -> Lasso | None:
        """The lasso with the subgame's own (un-negated) weights."""
        lasso = self.lasso
        if lasso is None:
            return None
        def flip(p: Path) -> Path:
            return Path(p.start, [e.with_weight(-e.weight) for e in p.edges])
        return Lasso(flip(lasso.prefix), flip(lasso.cycle))


def _push_cycle(an: Analysis):
    """A reachable Gr cycle through a push edge, or None."""
    adj = an._reachable_edges()
    for u in sorted(adj, key=str):
        for v, w, t in adj[u]:
            if t[0] == "push":
                back = [] if v == u else _gr_walk(adj, v, u)
                if back is not None:
                    return [(u, v, w, t)] + back
    return None


def _check_single_entry(wrg: Wrg) -> None:
    for m in wrg.modules:
        if len(m.entries) != 1:
            raise MultiEntryUnsupported(f"module {m.name} has {len(m.entries)} entries")


def _shift(wrg: Wrg, r: Fraction) -> Wrg:
    a, b = r.numerator, r.denominator
    if a == 0:
        return wrg
    mods = [RsmModule(m.name, m.nodes, m.entries, m.exits, dict(m.boxes), m.player1,
                      tuple(type(t)(t.source, t.target, t.weight * b - a) for t in m.transitions))
            for m in wrg.modules]
    return Wrg(tuple(mods), wrg.initial_module, wrg.initial_entry)


def _check_total(wrg: Wrg, sigma: ModularStrategy) -> None:
    chosen = sigma.as_map()
    for mi, pos, _idxs in wrg.player1_positions():
        if pos not in chosen.get(mi, {}):
            raise InvalidStrategy(f"no choice at player-1 position {pos} of module {wrg.modules[mi].name}")


def verify_modular(wrg: Wrg, sigma: ModularStrategy, obj: Objective):
    """Winning or CounterWitness for the memoryless modular strategy sigma."""
    _check_single_entry(wrg)
    _check_total(wrg, sigma)
    return _verify(wrg, sigma, obj)[0]


def _verify(wrg: Wrg, sigma: ModularStrategy, obj: Objective):
    """(outcome, reachable heads of the translated subgame)."""
    sub = apply_strategy(_shift(wrg, obj.threshold), sigma)
    w, _cmap = to_wps(sub)
    heads = reachable_heads(w)
    notes = []
    if obj.strict or obj.stack_bounded:
        notes.append("completeness of memoryless modular strategies assumed for this objective")
    for q, g in sorted(heads, key=str):
        if not w.edges_at(q, g):
            return CounterWitness("dead-end", w, head=(q, g), notes=notes + ["dead ends count as losing"]), heads
    neg = trim(w, heads).map_weights(lambda x: -x)
    if obj.stack_bounded and _push_cycle(Analysis(neg)) is not None:
        return CounterWitness("unbounded", neg, notes=notes), heads
    # player 2 looks for LimSup > 0 (against >=) or LimSup >= 0 (against >) on -W
    dual = Objective(Flavor.LIMSUP, Relation.GE if obj.strict else Relation.GT, 0, obj.stack_bounded)
    v = decide_trimmed(neg, dual, with_witness=False)
    if not v.answer:
        return Winning(sigma, notes), heads
    scaled = not dual.strict and "shortcut" not in v.stats and not obj.stack_bounded
    return CounterWitness("cycle", neg, scaled=scaled, notes=notes), heads


class _Stop(Exception):
    """The deterministic play has settled: a repeating cycle or a dead end."""

    def __init__(self, weight: int | None, unbounded: bool = False):
        self.weight = weight            # cycle weight; None for a dead end
        self.unbounded = unbounded


class _ChoiceFree:
    """Successor tables for subgames where player 2 never has a choice."""

    def __init__(self, wrg: Wrg):
        self.wrg = wrg
        self.ok = True
        self.fixed = []
        for m in wrg.modules:
            nxt = {}
            for pos, idxs in m.outgoing().items():
                if m.owner(pos) == 2:
                    if len(idxs) > 1:
                        self.ok = False
                    nxt[pos] = m.transitions[idxs[0]]
            self.fixed.append(nxt)
        self.labels = wrg.box_labels()

    def successors(self, sigma: ModularStrategy) -> list:
        succ = [dict(f) for f in self.fixed]
        mods = self.wrg.modules
        for mi, pos, ti in sigma.choices:
            succ[mi][pos] = mods[mi].transitions[ti]
        return succ


def _deterministic_outcome(wrg: Wrg, sigma: ModularStrategy, plan: _ChoiceFree | None = None):
    """Fate of the single play of a choice-free subgame, or None if player 2 has choices.

    Returns (cycle weight or None for a dead end, grows the stack?, positions visited).
    Module runs that return are cached; a frame revisiting a position, or a
    module re-entered through the same entry while still active, repeats forever.
    """
    plan = plan or _ChoiceFree(wrg)
    if not plan.ok:
        return None
    succ = plan.successors(sigma)
    labels = plan.labels
    visited: set = set()
    done: dict = {}                 # (module, entry) -> (exit, weight of the run)
    active: dict = {}               # (module, entry) -> total weight when the run began
    total = 0

    def run(mi: int, entry: str, outermost: bool):
        nonlocal total
        key = (mi, entry)
        start = active[key] = total
        seen: dict = {}
        pos = entry
        exits = wrg.modules[mi].exits
        while True:
            visited.add(pos)
            if pos in seen:
                raise _Stop(total - seen[pos])
            seen[pos] = total
            t = succ[mi].get(pos)
            if t is None:
                if pos in exits and not outermost:
                    del active[key]
                    return pos, total - start
                raise _Stop(None)
            total += t.weight
            tgt = t.target
            if isinstance(tgt, str):
                pos = tgt
                continue
            callee = (labels[tgt.box], tgt.entry)
            if callee in active:
                raise _Stop(total - active[callee], unbounded=True)
            if callee not in done:
                done[callee] = run(callee[0], callee[1], False)
            else:
                total += done[callee][1]
            pos = Ret(tgt.box, done[callee][0])

    try:
        run(wrg.initial_module, wrg.initial_entry, True)
    except _Stop as stop:
        return stop.weight, stop.unbounded, visited
    raise AssertionError("the outermost run cannot return")


def strategy_space_size(wrg: Wrg) -> int:
    return prod(len(idxs) for _mi, _pos, idxs in wrg.player1_positions())


def _module_order(wrg: Wrg) -> list:
    """Modules in breadth-first order of invocation from the initial one, then the rest."""
    order = [wrg.initial_module]
    seen = {wrg.initial_module}
    dq = deque(order)
    while dq:
        m = wrg.modules[dq.popleft()]
        for t in m.transitions:
            tgt = t.target
            if hasattr(tgt, "box"):
                j = m.boxes[tgt.box]
                if j not in seen:
                    seen.add(j)
                    order.append(j)
                    dq.append(j)
    order += [i for i in range(len(wrg.modules)) if i not in seen]
    return order


def search_positions(wrg: Wrg) -> list:
    """Player-1 positions in enumeration order, as (module index, position, transition indices)."""
    by_module: dict = {}
    for mi, pos, idxs in wrg.player1_positions():
        by_module.setdefault(mi, []).append((mi, pos, idxs))
    return [p for mi in _module_order(wrg) for p in by_module.get(mi, [])]


def _reached_positions(wrg: Wrg, heads: set) -> set:
    labels = wrg.box_labels()
    out = set()
    for q, g in heads:
        out.add(q)
        if g in labels and q in wrg.modules[labels[g]].exits:
            out.add(Ret(g, q))
    return out


def _next_candidate(digits: list, radix: list, relevant: list) -> list | None:
    """Smallest later digit vector that differs on some relevant place."""
    k = len(digits)
    later_relevant = [False] * (k + 1)
    for j in range(k - 1, -1, -1):
        later_relevant[j] = later_relevant[j + 1] or relevant[j]
    for j in range(k - 1, -1, -1):
        if digits[j] + 1 >= radix[j]:
            continue
        if relevant[j]:
            return digits[:j] + [digits[j] + 1] + [0] * (k - j - 1)
        if not later_relevant[j + 1]:
            continue
        tail = [0] * (k - j - 1)
        if not any(digits[i] != 0 for i in range(j + 1, k) if relevant[i]):
            last = max(i for i in range(j + 1, k) if relevant[i])
            tail[last - j - 1] = 1
        return digits[:j] + [digits[j] + 1] + tail
    return None


class _Enumerator:
    def __init__(self, wrg: Wrg):
        self.positions = search_positions(wrg)
        self.varying = [i for i, p in enumerate(self.positions) if len(p[2]) > 1]
        self.radix = [len(self.positions[i][2]) for i in self.varying]

    def strategy(self, digits: list) -> ModularStrategy:
        pick = [0] * len(self.positions)
        for i, d in zip(self.varying, digits):
            pick[i] = d
        return ModularStrategy(tuple((mi, pos, idxs[d]) for (mi, pos, idxs), d in zip(self.positions, pick)))

    def relevant(self, reached: set) -> list:
        return [self.positions[i][1] in reached for i in self.varying]


def _fast_verdict(shifted: Wrg, sigma: ModularStrategy, obj: Objective, plan=None):
    """(won, visited positions) for choice-free subgames, else None."""
    out = _deterministic_outcome(shifted, sigma, plan)
    if out is None:
        return None
    weight, unbounded, visited = out
    won = weight is not None and (weight > 0 if obj.strict else weight >= 0)
    if obj.stack_bounded and unbounded:
        won = False
    return won, visited


def _verify_job(args):
    wrg, sigma, obj = args
    return bool(_verify(wrg, sigma, obj)[0])


def _confirmed(wrg: Wrg, sigma: ModularStrategy, obj: Objective) -> ModularStrategy:
    if not _verify(wrg, sigma, obj)[0]:
        raise AssertionError("fast evaluation and full verification disagree")
    return sigma


def search_modular(wrg: Wrg, obj: Objective, cap: int | None = None, jobs: int = 1,
                   stats: dict | None = None) -> ModularStrategy | None:
    """First winning memoryless modular strategy in enumeration order, or None.

    Positions are ordered by module (breadth-first from the initial module)
    and first appearance; strategies run through them like an odometer.  A
    candidate's verdict only depends on its choices at positions it can
    reach, so after a loss every strategy that agrees there is skipped.
    Candidates that leave player 2 no choice are judged by following their
    single play; a winner found that way is re-checked by verify_modular.
    """
    _check_single_entry(wrg)
    if cap is None:
        cap = int(os.environ.get("PUSHMEAN_SEARCH_CAP", DEFAULT_CAP))
    size = strategy_space_size(wrg)
    if size > cap:
        raise SearchSpaceTooLarge(f"{size} strategies exceed the cap {cap}")
    en = _Enumerator(wrg)
    shifted = _shift(wrg, obj.threshold)
    plan = _ChoiceFree(shifted)
    stats = stats if stats is not None else {}
    stats.update(space=size, candidates=0, full_checks=0)
    digits = [0] * len(en.varying)
    pending = []        # candidates awaiting a full check, in order
    pool = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        while digits is not None or pending:
            if digits is not None:
                sigma = en.strategy(digits)
                stats["candidates"] += 1
                fast = _fast_verdict(shifted, sigma, obj, plan)
                if fast is not None and not pending:
                    won, reached = fast
                    if won:
                        return _confirmed(wrg, sigma, obj)
                    digits = _next_candidate(digits, en.radix, en.relevant(reached))
                    continue
                if fast is not None:
                    reached = fast[1]
                else:
                    sub, _ = to_wps(apply_strategy(shifted, sigma))
                    reached = _reached_positions(wrg, reachable_heads(sub))
                pending.append((sigma, fast))
                digits = _next_candidate(digits, en.radix, en.relevant(reached))
                if digits is not None and len(pending) < max(1, 4 * jobs):
                    continue
            # settle the pending batch in enumeration order
            batch, pending = pending, []
            full = [s for s, f in batch if f is None]
            stats["full_checks"] += len(full)
            if pool is not None:
                verdicts = iter(pool.map(_verify_job, [(wrg, s, obj) for s in full]))
            else:
                verdicts = (_verify_job((wrg, s, obj)) for s in full)
            for sigma, fast in batch:
                won = next(verdicts) if fast is None else fast[0]
                if won:
                    return sigma if fast is None else _confirmed(wrg, sigma, obj)
        return None
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
