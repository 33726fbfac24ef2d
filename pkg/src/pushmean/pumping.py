"""Pumpable pairs of deep paths."""

from __future__ import annotations

from dataclasses import dataclass

from .model import Path, Wps, path_measures


class PreconditionFailed(ValueError):
    pass


@dataclass(frozen=True)
class PumpablePair:
    """Two edge slices [start1:end1] and [start2:end2] of a path."""

    start1: int
    end1: int
    start2: int
    end2: int

    def segments(self, p: Path):
        return p.edges[self.start1:self.end1], p.edges[self.start2:self.end2]

    def weight(self, p: Path) -> int:
        a, b = self.segments(p)
        return sum(e.weight for e in a) + sum(e.weight for e in b)


def find_pumpable_pair(p: Path, wps: Wps | None = None) -> PumpablePair:
    """Locate a pumpable pair around the highest configuration of `p`.

    Climbing down from the peak on both sides, the last configuration at
    each height is recorded; two heights whose (state, top) pairs agree on
    both sides bound the two segments.
    """
    configs = p.configs
    hs = p.heights
    m = path_measures(p)
    if wps is not None:
        bound = (len(wps.states) * len(wps.alphabet)) ** 2
    else:
        bound = (len({c.state for c in configs}) * len({s for c in configs for s in c.stack})) ** 2
    d = m.ash
    if d < bound or d == 0:
        raise PreconditionFailed(f"additional stack height {d} is below {bound}")
    peak = hs.index(m.sh)
    base = m.sh - d
    # closest configuration at height base + j before / after the peak
    before = [None] * (d + 1)
    after = [None] * (d + 1)
    for i in range(peak, -1, -1):
        j = hs[i] - base
        if 0 <= j <= d and before[j] is None:
            before[j] = i
    for i in range(peak, len(hs)):
        j = hs[i] - base
        if 0 <= j <= d and after[j] is None:
            after[j] = i
    seen: dict = {}
    for j in range(d + 1):
        a, b = configs[before[j]], configs[after[j]]
        key = (a.state, a.top, b.state, b.top)
        if key in seen:
            j1 = seen[key]
            return PumpablePair(before[j1], before[j], after[j], after[j1])
        seen[key] = j
    raise PreconditionFailed("no repeated (state, top) pair along the climb")


def pump(p: Path, pair: PumpablePair, j: int) -> Path:
    """Repeat both segments of `pair` j times each."""
    e = p.edges
    seg1, seg2 = pair.segments(p)
    edges = e[:pair.start1] + seg1 * j + e[pair.end1:pair.start2] + seg2 * j + e[pair.end2:]
    return Path(p.start, edges)
