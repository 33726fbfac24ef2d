"""Command-line interface.

Every command reads JSON documents (see formats.py) and writes a JSON
document or a plain table to stdout.  Exit status: 0 when a verdict was
computed, 2 on bad input or usage, 3 when a resource cap was hit.
"""

from __future__ import annotations

import argparse
import random
import sys
import time
from fractions import Fraction

from . import __version__, examples, formats
from .decide import Flavor, Objective, Relation, decide, epsilon_denominator, normalize_threshold, trim
from .formats import FormatError, dumps
from .games import StrategyMisbehaved, first_edge, simulate
from .modular import (CounterWitness, MultiEntryUnsupported, SearchSpaceTooLarge, search_modular,
                      verify_modular)
from .model import Path, validate_wps
from .oracle import TooLarge
from .reductions import (audit_gadget_weights, counter_strategy, doubling_strategy, parse_dimacs,
                         sat_to_wrg, strict_variant, wfa_to_wpg, word_strategy)
from .rsm import InvalidStrategy, validate_wrg

EXIT_OK, EXIT_INPUT, EXIT_CAP = 0, 2, 3


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None


def _load(path: str) -> dict:
    return formats.loads(_read(path), path)


def _load_wps(path: str):
    wps = formats.wps_from_doc(_load(path), path)
    report = validate_wps(wps, check_dead_ends=False)
    if not report.ok:
        raise InputError(f"{path}: " + "; ".join(report.violations))
    return wps


def _load_wrg(path: str):
    wrg = formats.wrg_from_doc(_load(path), path)
    report = validate_wrg(wrg, check_dead_ends=False)
    if not report.ok:
        raise InputError(f"{path}: " + "; ".join(report.violations))
    return wrg


def _emit(doc, out: str | None = None) -> None:
    text = dumps(doc) if not isinstance(doc, str) else doc
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _objective(args) -> Objective:
    try:
        r = Fraction(args.threshold)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"bad threshold {args.threshold!r}") from None
    return Objective(Flavor(args.flavor), Relation(args.rel), r, args.stack_bounded)


def _add_objective_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--flavor", choices=[f.value for f in Flavor], default="liminf")
    p.add_argument("--rel", choices=[r.value for r in Relation], default="ge",
                   help="compare the mean payoff with > (gt) or >= (ge)")
    p.add_argument("--threshold", default="0", help="rational threshold, e.g. 0, -1/3 or 2")
    p.add_argument("--stack-bounded", action="store_true", help="also require a bounded stack")


# -- decide / summary -----------------------------------------------------------

def cmd_decide(args) -> int:
    wps = _load_wps(args.file)
    obj = _objective(args)
    t0 = time.perf_counter()
    v = decide(wps, obj, with_witness=not args.no_witness)
    elapsed = time.perf_counter() - t0
    norm = trim(normalize_threshold(wps, obj.threshold))
    stats = {"d": v.stats["d"], "ell": v.stats["ell"],
             "D_bits": epsilon_denominator(norm).bit_length()}
    if "shortcut" in v.stats:
        stats["shortcut"] = v.stats["shortcut"]
    if args.stats:
        stats["timings"] = {"decide_seconds": round(elapsed, 6)}
    doc = {"format": "verdict", "version": formats.VERSION, "answer": v.answer,
           "objective": obj.describe(), "witness": None, "stats": stats}
    if v.witness is not None:
        # witnesses live in the threshold-shifted system; report original weights
        back = dict(zip(normalize_threshold(wps, obj.threshold).edges, wps.edges))
        lasso = v.witness
        doc["witness"] = {
            "prefix": formats.path_to_doc(_remap(lasso.prefix, back)),
            "cycle": formats.path_to_doc(_remap(lasso.cycle, back)),
        }
    _emit(doc)
    return EXIT_OK


def _remap(p, back: dict) -> Path:
    return Path(p.start, [back[e] for e in p.edges])


def cmd_summary(args) -> int:
    from .summary import ext_str, full_summary
    wps = _load_wps(args.file)
    s = full_summary(wps)
    rows = sorted(s.triples())
    counts = s.counts()
    if args.json:
        _emit({"format": "summary", "version": formats.VERSION,
               "rows": [[q1, g, q2, ext_str(s[(q1, g, q2)])] for q1, g, q2 in rows],
               "counts": counts})
        return EXIT_OK
    lines = ["# q1\ttop\tq2\tvalue"]
    lines += [f"{q1}\t{g}\t{q2}\t{ext_str(s[(q1, g, q2)])}" for q1, g, q2 in rows]
    lines.append(f"# counts: -inf={counts['-inf']} finite={counts['finite']} omega={counts['omega']}")
    _emit("\n".join(lines) + "\n")
    return EXIT_OK


# -- modular strategies ---------------------------------------------------------

def cmd_modular_verify(args) -> int:
    wrg = _load_wrg(args.file)
    sigma = formats.strategy_from_doc(_load(args.strategy), args.strategy)
    obj = _objective(args)
    res = verify_modular(wrg, sigma, obj)
    doc = {"format": "modular-verdict", "version": formats.VERSION, "answer": bool(res),
           "objective": obj.describe(), "notes": list(res.notes)}
    if isinstance(res, CounterWitness):
        doc["counter_witness"] = {"kind": res.kind}
        if args.witness:
            if res.kind == "dead-end":
                doc["counter_witness"]["path"] = formats.path_to_doc(res.dead_end_path)
            else:
                doc["counter_witness"]["lasso"] = formats.lasso_to_doc(res.game_lasso())
    _emit(doc)
    return EXIT_OK


def cmd_modular_search(args) -> int:
    wrg = _load_wrg(args.file)
    obj = _objective(args)
    stats: dict = {}
    t0 = time.perf_counter()
    sigma = search_modular(wrg, obj, cap=args.cap, jobs=args.jobs, stats=stats)
    elapsed = time.perf_counter() - t0
    doc = {"format": "modular-verdict", "version": formats.VERSION, "answer": sigma is not None,
           "objective": obj.describe()}
    if sigma is None:
        doc["message"] = "no winning modular strategy"
    else:
        doc["strategy"] = formats.strategy_to_doc(sigma)
        if args.out:
            _emit(formats.strategy_to_doc(sigma), args.out)
    doc["stats"] = dict(stats)
    if args.stats:
        doc["stats"]["timings"] = {"search_seconds": round(elapsed, 6)}
    _emit(doc)
    return EXIT_OK


# -- generators -------------------------------------------------------------------

def cmd_generate(args) -> int:
    if args.kind == "sat3":
        try:
            phi = parse_dimacs(_read(args.source))
        except ValueError as exc:
            raise InputError(f"{args.source}: {exc}") from None
        wrg = sat_to_wrg(phi)
        if args.strict:
            wrg = strict_variant(wrg)
        _emit(formats.wrg_to_doc(wrg), args.output)
    else:
        a = formats.wfa_from_doc(_load(args.source), args.source)
        g = wfa_to_wpg(a)
        bad = audit_gadget_weights(g)
        if bad:
            raise AssertionError(f"gadget audit failed: {bad[:3]}")
        _emit(formats.wpg_to_doc(g, {"source": formats.wfa_to_doc(a)}), args.output)
    return EXIT_OK


def cmd_example(args) -> int:
    if args.name == "fig2":
        _emit(formats.wps_to_doc(examples.fig2_wps()))
    elif args.name == "fig3":
        _emit(formats.wpg_to_doc(examples.fig3_wpg()))
    else:
        _emit(formats.wps_to_doc(examples.skip_loop(1)))
    return EXIT_OK


# -- simulation ---------------------------------------------------------------------

PLAYER_SCRIPTS = "first | random[:SEED] | doubling:STATE | word:A,B,... | counter"


def _player(spec: str, doc: dict, path: str):
    name, _, arg = spec.partition(":")
    if name == "first":
        return first_edge
    if name == "random":
        rng = random.Random(int(arg) if arg else 0)
        return lambda view: rng.choice(view.options())
    if name == "doubling":
        if not arg:
            raise InputError("doubling needs the push state, e.g. doubling:qI1")
        return doubling_strategy(arg)
    if name in ("word", "counter"):
        if "source" not in doc:
            raise InputError(f"{path}: {name} needs a game generated from an automaton")
        a = formats.wfa_from_doc(doc["source"], f"{path}: source")
        if name == "counter":
            return counter_strategy(a)
        word = [s for s in arg.split(",") if s]
        if not word:
            raise InputError("word needs at least one letter, e.g. word:a,b")
        unknown = [s for s in word if s not in a.alphabet]
        if unknown:
            raise InputError(f"letters not in the alphabet: {unknown}")
        return word_strategy(a, word)
    raise InputError(f"unknown player script {spec!r} (expected {PLAYER_SCRIPTS})")


def cmd_simulate(args) -> int:
    doc = _load(args.file)
    g = formats.wpg_from_doc(doc, args.file)
    if args.steps < 0:
        raise InputError("--steps must be non-negative")
    s1 = _player(args.p1, doc, args.file)
    s2 = _player(args.p2, doc, args.file)
    sim = simulate(g, s1, s2, args.steps)
    out = {"format": "trace", "version": formats.VERSION, "steps": len(sim.play.edges),
           "prefix_avgs": [str(a) for a in sim.prefix_avgs],
           "running_max": None if not sim.prefix_avgs else str(sim.running_max()),
           "running_min": None if not sim.prefix_avgs else str(sim.running_min()),
           "dead_end": None if sim.dead_end is None else formats.config_to_doc(sim.dead_end)}
    if args.edges:
        out["edges"] = [formats.edge_to_doc(e) for e in sim.play.edges]
    _emit(out)
    return EXIT_OK


# -- entry point --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pushmean", description="Mean-payoff questions on pushdown systems and games.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decide", help="decide a mean-payoff objective on a WPS")
    p.add_argument("file")
    _add_objective_flags(p)
    p.add_argument("--no-witness", action="store_true", help="skip witness extraction")
    p.add_argument("--stats", action="store_true", help="add timings to the output")
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("summary", help="dump the summary function of a WPS")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_summary)

    p = sub.add_parser("modular", help="modular strategies on a recursive game graph")
    msub = p.add_subparsers(dest="action", required=True)
    v = msub.add_parser("verify", help="check one memoryless modular strategy")
    v.add_argument("file")
    v.add_argument("--strategy", required=True)
    v.add_argument("--witness", action="store_true", help="include the losing play")
    _add_objective_flags(v)
    v.set_defaults(func=cmd_modular_verify)
    s = msub.add_parser("search", help="look for a winning memoryless modular strategy")
    s.add_argument("file")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--cap", type=int, default=None, help="maximum strategy count (default $PUSHMEAN_SEARCH_CAP or 2^24)")
    s.add_argument("--out", "-o", help="also write the strategy found to this file")
    s.add_argument("--stats", action="store_true", help="add timings to the output")
    _add_objective_flags(s)
    s.set_defaults(func=cmd_modular_search)

    p = sub.add_parser("generate", help="build a game from a 3-CNF formula or a weighted automaton")
    p.add_argument("kind", choices=["sat3", "wfa"])
    p.add_argument("source", help="DIMACS file for sat3, WFA document for wfa")
    p.add_argument("--strict", action="store_true", help="sat3: use the strict-threshold variant")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("simulate", help="play two scripted strategies against each other")
    p.add_argument("file")
    p.add_argument("--p1", default="first", help=PLAYER_SCRIPTS)
    p.add_argument("--p2", default="first", help=PLAYER_SCRIPTS)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--edges", action="store_true", help="include the edges taken")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("example", help="print a built-in model document")
    p.add_argument("name", choices=["fig2", "fig3", "skip-loop"])
    p.set_defaults(func=cmd_example)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, FormatError, InvalidStrategy, MultiEntryUnsupported,
            StrategyMisbehaved) as exc:
        print(f"pushmean: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SearchSpaceTooLarge, TooLarge) as exc:
        print(f"pushmean: resource cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
