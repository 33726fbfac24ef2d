"""JSON documents (schema version "v1") for systems, games, automata and strategies.

Weights are written as decimal strings so that arbitrarily large values
survive any JSON reader; integers are accepted on input as well.
"""

from __future__ import annotations

import json

from .decide import Lasso
from .games import Wpg
from .model import POP, SKIP, Configuration, Edge, Path, Pop, Push, Wps
from .reductions import Wfa
from .rsm import Call, ModularStrategy, Ret, RsmModule, Transition, Wrg

VERSION = "v1"


class FormatError(ValueError):
    """Malformed document; the message names the location."""


def loads(text: str, where: str = "<input>") -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{where}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise FormatError(f"{where}: top level must be an object")
    return doc


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _need(doc: dict, key: str, kind, where: str):
    if key not in doc:
        raise FormatError(f"{where}: missing field {key!r}")
    val = doc[key]
    if not isinstance(val, kind):
        raise FormatError(f"{where}.{key}: expected {getattr(kind, '__name__', kind)}")
    return val


def _check_header(doc: dict, kind: str, where: str) -> None:
    if doc.get("version") != VERSION:
        raise FormatError(f"{where}: unsupported or missing version (want {VERSION!r})")
    if doc.get("format", kind) != kind:
        raise FormatError(f"{where}: expected a {kind!r} document, got {doc.get('format')!r}")


def parse_weight(val, where: str) -> int:
    if isinstance(val, bool):
        raise FormatError(f"{where}: weight must be an integer")
    if isinstance(val, int):
        return val
    if isinstance(val, str):
        try:
            return int(val.strip())
        except ValueError:
            pass
    raise FormatError(f"{where}: weight {val!r} is not an integer")


# -- edges and systems --------------------------------------------------------

def edge_to_doc(e: Edge) -> dict:
    doc = {"from": e.from_state, "top": e.top, "to": e.to_state}
    if isinstance(e.command, Push):
        doc.update(op="push", symbol=e.command.symbol)
    else:
        doc["op"] = "pop" if isinstance(e.command, Pop) else "skip"
    doc["weight"] = str(e.weight)
    return doc


def edge_from_doc(d, where: str) -> Edge:
    if not isinstance(d, dict):
        raise FormatError(f"{where}: expected an object")
    op = _need(d, "op", str, where)
    if op == "push":
        cmd = Push(_need(d, "symbol", str, where))
    elif op == "pop":
        cmd = POP
    elif op == "skip":
        cmd = SKIP
    else:
        raise FormatError(f"{where}.op: unknown operation {op!r}")
    return Edge(_need(d, "from", str, where), _need(d, "top", str, where), _need(d, "to", str, where),
                cmd, parse_weight(d.get("weight"), f"{where}.weight"))


def wps_to_doc(wps: Wps) -> dict:
    return {
        "format": "wps", "version": VERSION,
        "states": list(wps.states), "alphabet": list(wps.alphabet),
        "bottom": wps.bottom, "initial": wps.initial_state,
        "edges": [edge_to_doc(e) for e in wps.edges],
    }


def wps_from_doc(doc: dict, where: str = "<input>", kind: str = "wps") -> Wps:
    _check_header(doc, kind, where)
    states = _need(doc, "states", list, where)
    alphabet = _need(doc, "alphabet", list, where)
    edges = [edge_from_doc(e, f"{where}: edges[{i}]") for i, e in enumerate(_need(doc, "edges", list, where))]
    return Wps(tuple(states), tuple(alphabet), _need(doc, "bottom", str, where),
               _need(doc, "initial", str, where), tuple(edges))


def wpg_to_doc(g: Wpg, extra: dict | None = None) -> dict:
    doc = wps_to_doc(g.wps)
    doc["format"] = "wpg"
    doc["player1"] = sorted(g.player1)
    if g.edge_tags:
        doc["tags"] = [list(t) for t in g.edge_tags]
    if extra:
        doc.update(extra)
    return doc


def wpg_from_doc(doc: dict, where: str = "<input>") -> Wpg:
    wps = wps_from_doc(doc, where, kind="wpg")
    p1 = _need(doc, "player1", list, where)
    tags = tuple(tuple(t) for t in doc.get("tags", ()))
    try:
        return Wpg(wps, frozenset(p1), edge_tags=tags)
    except ValueError as exc:
        raise FormatError(f"{where}: {exc}") from None


# -- automata -------------------------------------------------------------------

def wfa_to_doc(a: Wfa) -> dict:
    return {"format": "wfa", "version": VERSION, "alphabet": list(a.alphabet),
            "states": list(a.states), "initial": a.initial,
            "transitions": [[q, s, q2, str(w)] for q, s, q2, w in a.transitions]}


def wfa_from_doc(doc: dict, where: str = "<input>") -> Wfa:
    _check_header(doc, "wfa", where)
    ts = []
    for i, t in enumerate(_need(doc, "transitions", list, where)):
        if not isinstance(t, list) or len(t) != 4:
            raise FormatError(f"{where}: transitions[{i}]: expected [state, symbol, state, weight]")
        ts.append((t[0], t[1], t[2], parse_weight(t[3], f"{where}: transitions[{i}]")))
    try:
        return Wfa(tuple(_need(doc, "alphabet", list, where)), tuple(_need(doc, "states", list, where)),
                   _need(doc, "initial", str, where), tuple(ts))
    except ValueError as exc:
        raise FormatError(f"{where}: {exc}") from None


# -- recursive game graphs ----------------------------------------------------

def _pos_to_doc(p):
    if isinstance(p, Ret):
        return {"box": p.box, "exit": p.exit}
    if isinstance(p, Call):
        return {"box": p.box, "entry": p.entry}
    return p


def _pos_from_doc(d, where: str):
    if isinstance(d, str):
        return d
    if isinstance(d, dict) and set(d) == {"box", "exit"}:
        return Ret(d["box"], d["exit"])
    if isinstance(d, dict) and set(d) == {"box", "entry"}:
        return Call(d["box"], d["entry"])
    raise FormatError(f"{where}: expected a node name, {{box, exit}} or {{box, entry}}")


def wrg_to_doc(wrg: Wrg) -> dict:
    mods = []
    for m in wrg.modules:
        mods.append({
            "name": m.name, "nodes": list(m.nodes), "entries": list(m.entries), "exits": list(m.exits),
            "boxes": dict(m.boxes),
            "player1": sorted(m.player1),
            "transitions": [{"from": _pos_to_doc(t.source), "to": _pos_to_doc(t.target),
                             "weight": str(t.weight)} for t in m.transitions],
        })
    return {"format": "wrg", "version": VERSION,
            "initial": {"module": wrg.initial_module, "entry": wrg.initial_entry}, "modules": mods}


def wrg_from_doc(doc: dict, where: str = "<input>") -> Wrg:
    _check_header(doc, "wrg", where)
    mods = []
    for i, m in enumerate(_need(doc, "modules", list, where)):
        w = f"{where}: modules[{i}]"
        if not isinstance(m, dict):
            raise FormatError(f"{w}: expected an object")
        boxes = _need(m, "boxes", dict, w)
        if not all(isinstance(v, int) for v in boxes.values()):
            raise FormatError(f"{w}.boxes: labels must be module indices")
        ts = []
        for k, t in enumerate(_need(m, "transitions", list, w)):
            tw = f"{w}.transitions[{k}]"
            if not isinstance(t, dict):
                raise FormatError(f"{tw}: expected an object")
            ts.append(Transition(_pos_from_doc(t.get("from"), f"{tw}.from"), _pos_from_doc(t.get("to"), f"{tw}.to"),
                                 parse_weight(t.get("weight"), f"{tw}.weight")))
        mods.append(RsmModule(_need(m, "name", str, w), tuple(_need(m, "nodes", list, w)),
                              tuple(_need(m, "entries", list, w)), tuple(_need(m, "exits", list, w)),
                              dict(boxes), frozenset(m.get("player1", ())), tuple(ts)))
    init = _need(doc, "initial", dict, where)
    return Wrg(tuple(mods), _need(init, "module", int, f"{where}.initial"), _need(init, "entry", str, f"{where}.initial"))


def strategy_to_doc(sigma: ModularStrategy) -> dict:
    return {"format": "strategy", "version": VERSION,
            "choices": [[mi, _pos_to_doc(pos), ti] for mi, pos, ti in sigma.choices]}


def strategy_from_doc(doc: dict, where: str = "<input>") -> ModularStrategy:
    _check_header(doc, "strategy", where)
    out = []
    for i, c in enumerate(_need(doc, "choices", list, where)):
        w = f"{where}: choices[{i}]"
        if not isinstance(c, list) or len(c) != 3 or not isinstance(c[0], int) or not isinstance(c[2], int) \
                or isinstance(c[0], bool) or isinstance(c[2], bool):
            raise FormatError(f"{w}: expected [module index, position, transition index]")
        out.append((c[0], _pos_from_doc(c[1], w), c[2]))
    return ModularStrategy(tuple(out))


# -- results ------------------------------------------------------------------

def config_to_doc(c: Configuration) -> dict:
    return {"stack": list(c.stack), "state": c.state}


def path_to_doc(p: Path) -> dict:
    return {"start": config_to_doc(p.start), "edges": [edge_to_doc(e) for e in p.edges],
            "weight": str(p.weight)}


def lasso_to_doc(lasso: Lasso) -> dict:
    return {"prefix": path_to_doc(lasso.prefix), "cycle": path_to_doc(lasso.cycle)}
