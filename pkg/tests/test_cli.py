import json

import pytest

from pushmean import formats
from pushmean.cli import main
from pushmean.examples import fig2_wps, fig3_wpg
from pushmean.formats import FormatError
from pushmean.reductions import CnfFormula, Wfa, sat_to_wrg
from pushmean.rsm import ModularStrategy, Ret


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def fig2_file(tmp_path):
    p = tmp_path / "fig2.wps"
    p.write_text(formats.dumps(formats.wps_to_doc(fig2_wps())), encoding="utf-8")
    return str(p)


@pytest.fixture
def sat_files(tmp_path):
    sat = tmp_path / "sat.cnf"
    sat.write_text("p cnf 3 2\n1 2 3 0\n-1 -2 -3 0\n")
    unsat = tmp_path / "unsat.cnf"
    rows = [" ".join(str(v if (m >> (v - 1)) & 1 else -v) for v in (1, 2, 3)) + " 0" for m in range(8)]
    unsat.write_text("p cnf 3 8\n" + "\n".join(rows) + "\n")
    return sat, unsat


# -- formats ----------------------------------------------------------------------

def test_wps_roundtrip():
    wps = fig2_wps()
    doc = json.loads(formats.dumps(formats.wps_to_doc(wps)))
    assert formats.wps_from_doc(doc) == wps
    assert all(isinstance(e["weight"], str) for e in doc["edges"])


def test_big_weights_survive():
    wps = fig2_wps().map_weights(lambda w: w * 10 ** 40)
    doc = json.loads(formats.dumps(formats.wps_to_doc(wps)))
    assert formats.wps_from_doc(doc) == wps


def test_wrg_and_strategy_roundtrip():
    g = sat_to_wrg(CnfFormula(3, ((1, 2, 3),)))
    assert formats.wrg_from_doc(json.loads(formats.dumps(formats.wrg_to_doc(g)))) == g
    s = ModularStrategy(((0, "A0.en", 0), (0, Ret("b", "x"), 1)))
    assert formats.strategy_from_doc(formats.strategy_to_doc(s)) == s


def test_wfa_and_wpg_roundtrip():
    a = Wfa(("a",), ("p",), "p", (("p", "a", "p", -1),))
    assert formats.wfa_from_doc(formats.wfa_to_doc(a)) == a
    g = fig3_wpg()
    back = formats.wpg_from_doc(json.loads(formats.dumps(formats.wpg_to_doc(g))))
    assert back.wps == g.wps and back.player1 == g.player1


@pytest.mark.parametrize("text, needle", [
    ('{"version": "v1", "states": [', ":1:"),
    ('{"version": "v2"}', "version"),
    ('{"version": "v1", "states": ["q"], "alphabet": ["⊥"], "bottom": "⊥", "initial": "q",'
     ' "edges": [{"from": "q", "top": "⊥", "to": "q", "op": "jump", "weight": "0"}]}', "edges[0].op"),
    ('{"version": "v1", "states": ["q"], "alphabet": ["⊥"], "bottom": "⊥", "initial": "q",'
     ' "edges": [{"from": "q", "top": "⊥", "to": "q", "op": "skip", "weight": "1.5"}]}', "weight"),
    ('[1, 2]', "top level"),
])
def test_format_errors(text, needle):
    with pytest.raises(FormatError, match=needle.replace("[", r"\[").replace("]", r"\]")):
        formats.wps_from_doc(formats.loads(text))


def test_parse_error_has_line_and_column():
    with pytest.raises(FormatError, match=r"f.json:3:5"):
        formats.loads('{\n  "a": 1,\n    oops\n}', "f.json")


# -- decide / summary ---------------------------------------------------------------

@pytest.mark.parametrize("flags, answer", [
    (["--flavor", "liminf", "--rel", "ge", "--threshold", "0"], True),
    (["--flavor", "limsup", "--rel", "gt"], False),
    (["--stack-bounded", "--rel", "ge"], False),
])
def test_decide_fig2(capsys, fig2_file, flags, answer):
    code, out, _ = run(capsys, "decide", *flags, fig2_file)
    doc = json.loads(out)
    assert code == 0
    assert doc["answer"] is answer
    assert set(doc["stats"]) >= {"d", "ell", "D_bits"}
    assert "timings" not in doc["stats"]


def test_decide_witness_uses_original_weights(capsys, tmp_path):
    from pushmean.examples import push_pop
    p = tmp_path / "pp.wps"
    p.write_text(formats.dumps(formats.wps_to_doc(push_pop(-1, 3))))
    code, out, _ = run(capsys, "decide", "--rel", "gt", "--threshold", "1/2", str(p))
    doc = json.loads(out)
    assert doc["answer"] is True
    assert [e["weight"] for e in doc["witness"]["cycle"]["edges"]] == ["-1", "3"]


def test_decide_deterministic(capsys, fig2_file):
    first = run(capsys, "decide", fig2_file)[1]
    assert run(capsys, "decide", fig2_file)[1] == first
    timed = json.loads(run(capsys, "decide", "--stats", fig2_file)[1])
    assert "timings" in timed["stats"]


def test_decide_bad_input(capsys, tmp_path):
    p = tmp_path / "bad.wps"
    p.write_text('{"version": "v1",\n "states": }')
    code, _, err = run(capsys, "decide", str(p))
    assert code == 2 and ":2:" in err
    code, _, err = run(capsys, "decide", str(tmp_path / "missing.wps"))
    assert code == 2
    p.write_text(formats.dumps({"version": "v1", "states": ["q"], "alphabet": ["⊥"], "bottom": "⊥",
                                "initial": "nowhere", "edges": []}))
    code, _, err = run(capsys, "decide", str(p))
    assert code == 2 and "initial state" in err


def test_bad_threshold(capsys, fig2_file):
    assert run(capsys, "decide", "--threshold", "x/y", fig2_file)[0] == 2


def test_summary_dump(capsys, fig2_file, tmp_path):
    code, out, _ = run(capsys, "summary", fig2_file)
    assert code == 0
    rows = [line.split("\t") for line in out.splitlines() if not line.startswith("#")]
    assert rows == sorted(rows)
    assert ["q1", "γ", "q2", "-1"] in rows
    assert ["q1", "γ", "q1", "-inf"] in rows
    assert out.splitlines()[-1] == "# counts: -inf=3 finite=5 omega=0"
    loop = tmp_path / "loop.wps"
    run(capsys, "example", "skip-loop")
    loop.write_text(run(capsys, "example", "skip-loop")[1])
    assert "q\t⊥\tq\tomega" in run(capsys, "summary", str(loop))[1]
    empty = tmp_path / "empty.wps"
    empty.write_text(formats.dumps({"version": "v1", "states": ["a", "b"], "alphabet": ["⊥"], "bottom": "⊥",
                                    "initial": "a", "edges": []}))
    out = run(capsys, "summary", "--json", str(empty))[1]
    doc = json.loads(out)
    assert all(r[3] == "-inf" for r in doc["rows"]) and doc["counts"]["-inf"] == 4


# -- generate / modular ----------------------------------------------------------------

def test_generate_sat_and_search(capsys, tmp_path, sat_files):
    sat, _ = sat_files
    wrg_file = tmp_path / "sat.wrg"
    assert run(capsys, "generate", "sat3", str(sat), "-o", str(wrg_file))[0] == 0
    doc = json.loads(wrg_file.read_text())
    assert len(doc["modules"]) == 1 + 2 * 3 + 2
    strat = tmp_path / "s.json"
    code, out, _ = run(capsys, "modular", "search", str(wrg_file), "--out", str(strat))
    res = json.loads(out)
    assert code == 0 and res["answer"] is True
    assert json.loads(strat.read_text()) == res["strategy"]
    code, out, _ = run(capsys, "modular", "verify", str(wrg_file), "--strategy", str(strat))
    assert json.loads(out)["answer"] is True


def test_verify_losing_strategy_reports(capsys, tmp_path, sat_files):
    sat, _ = sat_files
    wrg_file = tmp_path / "sat.wrg"
    run(capsys, "generate", "sat3", str(sat), "-o", str(wrg_file))
    g = formats.wrg_from_doc(json.loads(wrg_file.read_text()))
    # every literal module answers False
    losing = ModularStrategy(tuple((mi, p, idxs[0]) for mi, p, idxs in g.player1_positions()))
    sfile = tmp_path / "lose.json"
    sfile.write_text(formats.dumps(formats.strategy_to_doc(losing)))
    out = run(capsys, "modular", "verify", str(wrg_file), "--strategy", str(sfile), "--witness")[1]
    doc = json.loads(out)
    assert doc["answer"] is False
    cyc = doc["counter_witness"]["lasso"]["cycle"]
    assert int(cyc["weight"]) < 0


@pytest.mark.slow
def test_search_unsat(capsys, tmp_path, sat_files):
    _, unsat = sat_files
    wrg_file = tmp_path / "unsat.wrg"
    run(capsys, "generate", "sat3", str(unsat), "-o", str(wrg_file))
    code, out, _ = run(capsys, "modular", "search", str(wrg_file))
    doc = json.loads(out)
    assert code == 0 and doc["answer"] is False
    assert doc["message"] == "no winning modular strategy"


def test_modular_errors(capsys, tmp_path, sat_files):
    sat, _ = sat_files
    wrg_file = tmp_path / "sat.wrg"
    run(capsys, "generate", "sat3", str(sat), "-o", str(wrg_file))
    bad = tmp_path / "bad.json"
    bad.write_text('{"version": "v1", "choices": [[0, "A0.en"]]}')
    assert run(capsys, "modular", "verify", str(wrg_file), "--strategy", str(bad))[0] == 2
    bad.write_text('{"version": "v1", "choices": [[0, "A0.en", 9]]}')
    assert run(capsys, "modular", "verify", str(wrg_file), "--strategy", str(bad))[0] == 2
    code, _, err = run(capsys, "modular", "search", str(wrg_file), "--cap", "5")
    assert code == 3 and "cap" in err


def test_generate_errors(capsys, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["generate", "sat4", "x.cnf"])
    assert exc.value.code == 2
    cnf = tmp_path / "x.cnf"
    cnf.write_text("p cnf 3 1\n1 2 0\n")
    code, _, err = run(capsys, "generate", "sat3", str(cnf))
    assert code == 2 and "three" in err


def test_generate_wfa(capsys, tmp_path):
    a = Wfa(("a", "b"), ("p",), "p", (("p", "a", "p", 1), ("p", "b", "p", 1)))
    src = tmp_path / "a.wfa"
    src.write_text(formats.dumps(formats.wfa_to_doc(a)))
    code, out, _ = run(capsys, "generate", "wfa", str(src))
    doc = json.loads(out)
    assert code == 0 and doc["format"] == "wpg"
    weights = {(e["from"], e["op"], e["top"]): e["weight"] for e in doc["edges"]}
    assert weights[("q$", "push", "⊥")] == "-10"
    assert weights[("q<$", "pop", "$")] == "11"
    assert weights[("run:p", "pop", "a")] == "2"
    wpg = tmp_path / "a.wpg"
    wpg.write_text(out)
    out = run(capsys, "simulate", str(wpg), "--p1", "word:a,b", "--p2", "counter", "--steps", "50")[1]
    trace = json.loads(out)
    assert trace["steps"] == 50


def test_generate_wfa_rejects_weights(capsys, tmp_path):
    src = tmp_path / "a.wfa"
    src.write_text('{"version": "v1", "alphabet": ["a"], "states": ["p"], "initial": "p",'
                   ' "transitions": [["p", "a", "p", "3"]]}')
    assert run(capsys, "generate", "wfa", str(src))[0] == 2


# -- simulate ----------------------------------------------------------------------------

@pytest.fixture
def fig3_file(tmp_path, capsys):
    p = tmp_path / "fig3.wpg"
    p.write_text(run(capsys, "example", "fig3")[1])
    return str(p)


def test_simulate_fig3(capsys, fig3_file):
    code, out, _ = run(capsys, "simulate", fig3_file, "--p1", "doubling:qI1", "--p2", "doubling:qII1",
                       "--steps", "200")
    doc = json.loads(out)
    assert code == 0 and len(doc["prefix_avgs"]) == 200
    assert doc["prefix_avgs"][:2] == ["-2", "-1"]
    assert doc["dead_end"] is None


def test_simulate_zero_steps(capsys, fig3_file):
    doc = json.loads(run(capsys, "simulate", fig3_file, "--steps", "0")[1])
    assert doc["prefix_avgs"] == [] and doc["steps"] == 0 and doc["running_max"] is None


def test_simulate_dead_end(capsys, tmp_path):
    p = tmp_path / "d.wpg"
    p.write_text(formats.dumps({"format": "wpg", "version": "v1", "states": ["a", "b"], "alphabet": ["⊥"],
                                "bottom": "⊥", "initial": "a", "player1": ["a"],
                                "edges": [{"from": "a", "top": "⊥", "to": "b", "op": "skip", "weight": "1"}]}))
    doc = json.loads(run(capsys, "simulate", str(p), "--steps", "5", "--edges")[1])
    assert doc["steps"] == 1 and doc["dead_end"] == {"stack": ["⊥"], "state": "b"}
    assert len(doc["edges"]) == 1


@pytest.mark.parametrize("script", ["bogus", "doubling", "word:a", "counter"])
def test_simulate_bad_scripts(capsys, fig3_file, script):
    assert run(capsys, "simulate", fig3_file, "--p1", script)[0] == 2


def test_simulate_random_is_seeded(capsys, fig3_file):
    a = run(capsys, "simulate", fig3_file, "--p1", "random:4", "--p2", "random:9", "--steps", "40")[1]
    b = run(capsys, "simulate", fig3_file, "--p1", "random:4", "--p2", "random:9", "--steps", "40")[1]
    assert a == b


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
