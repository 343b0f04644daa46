import json
import subprocess
import sys
from pathlib import Path

import pytest

from rtcheck import checker as C
from rtcheck.cli import main, read_subsets
from rtcheck.consistency import Session, check_rt
from rtcheck.demo import hand_requirements
from rtcheck.logic import classify
from rtcheck.parser import RequirementFileError, parse_requirements, parse_text
from rtcheck.report import build_report, replay
from rtcheck.semantics import run_trace

SAMPLES = Path(__file__).resolve().parent.parent / "samples"
EXAMPLE = SAMPLES / "example.req"
REPAIRED = SAMPLES / "example_repaired.req"
AUTOMATA = SAMPLES / "example_automata.req"


# -- parsing -----------------------------------------------------------------


@pytest.mark.parametrize("path", [EXAMPLE, AUTOMATA])
def test_parse_example_files(path):
    rs = parse_requirements(path)
    assert rs.names == ("R1", "R2")
    assert all(classify(r.automaton) == "safety" for r in rs)
    assert rs.props == ("request", "response", "repair")


def test_parsed_automata_match_demo_encoding():
    parsed = parse_requirements(AUTOMATA)
    ref = hand_requirements()
    trace = [{"repair"}, set(), set(), {"request"}]
    a = run_trace([r.automaton for r in parsed], trace)[-1]
    b = run_trace([r.automaton for r in ref], trace)[-1]
    assert a == b


def test_clock_collision_renamed():
    rs = parse_requirements(AUTOMATA)
    assert rs[0].automaton.clocks == ("c",)
    assert rs[1].automaton.clocks == ("R2.c",)


def test_repaired_file_has_three_requirements():
    rs = parse_requirements(REPAIRED)
    assert rs.names == ("R1", "R2", "R3")
    assert all(r.is_sup for r in rs)


def test_undeclared_proposition_is_named_with_position():
    with pytest.raises(RequirementFileError) as e:
        parse_text("props a;\nsup R = a -> [1,2] b;\n")
    assert "b" in str(e.value)
    assert e.value.line == 2


def test_duplicate_names_rejected():
    with pytest.raises(RequirementFileError, match="duplicate"):
        parse_text("props a, b;\nsup R = a -> b;\nsup R = b -> a;\n")


def test_syntax_error_position():
    with pytest.raises(RequirementFileError) as e:
        parse_text("props a;\nsup R = a -> ;\n")
    assert e.value.line == 2 and e.value.column is not None


def test_nondeterminism_reports_every_violation():
    text = """
    props a;
    automaton X {
      states s, t;
      initial s;
      accepting s, t;
      s -> s;
      s -> t;
      t -> t when a;
      t -> s when a;
    }
    """
    with pytest.raises(RequirementFileError) as e:
        parse_text(text)
    assert len(e.value.problems) == 2


def test_sup_block_defaults():
    rs = parse_text("props p, q;\nsup R { tse: p; ase: q; l: [1,2]; }\n")
    sup = rs[0].source
    assert sup.tc == sup.tee == sup.tse
    assert sup.ac == sup.aee == sup.ase
    assert (sup.tmin, sup.tmax, sup.amin, sup.amax) == (0, 0, 0, 0)
    assert (sup.lmin, sup.lmax) == (1, 2)


def test_completion_policies():
    text = "props a;\nautomaton X { states s; initial s; accepting s; s -> s when a; }\n"
    trap = parse_text(text, "to-trap")[0].automaton
    loop = parse_text(text, "to-self")[0].automaton
    assert len(trap.states) == 2 and len(loop.states) == 1


# -- CLI ---------------------------------------------------------------------------


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_rt_on_example(capsys):
    code, out, _ = run(capsys, EXAMPLE, "--algorithm", "rt", "--n", "2", "--format", "json")
    assert code == 1
    doc = json.loads(out)
    assert doc["verdict"] == "InconsistencyWitness"
    assert doc["confirmed_against_full_set"] is True
    assert doc["witness"]["inevitably_fails"] is True
    rs = parse_requirements(EXAMPLE)
    trace = [frozenset(p for p, v in s["letter"].items() if v) for s in doc["witness"]["steps"][1:]]
    s = Session(rs)
    g = s.graph(range(len(rs)))
    assert C.af(g, C.error_product(g))[g.run(trace)[-1]]


def test_cli_repaired_is_consistent(capsys):
    code, out, _ = run(capsys, REPAIRED, "--algorithm", "rt", "--n", "3", "--format", "json")
    assert code == 0
    assert json.loads(out)["verdict"] == "Consistent"


def test_cli_partial_on_example(capsys):
    code, out, _ = run(capsys, EXAMPLE, "--algorithm", "partial", "--alpha", "10", "--beta", "5", "--format", "json")
    assert code == 1
    doc = json.loads(out)
    assert doc["method"] == "partial" and doc["bounds"] == {"alpha": 10, "beta": 5}


def test_cli_partial_rt_and_none_found(capsys):
    code, out, _ = run(capsys, REPAIRED, "--algorithm", "partial-rt", "--format", "json")
    assert code == 0
    assert json.loads(out)["verdict"] == "NoneFoundWithinBounds"
    code, out, _ = run(capsys, AUTOMATA, "--algorithm", "partial-rt")
    assert code == 1
    assert "verdict: InconsistencyWitness" in out


def test_cli_text_report_shows_phases(capsys):
    code, out, _ = run(capsys, EXAMPLE)
    assert code == 1
    assert "R1:delay" in out and "R2:" in out
    assert "every continuation" in out


def test_cli_json_is_stable(capsys):
    outs = [run(capsys, EXAMPLE, "--format", "json", "--algorithm", a)[1]
            for a in ("rt", "rt", "partial", "partial")]
    assert outs[0] == outs[1] and outs[2] == outs[3]


def test_cli_timing_flag(capsys):
    _, out, _ = run(capsys, EXAMPLE, "--format", "json", "--timing")
    assert "seconds" in json.loads(out)["timing"]
    _, out, _ = run(capsys, EXAMPLE, "--format", "json")
    assert "timing" not in json.loads(out)


def test_cli_seed_order_file(tmp_path, capsys):
    subsets = tmp_path / "subsets.txt"
    subsets.write_text("# pairs to start from\nR1, R3\nR2 R3\n")
    assert read_subsets(subsets) == [["R1", "R3"], ["R2", "R3"]]
    code, out, _ = run(capsys, REPAIRED, "--seed-order", "file", "--subsets", subsets, "--format", "json")
    assert code == 0
    bad = tmp_path / "bad.txt"
    bad.write_text("R1 R9\n")
    code, _, err = run(capsys, REPAIRED, "--seed-order", "file", "--subsets", bad)
    assert code == 2 and "R9" in err


def test_cli_limits_exit_3(capsys):
    assert run(capsys, REPAIRED, "--n", "3", "--max-nodes", "20")[0] == 3
    assert run(capsys, REPAIRED, "--n", "3", "--timeout", "0")[0] == 3


def test_cli_usage_errors_exit_2(tmp_path, capsys):
    assert run(capsys, tmp_path / "missing.req")[0] == 2
    broken = tmp_path / "broken.req"
    broken.write_text("props a;\nsup R = a -> c;\n")
    code, _, err = run(capsys, broken)
    assert code == 2 and "line 2" in err
    with pytest.raises(SystemExit) as e:
        main([str(EXAMPLE), "--algorithm", "nope"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main([str(EXAMPLE), "--seed-order", "file"])
    assert e.value.code == 2


def test_cli_multiple_initial_states_exit_2(tmp_path, capsys):
    f = tmp_path / "multi.req"
    f.write_text("props a;\nautomaton X { states s, t; initial s, t; accepting s, t; s -> s; t -> t; }\n")
    assert run(capsys, f)[0] == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "rtcheck", str(EXAMPLE), "--format", "json"],
                         capture_output=True, text=True)
    assert res.returncode == 1
    assert json.loads(res.stdout)["verdict"] == "InconsistencyWitness"


# -- report round trip --------------------------------------------------------------


def test_report_replays_to_annotated_configurations():
    rs = parse_requirements(AUTOMATA)
    v = check_rt(rs, 2)
    doc = build_report(rs, v)
    steps = doc["witness"]["steps"]
    assert len(steps) == len(v.witness.trace) + 1
    for k, step in enumerate(steps):
        trace = v.witness.trace[:k]
        for i, ann in enumerate(step["requirements"]):
            cfg = run_trace(rs[i].automaton, trace)[-1]
            assert ann["state"] == cfg.state
            assert ann["clocks"] == dict(cfg.valuation)
    assert replay(rs, v.witness.trace) == [s["requirements"] for s in steps]
    # the last annotated configuration is the witness's last graph node
    last = v.witness.configs[-1]
    assert tuple(a["state"] for a in steps[-1]["requirements"]) == last.state
