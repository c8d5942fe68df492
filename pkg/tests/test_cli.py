import json
from pathlib import Path

import pytest
import yaml
from click.testing import CliRunner

from chanfind import synthetic
from chanfind.bench import load_cases
from chanfind.cli import EXIT_ABSTAIN, EXIT_ERROR, EXIT_OK, main

from oracles import count_records, subtree_counts

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def run():
    runner = CliRunner()

    def invoke(*args, input=None):
        return runner.invoke(main, list(args), input=input, catch_exceptions=False)

    return invoke


# -- exit status ------------------------------------------------------------------

def test_found_channel_exits_zero(run):
    res = run("tree", "-q", "set the accelerating cavities CAV003 field phase")
    assert res.exit_code == EXIT_OK
    assert res.output.startswith("RF-CAV:CAV003:PHASE.SP  ")


def test_abstention_exits_two(run):
    res = run("direct", "-q", "warp core plasma")
    assert res.exit_code == EXIT_ABSTAIN
    assert "abstained" in res.output


def test_library_error_exits_one(run):
    res = run("inspect", "NOPE")
    assert res.exit_code == EXIT_ERROR
    assert "UnknownPrefix" in res.output


def test_json_output(run):
    res = run("--json", "tree", "-q", "read the current transformers CT002 bunch charge", "--trace")
    doc = json.loads(res.output)
    assert doc["channels"] == ["DIAG-CT:CT002:CHARGE.RB"]
    assert set(doc["descriptions"]) == {"DIAG-CT:CT002:CHARGE.RB"}
    assert "selector calls: 5" in doc["trace"]


def test_onto_needs_exactly_one_query_form(run):
    assert run("onto").exit_code != EXIT_OK
    res = run("onto", "--graph", "builtin:onto-a", "-q", "list the setting PVs for all magnets")
    assert res.exit_code == EXIT_OK and len(res.output.splitlines()) == 10


def test_bad_config_key_is_an_error(run, tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("colour: blue\n")
    assert run("--config", str(cfg), "inspect").exit_code == EXIT_ERROR


# -- inspect ------------------------------------------------------------------------

def test_root_inspection_lists_four_systems(run):
    lines = run("inspect").output.splitlines()
    assert lines[0] == "(root): 1050 channels"
    assert len(lines) == 5


def test_inspect_counts_match_enumeration(run):
    tree = synthetic.tutorial_config()["tree"]
    counts = subtree_counts(tree)
    assert sum(v for k, v in counts.items() if len(k) == 1) == count_records(tree) == 1050
    doc = json.loads(run("--json", "inspect", "--depth", "3").output)
    assert doc["channels"] == 1050
    stack = []
    for node in doc["nodes"]:
        del stack[node["depth"]:]
        stack.append(node["value"])
        assert node["count"] == counts[tuple(stack)], stack
    for prefix in (("RF",), ("RF", "CAV"), ("MAG", "PSQ", "PSQ004")):
        first = run("inspect", *prefix).output.splitlines()[0]
        assert first == f"{'/'.join(prefix)}: {counts[prefix]} channels"


def test_leaf_prefix_shows_record_detail(run):
    out = run("inspect", "DIAG", "CT", "CT002", "CHARGE", "RB").output
    assert out.splitlines()[0] == "address: DIAG-CT:CT002:CHARGE.RB"
    assert "role: Readback" in out


# -- repl ----------------------------------------------------------------------------

def test_repl_transcript(run):
    script = (":paradigm tree\n:trace on\nread the current transformers CT002 bunch charge\n"
              ":paradigm psychic\n:quit\nnever reached\n")
    res = run("repl", input=script)
    assert res.exit_code == EXIT_OK
    assert res.output == (FIXTURES / "repl_transcript.txt").read_text()


def test_repl_help_and_unknown_command(run):
    out = run("repl", input=":help\n:frobnicate\n").output
    assert ":paradigm NAME" in out and "unknown command :frobnicate" in out


# -- gen and bench --------------------------------------------------------------------

def test_generated_database_round_trips(run, tmp_path):
    out = tmp_path / "tut.yaml"
    assert run("gen", "db", "tutorial", "--out", str(out)).exit_code == EXIT_OK
    res = run("inspect", "--db", str(out))
    assert res.output.splitlines()[0] == "(root): 1050 channels"


def test_generated_cases_feed_bench(run, tmp_path):
    cases, report = tmp_path / "cases.yaml", tmp_path / "report.json"
    run("gen", "cases", "--source", "builtin:fel", "--paradigm", "direct", "--n", "12", "--seed", "3",
        "--out", str(cases))
    suite = load_cases(cases.read_text())
    assert len(suite.cases) == 12 and suite.synthetic
    res = run("bench", "--cases", str(cases), "--paradigm", "direct", "--report", str(report))
    assert res.exit_code == EXIT_OK
    assert res.output.startswith("synthetic-verbatim-12: 12/12 correct (100.0%), paradigm direct")
    doc = json.loads(report.read_text())
    assert doc["cases"] == 12 and doc["accuracy"] == 1.0
    again = tmp_path / "again.json"
    run("bench", "--cases", str(cases), "--paradigm", "direct", "--report", str(again), "--parallelism", "3")
    assert again.read_bytes() == report.read_bytes()


def test_gen_cases_rejects_bad_count(run):
    assert run("gen", "cases", "--source", "builtin:fel", "--n", "0").exit_code == EXIT_ERROR


def test_gen_names_fills_missing_names(run, tmp_path):
    src = tmp_path / "raw.yaml"
    run("gen", "db", "fel-raw", "--out", str(src))
    before = yaml.safe_load(src.read_text())
    out = tmp_path / "named.yaml"
    assert run("gen", "names", "--db", str(src), "--out", str(out)).exit_code == EXIT_OK
    names = yaml.safe_load(out.read_text())["names"]
    assert len(names) > len(before.get("names") or {})
    assert all(isinstance(v, str) and v for v in names.values())
