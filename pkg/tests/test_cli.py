import json
from pathlib import Path

import pytest

from cli.app import ExitStatus, main

DATA = Path(__file__).resolve().parent.parent / "data"
THREE_WORDS = str(DATA / "three_words.tuple")


@pytest.fixture
def run(capsys, tmp_path):
    """Run the command line with a private settings file; returns (status, stdout, stderr)"""
    settings = tmp_path / "settings.json"
    settings.write_text(json.dumps({"presets_folder": str(tmp_path / "presets")}))

    def invoke(*argv):
        status = main(["--settings", str(settings), *argv])
        out, err = capsys.readouterr()
        return status, out, err

    invoke.settings = settings
    return invoke


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


# ===== WORDS =====

def test_words_commands(run):
    assert run("words", "reduce", "aabBA") == (0, "a\n", "")
    assert run("words", "cyclic-reduce", "aBAbbA")[1] == "Ab aB\n"
    assert run("words", "count", "-r", "2", "-n", "3")[1] == "36\n"
    assert run("words", "count", "-r", "2", "-n", "4", "--cyclic")[1] == "84\n"
    assert run("words", "count", "-r", "2", "-n", "3", "--at-most")[1] == "52\n"


def test_json_output(run):
    status, out, _ = run("--json", "words", "reduce", "aabBA")
    assert status == 0
    assert json.loads(out)["reduced"] == "a"
    status, out, _ = run("words", "reduce", "abc", "--json")
    assert json.loads(out) == {"input": "abc", "reduced": "abc", "length": 3}


def test_usage_errors(run):
    assert run()[0] == ExitStatus.USAGE
    assert run("words", "count", "-r", "2")[0] == ExitStatus.USAGE
    assert run("words", "frobnicate")[0] == ExitStatus.USAGE


def test_invalid_word(run):
    status, _, err = run("words", "reduce", "ab1")
    assert status == ExitStatus.INVALID_INPUT
    assert "position 2" in err


# ===== CHECK =====

def test_check_ctp(run):
    status, out, _ = run("check", "--property", "ctp", "--input", THREE_WORDS)
    assert status == 0
    assert "Lcp=2 Min=8" in out


def test_check_cprime(run, tmp_path):
    commutator = write(tmp_path, "commutator.tuple", "abAB\n")
    status, out, _ = run("check", "--property", "cprime", "--lambda", "1/6", "--input", commutator)
    assert status == ExitStatus.PROPERTY_FAILS
    assert "piece" in out
    assert run("check", "--property", "cprime", "--lambda", "1/3", "--input", commutator)[0] == 0
    assert run("check", "--property", "cprime", "--input", commutator)[0] == ExitStatus.USAGE
    assert run("check", "--property", "cprime", "--lambda", "2", "--input", commutator)[0] == 3


def test_check_malnormality(run, tmp_path):
    square = write(tmp_path, "square.tuple", "aa\n")
    assert run("check", "--property", "malnormal-exact", "--input", square)[0] == ExitStatus.PROPERTY_FAILS
    single = write(tmp_path, "single.tuple", "abc\n")
    assert run("check", "--property", "malnormal-exact", "--input", single)[0] == 0
    status, out, _ = run("check", "--property", "malnormal-cert", "--input", single)
    assert status == 0
    assert "certified" in out
    status, out, _ = run("check", "--property", "malnormal-cert", "--input", THREE_WORDS)
    assert status == ExitStatus.PROPERTY_FAILS
    assert "inconclusive" in out


def test_check_abelianization(run, tmp_path):
    relators = write(tmp_path, "z2.tuple", "aa\nb\n")
    assert run("check", "--property", "abelianization", "--input", relators) == (0, "Z/2\n", "")


def test_check_reports_bad_files(run, tmp_path):
    bad = write(tmp_path, "bad.tuple", "ab\nx7\n")
    status, _, err = run("check", "--property", "ctp", "--input", bad)
    assert status == ExitStatus.INVALID_INPUT
    assert ":2:" in err
    assert run("check", "--property", "ctp", "--input", str(tmp_path / "nope"))[0] == 3


def test_resource_cap_exit_status(tmp_path):
    capped = write(tmp_path, "capped.json", json.dumps({"fiber_pair_cap": 1}))
    status = main(["--settings", capped, "check", "--property", "malnormal-exact", "--input", THREE_WORDS])
    assert status == ExitStatus.RESOURCE_CAP


# ===== AUTOMATA =====

def test_automaton_analyze_uniform(run):
    status, out, _ = run("automaton", "analyze", "uniform:2")
    assert status == 0
    assert "alpha_[2]: 0.333333333" in out
    assert "ergodic: true" in out
    assert "threshold ctp: 1/8 (alpha_[2]-density), 1/4 (alpha-density)" in out


def test_automaton_analyze_geodesic(run, tmp_path):
    odt = tmp_path / "geodesic.odt"
    status, out, _ = run("automaton", "analyze", str(DATA / "psl2_geodesic.json"), "--odt", str(odt))
    assert status == 0
    assert "ergodic: false" in out
    assert "period: 2" in out
    assert odt.exists()


def test_automaton_analyze_json(run):
    status, out, _ = run("automaton", "analyze", "uniform:2", "--lambda", "1/4", "--json")
    data = json.loads(out)
    assert data["alpha2"] == pytest.approx(1 / 3)
    assert data["thresholds"]["general"]["cprime(1/4)"] == "1/8"
    assert data["prefix_heavy"]["cycles"]["max_cycle_length"] == 4


def test_automaton_validate(run, tmp_path):
    assert run("automaton", "validate", "psl2:quasigeodesic")[1].startswith("valid: psl2:quasigeodesic")
    bad = write(tmp_path, "bad.json", json.dumps({
        "rank": 1, "states": ["s"], "initial": {"s": "1/2"},
        "transitions": [{"from": "s", "letter": "a", "to": "s", "prob": "1"}],
    }))
    status, out, _ = run("automaton", "validate", bad)
    assert status == ExitStatus.INVALID_INPUT
    assert out.startswith("invalid: $.initial")


# ===== SAMPLING AND SWEEPS =====

def test_sample_is_seeded(run):
    first = run("sample", "--n", "6", "--count", "3", "--seed", "5")
    second = run("--seed", "5", "sample", "--n", "6", "--count", "3")
    assert first[0] == 0
    assert first[1] == second[1]
    assert len(first[1].split()) == 3


def test_sample_reports_fresh_seed(run):
    status, out, err = run("sample", "--n", "4", "--cyclic")
    assert status == 0
    assert err.startswith("seed: ")
    word = out.strip()
    assert len(word) == 4
    assert word[0].swapcase() != word[-1]


def test_sample_at_most_needs_uniform_source(run):
    status, _, err = run("sample", "--automaton", "psl2:geodesic", "--n", "4", "--at-most", "--seed", "1")
    assert status == ExitStatus.INVALID_INPUT
    assert "uniform" in err


def test_sweep_from_config(run, tmp_path):
    config = write(tmp_path, "sweep.json", json.dumps({
        "n_values": [10], "size": {"mode": "fixed", "values": [3]},
        "properties": ["ctp"], "trials": 10, "master_seed": 2,
    }))
    out_csv = tmp_path / "out.csv"
    status, out, _ = run("sweep", "--config", config, "--out", str(out_csv))
    assert status == 0
    assert "1 rows, 0 errors" in out
    lines = out_csv.read_text().splitlines()
    assert lines[0].startswith("automaton,n,size_mode,size_param")
    assert lines[1].split(",")[13] == "2"

    status, _, _ = run("sweep", "--config", config, "--out", str(out_csv), "--seed", "9")
    assert out_csv.read_text().splitlines()[1].split(",")[13] == "9"


def test_sweep_unknown_preset(run, tmp_path):
    assert run("sweep", "--preset", "nothing", "--out", str(tmp_path / "x.csv"))[0] == 3


def test_transition(run):
    status, out, _ = run("transition", "--property", "ctp", "--n", "10", "--grid", "0.05,0.6",
                         "--trials", "5", "--seed", "1")
    assert status == 0
    assert out.startswith("d=0.05 frequency=")
    assert run("transition", "--property", "ctp", "--n", "10", "--grid", "a:b")[0] == ExitStatus.USAGE


# ===== GRAPHS =====

def test_stallings_and_member(run, tmp_path):
    status, out, _ = run("stallings", "--input", THREE_WORDS)
    assert status == 0
    assert out.strip().endswith("rank=3")

    source = write(tmp_path, "ab.tuple", "ab\n")
    graph = tmp_path / "ab.json"
    dot = tmp_path / "ab.dot"
    assert run("stallings", "--input", source, "--out", str(graph), "--dot", str(dot))[0] == 0
    assert dot.read_text().startswith("digraph")
    assert run("member", "--graph", str(graph), "abab", "BA")[0] == 0
    status, out, _ = run("member", "--graph", str(graph), "abab", "ba")
    assert status == ExitStatus.PROPERTY_FAILS
    assert "ba: not a member" in out


# ===== PRESETS AND SETTINGS =====

def test_presets(run):
    status, out, _ = run("presets", "list")
    assert status == 0
    assert "ctp_transition: CTP transition" in out
    status, out, _ = run("presets", "show", "ctp_transition", "--json")
    assert json.loads(out)["automaton"] == "uniform:2"
    assert run("presets", "show", "custom-nothing")[0] == 3


def test_config_commands(run, tmp_path):
    target = tmp_path / "fresh.json"
    assert main(["--settings", str(target), "config", "init"]) == 0
    assert json.loads(target.read_text())["size_cap"] == 10**7
    status, out, _ = run("config", "show")
    assert status == 0
    assert str(run.settings) in out
