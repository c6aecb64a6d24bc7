import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from core import experiments
from core.errors import InputFileError, PreconditionError
from core.experiments import (
    CSV_HEADER,
    Cell,
    ExperimentConfig,
    PropertySpec,
    at_most_length_sampler,
    check_property,
    density_base,
    estimate_transition,
    expand_cells,
    interpolate_crossing,
    load_config,
    run_experiment,
    sample_tuple,
    splitmix64,
    trial_seed,
    tuple_size,
    wilson_interval,
    write_csv,
)
from core.markov import uniform_automaton

DATA = Path(__file__).resolve().parent.parent / "data"


def small_config(**overrides):
    data = {
        "name": "small",
        "automaton": "uniform:2",
        "n_values": [10, 14],
        "size": {"mode": "fixed", "values": [3, 5]},
        "properties": ["ctp", {"name": "lcp_below", "param": "const:3"}],
        "trials": 20,
        "master_seed": 11,
    }
    data.update(overrides)
    return ExperimentConfig.model_validate(data)


def outcome(report):
    return [(r.cell, r.property, r.property_param, r.successes, r.size) for r in report.rows]


# ===== SEEDING =====

def test_splitmix64_reference_value():
    assert splitmix64(0) == 0xE220A8397B1DCDAF


def test_trial_seeds_are_distinct_and_stable():
    seeds = {trial_seed(7, cell, trial) for cell in range(10) for trial in range(100)}
    assert len(seeds) == 1000
    assert trial_seed(7, 3, 4) == trial_seed(7, 3, 4)
    assert trial_seed(7, 3, 4) != trial_seed(8, 3, 4)


# ===== CONFIG =====

def test_config_accepts_shorthand_properties():
    config = small_config()
    assert [p.label for p in config.properties] == ["ctp", "lcp_below(const:3)"]


def test_config_validation():
    with pytest.raises(ValidationError):
        small_config(properties=[{"name": "cprime"}])
    with pytest.raises(ValidationError):
        small_config(properties=["hyperbolic"])
    with pytest.raises(ValidationError):
        small_config(size=None)
    with pytest.raises(ValidationError):
        small_config(size={"mode": "density", "values": [1.5]})
    with pytest.raises(ValidationError):
        small_config(unexpected=1)


def test_load_config_reports_paths(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"n_values": [10], "size": {"values": [0.1]}, "properties": [], "trials": 0}')
    with pytest.raises(InputFileError, match="trials"):
        load_config(path)
    with pytest.raises(InputFileError):
        load_config(tmp_path / "missing.json")


def test_shipped_config_loads():
    config = load_config(DATA / "ctp_transition.json")
    assert config.master_seed == 7
    assert [c.size_param for c in expand_cells(config)] == ["0.15", "0.25", "0.35"]


def test_expand_cells_grid_then_explicit():
    config = small_config(cells=[{"n": 30, "size": {"mode": "polynomial", "value": 1.5}}])
    cells = expand_cells(config)
    assert [(c.n, c.size_param) for c in cells] == [(10, "3"), (10, "5"), (14, "3"), (14, "5"), (30, "1.5")]
    assert [c.index for c in cells] == list(range(5))


def test_tuple_sizes(uniform2):
    alpha = density_base(uniform2)
    assert alpha == Fraction(1, 3)
    assert tuple_size(Cell(0, 25, "density", 0.15), alpha, 10**7) == 62
    assert tuple_size(Cell(0, 25, "fixed", 4), alpha, 10**7) == 4
    assert tuple_size(Cell(0, 16, "polynomial", 1.5), alpha, 10**7) == 64


# ===== SAMPLING =====

def test_at_most_length_law(uniform2):
    lengths, probs = experiments._length_law(2, 3, cyclic=False)
    assert lengths.tolist() == [1, 2, 3]
    assert probs.tolist() == pytest.approx([4 / 52, 12 / 52, 36 / 52])


def test_at_most_sampler_frequencies(uniform2, rng):
    draws = [len(at_most_length_sampler(uniform2, 3, rng)) for _ in range(5200)]
    counts = np.bincount(draws, minlength=4)[1:] / 5200
    assert counts == pytest.approx([4 / 52, 12 / 52, 36 / 52], abs=0.03)


def test_at_most_requires_uniform_source(quasigeodesic, rng):
    with pytest.raises(PreconditionError):
        at_most_length_sampler(quasigeodesic, 5, rng)


def test_sample_tuple_modes(uniform2, rng):
    exact = sample_tuple(uniform2, 12, 40, rng)
    assert set(exact.lengths.tolist()) == {12}
    at_most = sample_tuple(uniform2, 6, 200, rng, length_mode="at_most", word_mode="cyclically_reduced")
    assert at_most.lengths.max() <= 6
    assert len(set(at_most.lengths.tolist())) > 1
    for w in at_most:
        assert w.letters[0] != w.letters[-1] ^ 1


# ===== PROPERTIES =====

def test_rule_values():
    assert experiments._rule_value("log:1", 25, "bound") == 3
    assert experiments._rule_value("frac:0.5", 25, "bound") == 12
    assert experiments._rule_value("const:7", 25, "bound") == 7
    assert experiments._rule_value("7", 25, "bound") == 7
    with pytest.raises(PreconditionError):
        experiments._rule_value("sqrt:2", 25, "bound")


def test_check_property_on_three_words(three_words):
    a = uniform_automaton(3)
    assert check_property(PropertySpec(name="ctp"), three_words, 11, a)
    assert check_property(PropertySpec(name="lcp_below", param="2"), three_words, 11, a)
    assert not check_property(PropertySpec(name="malnormal_certificate"), three_words, 11, a)
    assert check_property(PropertySpec(name="min_above", param="0.5"), three_words, 11, a)
    assert not check_property(PropertySpec(name="collision", param="const:1"), three_words, 11, a)


# ===== RUNNER =====

def test_run_experiment_is_reproducible():
    first = run_experiment(small_config())
    second = run_experiment(small_config())
    assert outcome(first) == outcome(second)
    assert len(first.rows) == 8
    assert not first.errors


def csv_without_timing(report):
    return [line.rsplit(",", 1)[0] for line in write_csv(report).splitlines()]


@pytest.mark.parametrize("workers", [2, 8])
def test_results_do_not_depend_on_worker_count(workers):
    serial = run_experiment(small_config(), workers=1)
    parallel = run_experiment(small_config(), workers=workers)
    assert outcome(serial) == outcome(parallel)
    assert csv_without_timing(serial) == csv_without_timing(parallel)


def test_ctp_frequency_falls_with_density():
    trials = 60
    config = small_config(n_values=[12], size={"mode": "density", "values": [0.05, 0.15, 0.25, 0.35, 0.45]},
                          properties=["ctp"], trials=trials)
    frequencies = [row.frequency for row in run_experiment(config).rows]
    assert len(frequencies) == 5
    slack = 3 * np.sqrt(0.5 / trials)
    for lower, higher in zip(frequencies, frequencies[1:]):
        assert higher <= lower + slack
    assert frequencies[0] > frequencies[-1]


def test_rows_carry_wilson_intervals():
    report = run_experiment(small_config())
    for row in report.rows:
        assert row.ci_low <= row.frequency <= row.ci_high
        assert row.frequency == row.successes / row.trials
    assert report.frequency("ctp", 10, "3") == report.rows[0].frequency


def test_cprime_needs_cyclic_words():
    config = small_config(properties=["ctp", {"name": "cprime", "param": "1/6"}])
    report = run_experiment(config)
    assert {r.property for r in report.rows} == {"ctp"}
    assert {e.property for e in report.errors} == {"cprime(1/6)"}
    assert all(e.kind == "PreconditionError" for e in report.errors)


def test_size_cap_skips_cells():
    config = small_config(size={"mode": "density", "values": [0.9]}, size_cap=1000)
    report = run_experiment(config)
    assert not report.rows
    assert {e.kind for e in report.errors} == {"ResourceCapError"}


def test_at_most_rejects_other_sources():
    config = small_config(automaton="psl2:quasigeodesic", length_mode="at_most")
    report = run_experiment(config)
    assert not report.rows
    assert len(report.errors) == 4


def test_trial_timeout_is_reported(monkeypatch):
    def slow(*args, **kwargs):
        time.sleep(0.01)
        return True

    monkeypatch.setattr(experiments, "check_property", slow)
    report = run_experiment(small_config(timeout_ms=1, trials=2), workers=1)
    assert not report.rows
    assert {e.kind for e in report.errors} == {"TrialTimeoutError"}


def test_csv_output(tmp_path):
    report = run_experiment(small_config())
    path = tmp_path / "out.csv"
    text = write_csv(report, path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert lines[0] == ("automaton,n,size_mode,size_param,length_mode,word_mode,property,property_param,"
                        "trials,successes,frequency,ci_low,ci_high,master_seed,wall_ms")
    assert len(lines) == 1 + len(report.rows)
    assert text == path.read_text()
    assert lines[1].startswith("uniform:2,10,fixed,3,exact,reduced,ctp,,20,")


def test_wilson_interval():
    low, high = wilson_interval(5, 10)
    assert low == pytest.approx(0.2366, abs=1e-4)
    assert high == pytest.approx(0.7634, abs=1e-4)
    assert wilson_interval(0, 10)[0] == 0.0
    assert wilson_interval(10, 10)[1] == 1.0
    with pytest.raises(PreconditionError):
        wilson_interval(0, 0)


# ===== TRANSITIONS =====

def test_interpolate_crossing():
    estimate = interpolate_crossing([(0.1, 1.0), (0.2, 0.8), (0.3, 0.2), (0.4, 0.0)])
    assert estimate.crossing == pytest.approx(0.25)
    assert estimate.bracket == (0.2, 0.3)
    missing = interpolate_crossing([(0.1, 1.0), (0.2, 0.9)])
    assert not missing.found
    assert str(missing) == "no crossing"


def test_estimate_transition_requires_sorted_grid():
    with pytest.raises(PreconditionError):
        estimate_transition("ctp", "uniform:2", 10, [0.3, 0.1])


def test_estimate_transition_small_run():
    estimate = estimate_transition("ctp", "uniform:2", 12, [0.05, 0.6], trials=20, master_seed=3)
    assert [d for d, _ in estimate.points] == [0.05, 0.6]
    assert all(0.0 <= f <= 1.0 for _, f in estimate.points)
