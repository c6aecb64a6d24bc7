import json

import pytest

from core.experiments import ExperimentConfig, expand_cells
from core.preset_manager import PresetManager


@pytest.fixture
def folder(tmp_path):
    return tmp_path / "presets"


@pytest.mark.parametrize("key", sorted(PresetManager.PRESETS))
def test_builtin_presets_are_valid(key, folder):
    config = PresetManager.get_preset(key, folder)
    assert isinstance(config, ExperimentConfig)
    assert expand_cells(config)


def test_cprime_preset_samples_cyclic_words(folder):
    config = PresetManager.get_preset("cprime_transition", folder)
    assert config.word_mode == "cyclically_reduced"


def test_save_and_load_custom_preset(folder):
    config = ExperimentConfig(n_values=[12], size={"mode": "fixed", "values": [4]}, properties=["ctp"])
    key = PresetManager.save_custom_preset("My sweep", "four words of length 12", config, folder)
    assert key == "custom-my_sweep"
    assert PresetManager.get_preset(key, folder) == config
    assert "My sweep" in PresetManager.get_preset_names(folder)

    again = PresetManager.save_custom_preset("My sweep", "second copy", config, folder)
    assert again == "custom-my_sweep_1"
    assert set(PresetManager.load_custom_presets(folder)) == {key, again}


def test_delete_custom_preset(folder):
    config = ExperimentConfig(n_values=[12], size={"mode": "fixed", "values": [4]}, properties=["ctp"])
    key = PresetManager.save_custom_preset("gone", "", config, folder)
    assert PresetManager.delete_custom_preset(key, folder)
    assert not PresetManager.delete_custom_preset(key, folder)
    assert not PresetManager.delete_custom_preset("ctp_transition", folder)
    assert PresetManager.get_preset(key, folder) is None


def test_invalid_files_are_skipped(folder):
    folder.mkdir(parents=True)
    (folder / "broken.json").write_text("{")
    (folder / "incomplete.json").write_text(json.dumps({"name": "x"}))
    (folder / "bad_config.json").write_text(json.dumps({
        "name": "bad", "description": "", "config": {"properties": ["nonsense"]},
    }))
    assert PresetManager.load_custom_presets(folder) == {}
    assert set(PresetManager.get_all_presets(folder)) == set(PresetManager.PRESETS)


def test_unknown_preset(folder):
    assert PresetManager.get_preset("custom-nothing", folder) is None
    assert PresetManager.get_preset("nothing", folder) is None
