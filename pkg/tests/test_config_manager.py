import json

from core.config_manager import ConfigManager, Settings


def test_missing_file_gives_defaults(settings_file):
    config = ConfigManager(str(settings_file))
    assert config.settings == Settings()
    assert not settings_file.exists()


def test_save_and_reload(settings_file):
    config = ConfigManager(str(settings_file))
    assert config.set("size_cap", 5000)
    assert config.save_config()
    assert json.loads(settings_file.read_text())["size_cap"] == 5000
    assert ConfigManager(str(settings_file)).get("size_cap") == 5000


def test_partial_file_keeps_other_defaults(settings_file):
    settings_file.write_text(json.dumps({"cycle_cap": 12, "retired_option": True}))
    config = ConfigManager(str(settings_file))
    assert config.get("cycle_cap") == 12
    assert config.get("size_cap") == Settings().size_cap


def test_invalid_values_are_rejected(settings_file):
    config = ConfigManager(str(settings_file))
    assert not config.set("size_cap", 0)
    assert not config.set("no_such_key", 1)
    assert config.get("size_cap") == Settings().size_cap


def test_corrupt_file_falls_back_to_defaults(settings_file):
    settings_file.write_text("{broken")
    assert ConfigManager(str(settings_file)).settings == Settings()
    settings_file.write_text(json.dumps({"spectral_tolerance": -1}))
    assert ConfigManager(str(settings_file)).settings == Settings()


def test_environment_variable_selects_file(tmp_path, monkeypatch):
    path = tmp_path / "from_env.json"
    path.write_text(json.dumps({"default_workers": 3}))
    monkeypatch.setenv(ConfigManager.ENV_VAR, str(path))
    config = ConfigManager()
    assert config.config_path == path
    assert config.get("default_workers") == 3


def test_reload_picks_up_external_edits(settings_file):
    config = ConfigManager(str(settings_file))
    settings_file.write_text(json.dumps({"naive_rotation_cap": 77}))
    config.reload_config()
    assert config.get("naive_rotation_cap") == 77


def test_presets_folder(settings_file, tmp_path):
    config = ConfigManager(str(settings_file))
    assert config.get_presets_folder().parts[-2:] == ("presets", "custom")
    config.set("presets_folder", str(tmp_path / "mine"))
    assert config.get_presets_folder() == tmp_path / "mine"
