import copy

import pytest
import yaml

from src.utils import (
    Timer,
    apply_cli_overrides,
    load_config,
    output_paths,
    validate_label_map,
)
from src.utils.errors import ConfigError, MissingArtifactError
from tests.conftest import SETTINGS_PATH


def _write(tmp_path, document):
    path = tmp_path / "settings.yaml"
    path.write_text(yaml.safe_dump(document))
    return path


class TestLoadConfig:
    def test_default_settings_valid(self, settings):
        assert settings["criteria"]["psi2"] == 0.75
        assert settings["artmap"]["match_rule"] == "ratio"
        assert settings["simulation"]["seed"] == 42

    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("UML_SEED", "7")
        monkeypatch.setenv("UML_OUTPUT_DIR", "elsewhere")
        config = load_config(SETTINGS_PATH)
        assert config["simulation"]["seed"] == 7
        assert config["output"]["dir"] == "elsewhere"

    def test_bad_env_value(self, monkeypatch):
        monkeypatch.setenv("UML_SEED", "seven")
        with pytest.raises(ConfigError):
            load_config(SETTINGS_PATH)

    def test_log_level_env_override(self, monkeypatch):
        monkeypatch.setenv("UML_LOG_LEVEL", "warning")
        assert load_config(SETTINGS_PATH)["logging"]["level"] == "WARNING"

    def test_unknown_log_level(self, monkeypatch):
        monkeypatch.setenv("UML_LOG_LEVEL", "LOUD")
        with pytest.raises(ConfigError, match="level"):
            load_config(SETTINGS_PATH)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "absent.yaml")

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / "settings.yaml"
        path.write_text("criteria: [unclosed\n")
        with pytest.raises(ConfigError, match="Invalid YAML"):
            load_config(path)

    def test_out_of_range_threshold(self, settings, tmp_path):
        document = copy.deepcopy(settings)
        document["criteria"]["psi1"] = 1.5
        with pytest.raises(ConfigError, match="psi1"):
            load_config(_write(tmp_path, document))

    def test_missing_section(self, settings, tmp_path):
        document = copy.deepcopy(settings)
        del document["artmap"]
        with pytest.raises(ConfigError):
            load_config(_write(tmp_path, document))


class TestOverrides:
    def test_cli_overrides_copy(self, settings):
        updated = apply_cli_overrides(settings, seed=3, out_dir="runs/x")
        assert updated["simulation"]["seed"] == 3
        assert updated["output"]["dir"] == "runs/x"
        assert settings["simulation"]["seed"] == 42

    def test_output_paths(self, config, tmp_path):
        paths = output_paths(config)
        assert paths["out"] == tmp_path / "out"
        assert paths["data"] == tmp_path / "out" / "data"
        assert paths["models"] == tmp_path / "out" / "models"


class TestLabelMapSchema:
    def test_valid_maps(self):
        assert validate_label_map({"labels": [{"label": "fire_truck", "classes": "flagged"}]}) == []
        assert validate_label_map({"labels": [{"label": "bus", "classes": [4, 5]}], "skip": [6]}) == []

    def test_invalid_maps(self):
        assert validate_label_map({"labels": [{"label": "", "classes": [4]}]})
        assert validate_label_map({"labels": [{"label": "bus", "classes": []}]})
        assert validate_label_map({"extra": 1})


class TestErrorsAndTimers:
    def test_missing_artifact_message(self):
        error = MissingArtifactError("out/models/ground.json", "run train first")
        assert str(error) == "Missing prerequisite artifact: out/models/ground.json (run train first)"
        assert isinstance(error, FileNotFoundError)

    def test_timer_accumulates(self):
        timer = Timer()
        with timer.time("stage"):
            pass
        with timer.time("stage"):
            pass
        assert list(timer.get_summary()) == ["stage"]
        assert timer.total >= 0.0
