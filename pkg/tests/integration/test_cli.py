import copy
import json
import logging

import pandas as pd
import pytest
import yaml
from rich.logging import RichHandler
from typer.testing import CliRunner

from src.orchestrator.main import app, setup_logging
from src.store import load

pytestmark = pytest.mark.integration

runner = CliRunner()


@pytest.fixture(scope="module")
def workspace(settings, tmp_path_factory):
    """Config file pointing at a temporary output directory, with streams already generated."""
    root = tmp_path_factory.mktemp("cli")
    document = dict(settings)
    document["output"] = {**settings["output"], "dir": str(root / "out")}
    config_path = root / "settings.yaml"
    config_path.write_text(yaml.safe_dump(document))

    result = runner.invoke(app, ["gen-data", "-c", str(config_path)])
    assert result.exit_code == 0, result.output
    return {"config": str(config_path), "out": root / "out"}


class TestDataAndTraining:
    def test_gen_data_writes_manifest(self, workspace):
        manifest = json.loads((workspace["out"] / "data" / "manifest.json").read_text())
        assert manifest["splits"]["C"]["train"] == 29
        assert (workspace["out"] / "data" / "features.csv").exists()

    def test_train_then_eval(self, workspace):
        result = runner.invoke(app, ["train", "-c", workspace["config"]])
        assert result.exit_code == 0, result.output
        summary = json.loads((workspace["out"] / "train" / "ground.json").read_text())
        assert summary["classes"] == 3
        assert (workspace["out"] / "models" / "ground.json").exists()

        result = runner.invoke(app, ["eval", "-c", workspace["config"], "--stream", "aerial_A_test"])
        assert result.exit_code == 0, result.output
        scored = json.loads((workspace["out"] / "eval" / "ground_aerial_A_test.json").read_text())
        assert scored["samples"] == 194

    def test_curve(self, workspace):
        if not (workspace["out"] / "models" / "ground.json").exists():
            runner.invoke(app, ["train", "-c", workspace["config"]])
        result = runner.invoke(app, ["curve", "-c", workspace["config"]])
        assert result.exit_code == 0, result.output
        table = pd.read_csv(workspace["out"] / "curve" / "metrics.csv")
        assert list(table["training_fraction"]) == [0.0] + [float(p) for p in range(10, 101, 10)]
        assert {"acc_ground", "acc_aerial_A_test"} <= set(table.columns)

    def test_train_is_repeatable(self, workspace):
        runner.invoke(app, ["train", "-c", workspace["config"], "--stream", "aerial_O_train", "--model",
                            str(workspace["out"] / "models" / "o1.json")])
        runner.invoke(app, ["train", "-c", workspace["config"], "--stream", "aerial_O_train", "--model",
                            str(workspace["out"] / "models" / "o2.json")])
        first = (workspace["out"] / "models" / "o1.json").read_bytes()
        assert first == (workspace["out"] / "models" / "o2.json").read_bytes()

    def test_label_with_nothing_flagged(self, workspace):
        model = workspace["out"] / "models" / "o1.json"
        if not model.exists():
            runner.invoke(app, ["train", "-c", workspace["config"], "--stream", "aerial_O_train",
                                "--model", str(model)])
        result = runner.invoke(app, ["label", "-c", workspace["config"], "--model", str(model)])
        assert result.exit_code == 0, result.output
        assert "none" in [line.strip() for line in result.output.splitlines()]

    def test_inspect(self, workspace):
        model = workspace["out"] / "models" / "o1.json"
        if not model.exists():
            runner.invoke(app, ["train", "-c", workspace["config"], "--stream", "aerial_O_train",
                                "--model", str(model)])
        result = runner.invoke(app, ["inspect", "-c", workspace["config"], "--model", str(model)])
        assert result.exit_code == 0, result.output
        assert "other" in result.output


class TestFailures:
    def test_missing_model(self, workspace, tmp_path):
        result = runner.invoke(
            app, ["eval", "-c", workspace["config"], "--model", str(tmp_path / "absent.json")]
        )
        assert result.exit_code == 1
        assert "Missing prerequisite artifact" in result.output

    def test_experiment_before_prerequisite(self, settings, tmp_path):
        document = dict(settings)
        document["output"] = {**settings["output"], "dir": str(tmp_path / "empty")}
        config_path = tmp_path / "settings.yaml"
        config_path.write_text(yaml.safe_dump(document))
        result = runner.invoke(app, ["exp-oneshot", "-c", str(config_path)])
        assert result.exit_code == 1
        assert "exp-boundary" in result.output

    def test_bad_config(self, tmp_path):
        result = runner.invoke(app, ["gen-data", "-c", str(tmp_path / "nope.yaml")])
        assert result.exit_code == 1
        assert "Error loading config" in result.output

    def test_bad_label_map(self, workspace, tmp_path):
        label_map = tmp_path / "map.yaml"
        label_map.write_text("labels:\n  - label: ''\n    classes: flagged\n")
        result = runner.invoke(app, ["exp-oneshot", "-c", workspace["config"], "--map", str(label_map)])
        assert result.exit_code == 1
        assert "Invalid label map" in result.output

    def test_curve_rejects_unordered_checkpoints(self, workspace, settings, tmp_path):
        document = copy.deepcopy(settings)
        document["output"] = {**settings["output"], "dir": str(workspace["out"])}
        document["experiments"]["curve"]["checkpoints"] = [50, 20]
        config_path = tmp_path / "settings.yaml"
        config_path.write_text(yaml.safe_dump(document))
        result = runner.invoke(app, ["curve", "-c", str(config_path)])
        assert result.exit_code == 1
        assert "Invalid curve settings" in result.output


def _flagged_model(workspace, name):
    """Fresh model whose self-generated Set C classes are waiting for labels."""
    model = workspace["out"] / "models" / f"{name}.json"
    result = runner.invoke(app, ["train", "-c", workspace["config"], "--stream", "aerial_C_train",
                                 "--mode", "unsupervised", "--model", str(model)])
    assert result.exit_code == 0, result.output
    return model


def _eval_accuracy(workspace, model, stream):
    result = runner.invoke(app, ["eval", "-c", workspace["config"], "--model", str(model), "--stream", stream])
    assert result.exit_code == 0, result.output
    return json.loads((workspace["out"] / "eval" / f"{model.stem}_{stream}.json").read_text())["accuracy"]


class TestLabeling:
    def test_label_map_names_flagged_classes(self, workspace, tmp_path):
        model = _flagged_model(workspace, "c_mapped")
        assert load(model).registry.flag_label_requests(3)
        assert _eval_accuracy(workspace, model, "aerial_C_test") == 0.0

        label_map = tmp_path / "map.yaml"
        label_map.write_text("labels:\n  - label: fire_truck\n    classes: flagged\n")
        result = runner.invoke(app, ["label", "-c", workspace["config"], "--model", str(model),
                                     "--map", str(label_map)])
        assert result.exit_code == 0, result.output
        assert "0 class(es) still flagged" in result.output
        assert _eval_accuracy(workspace, model, "aerial_C_test") > 30.0

    def test_skipping_keeps_class_flagged(self, workspace):
        model = _flagged_model(workspace, "c_skipped")
        flagged = load(model).registry.flag_label_requests(3)
        result = runner.invoke(app, ["label", "-c", workspace["config"], "--model", str(model)],
                               input="\n" * len(flagged))
        assert result.exit_code == 0, result.output
        assert f"{len(flagged)} class(es) still flagged" in result.output
        state = load(model)
        assert state.registry.flag_label_requests(3) == flagged
        assert all(state.registry.get(i).human_label is None for i in flagged)


class TestLogging:
    def test_configured_level_reaches_console(self, tmp_path):
        root = logging.getLogger()
        previous = root.level
        console_handler = RichHandler()
        root.addHandler(console_handler)
        try:
            setup_logging(False, tmp_path, "WARNING")
            assert console_handler.level == logging.WARNING
            assert root.level == logging.INFO
            setup_logging(True, tmp_path, "WARNING")
            assert console_handler.level == logging.DEBUG
            assert root.level == logging.DEBUG
        finally:
            root.removeHandler(console_handler)
            for handler in list(root.handlers):
                if isinstance(handler, logging.FileHandler) and str(tmp_path) in handler.baseFilename:
                    root.removeHandler(handler)
                    handler.close()
            root.setLevel(previous)
