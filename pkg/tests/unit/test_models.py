import numpy as np
import pytest
from pydantic import ValidationError

from src.models import Detection, ExperimentCall, ExperimentConfig, MetricsRecord, PhaseSpec


class TestDetection:
    def test_objectness_domain(self):
        with pytest.raises(ValueError):
            Detection(features=np.zeros(2), objectness=1.2)

    def test_without_label(self, make_detection):
        det = make_detection([0.1, 0.2], label=2, truth="van")
        stripped = det.without_label()
        assert stripped.supervised_label is None
        assert stripped.truth == "van"
        assert det.supervised_label == 2

    def test_dict_form(self, make_detection):
        det = make_detection([0.1, 0.2], position=(1.5, -2.0), label=1)
        restored = Detection.from_dict(det.to_dict())
        assert np.array_equal(restored.features, det.features)
        assert restored.position == (1.5, -2.0)
        assert restored.supervised_label == 1


class TestMetricsRecord:
    def test_row_columns(self):
        record = MetricsRecord(
            "transfer", "After Aerial A Training", 50.0, {"ground": 97.5, "aerial_A": 91.25}
        )
        row = record.to_row()
        assert list(row)[:5] == ["experiment", "phase", "training_fraction", "acc_aerial_A", "acc_ground"]
        assert row["acc_ground"] == 97.5

    @pytest.mark.parametrize("accuracy", [-0.1, 100.01])
    def test_accuracy_bounds(self, accuracy):
        with pytest.raises(ValueError):
            MetricsRecord("x", "p", 10.0, {"ground": accuracy})

    def test_fraction_bounds(self):
        with pytest.raises(ValueError):
            MetricsRecord("x", "p", 120.0)


class TestExperimentConfig:
    def test_defaults(self):
        config = ExperimentConfig(experiment="transfer", scenario="s.json")
        assert config.checkpoints == [100.0]
        assert config.seed == 42

    @pytest.mark.parametrize("checkpoints", [[], [50, 50], [60, 40], [0, 100], [50, 120]])
    def test_checkpoints_validated(self, checkpoints):
        with pytest.raises(ValidationError):
            ExperimentConfig(experiment="x", scenario="s.json", checkpoints=checkpoints)

    def test_phase_mode_literal(self):
        assert PhaseSpec(name="A", mode="self_supervised").mode == "self_supervised"
        with pytest.raises(ValidationError):
            PhaseSpec(name="A", mode="dreaming")

    def test_call_args_default(self):
        assert ExperimentCall(name="mission").args == {}
