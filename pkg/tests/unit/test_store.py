import json

import numpy as np
import pytest

from src.gate import LearningMode, UncertaintyGate
from src.store import decision_digest, dumps_canonical, load, save
from src.utils.errors import DimensionError, SnapshotFormatError, SnapshotVersionError


@pytest.fixture
def trained_state(supervised_state, make_detection):
    gate = UncertaintyGate(supervised_state.network, supervised_state.registry, supervised_state.criteria)
    rng = np.random.default_rng(1)
    for i in range(30):
        gate.process_frame([make_detection(rng.random(4), label=1 + i % 2)], LearningMode.SUPERVISED)
    gate.process_frame([make_detection([0.99, 0.01, 0.99, 0.01])], LearningMode.UNSUPERVISED)
    supervised_state.clock = gate.clock
    supervised_state.registry.assign_human_label(
        supervised_state.registry.flag_label_requests(1), "fire_truck"
    )
    return supervised_state


def _stream(make_detection, seed=9, n=40, dim=4):
    rng = np.random.default_rng(seed)
    return [make_detection(rng.random(dim), object_id=f"o{i % 3}") for i in range(n)]


class TestSnapshot:
    def test_save_load_save_identical(self, trained_state, tmp_path):
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        save(trained_state, first)
        save(load(first), second)
        assert first.read_bytes() == second.read_bytes()

    def test_save_returns_state_digest(self, trained_state, tmp_path):
        assert save(trained_state, tmp_path / "m.json") == trained_state.digest()

    def test_loaded_model_decides_identically(self, trained_state, tmp_path, make_detection):
        path = tmp_path / "m.json"
        save(trained_state, path)
        restored = load(path, expected_dimension=4)

        def run(state):
            gate = UncertaintyGate(state.network, state.registry, state.criteria)
            return [gate.process_frame([d], LearningMode.FROZEN)[0] for d in _stream(make_detection)]

        assert decision_digest(run(trained_state)) == decision_digest(run(restored))

    def test_registry_and_clock_survive(self, trained_state, tmp_path):
        path = tmp_path / "m.json"
        save(trained_state, path)
        restored = load(path)
        assert restored.clock == trained_state.clock
        assert restored.registry.to_dict() == trained_state.registry.to_dict()
        assert restored.network.label_count == trained_state.registry.class_count

    def test_wrong_dimension(self, trained_state, tmp_path):
        path = tmp_path / "m.json"
        save(trained_state, path)
        with pytest.raises(DimensionError):
            load(path, expected_dimension=32)

    def test_unsupported_version(self, trained_state, tmp_path):
        document = trained_state.to_document()
        document["format_version"] = 2
        path = tmp_path / "m.json"
        path.write_text(json.dumps(document))
        with pytest.raises(SnapshotVersionError):
            load(path)

    def test_not_json(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text("{ nope")
        with pytest.raises(SnapshotFormatError):
            load(path)

    def test_short_weight_row(self, trained_state, tmp_path):
        document = trained_state.to_document()
        document["nodes"][0]["weights"] = document["nodes"][0]["weights"][:-1]
        path = tmp_path / "m.json"
        path.write_text(json.dumps(document))
        with pytest.raises(DimensionError):
            load(path)

    def test_dangling_node_label(self, trained_state, tmp_path):
        document = trained_state.to_document()
        document["nodes"][0]["label"] = 99
        path = tmp_path / "m.json"
        path.write_text(json.dumps(document))
        with pytest.raises(SnapshotFormatError):
            load(path)


class TestCanonicalJson:
    def test_float_precision_round_trips(self):
        value = 0.1 + 0.2
        assert float(json.loads(dumps_canonical([value]))[0]) == value

    def test_keys_sorted(self):
        assert dumps_canonical({"b": 1, "a": 2}) == '{\n "a": 2,\n "b": 1\n}'

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            dumps_canonical([float("nan")])


class TestDecisionDigest:
    def test_order_sensitive(self, gate, make_detection):
        decisions = [gate.evaluate_detection(d, LearningMode.UNSUPERVISED) for d in _stream(make_detection, n=6, dim=2)]
        assert decision_digest(decisions) != decision_digest(list(reversed(decisions)))
