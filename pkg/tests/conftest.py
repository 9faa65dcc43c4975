import copy
from pathlib import Path

import numpy as np
import pytest

from src.artmap import ArtmapNetwork, ArtmapParams
from src.gate import ClassRegistry, UncertaintyCriteria, UncertaintyGate
from src.models import Detection
from src.store import KnowledgeState
from src.utils import load_config

REPO_ROOT = Path(__file__).resolve().parent.parent
SETTINGS_PATH = REPO_ROOT / "src" / "config" / "settings.yaml"
SCENARIO_PATH = REPO_ROOT / "src" / "config" / "scenario.json"


@pytest.fixture(scope="session")
def settings():
    """Validated default settings with the scenario path made absolute."""
    cfg = load_config(SETTINGS_PATH)
    cfg["simulation"]["scenario"] = str(SCENARIO_PATH)
    return cfg


@pytest.fixture
def config(settings, tmp_path):
    """Per-test copy of the settings writing into a temporary output directory."""
    cfg = copy.deepcopy(settings)
    cfg["output"]["dir"] = str(tmp_path / "out")
    return cfg


@pytest.fixture
def network():
    """Two raw dimensions (M = 4) with default parameters."""
    return ArtmapNetwork(2, ArtmapParams())


@pytest.fixture
def registry():
    return ClassRegistry()


@pytest.fixture
def criteria():
    return UncertaintyCriteria()


@pytest.fixture
def gate(network, registry, criteria):
    return UncertaintyGate(network, registry, criteria)


@pytest.fixture
def supervised_state():
    """Four raw dimensions, two supervised classes, no nodes yet."""
    registry = ClassRegistry()
    registry.register_supervised(1, "sedan")
    registry.register_supervised(2, "van")
    return KnowledgeState(ArtmapNetwork(4, ArtmapParams()), registry, UncertaintyCriteria())


@pytest.fixture
def make_detection():
    """Factory for detections with sensible defaults."""

    def _make(features, objectness=0.9, object_id="obj", label=None, position=(0.0, 0.0), truth=None):
        return Detection(
            features=np.asarray(features, dtype=float),
            objectness=objectness,
            object_id=object_id,
            position=position,
            supervised_label=label,
            truth=truth,
        )

    return _make
