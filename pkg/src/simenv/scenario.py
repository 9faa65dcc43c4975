"""Scenario specs: object-set geometry, view model, objectness and dataset layout."""

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from src.utils.errors import ConfigError
from src.utils.validators import validate_scenario

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ViewModel:
    reference_altitude: float = 30.0
    sigma_ground: float = 0.004
    sigma_aerial: float = 0.010
    rotation_mix: float = 0.1

    def altitude_ratio(self, altitude: float) -> float:
        return altitude / self.reference_altitude

    def sigma(self, altitude: float) -> float:
        return self.sigma_ground + (self.sigma_aerial - self.sigma_ground) * self.altitude_ratio(altitude)


@dataclass(frozen=True)
class ObjectnessModel:
    mean_ground: float = 0.9
    mean_aerial: float = 0.65
    concentration: float = 60.0

    def mean(self, altitude: float, reference_altitude: float = 30.0) -> float:
        ratio = min(max(altitude / reference_altitude, 0.0), 1.0)
        return self.mean_ground + (self.mean_aerial - self.mean_ground) * ratio


@dataclass
class ObjectSetSpec:
    set_id: str
    label: str
    supervised_index: Optional[int]
    instances: int
    instance_jitter: float
    prototypes: List[np.ndarray]
    drift_direction: np.ndarray
    drift_magnitude: float
    counts: Dict[str, int] = field(default_factory=dict)
    aerial_train_fraction: float = 0.7

    def prototype_for(self, instance: int) -> np.ndarray:
        return self.prototypes[instance % len(self.prototypes)]


@dataclass
class IntersectionSpec:
    intersection_id: int
    center: Tuple[float, float]
    radius: float
    members: List[Tuple[str, int]]


@dataclass
class HeightsSpec:
    set_id: str
    instances: int = 4
    seed_offset: int = 1000
    train_altitudes: List[float] = field(default_factory=lambda: [10.0, 25.0])
    eval_altitudes: List[float] = field(default_factory=lambda: [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0])
    train_per_altitude: int = 120
    test_per_altitude: int = 60


@dataclass
class ScenarioSpec:
    feature_dim: int
    blocks: Dict[str, Tuple[int, int]]
    sets: Dict[str, ObjectSetSpec]
    view_model: ViewModel = field(default_factory=ViewModel)
    objectness: ObjectnessModel = field(default_factory=ObjectnessModel)
    ground_altitudes: List[float] = field(default_factory=lambda: [0.0])
    aerial_altitudes: List[float] = field(default_factory=lambda: [25.0, 30.0])
    intersections: List[IntersectionSpec] = field(default_factory=list)
    heights: Optional[HeightsSpec] = None
    digest: str = ""

    def supervised_classes(self) -> List[Tuple[int, str]]:
        """``(index, label)`` pairs of sets carrying supervision, ordered by index."""
        pairs = {(s.supervised_index, s.label) for s in self.sets.values() if s.supervised_index}
        return sorted(pairs)

    def intersection(self, intersection_id: int) -> IntersectionSpec:
        for inter in self.intersections:
            if inter.intersection_id == intersection_id:
                return inter
        raise ConfigError(f"Scenario has no intersection {intersection_id}")


def load_scenario(path: Union[str, Path]) -> ScenarioSpec:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Scenario file not found: {path}")
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Scenario {path} is not valid JSON: {exc}") from exc
    spec = parse_scenario(document)
    logger.debug(f"Loaded scenario {path} with sets {sorted(spec.sets)}")
    return spec


def parse_scenario(document: Dict[str, Any]) -> ScenarioSpec:
    errors = validate_scenario(document)
    if errors:
        raise ConfigError("Invalid scenario: " + "; ".join(errors))

    dim = int(document["feature_dim"])
    blocks = {name: (int(r[0]), int(r[1])) for name, r in document["blocks"].items()}
    sets = {
        set_id: _parse_set(set_id, raw, dim, blocks)
        for set_id, raw in sorted(document["sets"].items())
    }
    views = document.get("views", {})
    intersections = [
        IntersectionSpec(
            intersection_id=int(raw["id"]),
            center=(float(raw["center"][0]), float(raw["center"][1])),
            radius=float(raw.get("radius", 6.0)),
            members=[(str(m[0]), int(m[1])) for m in raw["members"]],
        )
        for raw in document.get("intersections", [])
    ]
    heights = None
    if document.get("heights"):
        raw_h = document["heights"]
        heights = HeightsSpec(
            set_id=raw_h["set"],
            **{k: v for k, v in raw_h.items() if k != "set"},
        )
    canonical = json.dumps(document, sort_keys=True, separators=(",", ":"))
    return ScenarioSpec(
        feature_dim=dim,
        blocks=blocks,
        sets=sets,
        view_model=ViewModel(**document.get("view_model", {})),
        objectness=ObjectnessModel(**document.get("objectness", {})),
        ground_altitudes=[float(a) for a in views.get("ground_altitudes", [0.0])],
        aerial_altitudes=[float(a) for a in views.get("aerial_altitudes", [25.0, 30.0])],
        intersections=intersections,
        heights=heights,
        digest=hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16],
    )


def _parse_set(
    set_id: str, raw: Dict[str, Any], dim: int, blocks: Dict[str, Tuple[int, int]]
) -> ObjectSetSpec:
    prototypes = [_expand_blocks(p, dim, blocks, f"{set_id} prototype") for p in raw["prototypes"]]
    drift = raw.get("drift", {})
    if "direction" in drift:
        direction = np.asarray(drift["direction"], dtype=float)
    else:
        direction = np.zeros(dim)
        for block in drift.get("blocks", []):
            start, stop = blocks[block]
            direction[start:stop] = 1.0
    norm = float(np.abs(direction).sum())
    if norm > 0:
        direction = direction / norm
    return ObjectSetSpec(
        set_id=set_id,
        label=raw["label"],
        supervised_index=raw.get("supervised_index"),
        instances=int(raw["instances"]),
        instance_jitter=float(raw.get("instance_jitter", 0.0)),
        prototypes=prototypes,
        drift_direction=direction,
        drift_magnitude=float(drift.get("magnitude", 0.0)),
        counts={k: int(v) for k, v in raw.get("counts", {}).items()},
        aerial_train_fraction=float(raw.get("aerial_train_fraction", 0.7)),
    )


def _expand_blocks(
    values: Dict[str, Any], dim: int, blocks: Dict[str, Tuple[int, int]], where: str
) -> np.ndarray:
    vector = np.zeros(dim)
    for block, value in values.items():
        start, stop = blocks[block]
        if isinstance(value, list):
            if len(value) != stop - start:
                raise ConfigError(
                    f"{where}: block '{block}' needs {stop - start} values, got {len(value)}"
                )
            vector[start:stop] = value
        else:
            vector[start:stop] = float(value)
    return vector
