import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.simenv.scenario import ObjectnessModel, ObjectSetSpec, ScenarioSpec, ViewModel

logger = logging.getLogger(__name__)

STAGING_ORIGIN = (-1000.0, -1000.0)
STAGING_SPACING = 10.0


@dataclass(frozen=True)
class ViewCondition:
    altitude: float
    azimuth: float = 0.0
    noise_seed: int = 0

    def __post_init__(self) -> None:
        if self.altitude < 0:
            raise ValueError(f"altitude must be >= 0, got {self.altitude}")

    def to_dict(self) -> Dict[str, float]:
        return {"altitude": self.altitude, "azimuth": self.azimuth, "noise_seed": self.noise_seed}


@dataclass
class SimObject:
    object_id: str
    set_id: str
    label: str
    supervised_index: Optional[int]
    position: Tuple[float, float]
    base_features: np.ndarray
    intersection: Optional[int] = None


@dataclass
class World:
    scenario: ScenarioSpec
    seed: int
    objects: List[SimObject] = field(default_factory=list)

    def objects_of(self, set_id: str) -> List[SimObject]:
        return [o for o in self.objects if o.set_id == set_id]

    def at_intersection(self, intersection_id: int) -> List[SimObject]:
        return [o for o in self.objects if o.intersection == intersection_id]

    def get(self, object_id: str) -> SimObject:
        for obj in self.objects:
            if obj.object_id == object_id:
                return obj
        raise KeyError(object_id)

    def ordinal(self, obj: SimObject) -> int:
        return self.objects.index(obj)


def build_instances(
    set_spec: ObjectSetSpec,
    count: int,
    rng: np.random.Generator,
    prefix: str = "",
) -> List[SimObject]:
    """Jittered copies of a set's prototypes (instance ``i`` uses prototype ``i % P``)."""
    objects = []
    for i in range(count):
        proto = set_spec.prototype_for(i)
        jitter = rng.uniform(-set_spec.instance_jitter, set_spec.instance_jitter, proto.shape)
        objects.append(
            SimObject(
                object_id=f"{prefix}{set_spec.set_id}{i}",
                set_id=set_spec.set_id,
                label=set_spec.label,
                supervised_index=set_spec.supervised_index,
                position=STAGING_ORIGIN,
                base_features=np.clip(proto + jitter, 0.0, 1.0),
            )
        )
    return objects


def build_world(spec: ScenarioSpec, seed: int) -> World:
    """Instantiate every set's objects and place them around their intersections."""
    rng = np.random.default_rng(seed)
    world = World(scenario=spec, seed=seed)
    by_key: Dict[Tuple[str, int], SimObject] = {}
    for set_id, set_spec in spec.sets.items():
        for i, obj in enumerate(build_instances(set_spec, set_spec.instances, rng)):
            by_key[(set_id, i)] = obj
            world.objects.append(obj)

    for inter in spec.intersections:
        n = len(inter.members)
        for k, key in enumerate(inter.members):
            angle = 2.0 * math.pi * k / max(n, 1)
            obj = by_key[key]
            obj.intersection = inter.intersection_id
            obj.position = (
                round(inter.center[0] + inter.radius * math.cos(angle), 6),
                round(inter.center[1] + inter.radius * math.sin(angle), 6),
            )

    staged = [o for o in world.objects if o.intersection is None]
    for k, obj in enumerate(staged):
        obj.position = (STAGING_ORIGIN[0] - STAGING_SPACING * k, STAGING_ORIGIN[1])
    logger.debug(f"Built world with {len(world.objects)} objects (seed {seed})")
    return world


def view_transform(
    base: np.ndarray,
    view: ViewCondition,
    set_spec: ObjectSetSpec,
    view_model: ViewModel,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """Apply altitude drift, azimuth rotation mix and altitude-dependent noise, then clip."""
    ratio = view_model.altitude_ratio(view.altitude)
    shifted = base + ratio * set_spec.drift_magnitude * set_spec.drift_direction
    mix = view_model.rotation_mix * ratio * abs(math.sin(math.radians(view.azimuth)))
    features = (1.0 - mix) * shifted + mix * np.roll(shifted, 1)
    sigma = view_model.sigma(view.altitude)
    if sigma > 0.0:
        rng = rng if rng is not None else np.random.default_rng(view.noise_seed)
        features = features + rng.normal(0.0, sigma, features.shape)
    return np.clip(features, 0.0, 1.0)


def sample_objectness(
    altitude: float,
    model: ObjectnessModel,
    rng: np.random.Generator,
    reference_altitude: float = 30.0,
) -> float:
    """Beta draw whose mean falls linearly from ground to the reference altitude."""
    mean = model.mean(altitude, reference_altitude)
    value = rng.beta(model.concentration * mean, model.concentration * (1.0 - mean))
    return float(np.clip(value, 0.0, 1.0))
