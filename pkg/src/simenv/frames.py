import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from src.models.detection import Detection
from src.simenv.world import SimObject, ViewCondition, World, sample_objectness, view_transform
from src.utils.io_helpers import iter_jsonl, write_jsonl

logger = logging.getLogger(__name__)

FEATURE_DECIMALS = 6


@dataclass
class SimFrame:
    frame_index: int
    view: ViewCondition
    detections: List[Detection] = field(default_factory=list)
    intersection: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "frame_index": self.frame_index,
            "view": self.view.to_dict(),
            "intersection": self.intersection,
            "detections": [d.to_dict() for d in self.detections],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SimFrame":
        view = data["view"]
        return cls(
            frame_index=int(data["frame_index"]),
            view=ViewCondition(
                altitude=float(view["altitude"]),
                azimuth=float(view["azimuth"]),
                noise_seed=int(view["noise_seed"]),
            ),
            detections=[Detection.from_dict(d) for d in data.get("detections", [])],
            intersection=data.get("intersection"),
        )


def render_frame(
    world: World,
    view: ViewCondition,
    frame_index: int,
    intersection: Optional[int] = None,
    objects: Optional[Sequence[SimObject]] = None,
    position_jitter: float = 0.0,
) -> SimFrame:
    """Emit one detection per visible object.

    Visible objects are ``objects`` when given, else the members of
    ``intersection``, else the whole world. Every random draw is seeded from
    (world seed, frame index, object ordinal, view noise seed).
    """
    if objects is None:
        objects = world.at_intersection(intersection) if intersection is not None else world.objects
    scenario = world.scenario
    detections = []
    for obj in sorted(objects, key=lambda o: o.object_id):
        set_spec = scenario.sets[obj.set_id]
        seq = np.random.SeedSequence(
            [world.seed, frame_index, _object_key(obj), view.noise_seed]
        )
        rng = np.random.default_rng(seq)
        features = view_transform(obj.base_features, view, set_spec, scenario.view_model, rng)
        objectness = sample_objectness(
            view.altitude, scenario.objectness, rng, scenario.view_model.reference_altitude
        )
        position = obj.position
        if position_jitter > 0.0:
            dx, dy = rng.normal(0.0, position_jitter, 2)
            position = (position[0] + float(dx), position[1] + float(dy))
        detections.append(
            Detection(
                features=np.round(features, FEATURE_DECIMALS),
                objectness=round(objectness, FEATURE_DECIMALS),
                object_id=obj.object_id,
                position=(round(position[0], FEATURE_DECIMALS), round(position[1], FEATURE_DECIMALS)),
                supervised_label=obj.supervised_index,
                truth=obj.label,
                set_id=obj.set_id,
            )
        )
    return SimFrame(frame_index, view, detections, intersection)


def write_stream(path: Union[str, Path], frames: Iterable[SimFrame]) -> int:
    """Write frames as JSON lines; returns the frame count."""
    return write_jsonl(path, (f.to_dict() for f in frames))


def read_stream(path: Union[str, Path]) -> List[SimFrame]:
    return [SimFrame.from_dict(record) for record in iter_jsonl(path)]


def _object_key(obj: SimObject) -> int:
    # stable across processes, unlike hash()
    return int.from_bytes(obj.object_id.encode("utf-8")[:8].ljust(8, b"\0"), "little")
