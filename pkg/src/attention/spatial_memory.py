import copy
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from src.models.detection import Detection
from src.utils.errors import AssociationConflictError, InputDomainError

logger = logging.getLogger(__name__)

Position = Tuple[float, float]


@dataclass
class TrackedObject:
    object_id: str
    position: Position
    acquired_label: Optional[int] = None
    acquisition_confidence: float = 0.0
    last_seen_frame: int = 0


class SpatialMemory:
    """Positions and confidently acquired labels of behaviorally relevant objects.

    Detections are associated to the nearest tracked object within
    ``association_radius``; the stored label then serves as the supervisory
    signal when viewing conditions are too poor for reliable recognition.
    """

    def __init__(self, association_radius: float = 2.0, confidence_floor: float = 0.95) -> None:
        self.association_radius = association_radius
        self.confidence_floor = confidence_floor
        self.objects: Dict[str, TrackedObject] = {}

    def __len__(self) -> int:
        return len(self.objects)

    def acquire(
        self,
        object_id: str,
        position: Position,
        label: Optional[int],
        confidence: float,
        frame: int = 0,
    ) -> TrackedObject:
        if not 0.0 <= confidence <= 1.0:
            raise InputDomainError(f"confidence must be in [0, 1], got {confidence}")
        position = (float(position[0]), float(position[1]))
        for other in self.objects.values():
            if other.object_id != object_id and _distance(other.position, position) <= self.association_radius:
                raise AssociationConflictError(
                    f"Object {object_id} at {position} lies within {self.association_radius} "
                    f"of tracked object {other.object_id}"
                )

        tracked = self.objects.get(object_id)
        if tracked is None:
            tracked = TrackedObject(object_id, position, last_seen_frame=frame)
            self.objects[object_id] = tracked
        tracked.position = position
        tracked.last_seen_frame = max(tracked.last_seen_frame, frame)
        if label is not None and confidence >= self.confidence_floor:
            tracked.acquired_label = label
            tracked.acquisition_confidence = confidence
            logger.info(f"Acquired {object_id} as class {label} (confidence {confidence:.2f})")
        else:
            logger.debug(f"Stored position of {object_id}; label confidence {confidence:.2f} below floor")
        return tracked

    def nearest(self, position: Position) -> Optional[TrackedObject]:
        """Closest tracked object within the association radius; ties go to the lower id."""
        best: Optional[TrackedObject] = None
        best_key: Tuple[float, str] = (math.inf, "")
        for tracked in self.objects.values():
            d = _distance(tracked.position, position)
            if d <= self.association_radius and (d, tracked.object_id) < best_key:
                best, best_key = tracked, (d, tracked.object_id)
        return best

    def self_supervision_label(self, det: Detection) -> Optional[int]:
        tracked = self.nearest(det.position)
        return None if tracked is None else tracked.acquired_label

    def observe(self, det: Detection, frame: int) -> Optional[str]:
        """Mark the object associated with a detection as seen at ``frame``."""
        tracked = self.nearest(det.position)
        if tracked is None:
            return None
        tracked.last_seen_frame = max(tracked.last_seen_frame, frame)
        return tracked.object_id

    def prune_stale(self, frame: int, max_age: int) -> List[str]:
        stale = [oid for oid, t in self.objects.items() if frame - t.last_seen_frame >= max_age]
        for object_id in stale:
            del self.objects[object_id]
        if stale:
            logger.info(f"Spatial memory dropped {len(stale)} stale objects at frame {frame}")
        return stale

    def snapshot(self) -> "SpatialMemory":
        return copy.deepcopy(self)


def _distance(a: Position, b: Position) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])
