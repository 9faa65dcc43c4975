from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np


@dataclass
class Detection:
    """One detector output: features plus objectness, identity and position."""
    features: np.ndarray
    objectness: float
    object_id: Optional[str] = None
    position: Tuple[float, float] = (0.0, 0.0)
    supervised_label: Optional[int] = None
    truth: Optional[str] = None
    set_id: Optional[str] = None
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=float)
        if not 0.0 <= self.objectness <= 1.0:
            raise ValueError(f"objectness must be in [0, 1], got {self.objectness}")

    def without_label(self) -> "Detection":
        return Detection(
            self.features, self.objectness, self.object_id, self.position,
            None, self.truth, self.set_id, dict(self.meta),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "features": [float(v) for v in self.features],
            "objectness": float(self.objectness),
            "object_id": self.object_id,
            "position": [float(self.position[0]), float(self.position[1])],
            "supervised_label": self.supervised_label,
            "truth": self.truth,
            "set_id": self.set_id,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Detection":
        x, y = data.get("position", (0.0, 0.0))
        return cls(
            features=np.asarray(data["features"], dtype=float),
            objectness=float(data["objectness"]),
            object_id=data.get("object_id"),
            position=(float(x), float(y)),
            supervised_label=data.get("supervised_label"),
            truth=data.get("truth"),
            set_id=data.get("set_id"),
        )
