import hashlib
import logging
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional

import numpy as np

from src.utils.errors import ClassNotFoundError

logger = logging.getLogger(__name__)

UNKNOWN_DISPLAY = "unknown"


class ClassOrigin(str, Enum):
    SUPERVISED = "supervised"
    SELF_GENERATED = "self_generated"


@dataclass
class ClassRecord:
    index: int
    origin: ClassOrigin
    human_label: Optional[str] = None
    support_count: int = 0
    created_frame: int = 0
    active: bool = True

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["origin"] = self.origin.value
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ClassRecord":
        return cls(
            index=int(data["index"]),
            origin=ClassOrigin(data["origin"]),
            human_label=data.get("human_label"),
            support_count=int(data["support_count"]),
            created_frame=int(data["created_frame"]),
            active=bool(data["active"]),
        )


class ClassRegistry:
    """Class index allocator plus per-class metadata (origin, human label, support, activity).

    Indices are dense ``1..n``; pruned classes are marked inactive and their
    indices are never reused.
    """

    def __init__(self) -> None:
        self.records: Dict[int, ClassRecord] = {}

    @property
    def class_count(self) -> int:
        return len(self.records)

    def __contains__(self, index: object) -> bool:
        return index in self.records

    def get(self, index: int) -> ClassRecord:
        try:
            return self.records[index]
        except KeyError:
            raise ClassNotFoundError(f"Unknown class index: {index}") from None

    def allocate(
        self,
        origin: ClassOrigin = ClassOrigin.SELF_GENERATED,
        human_label: Optional[str] = None,
        frame: int = 0,
    ) -> int:
        index = self.class_count + 1
        self.records[index] = ClassRecord(index, origin, human_label, 0, frame, True)
        if origin is ClassOrigin.SELF_GENERATED:
            logger.info(f"New self-generated class {index} at frame {frame}")
        return index

    def register_supervised(self, index: int, human_label: str) -> int:
        """Declare a supervised class; indices must be registered densely in order."""
        if index in self.records:
            record = self.records[index]
            if record.origin is not ClassOrigin.SUPERVISED or record.human_label != human_label:
                raise ValueError(f"Class {index} already registered as {record.human_label!r}")
            return index
        if index != self.class_count + 1:
            raise ValueError(
                f"Supervised class {index} would leave a gap (next index is {self.class_count + 1})"
            )
        return self.allocate(ClassOrigin.SUPERVISED, human_label)

    def increment_support(self, index: int, amount: int = 1) -> None:
        self.get(index).support_count += amount

    def is_active(self, index: int) -> bool:
        record = self.records.get(index)
        return record is not None and record.active

    def deactivate(self, index: int) -> None:
        record = self.get(index)
        if record.origin is ClassOrigin.SUPERVISED:
            raise ValueError(f"Supervised class {index} cannot be pruned")
        if record.active:
            record.active = False
            logger.info(f"Class {index} marked inactive (support {record.support_count})")

    def active_labels(self) -> List[int]:
        return [i for i, r in self.records.items() if r.active]

    def eligibility_mask(self, node_labels: np.ndarray) -> np.ndarray:
        """Boolean mask over nodes whose class is still active."""
        inactive = [i for i, r in self.records.items() if not r.active]
        if not inactive:
            return np.ones(node_labels.shape[0], dtype=bool)
        return ~np.isin(node_labels, inactive)

    def display_label(self, index: Optional[int]) -> str:
        if index is None or index <= 0:
            return UNKNOWN_DISPLAY
        record = self.records.get(index)
        if record is None:
            return UNKNOWN_DISPLAY
        return record.human_label or f"unknown-class-{index}"

    def flag_label_requests(self, min_support: int = 3) -> List[int]:
        """Active self-generated classes with enough support and no human label."""
        return [
            r.index
            for r in self.records.values()
            if r.origin is ClassOrigin.SELF_GENERATED
            and r.active
            and r.human_label is None
            and r.support_count >= min_support
        ]

    def assign_human_label(self, indices: Iterable[int], label: str) -> None:
        indices = list(indices)
        for index in indices:
            if not self.is_active(index):
                raise ClassNotFoundError(f"Class {index} is unknown or inactive")
        for index in indices:
            self.records[index].human_label = label
        logger.info(f"Assigned label {label!r} to classes {indices}")

    def to_dict(self) -> Dict[str, Any]:
        return {"classes": [self.records[i].to_dict() for i in sorted(self.records)]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ClassRegistry":
        registry = cls()
        for entry in data.get("classes", []):
            record = ClassRecord.from_dict(entry)
            registry.records[record.index] = record
        expected = list(range(1, len(registry.records) + 1))
        if sorted(registry.records) != expected:
            raise ValueError("Class indices must be dense 1..n")
        return registry


def exemplar_digest(weights: np.ndarray) -> str:
    """Short SHA-256 prefix identifying a template, stable across platforms."""
    rounded = np.round(np.asarray(weights, dtype=float), 6)
    return hashlib.sha256(rounded.astype("<f8").tobytes()).hexdigest()[:12]
