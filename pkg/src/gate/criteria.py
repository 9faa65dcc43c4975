import math
from dataclasses import asdict, dataclass, fields, replace
from enum import Enum
from typing import Any, Dict

from src.utils.errors import ConfigError


class LearningMode(str, Enum):
    SUPERVISED = "supervised"
    SELF_SUPERVISED = "self_supervised"
    UNSUPERVISED = "unsupervised"
    FROZEN = "frozen"


@dataclass(frozen=True)
class UncertaintyCriteria:
    """Thresholds for detection, category fit, similarity, relevance and persistence."""

    psi1: float = 0.5
    psi2: float = 0.75
    psi3: float = 0.85
    psi4: float = 0.06
    psi5: float = 0.6
    buffer_len: int = 10
    relevance_window: int = 50
    similarity_fanout: int = 5
    label_request_min_support: int = 3

    def __post_init__(self) -> None:
        for name in ("psi1", "psi2", "psi3", "psi4", "psi5"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ConfigError(f"{name} must be in (0, 1), got {value}")
        for name in ("buffer_len", "relevance_window", "similarity_fanout", "label_request_min_support"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value}")

    @property
    def relevance_threshold(self) -> int:
        # 0.06 * 50 evaluates to 3.0000000000000004 in binary floating point
        return math.ceil(self.psi4 * self.relevance_window - 1e-9)

    @property
    def persistence_count(self) -> float:
        return self.psi5 * self.buffer_len

    def with_overrides(self, **overrides: Any) -> "UncertaintyCriteria":
        unknown = set(overrides) - {f.name for f in fields(self)}
        if unknown:
            raise ConfigError(f"Unknown criteria overrides: {sorted(unknown)}")
        return replace(self, **overrides)

    @classmethod
    def from_config(cls, section: Dict[str, Any]) -> "UncertaintyCriteria":
        known = {f.name for f in fields(cls)}
        unknown = set(section) - known
        if unknown:
            raise ConfigError(f"Unknown criteria settings: {sorted(unknown)}")
        return cls(**section)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
