from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field, field_validator

Mode = Literal["supervised", "self_supervised", "unsupervised", "frozen"]


class PhaseSpec(BaseModel):
    """One training phase: which streams are shown, in which mode, under which criteria."""
    name: str
    mode: Mode = "supervised"
    train_streams: List[str] = Field(default_factory=list)
    criteria_overrides: Dict[str, float] = Field(default_factory=dict)
    strip_labels: bool = False


class ExperimentConfig(BaseModel):
    experiment: str
    scenario: str
    seed: int = 42
    checkpoints: List[float] = Field(default_factory=lambda: [100.0])
    phases: List[PhaseSpec] = Field(default_factory=list)
    eval_streams: Dict[str, str] = Field(default_factory=dict)
    criteria_overrides: Dict[str, float] = Field(default_factory=dict)
    output_dir: str = "out"
    model_in: Optional[str] = None
    model_out: Optional[str] = None

    @field_validator("checkpoints")
    @classmethod
    def _checkpoints_increasing(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("at least one checkpoint is required")
        previous = 0.0
        for point in value:
            if not previous < point <= 100.0:
                raise ValueError(
                    f"checkpoints must be strictly increasing within (0, 100], got {value}"
                )
            previous = point
        return value


class ExperimentCall(BaseModel):
    """A request to run one named protocol with keyword arguments."""
    name: str
    args: Dict[str, Any] = Field(default_factory=dict)
