from dataclasses import dataclass, field
from typing import Any, Dict


@dataclass
class MetricsRecord:
    """One row of an experiment table: accuracies per test set after a phase/checkpoint."""
    experiment: str
    phase: str
    training_fraction: float
    accuracies: Dict[str, float] = field(default_factory=dict)
    new_classes: int = 0
    resets: int = 0
    match_tracked: int = 0
    label_requests: int = 0
    samples_seen: int = 0

    def __post_init__(self) -> None:
        for name, value in self.accuracies.items():
            if not 0.0 <= value <= 100.0:
                raise ValueError(f"Accuracy for {name} outside [0, 100]: {value}")
        if not 0.0 <= self.training_fraction <= 100.0:
            raise ValueError(f"training_fraction outside [0, 100]: {self.training_fraction}")

    def to_row(self) -> Dict[str, Any]:
        row: Dict[str, Any] = {
            "experiment": self.experiment,
            "phase": self.phase,
            "training_fraction": self.training_fraction,
        }
        for name in sorted(self.accuracies):
            row[f"acc_{name}"] = round(self.accuracies[name], 4)
        row.update(
            new_classes=self.new_classes,
            resets=self.resets,
            match_tracked=self.match_tracked,
            label_requests=self.label_requests,
            samples_seen=self.samples_seen,
        )
        return row
