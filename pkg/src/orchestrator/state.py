from dataclasses import asdict, is_dataclass
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np

from src.models import MetricsRecord


def _to_jsonable(content: Any) -> Any:
    """Convert content to a JSON-serializable structure."""
    if isinstance(content, dict):
        return {str(k): _to_jsonable(v) for k, v in content.items()}
    if isinstance(content, (list, tuple)):
        return [_to_jsonable(v) for v in content]
    if isinstance(content, Enum):
        return content.value
    if isinstance(content, np.ndarray):
        return content.tolist()
    if isinstance(content, (np.integer, np.floating)):
        return content.item()
    if is_dataclass(content) and not isinstance(content, type):
        return _to_jsonable(asdict(content))
    if hasattr(content, "model_dump"):  # pydantic models
        return content.model_dump()
    return content


class RunState:
    """Accumulates the events, table rows and results of one experiment run."""

    def __init__(self, experiment: str):
        self.experiment = experiment
        self.events: List[Dict[str, Any]] = []
        self.records: List[MetricsRecord] = []
        self.results: Dict[str, Any] = {}
        self.artifacts: Dict[str, str] = {}
        # wall-clock seconds per stage; logged, never written to summaries
        self.timings: Dict[str, float] = {}

    def add_event(self, kind: str, payload: Any) -> None:
        self.events.append({"kind": kind, "payload": _to_jsonable(payload)})

    def add_records(self, records: List[MetricsRecord]) -> None:
        self.records.extend(records)

    def add_result(self, key: str, value: Any) -> None:
        self.results[key] = _to_jsonable(value)

    def add_artifact(self, key: str, path: Any) -> None:
        self.artifacts[key] = str(path)

    def final_row(self, phase: Optional[str] = None) -> Optional[MetricsRecord]:
        """Last recorded row, optionally restricted to one phase."""
        rows = [r for r in self.records if phase is None or r.phase == phase]
        return rows[-1] if rows else None

    def to_json(self) -> Dict[str, Any]:
        """Export state to JSON."""
        return {
            "experiment": self.experiment,
            "rows": [record.to_row() for record in self.records],
            "results": self.results,
            "artifacts": self.artifacts,
            "events": self.events,
        }
