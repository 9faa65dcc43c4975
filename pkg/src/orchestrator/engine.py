import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, NamedTuple, Optional, Sequence

import numpy as np
import pandas as pd
import yaml

from src.artmap import ArtmapNetwork, ArtmapParams
from src.attention import SpatialMemory
from src.gate import (
    ClassRegistry,
    DecisionKind,
    GateDecision,
    LearningMode,
    UncertaintyCriteria,
    UncertaintyGate,
)
from src.models import MetricsRecord
from src.simenv import ScenarioSpec, SimFrame, load_scenario, load_stream
from src.simenv.datasets import stream_rng
from src.store import KnowledgeState, decision_digest, load as load_snapshot
from src.utils import ConfigError, MissingArtifactError, ensure_dir, output_paths, write_json
from src.utils.validators import validate_label_map


logger = logging.getLogger(__name__)

METRICS_CSV = "metrics.csv"
SUMMARY_JSON = "summary.json"


class Event(NamedTuple):
    """Event emitted while an experiment runs."""
    kind: str
    payload: Dict[str, Any]


EventHandler = Callable[[Event], None]


@dataclass
class RunContext:
    """Resolved configuration, scenario and directories for one command."""
    config: Dict[str, Any]
    scenario: ScenarioSpec
    seed: int
    out_dir: Path
    data_dir: Path
    models_dir: Path

    @classmethod
    def from_config(cls, config: Dict[str, Any]) -> "RunContext":
        paths = output_paths(config)
        return cls(
            config=config,
            scenario=load_scenario(config["simulation"]["scenario"]),
            seed=int(config["simulation"]["seed"]),
            out_dir=paths["out"],
            data_dir=paths["data"],
            models_dir=paths["models"],
        )

    def experiment_settings(self, name: str) -> Dict[str, Any]:
        return dict(self.config.get("experiments", {}).get(name, {}))

    def stream(self, name: str) -> List[SimFrame]:
        return load_stream(self.data_dir, name)

    def model_path(self, name: str) -> Path:
        return self.models_dir / f"{name}.json"

    def experiment_dir(self, name: str) -> Path:
        return ensure_dir(self.out_dir / name)

    def load_model(self, name: str, hint: str) -> KnowledgeState:
        return load_knowledge(self.model_path(name), self.scenario.feature_dim, hint)


@dataclass
class StreamResult:
    """Scored decisions of one pass over a stream."""
    name: str
    decisions: List[GateDecision] = field(default_factory=list)
    samples: int = 0
    correct: int = 0
    rejected: int = 0
    unknown: int = 0
    new_classes: int = 0
    resets: int = 0
    match_tracked: int = 0
    similarity_used: int = 0
    learned: int = 0
    supervised_learns: int = 0

    @property
    def accuracy(self) -> float:
        return 100.0 * self.correct / self.samples if self.samples else 0.0

    @property
    def digest(self) -> str:
        return decision_digest(self.decisions)

    def absorb(self, other: "StreamResult") -> None:
        self.decisions.extend(other.decisions)
        for name in (
            "samples", "correct", "rejected", "unknown", "new_classes", "resets",
            "match_tracked", "similarity_used", "learned", "supervised_learns",
        ):
            setattr(self, name, getattr(self, name) + getattr(other, name))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "samples": self.samples,
            "correct": self.correct,
            "accuracy": round(self.accuracy, 4),
            "rejected": self.rejected,
            "unknown": self.unknown,
            "new_classes": self.new_classes,
            "resets": self.resets,
            "match_tracked": self.match_tracked,
            "similarity_used": self.similarity_used,
            "learned": self.learned,
            "supervised_learns": self.supervised_learns,
            "digest": self.digest,
        }


def new_knowledge(config: Dict[str, Any], scenario: ScenarioSpec) -> KnowledgeState:
    """Empty network with the scenario's supervised classes pre-registered."""
    params = ArtmapParams.from_config(config.get("artmap", {}))
    criteria = UncertaintyCriteria.from_config(config.get("criteria", {}))
    registry = ClassRegistry()
    for index, label in scenario.supervised_classes():
        registry.register_supervised(index, label)
    return KnowledgeState(ArtmapNetwork(scenario.feature_dim, params), registry, criteria)


def load_knowledge(
    path: Path, raw_dimension: int, hint: str = "train a model first"
) -> KnowledgeState:
    if not Path(path).exists():
        raise MissingArtifactError(str(path), hint)
    return load_snapshot(path, expected_dimension=raw_dimension)


def make_gate(
    state: KnowledgeState,
    criteria: Optional[UncertaintyCriteria] = None,
    attention: Optional[SpatialMemory] = None,
    buffers_enabled: bool = False,
) -> UncertaintyGate:
    return UncertaintyGate(
        state.network,
        state.registry,
        criteria or state.criteria,
        attention=attention,
        buffers_enabled=buffers_enabled,
        clock=state.clock,
    )


def run_frames(
    gate: UncertaintyGate,
    frames: Iterable[SimFrame],
    mode: LearningMode,
    name: str = "stream",
    expected: Optional[str] = None,
    score_category: bool = False,
) -> StreamResult:
    """Drive the gate over frames and score each decision.

    A decision is correct when its label equals ``expected`` (or the
    detection's ground truth). ``score_category`` scores the per-detection
    category instead of the persistence hypothesis.
    """
    result = StreamResult(name)
    registry = gate.registry
    for frame in frames:
        decisions = gate.process_frame(frame.detections, mode)
        for det, decision in zip(frame.detections, decisions):
            target = expected if expected is not None else det.truth
            if score_category and decision.kind is not DecisionKind.REJECTED:
                shown = registry.display_label(decision.category)
            else:
                shown = decision.display_label
            diag = decision.diagnostics
            result.decisions.append(decision)
            result.samples += 1
            result.correct += int(shown == target)
            result.rejected += int(decision.kind is DecisionKind.REJECTED)
            result.unknown += int(decision.kind is DecisionKind.UNKNOWN)
            result.new_classes += int(decision.new_class is not None)
            result.resets += diag.resets
            result.match_tracked += diag.match_tracked
            result.similarity_used += int(diag.similarity_used)
            result.learned += int(diag.learned)
            result.supervised_learns += int(diag.learned and diag.supervision is not None)
    return result


def shuffled(frames: Sequence[SimFrame], seed: int, name: str) -> List[SimFrame]:
    """Seeded presentation order for a training pass (logged for auditing)."""
    order = stream_rng(seed, f"shuffle/{name}").permutation(len(frames))
    logger.info(f"Shuffled {len(frames)} samples of {name} (seed {seed})")
    return [frames[int(i)] for i in order]


def strip_labels(frames: Iterable[SimFrame]) -> List[SimFrame]:
    return [
        SimFrame(f.frame_index, f.view, [d.without_label() for d in f.detections], f.intersection)
        for f in frames
    ]


def train_stream(
    state: KnowledgeState,
    frames: Sequence[SimFrame],
    mode: LearningMode = LearningMode.SUPERVISED,
    name: str = "train",
    seed: int = 0,
    shuffle: bool = True,
    criteria: Optional[UncertaintyCriteria] = None,
    remove_labels: bool = False,
) -> StreamResult:
    """One learning pass; ``state.criteria`` is left untouched by ``criteria`` overrides."""
    order = shuffled(frames, seed, name) if shuffle else list(frames)
    if remove_labels:
        order = strip_labels(order)
    gate = make_gate(state, criteria)
    result = run_frames(gate, order, LearningMode(mode), name)
    state.clock = gate.clock
    logger.info(
        f"Trained on {result.samples} samples of {name} ({mode}): "
        f"{result.new_classes} new classes, {state.network.node_count} nodes"
    )
    return result


def evaluate_stream(
    state: KnowledgeState,
    frames: Sequence[SimFrame],
    name: str = "eval",
    expected: Optional[str] = None,
) -> StreamResult:
    """Frozen pass; the knowledge state is not modified."""
    gate = make_gate(state)
    result = run_frames(gate, frames, LearningMode.FROZEN, name, expected)
    logger.debug(f"Evaluated {name}: {result.accuracy:.2f}% of {result.samples}")
    return result


def evaluate_sets(
    state: KnowledgeState,
    test_sets: Dict[str, Sequence[SimFrame]],
    expected: Optional[Dict[str, str]] = None,
) -> Dict[str, StreamResult]:
    expected = expected or {}
    return {
        column: evaluate_stream(state, frames, column, expected.get(column))
        for column, frames in test_sets.items()
    }


def accuracies(results: Dict[str, StreamResult]) -> Dict[str, float]:
    return {column: result.accuracy for column, result in results.items()}


def run_curve(
    state: KnowledgeState,
    train_frames: Sequence[SimFrame],
    test_sets: Dict[str, Sequence[SimFrame]],
    checkpoints: Sequence[float],
    experiment: str,
    phase: str,
    seed: int,
    mode: LearningMode = LearningMode.SUPERVISED,
    criteria: Optional[UncertaintyCriteria] = None,
    include_initial: bool = True,
    on_event: EventHandler = lambda e: None,
) -> List[MetricsRecord]:
    """Train incrementally, re-testing every set after each checkpoint percentage.

    The training stream is shuffled once; checkpoint ``p`` has seen the first
    ``floor(p / 100 * N)`` samples of that order.
    """
    records: List[MetricsRecord] = []
    if include_initial:
        initial = evaluate_sets(state, test_sets)
        records.append(MetricsRecord(experiment, "Initial", 0.0, accuracies(initial)))
        on_event(Event("checkpoint", records[-1].to_row()))

    order = shuffled(train_frames, seed, f"{experiment}/{phase}")
    gate = make_gate(state, criteria)
    total = StreamResult(phase)
    done = 0
    for point in checkpoints:
        upto = int(math.floor(point / 100.0 * len(order) + 1e-9))
        total.absorb(run_frames(gate, order[done:upto], LearningMode(mode), phase))
        done = upto
        state.clock = gate.clock
        results = evaluate_sets(state, test_sets)
        records.append(
            MetricsRecord(
                experiment=experiment,
                phase=phase,
                training_fraction=float(point),
                accuracies=accuracies(results),
                new_classes=total.new_classes,
                resets=total.resets,
                match_tracked=total.match_tracked,
                samples_seen=done,
            )
        )
        on_event(Event("checkpoint", records[-1].to_row()))
    logger.info(f"{experiment}: {phase} finished after {done} samples")
    return records


def records_frame(records: Sequence[MetricsRecord]) -> pd.DataFrame:
    return pd.DataFrame([record.to_row() for record in records])


def write_metrics(
    records: Sequence[MetricsRecord],
    out_dir: Path,
    summary: Dict[str, Any],
    indent: int = 2,
) -> Dict[str, Path]:
    """Persist the metrics table as CSV and the run summary as JSON."""
    out_dir = ensure_dir(out_dir)
    csv_path = out_dir / METRICS_CSV
    records_frame(records).to_csv(csv_path, index=False)
    summary_path = out_dir / SUMMARY_JSON
    write_json(summary_path, summary, indent=indent)
    logger.info(f"Metrics saved to {csv_path}")
    return {"metrics": csv_path, "summary": summary_path}


def load_label_map(path: Path) -> Dict[str, Any]:
    """Read a YAML or JSON label map and validate its shape."""
    if not Path(path).exists():
        raise MissingArtifactError(str(path), "pass an existing --map file")
    with open(path, "r", encoding="utf-8") as f:
        try:
            document = yaml.safe_load(f) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"Invalid label map {path}: {exc}") from exc
    errors = validate_label_map(document)
    if errors:
        raise ConfigError(f"Invalid label map {path}: " + "; ".join(errors))
    return document


def apply_label_map(
    registry: ClassRegistry, label_map: Dict[str, Any], min_support: int = 3
) -> Dict[str, List[int]]:
    """Assign human labels per the map; ``"flagged"`` expands to the currently flagged classes."""
    skip = set(label_map.get("skip", []))
    flagged = [i for i in registry.flag_label_requests(min_support) if i not in skip]
    applied: Dict[str, List[int]] = {}
    for entry in label_map.get("labels", []):
        classes = flagged if entry["classes"] == "flagged" else entry["classes"]
        classes = [int(i) for i in classes if int(i) not in skip]
        if not classes:
            continue
        registry.assign_human_label(classes, entry["label"])
        applied.setdefault(entry["label"], []).extend(classes)
    return applied


def finalized_accuracy(gate: UncertaintyGate, truth: Dict[str, str]) -> float:
    """Share of objects whose persistence hypothesis names their true label."""
    if not truth:
        return 0.0
    hits = sum(
        gate.registry.display_label(gate.finalize(object_id)) == label
        for object_id, label in truth.items()
    )
    return 100.0 * hits / len(truth)


def node_summary(state: KnowledgeState) -> List[Dict[str, Any]]:
    """Per-class node counts, supports and label status."""
    labels = state.network.labels
    min_support = state.criteria.label_request_min_support
    flagged = set(state.registry.flag_label_requests(min_support))
    rows = []
    for index in sorted(state.registry.records):
        record = state.registry.records[index]
        rows.append(
            {
                "class": index,
                "origin": record.origin.value,
                "label": state.registry.display_label(index),
                "nodes": int(np.count_nonzero(labels == index)),
                "support": record.support_count,
                "active": record.active,
                "flagged": index in flagged,
            }
        )
    return rows
