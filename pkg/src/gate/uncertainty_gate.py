import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Deque, Iterable, List, Optional, Sequence, Set

import numpy as np

from src.artmap import ArtmapNetwork, OutcomeKind, overlap
from src.gate.buffers import UNKNOWN_HYPOTHESIS, BufferBank
from src.gate.criteria import LearningMode, UncertaintyCriteria
from src.gate.registry import ClassOrigin, ClassRecord, ClassRegistry, exemplar_digest
from src.models.detection import Detection
from src.utils.errors import ClassNotFoundError

if TYPE_CHECKING:
    from src.attention.spatial_memory import SpatialMemory

logger = logging.getLogger(__name__)


class DecisionKind(str, Enum):
    REJECTED = "rejected"
    HYPOTHESIS = "hypothesis"
    UNKNOWN = "unknown"
    NEW_CLASS = "new_class"


class DecisionPath(str, Enum):
    REJECTED = "rejected"
    RESONANCE = "resonance"
    SIMILARITY = "similarity"
    CREATE = "create"
    NONE = "none"


@dataclass
class GateDiagnostics:
    path: DecisionPath = DecisionPath.NONE
    learned: bool = False
    resets: int = 0
    match_tracked: int = 0
    similarity_used: bool = False
    buffer_frequency: float = 0.0
    match_value: float = 0.0
    winner: Optional[int] = None
    supervision: Optional[int] = None


@dataclass
class GateDecision:
    kind: DecisionKind
    hypothesis: int = UNKNOWN_HYPOTHESIS
    category: Optional[int] = None
    new_class: Optional[int] = None
    object_id: Optional[str] = None
    display_label: str = "unknown"
    diagnostics: GateDiagnostics = field(default_factory=GateDiagnostics)

    def signature(self) -> tuple:
        """Fields that identify the decision for digests and equality checks."""
        return (
            self.kind.value,
            self.hypothesis,
            self.category,
            self.new_class,
            self.diagnostics.path.value,
            self.diagnostics.winner,
            self.display_label,
        )


@dataclass
class LabelRequest:
    class_index: int
    support_count: int
    exemplar_digest: str
    frame: int

    @classmethod
    def for_class(cls, network: ArtmapNetwork, record: ClassRecord, frame: int) -> "LabelRequest":
        """Request for one class; its exemplar is the lowest-index node carrying the label."""
        nodes = np.flatnonzero(network.labels == record.index)
        digest = exemplar_digest(network.weights[nodes[0]]) if nodes.size else ""
        return cls(record.index, record.support_count, digest, frame)


def gate_detection(det: Detection, psi1: float) -> bool:
    """Objectness gate; a detection exactly at ``psi1`` passes."""
    return det.objectness >= psi1


def similarity_stage(
    network: ArtmapNetwork,
    A: np.ndarray,
    ranked_nodes: Sequence[int],
    psi3: float,
    fanout: int = 5,
    required_label: Optional[int] = None,
) -> Optional[int]:
    """First of the top ``fanout`` ranked nodes whose overlap with ``A`` reaches ``psi3``.

    With ``required_label`` only nodes of that class are accepted.
    """
    for j in list(ranked_nodes)[:fanout]:
        if required_label is not None and int(network.labels[j]) != required_label:
            continue
        if overlap(A, network.weights[j]) >= psi3:
            return int(j)
    return None


def one_shot_create(
    network: ArtmapNetwork, registry: ClassRegistry, A: np.ndarray, frame: int = 0
) -> tuple:
    """Allocate a self-generated class ``N = n + 1`` and commit a node with ``w = A``."""
    label = registry.allocate(ClassOrigin.SELF_GENERATED, frame=frame)
    node = network.commit_new_node(A, label, frame)
    registry.increment_support(label)
    return label, node


def relevance_prune(
    registry: ClassRegistry,
    buffers: Optional[BufferBank],
    frame: int,
    psi4: float,
    window: int,
) -> List[int]:
    """Deactivate weakly supported self-generated classes and forget long-unseen objects."""
    threshold = UncertaintyCriteria(psi4=psi4, relevance_window=window).relevance_threshold
    pruned = []
    for record in registry.records.values():
        if record.origin is not ClassOrigin.SELF_GENERATED or not record.active:
            continue
        if frame >= record.created_frame + window and record.support_count < threshold:
            registry.deactivate(record.index)
            pruned.append(record.index)
    if buffers is not None:
        buffers.drop_stale(frame, window)
    return pruned


class UncertaintyGate:
    """Runs detections through the five uncertainty criteria against one network/registry pair.

    One gate instance owns the hypothesis buffers and the label-request queue
    for its ensemble and must be driven from a single thread.
    """

    def __init__(
        self,
        network: ArtmapNetwork,
        registry: ClassRegistry,
        criteria: UncertaintyCriteria,
        attention: Optional["SpatialMemory"] = None,
        buffers_enabled: bool = False,
        relevance_enabled: Optional[bool] = None,
        clock: int = 0,
    ) -> None:
        self.network = network
        self.registry = registry
        self.criteria = criteria
        self.attention = attention
        self.buffers_enabled = buffers_enabled
        self.relevance_enabled = buffers_enabled if relevance_enabled is None else relevance_enabled
        self.buffers = BufferBank(criteria.buffer_len)
        self.clock = clock
        self.label_requests: Deque[LabelRequest] = deque()
        self._requested: Set[int] = set()

    def set_criteria(self, criteria: UncertaintyCriteria) -> None:
        if criteria.buffer_len != self.criteria.buffer_len:
            self.buffers = BufferBank(criteria.buffer_len)
        self.criteria = criteria
        logger.info(f"Criteria modulated: {criteria.to_dict()}")

    def supervision_for(self, det: Detection, mode: LearningMode) -> Optional[int]:
        if mode is LearningMode.SUPERVISED:
            label = det.supervised_label
        elif mode is LearningMode.SELF_SUPERVISED and self.attention is not None:
            label = self.attention.self_supervision_label(det)
        else:
            return None
        if label is None:
            return None
        if label not in self.registry:
            raise ClassNotFoundError(f"Supervision label {label} is not a registered class")
        if not self.registry.is_active(label):
            logger.debug(f"Ignoring supervision by inactive class {label}")
            return None
        return label

    def evaluate_detection(
        self, det: Detection, mode: LearningMode, frame: Optional[int] = None
    ) -> GateDecision:
        mode = LearningMode(mode)
        frame = self.clock if frame is None else frame
        if not gate_detection(det, self.criteria.psi1):
            return GateDecision(
                DecisionKind.REJECTED,
                object_id=det.object_id,
                display_label="rejected",
                diagnostics=GateDiagnostics(path=DecisionPath.REJECTED),
            )

        A = self.network.complement_code(det.features)
        learning = mode is not LearningMode.FROZEN
        label = self.supervision_for(det, mode)
        eligible = self.registry.eligibility_mask(self.network.labels)
        diag = GateDiagnostics(supervision=label)

        outcome = self.network.resonance_search(
            A, self.criteria.psi2, supervised_label=label,
            learning_enabled=learning, eligible=eligible,
        )
        diag.resets = outcome.resets
        diag.match_tracked = outcome.match_tracked
        diag.match_value = outcome.match_value
        category: Optional[int] = None
        new_class: Optional[int] = None

        if outcome.kind is OutcomeKind.UPDATED_EXISTING:
            category = outcome.label
            diag.path = DecisionPath.RESONANCE
            diag.winner = outcome.node
        else:
            diag.similarity_used = True
            J = similarity_stage(
                self.network, A, outcome.ranked, self.criteria.psi3,
                self.criteria.similarity_fanout, required_label=label,
            )
            if J is not None:
                if learning:
                    self.network.learn_into(J, A)
                category = int(self.network.labels[J])
                diag.path = DecisionPath.SIMILARITY
                diag.winner = J
                logger.debug(f"Similarity stage accepted node {J} (class {category})")
            elif learning and label is not None:
                diag.winner = self.network.commit_new_node(A, label, frame)
                category = label
                diag.path = DecisionPath.CREATE
            elif learning:
                new_class, diag.winner = one_shot_create(self.network, self.registry, A, frame)
                category = new_class
                diag.path = DecisionPath.CREATE

        if learning and category is not None:
            diag.learned = True
            # one_shot_create counted its own first sample
            if new_class is None:
                self.registry.increment_support(category)

        hypothesis = category if category is not None else UNKNOWN_HYPOTHESIS
        if self.buffers_enabled and det.object_id is not None:
            self.buffers.push(det.object_id, category or 0, frame)
            hypothesis, diag.buffer_frequency = self.buffers.persistence(
                det.object_id, self.criteria.psi5
            )
            if hypothesis != UNKNOWN_HYPOTHESIS:
                self._maybe_request_label(hypothesis, frame)

        if new_class is not None:
            kind = DecisionKind.NEW_CLASS
        elif hypothesis == UNKNOWN_HYPOTHESIS:
            kind = DecisionKind.UNKNOWN
        else:
            kind = DecisionKind.HYPOTHESIS
        return GateDecision(
            kind=kind,
            hypothesis=hypothesis,
            category=category,
            new_class=new_class,
            object_id=det.object_id,
            display_label=self.registry.display_label(hypothesis),
            diagnostics=diag,
        )

    def process_frame(
        self, detections: Iterable[Detection], mode: LearningMode, frame: Optional[int] = None
    ) -> List[GateDecision]:
        """Evaluate one frame's detections in order, then run buffer and relevance bookkeeping."""
        frame = self.clock if frame is None else frame
        decisions = [self.evaluate_detection(det, mode, frame) for det in detections]
        if self.buffers_enabled:
            self.buffers.decay(frame)
        if self.relevance_enabled and mode is not LearningMode.FROZEN:
            relevance_prune(
                self.registry,
                self.buffers if self.buffers_enabled else None,
                frame,
                self.criteria.psi4,
                self.criteria.relevance_window,
            )
        self.clock = frame + 1
        return decisions

    def reset_buffers(self) -> None:
        """Forget every object's hypothesis history (start of a new viewing episode)."""
        self.buffers = BufferBank(self.criteria.buffer_len)

    def finalize(self, object_id: str) -> int:
        """Current persistence hypothesis for a tracked object (-1 when not persistent)."""
        hypothesis, _ = self.buffers.persistence(object_id, self.criteria.psi5)
        return hypothesis

    def drain_label_requests(self) -> List[LabelRequest]:
        requests = list(self.label_requests)
        self.label_requests.clear()
        return requests

    def _maybe_request_label(self, class_index: int, frame: int) -> None:
        record = self.registry.get(class_index)
        if record.origin is not ClassOrigin.SELF_GENERATED or record.human_label is not None:
            return
        if class_index in self._requested:
            return
        self.label_requests.append(LabelRequest.for_class(self.network, record, frame))
        self._requested.add(class_index)
        logger.info(f"Label request raised for class {class_index} (support {record.support_count})")
