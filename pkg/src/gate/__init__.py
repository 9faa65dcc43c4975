from .criteria import UncertaintyCriteria, LearningMode
from .registry import ClassRegistry, ClassRecord, ClassOrigin, exemplar_digest, UNKNOWN_DISPLAY
from .buffers import HypothesisBuffer, BufferBank, NON_DETECTION, UNKNOWN_HYPOTHESIS
from .uncertainty_gate import (
    UncertaintyGate, GateDecision, GateDiagnostics, DecisionKind, DecisionPath, LabelRequest,
    gate_detection, similarity_stage, one_shot_create, relevance_prune,
)

__all__ = [
    "UncertaintyCriteria", "LearningMode",
    "ClassRegistry", "ClassRecord", "ClassOrigin", "exemplar_digest", "UNKNOWN_DISPLAY",
    "HypothesisBuffer", "BufferBank", "NON_DETECTION", "UNKNOWN_HYPOTHESIS",
    "UncertaintyGate", "GateDecision", "GateDiagnostics", "DecisionKind", "DecisionPath",
    "LabelRequest", "gate_detection", "similarity_stage", "one_shot_create", "relevance_prune",
]
