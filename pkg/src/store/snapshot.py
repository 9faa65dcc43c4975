"""Versioned, canonical JSON snapshots of the learnable state.

File layout (``.json``)::

    {
      "clock": <frames processed>,
      "criteria": {psi1..psi5, buffer_len, relevance_window, similarity_fanout, ...},
      "format_version": 1,
      "nodes": [{"created_frame", "label", "support", "weights": [M floats]}, ...],
      "params": {"alpha", "beta", "epsilon", "match_rule", "rho_baseline"},
      "raw_dimension": M/2,
      "registry": {"classes": [{"active", "created_frame", "human_label", "index",
                                "origin", "support_count"}, ...]}
    }

Keys are sorted and floats are written with 17 significant digits, so saving a
loaded snapshot reproduces the file byte for byte.
"""

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

import numpy as np

from src.artmap import ArtmapNetwork, ArtmapParams
from src.gate import ClassRegistry, GateDecision, UncertaintyCriteria
from src.utils.errors import DimensionError, SnapshotFormatError, SnapshotVersionError
from src.utils.io_helpers import write_text_atomic
from src.utils.validators import validate_snapshot

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


@dataclass
class KnowledgeState:
    """Everything a deployed agent carries between platforms."""
    network: ArtmapNetwork
    registry: ClassRegistry
    criteria: UncertaintyCriteria
    clock: int = 0

    @property
    def raw_dimension(self) -> int:
        return self.network.raw_dimension

    def to_document(self) -> Dict[str, Any]:
        net = self.network
        return {
            "format_version": FORMAT_VERSION,
            "raw_dimension": net.raw_dimension,
            "clock": self.clock,
            "params": net.params.to_dict(),
            "criteria": self.criteria.to_dict(),
            "nodes": [
                {
                    "weights": [float(v) for v in net.weights[j]],
                    "label": int(net.labels[j]),
                    "support": int(net.support[j]),
                    "created_frame": int(net.created[j]),
                }
                for j in range(net.node_count)
            ],
            "registry": self.registry.to_dict(),
        }

    def digest(self) -> str:
        return hashlib.sha256(dumps_canonical(self.to_document()).encode("utf-8")).hexdigest()


def dumps_canonical(value: Any, indent: int = 0) -> str:
    """Sorted-key JSON with 17-significant-digit floats; numeric lists stay on one line."""
    pad = " " * indent
    inner = " " * (indent + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [
            f"{inner}{json.dumps(str(k))}: {dumps_canonical(value[k], indent + 1)}"
            for k in sorted(value)
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            return "[" + ", ".join(_number(v) for v in value) + "]"
        items = [f"{inner}{dumps_canonical(v, indent + 1)}" for v in value]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (int, float, np.integer, np.floating)):
        return _number(value)
    raise TypeError(f"Cannot serialize {type(value).__name__}")


def _number(value: Any) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    number = float(value)
    if not np.isfinite(number):
        raise ValueError("Snapshots cannot hold non-finite numbers")
    text = format(number, ".17g")
    if "e" not in text and "." not in text:
        text += ".0"
    return text


def save(state: KnowledgeState, path: Union[str, Path]) -> str:
    """Write the snapshot atomically; returns the content digest."""
    text = dumps_canonical(state.to_document()) + "\n"
    write_text_atomic(path, text)
    digest = hashlib.sha256(text[:-1].encode("utf-8")).hexdigest()
    logger.info(
        f"Saved model to {path} ({state.network.node_count} nodes, "
        f"{state.registry.class_count} classes)"
    )
    return digest


def load(path: Union[str, Path], expected_dimension: Optional[int] = None) -> KnowledgeState:
    """Read and validate a snapshot; nothing is constructed unless every check passes."""
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SnapshotFormatError(f"{path} is not valid JSON: {exc}") from exc
    return from_document(document, expected_dimension, source=str(path))


def from_document(
    document: Any, expected_dimension: Optional[int] = None, source: str = "<document>"
) -> KnowledgeState:
    if isinstance(document, dict) and document.get("format_version") not in (None, FORMAT_VERSION):
        raise SnapshotVersionError(
            f"{source}: format_version {document.get('format_version')} is not supported "
            f"(expected {FORMAT_VERSION})"
        )
    errors = validate_snapshot(document)
    if errors:
        raise SnapshotFormatError(f"{source}: " + "; ".join(errors[:5]))

    raw_dimension = int(document["raw_dimension"])
    if expected_dimension is not None and raw_dimension != expected_dimension:
        raise DimensionError(
            f"{source}: model raw_dimension {raw_dimension} != configured {expected_dimension}"
        )
    M = 2 * raw_dimension
    nodes: List[Dict[str, Any]] = document["nodes"]
    for j, node in enumerate(nodes):
        if len(node["weights"]) != M:
            raise DimensionError(f"{source}: node {j} has {len(node['weights'])} weights, expected {M}")

    try:
        params = ArtmapParams.from_config(document["params"])
        criteria = UncertaintyCriteria.from_config(document["criteria"])
        registry = ClassRegistry.from_dict(document["registry"])
    except (ValueError, TypeError) as exc:
        raise SnapshotFormatError(f"{source}: {exc}") from exc
    for j, node in enumerate(nodes):
        if node["label"] not in registry:
            raise SnapshotFormatError(f"{source}: node {j} references unknown class {node['label']}")

    network = ArtmapNetwork(raw_dimension, params)
    if nodes:
        network.weights = np.array([node["weights"] for node in nodes], dtype=float)
        network.labels = np.array([node["label"] for node in nodes], dtype=int)
        network.support = np.array([node["support"] for node in nodes], dtype=int)
        network.created = np.array([node["created_frame"] for node in nodes], dtype=int)
    network.label_count = registry.class_count
    return KnowledgeState(network, registry, criteria, int(document["clock"]))


def decision_digest(decisions: Iterable[GateDecision]) -> str:
    """SHA-256 over the ordered decision signatures of a stream pass."""
    h = hashlib.sha256()
    for decision in decisions:
        h.update(repr(decision.signature()).encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()
