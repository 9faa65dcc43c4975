from .snapshot import (
    FORMAT_VERSION, KnowledgeState, save, load, from_document, dumps_canonical, decision_digest,
)

__all__ = [
    "FORMAT_VERSION", "KnowledgeState", "save", "load", "from_document", "dumps_canonical",
    "decision_digest",
]
