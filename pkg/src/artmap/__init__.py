from .coding import (
    FLOAT_TOL, complement_code, fuzzy_and, activation, activations, candidate_subset,
    match_ratio, overlap, l1_norm,
)
from .network import (
    ArtmapParams, MatchRule, ArtmapNetwork, CategoryNode, SearchState, LearnOutcome,
    OutcomeKind, Classification,
)

__all__ = [
    "FLOAT_TOL", "complement_code", "fuzzy_and", "activation", "activations",
    "candidate_subset", "match_ratio", "overlap", "l1_norm",
    "ArtmapParams", "MatchRule", "ArtmapNetwork", "CategoryNode", "SearchState",
    "LearnOutcome", "OutcomeKind", "Classification",
]
