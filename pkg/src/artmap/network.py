import copy
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np

from src.artmap import coding
from src.utils.errors import ConfigError, DimensionError, NodeNotFoundError

logger = logging.getLogger(__name__)


class MatchRule(str, Enum):
    RATIO = "ratio"
    RAW_ACTIVATION = "raw_activation"


@dataclass
class ArtmapParams:
    alpha: float = 0.01
    beta: float = 1.0
    epsilon: float = -0.001
    rho_baseline: float = 0.75
    match_rule: MatchRule = MatchRule.RATIO

    def __post_init__(self) -> None:
        self.match_rule = MatchRule(self.match_rule)
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must be in (0, 1), got {self.alpha}")
        if not 0.0 < self.beta <= 1.0:
            raise ConfigError(f"beta must be in (0, 1], got {self.beta}")
        if not -1.0 < self.epsilon < 1.0:
            raise ConfigError(f"epsilon must be in (-1, 1), got {self.epsilon}")
        if not 0.0 <= self.rho_baseline <= 1.0:
            raise ConfigError(f"rho_baseline must be in [0, 1], got {self.rho_baseline}")

    @classmethod
    def from_config(cls, section: Dict[str, Any]) -> "ArtmapParams":
        return cls(
            alpha=float(section.get("alpha", 0.01)),
            beta=float(section.get("beta", 1.0)),
            epsilon=float(section.get("epsilon", -0.001)),
            rho_baseline=float(section.get("rho_baseline", 0.75)),
            match_rule=MatchRule(section.get("match_rule", "ratio")),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "epsilon": self.epsilon,
            "rho_baseline": self.rho_baseline,
            "match_rule": self.match_rule.value,
        }


@dataclass
class CategoryNode:
    """Read-only view of one committed node."""
    index: int
    weights: np.ndarray
    internal_label: int
    support_count: int
    created_frame: int


class OutcomeKind(Enum):
    UPDATED_EXISTING = "updated_existing"
    COMMITTED_NEW = "committed_new"
    SEARCH_EXHAUSTED = "search_exhausted"


@dataclass
class SearchState:
    candidate_set: set
    current_rho: float
    winner: Optional[int] = None
    activations: np.ndarray = field(default_factory=lambda: np.zeros(0))


@dataclass
class LearnOutcome:
    kind: OutcomeKind
    final_rho: float
    match_value: float
    node: Optional[int] = None
    label: Optional[int] = None
    resets: int = 0
    match_tracked: int = 0
    # candidate set in descending activation order, ties by lowest index
    ranked: List[int] = field(default_factory=list)


@dataclass
class Classification:
    label: Optional[int]
    winner: Optional[int]
    activation: Optional[float]
    match_value: Optional[float]

    @property
    def is_unknown(self) -> bool:
        return self.label is None


class ArtmapNetwork:
    """Fuzzy ARTMAP category layer with labelled nodes.

    Node weights live in one ``(C, M)`` matrix; labels, supports and creation
    frames are parallel integer arrays. Node indices are 0-based and stable:
    nodes are never deleted.
    """

    def __init__(self, raw_dimension: int, params: Optional[ArtmapParams] = None) -> None:
        if raw_dimension < 1:
            raise DimensionError(f"raw_dimension must be positive, got {raw_dimension}")
        self.raw_dimension = raw_dimension
        self.params = params or ArtmapParams()
        self.weights = np.zeros((0, self.M), dtype=float)
        self.labels = np.zeros(0, dtype=int)
        self.support = np.zeros(0, dtype=int)
        self.created = np.zeros(0, dtype=int)
        self.label_count = 0

    @property
    def M(self) -> int:
        return 2 * self.raw_dimension

    @property
    def node_count(self) -> int:
        return int(self.weights.shape[0])

    def __len__(self) -> int:
        return self.node_count

    def node(self, j: int) -> CategoryNode:
        self._check_node(j)
        return CategoryNode(
            index=j,
            weights=self.weights[j].copy(),
            internal_label=int(self.labels[j]),
            support_count=int(self.support[j]),
            created_frame=int(self.created[j]),
        )

    def complement_code(self, a: coding.ArrayLike) -> np.ndarray:
        return coding.complement_code(a, self.raw_dimension)

    def activations(self, A: np.ndarray) -> np.ndarray:
        self._check_input(A)
        return coding.activations(A, self.weights, self.params.alpha)

    def candidate_subset(self, T: np.ndarray, eligible: Optional[np.ndarray] = None) -> set:
        return coding.candidate_subset(T, self.params.alpha, self.M, eligible)

    def ranked_candidates(self, T: np.ndarray, eligible: Optional[np.ndarray] = None) -> List[int]:
        """Candidate indices by descending activation; equal activations keep lowest index first."""
        return sorted(self.candidate_subset(T, eligible), key=lambda j: (-T[j], j))

    def match_value(self, A: np.ndarray, j: int, T_j: Optional[float] = None) -> float:
        if self.params.match_rule is MatchRule.RAW_ACTIVATION:
            if T_j is None:
                T_j = coding.activation(A, self.weights[j], self.params.alpha)
            return float(T_j) / self.M
        return coding.match_ratio(A, self.weights[j])

    def learn_into(self, j: int, A: np.ndarray) -> np.ndarray:
        """``w_J <- beta * (A ∧ w_J) + (1 - beta) * w_J``; increments the node's support."""
        self._check_node(j)
        self._check_input(A)
        beta = self.params.beta
        w = self.weights[j]
        updated = beta * np.minimum(A, w) + (1.0 - beta) * w
        # keep the update monotone under float rounding
        self.weights[j] = np.minimum(updated, w)
        self.support[j] += 1
        return self.weights[j].copy()

    def commit_new_node(self, A: np.ndarray, label: int, frame: int = 0) -> int:
        self._check_input(A)
        if label < 1:
            raise ValueError(f"Class labels start at 1, got {label}")
        self.weights = np.vstack((self.weights, A.reshape(1, -1)))
        self.labels = np.append(self.labels, label)
        self.support = np.append(self.support, 1)
        self.created = np.append(self.created, frame)
        self.label_count = max(self.label_count, label)
        j = self.node_count - 1
        logger.debug(f"Committed node {j} with label {label} at frame {frame}")
        return j

    def resonance_search(
        self,
        A: np.ndarray,
        rho_start: float,
        supervised_label: Optional[int] = None,
        learning_enabled: bool = True,
        eligible: Optional[np.ndarray] = None,
    ) -> LearnOutcome:
        """Winner selection with reset and match tracking.

        Walks the candidate set in descending activation. A winner below the
        current vigilance is reset; a winner whose label disagrees with
        ``supervised_label`` raises vigilance to ``m + epsilon`` and is reset.
        The first surviving winner resonates (and learns when enabled).
        """
        if not 0.0 <= rho_start <= 1.0:
            raise ValueError(f"rho_start must be in [0, 1], got {rho_start}")
        T = self.activations(A)
        ranked = self.ranked_candidates(T, eligible)
        state = SearchState(candidate_set=set(ranked), current_rho=rho_start, activations=T)
        resets = 0
        match_tracked = 0
        last_match = 0.0

        for J in ranked:
            state.winner = J
            m = self.match_value(A, J, T[J])
            last_match = m
            state.candidate_set.discard(J)
            if m < state.current_rho:
                resets += 1
                continue
            if supervised_label is not None and int(self.labels[J]) != supervised_label:
                state.current_rho = max(state.current_rho, min(1.0, m + self.params.epsilon))
                match_tracked += 1
                logger.debug(
                    f"Match tracking on node {J} (label {self.labels[J]} != {supervised_label}), "
                    f"rho -> {state.current_rho:.4f}"
                )
                continue
            if learning_enabled:
                self.learn_into(J, A)
            return LearnOutcome(
                kind=OutcomeKind.UPDATED_EXISTING,
                final_rho=state.current_rho,
                match_value=m,
                node=J,
                label=int(self.labels[J]),
                resets=resets,
                match_tracked=match_tracked,
                ranked=ranked,
            )

        return LearnOutcome(
            kind=OutcomeKind.SEARCH_EXHAUSTED,
            final_rho=state.current_rho,
            match_value=last_match,
            resets=resets,
            match_tracked=match_tracked,
            ranked=ranked,
        )

    def classify(
        self,
        A: np.ndarray,
        eligible: Optional[np.ndarray] = None,
        rho: Optional[float] = None,
    ) -> Classification:
        """Label of the highest-activation candidate passing vigilance; read-only."""
        rho = self.params.rho_baseline if rho is None else rho
        T = self.activations(A)
        for J in self.ranked_candidates(T, eligible):
            m = self.match_value(A, J, T[J])
            if m >= rho:
                return Classification(int(self.labels[J]), J, float(T[J]), m)
        return Classification(None, None, None, None)

    def copy(self) -> "ArtmapNetwork":
        return copy.deepcopy(self)

    def _check_node(self, j: int) -> None:
        if not 0 <= j < self.node_count:
            raise NodeNotFoundError(f"Node {j} does not exist (network has {self.node_count})")

    def _check_input(self, A: np.ndarray) -> None:
        if A.shape != (self.M,):
            raise DimensionError(f"Expected complement-coded length {self.M}, got {A.shape}")
