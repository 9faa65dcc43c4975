"""Complement coding and the fuzzy-set arithmetic the network is built on.

All norms are city-block (L1) norms and the fuzzy AND is the element-wise
minimum. Vectors are 1-D ``numpy`` float arrays.
"""

from typing import Optional, Sequence, Union

import numpy as np

from src.utils.errors import DimensionError, InputDomainError

FLOAT_TOL = 1e-9

ArrayLike = Union[Sequence[float], np.ndarray]


def complement_code(a: ArrayLike, raw_dimension: Optional[int] = None) -> np.ndarray:
    """Return ``A = (a, 1 - a)``.

    Raises:
        DimensionError: ``a`` is not 1-D or its length differs from ``raw_dimension``.
        InputDomainError: an element is non-finite or outside [0, 1].
    """
    values = np.asarray(a, dtype=float)
    if values.ndim != 1:
        raise DimensionError(f"Feature vector must be 1-D, got shape {values.shape}")
    if raw_dimension is not None and values.shape[0] != raw_dimension:
        raise DimensionError(
            f"Feature vector has length {values.shape[0]}, network expects {raw_dimension}"
        )
    if not np.all(np.isfinite(values)) or np.any(values < 0.0) or np.any(values > 1.0):
        raise InputDomainError("Feature values must be finite and within [0, 1]")
    return np.concatenate((values, 1.0 - values))


def l1_norm(v: np.ndarray) -> float:
    return float(np.sum(v))


def fuzzy_and(A: np.ndarray, w: np.ndarray) -> np.ndarray:
    _check_same_length(A, w)
    return np.minimum(A, w)


def activation(A: np.ndarray, w: np.ndarray, alpha: float, M: Optional[int] = None) -> float:
    """Node activation ``T = |A ∧ w| + (1 - alpha) * (M - |w|)``."""
    _check_same_length(A, w)
    M = A.shape[0] if M is None else M
    if M != A.shape[0]:
        raise DimensionError(f"M={M} does not match vector length {A.shape[0]}")
    return l1_norm(np.minimum(A, w)) + (1.0 - alpha) * (M - l1_norm(w))


def activations(A: np.ndarray, W: np.ndarray, alpha: float) -> np.ndarray:
    """Vectorized :func:`activation` over the rows of a weight matrix."""
    if W.shape[0] == 0:
        return np.zeros(0, dtype=float)
    if W.shape[1] != A.shape[0]:
        raise DimensionError(f"Weights have width {W.shape[1]}, input has length {A.shape[0]}")
    M = A.shape[0]
    return np.minimum(A, W).sum(axis=1) + (1.0 - alpha) * (M - W.sum(axis=1))


def candidate_subset(
    T: np.ndarray, alpha: float, M: int, eligible: Optional[np.ndarray] = None
) -> set:
    """Indices ``j`` with ``T_j > alpha * M`` (optionally restricted to an eligibility mask)."""
    mask = np.asarray(T) > alpha * M
    if eligible is not None:
        mask &= eligible
    return {int(j) for j in np.flatnonzero(mask)}


def match_ratio(A: np.ndarray, w: np.ndarray) -> float:
    """``m = |A ∧ w| / |A|``."""
    _check_same_length(A, w)
    return l1_norm(np.minimum(A, w)) / l1_norm(A)


def overlap(A: np.ndarray, w: np.ndarray) -> float:
    """Containment-normalized overlap ``|A ∧ w| / min(|A|, |w|)``; 1.0 when one contains the other."""
    _check_same_length(A, w)
    denominator = min(l1_norm(A), l1_norm(w))
    if denominator <= 0.0:
        return 0.0
    return l1_norm(np.minimum(A, w)) / denominator


def _check_same_length(A: np.ndarray, w: np.ndarray) -> None:
    if A.shape != w.shape:
        raise DimensionError(f"Length mismatch: {A.shape} vs {w.shape}")
