from typing import Callable, Dict, Union

import numpy as np

from app.core.exceptions import FeatureError
from app.features.extractors import FeatureVector
from app.schemas.detector import DistanceKind

ArrayLike = Union[FeatureVector, np.ndarray, list]


def _as_pair(a: ArrayLike, b: ArrayLike):
    if isinstance(a, FeatureVector) and isinstance(b, FeatureVector) and a.kind != b.kind:
        raise FeatureError(f"cannot compare {a.kind.value} with {b.kind.value} features")
    va = np.asarray(a.values if isinstance(a, FeatureVector) else a, dtype=np.float64)
    vb = np.asarray(b.values if isinstance(b, FeatureVector) else b, dtype=np.float64)
    if va.shape != vb.shape:
        raise FeatureError(f"feature length mismatch: {va.shape} vs {vb.shape}")
    if va.ndim != 1 or va.size < 2:
        raise FeatureError(f"features must be 1-d with at least 2 entries, got shape {va.shape}")
    if not (np.all(np.isfinite(va)) and np.all(np.isfinite(vb))):
        raise FeatureError("non-finite feature value")
    return va, vb


def _abs_similarity_distance(va: np.ndarray, vb: np.ndarray) -> float:
    na, nb = np.linalg.norm(va), np.linalg.norm(vb)
    if na == 0 and nb == 0:
        return 0.0
    if na == 0 or nb == 0:
        return 1.0
    similarity = abs(float(np.dot(va, vb)) / (na * nb))
    return max(0.0, 1.0 - similarity)


def euclidean(va: np.ndarray, vb: np.ndarray) -> float:
    return float(np.linalg.norm(va - vb))


def abs_cosine(va: np.ndarray, vb: np.ndarray) -> float:
    return _abs_similarity_distance(va, vb)


def abs_pearson(va: np.ndarray, vb: np.ndarray) -> float:
    return _abs_similarity_distance(va - va.mean(), vb - vb.mean())


DISTANCES: Dict[DistanceKind, Callable[[np.ndarray, np.ndarray], float]] = {
    DistanceKind.EUCLIDEAN: euclidean,
    DistanceKind.ABS_COSINE: abs_cosine,
    DistanceKind.ABS_PEARSON: abs_pearson,
}


def distance(a: ArrayLike, b: ArrayLike, kind: DistanceKind = DistanceKind.EUCLIDEAN) -> float:
    """Non-negative dissimilarity of two feature vectors.

    Zero-norm (cosine) or zero-variance (Pearson) arguments give 1, or 0 when
    both arguments are degenerate.
    """
    va, vb = _as_pair(a, b)
    return DISTANCES[DistanceKind(kind)](va, vb)
