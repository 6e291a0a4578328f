"""Per-arrival feature extraction.

``spectral_energy`` evaluates one Hamming-windowed DFT frame pinned to the
newest sample and returns the one-sided squared magnitudes (no 1/L scaling).
``time_domain_features`` is the five-statistic baseline.
"""
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable, Dict, Iterable, Union

import numpy as np
import pandas as pd
from scipy import stats

from app.core.exceptions import FeatureError
from app.features.window import WindowBuffer
from app.schemas.detector import FeatureKind

TIME_DOMAIN_NAMES = ("autocorrelation", "variance", "skewness", "kurtosis", "bicorrelation")


@dataclass(frozen=True)
class FeatureVector:
    """Feature values extracted at one time step."""
    values: np.ndarray
    kind: FeatureKind

    def __len__(self) -> int:
        return len(self.values)


def hamming_weights(length: int) -> np.ndarray:
    """Symmetric Hamming window 0.54 - 0.46 cos(2 pi n / (L - 1))."""
    if length < 2:
        raise FeatureError(f"Hamming window needs L >= 2, got {length}")
    return _hamming(length).copy()


@lru_cache(maxsize=32)
def _hamming(length: int) -> np.ndarray:
    weights = np.hamming(length)
    weights.setflags(write=False)
    return weights


def _checked_frame(window: WindowBuffer) -> np.ndarray:
    frame = window.as_array()
    if not np.all(np.isfinite(frame)):
        raise FeatureError("window holds a non-finite sample")
    return frame


def spectral_energy(window: WindowBuffer) -> FeatureVector:
    """Squared magnitudes of bins 0..L//2 of the windowed frame."""
    if window.capacity < 2:
        raise FeatureError(f"spectral features need L >= 2, got {window.capacity}")
    frame = _checked_frame(window) * _hamming(window.capacity)
    spectrum = np.fft.rfft(frame)
    energy = spectrum.real ** 2 + spectrum.imag ** 2
    return FeatureVector(values=energy, kind=FeatureKind.SPECTRAL_ENERGY)


def _lag_correlation(x: np.ndarray) -> float:
    head, tail = x[:-1], x[1:]
    dh, dt = head - head.mean(), tail - tail.mean()
    denom = np.sqrt(np.dot(dh, dh) * np.dot(dt, dt))
    if denom == 0:
        return 0.0
    return float(np.dot(dh, dt) / denom)


def time_domain_features(window: WindowBuffer) -> FeatureVector:
    """[lag-1 autocorrelation, variance, skewness, kurtosis, lag-(1,2) bicorrelation]."""
    if window.capacity < 4:
        raise FeatureError(f"time-domain features need L >= 4, got {window.capacity}")
    x = _checked_frame(window)
    centered = x - x.mean()
    m2 = float(np.mean(centered ** 2))
    scale = float(np.max(np.abs(x)))
    # Constant windows (up to rounding of the mean) are degenerate
    if m2 <= len(x) * (np.finfo(np.float64).eps * scale) ** 2:
        return FeatureVector(values=np.zeros(5), kind=FeatureKind.TIME_DOMAIN)

    bicorrelation = np.mean(centered[2:] * centered[1:-1] * centered[:-2]) / m2 ** 1.5
    values = np.array([
        _lag_correlation(x),
        np.var(x, ddof=1),
        stats.skew(x, bias=True),
        stats.kurtosis(x, fisher=False, bias=True),
        bicorrelation,
    ], dtype=np.float64)
    return FeatureVector(values=values, kind=FeatureKind.TIME_DOMAIN)


EXTRACTORS: Dict[FeatureKind, Callable[[WindowBuffer], FeatureVector]] = {
    FeatureKind.SPECTRAL_ENERGY: spectral_energy,
    FeatureKind.TIME_DOMAIN: time_domain_features,
}


def extract(window: WindowBuffer, kind: FeatureKind) -> FeatureVector:
    return EXTRACTORS[FeatureKind(kind)](window)


def feature_stream(values: Iterable[float], capacity: int, kind: FeatureKind) -> np.ndarray:
    """Feature matrix (one row per arrival) for a whole series."""
    window = WindowBuffer(capacity)
    rows = []
    for sample in values:
        window.push(sample)
        rows.append(extract(window, kind).values)
    return np.vstack(rows) if rows else np.empty((0, 0))


def dump_features(
    values: Iterable[float], capacity: int, kind: FeatureKind, path: Union[str, Path]
) -> Path:
    """Write ``t,f0,f1,...`` rows for every arrival."""
    matrix = feature_stream(values, capacity, kind)
    frame = pd.DataFrame(matrix, columns=[f"f{i}" for i in range(matrix.shape[1])])
    frame.insert(0, "t", np.arange(len(frame)))
    path = Path(path)
    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    return path
