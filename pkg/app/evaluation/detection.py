"""Detection quality against ground-truth breakpoints."""
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

TOLERANCE_FRACTION = 0.05

RATE_NAMES = ("hit", "missed", "false_alarm", "specificity")


@dataclass
class DetectionScore:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0
    delays: List[int] = field(default_factory=list)
    detected_count_histogram: Dict[int, int] = field(default_factory=dict)

    def __add__(self, other: "DetectionScore") -> "DetectionScore":
        histogram = Counter(self.detected_count_histogram)
        histogram.update(other.detected_count_histogram)
        return DetectionScore(
            tp=self.tp + other.tp,
            fp=self.fp + other.fp,
            tn=self.tn + other.tn,
            fn=self.fn + other.fn,
            delays=self.delays + other.delays,
            detected_count_histogram=dict(sorted(histogram.items())),
        )


def tolerance_for(series_len: int) -> int:
    return math.ceil(TOLERANCE_FRACTION * series_len)


def _check_indices(name: str, indices: Sequence[int], series_len: int) -> List[int]:
    values = [int(i) for i in indices]
    if any(b < a for a, b in zip(values, values[1:])):
        raise ValueError(f"{name} indices must be sorted")
    if values and (values[0] < 0 or values[-1] >= series_len):
        raise ValueError(f"{name} indices must lie in [0, {series_len})")
    return values


def collapse_detections(detected: Sequence[int], tolerance: int) -> List[int]:
    """Reduce each run of consecutive flagged steps to its first step.

    A run longer than ``tolerance`` opens a new event every ``tolerance`` steps.
    Flags separated by an unflagged step always start separate events.
    """
    events: List[int] = []
    previous: Optional[int] = None
    for idx in detected:
        idx = int(idx)
        if previous is None or idx - previous > 1 or idx - events[-1] >= tolerance:
            events.append(idx)
        previous = idx
    return events


def _within(detection: int, truth: int, tolerance: int, symmetric: bool) -> bool:
    if symmetric:
        return abs(detection - truth) <= tolerance
    return truth <= detection <= truth + tolerance


def match_detections(
    detected: Sequence[int],
    truth: Sequence[int],
    series_len: int,
    symmetric: bool = False,
    warmup: int = 0,
    collapse: bool = True,
) -> DetectionScore:
    """Greedy chronological matching of detection events to breakpoints.

    A detection matches the earliest unmatched breakpoint it falls within
    ``ceil(0.05 * series_len)`` samples after (or around, when ``symmetric``).
    TN counts unflagged steps from ``warmup`` on that lie outside every
    breakpoint window.
    """
    if series_len < 1:
        raise ValueError(f"series_len must be positive, got {series_len}")
    detected = _check_indices("detected", detected, series_len)
    truth = _check_indices("truth", truth, series_len)
    tolerance = tolerance_for(series_len)
    events = collapse_detections(detected, tolerance) if collapse else list(detected)

    score = DetectionScore(detected_count_histogram={len(events): 1})
    matched = [False] * len(truth)
    for event in events:
        for i, point in enumerate(truth):
            if not matched[i] and _within(event, point, tolerance, symmetric):
                matched[i] = True
                score.tp += 1
                score.delays.append(event - point)
                break
        else:
            score.fp += 1
    score.fn = len(truth) - score.tp

    near_truth = np.zeros(series_len, dtype=bool)
    for point in truth:
        start = max(0, point - tolerance) if symmetric else point
        near_truth[start:min(series_len, point + tolerance + 1)] = True
    flagged = np.zeros(series_len, dtype=bool)
    flagged[np.asarray(detected, dtype=int)] = True
    eligible = np.arange(series_len) >= warmup
    score.tn = int(np.count_nonzero(eligible & ~flagged & ~near_truth))
    return score


def _ratio(numerator: int, denominator: int) -> Optional[float]:
    return numerator / denominator if denominator else None


def rates(score: DetectionScore) -> Dict[str, Optional[float]]:
    """Hit, missed, false-alarm and specificity; ``None`` where the denominator is zero."""
    hit = _ratio(score.tp, score.tp + score.fn)
    return {
        "hit": hit,
        "missed": None if hit is None else 1.0 - hit,
        "false_alarm": _ratio(score.fp, score.fp + score.tn),
        "specificity": _ratio(score.tn, score.tn + score.fp),
    }


@dataclass
class DetectionAggregate:
    """Trial aggregate: pooled counts and per-trial means, reported side by side."""
    trials: int
    pooled: DetectionScore
    pooled_rates: Dict[str, Optional[float]]
    mean_rates: Dict[str, Optional[float]]
    delay_mean: Optional[float]
    delay_std: Optional[float]


def aggregate_scores(scores: Sequence[DetectionScore]) -> DetectionAggregate:
    pooled = DetectionScore()
    for score in scores:
        pooled = pooled + score
    per_trial = [rates(s) for s in scores]
    mean_rates: Dict[str, Optional[float]] = {}
    for name in RATE_NAMES:
        defined = [r[name] for r in per_trial if r[name] is not None]
        mean_rates[name] = float(np.mean(defined)) if defined else None
    delays = np.asarray(pooled.delays, dtype=np.float64)
    return DetectionAggregate(
        trials=len(scores),
        pooled=pooled,
        pooled_rates=rates(pooled),
        mean_rates=mean_rates,
        delay_mean=float(delays.mean()) if delays.size else None,
        delay_std=float(delays.std()) if delays.size else None,
    )
