"""Prediction quality of one streamed run."""
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np


@dataclass
class PredictionScore:
    overall_mse: float
    mse_trajectory: np.ndarray
    percent_update: float
    exec_time_s: float
    updates: int = 0
    eligible_steps: int = 0


def prediction_score(
    predictions: Sequence[float],
    targets: Sequence[float],
    update_flags: Sequence[bool],
    wall_time: float,
) -> PredictionScore:
    """Overall MSE, its running-mean trajectory and the share of steps that updated."""
    predictions = np.asarray(predictions, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    flags = np.asarray(update_flags, dtype=bool)
    if not (len(predictions) == len(targets) == len(flags)):
        raise ValueError(
            f"length mismatch: {len(predictions)} predictions, {len(targets)} targets, {len(flags)} flags"
        )
    if len(predictions) == 0:
        raise ValueError("cannot score an empty prediction run")

    squared = (predictions - targets) ** 2
    trajectory = np.cumsum(squared) / np.arange(1, len(squared) + 1)
    updates = int(np.count_nonzero(flags))
    return PredictionScore(
        overall_mse=float(np.mean(squared)),
        mse_trajectory=trajectory,
        percent_update=100.0 * updates / len(flags),
        exec_time_s=float(wall_time),
        updates=updates,
        eligible_steps=len(flags),
    )


def mean_std(values: Sequence[float]) -> Dict[str, Optional[float]]:
    data = np.asarray(values, dtype=np.float64)
    if data.size == 0:
        return {"mean": None, "std": None}
    return {"mean": float(data.mean()), "std": float(data.std())}


def aggregate_predictions(scores: Sequence[PredictionScore]) -> Dict[str, Dict[str, Optional[float]]]:
    return {
        "overall_mse": mean_std([s.overall_mse for s in scores]),
        "percent_update": mean_std([s.percent_update for s in scores]),
        "exec_time_s": mean_std([s.exec_time_s for s in scores]),
    }
