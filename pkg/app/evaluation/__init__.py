from app.evaluation.detection import (
    DetectionAggregate,
    DetectionScore,
    aggregate_scores,
    collapse_detections,
    match_detections,
    rates,
    tolerance_for,
)
from app.evaluation.prediction import PredictionScore, aggregate_predictions, mean_std, prediction_score

__all__ = [
    "DetectionAggregate",
    "DetectionScore",
    "aggregate_scores",
    "collapse_detections",
    "match_detections",
    "rates",
    "tolerance_for",
    "PredictionScore",
    "aggregate_predictions",
    "mean_std",
    "prediction_score",
]
