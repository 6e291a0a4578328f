"""Per-trial and aggregate CSV tables; undefined rates are written as ``n/a``."""
from pathlib import Path
from typing import Dict, Mapping, Optional, Sequence, Union

import pandas as pd

from app.evaluation.detection import DetectionAggregate, DetectionScore, rates
from app.evaluation.prediction import PredictionScore

NA = "n/a"

DETECTION_TRIAL_COLUMNS = [
    "trial", "seed", "tp", "fp", "tn", "fn", "hit", "missed", "false_alarm", "specificity",
    "detections", "delays", "wall_s",
]
DETECTION_SUMMARY_COLUMNS = [
    "label", "trials", "tp", "fp", "tn", "fn",
    "hit_pooled", "false_alarm_pooled", "specificity_pooled", "missed_pooled",
    "hit_mean", "false_alarm_mean", "specificity_mean", "missed_mean",
    "delay_mean", "delay_std", "time_per_step_mean", "time_per_step_std",
]
HISTOGRAM_COLUMNS = ["label", "detections", "trials"]
CALIBRATION_COLUMNS = ["warning_mult", "trigger_mult", "false_alarm", "hit", "selected"]
PREDICTION_TRIAL_COLUMNS = ["trial", "seed", "predictor", "overall_mse", "percent_update", "updates", "exec_time_s"]
PREDICTION_SUMMARY_COLUMNS = [
    "label", "predictor", "trials", "mse_mean", "mse_std",
    "percent_update_mean", "percent_update_std", "exec_time_mean", "exec_time_std",
]


def detection_trial_row(trial: int, seed: int, score: DetectionScore, wall_s: float) -> Dict:
    return {
        "trial": trial,
        "seed": seed,
        "tp": score.tp,
        "fp": score.fp,
        "tn": score.tn,
        "fn": score.fn,
        **rates(score),
        "detections": sum(k * v for k, v in score.detected_count_histogram.items()),
        "delays": " ".join(str(d) for d in score.delays),
        "wall_s": wall_s,
    }


def detection_summary_row(
    label: str, aggregate: DetectionAggregate, timing: Optional[Mapping[str, Optional[float]]] = None
) -> Dict:
    timing = timing or {}
    row = {
        "label": label,
        "trials": aggregate.trials,
        "tp": aggregate.pooled.tp,
        "fp": aggregate.pooled.fp,
        "tn": aggregate.pooled.tn,
        "fn": aggregate.pooled.fn,
        "delay_mean": aggregate.delay_mean,
        "delay_std": aggregate.delay_std,
        "time_per_step_mean": timing.get("mean"),
        "time_per_step_std": timing.get("std"),
    }
    for name, value in aggregate.pooled_rates.items():
        row[f"{name}_pooled"] = value
    for name, value in aggregate.mean_rates.items():
        row[f"{name}_mean"] = value
    return row


def histogram_rows(label: str, aggregate: DetectionAggregate) -> Sequence[Dict]:
    return [
        {"label": label, "detections": count, "trials": trials}
        for count, trials in sorted(aggregate.pooled.detected_count_histogram.items())
    ]


def prediction_trial_row(trial: int, seed: int, predictor: str, score: PredictionScore) -> Dict:
    return {
        "trial": trial,
        "seed": seed,
        "predictor": predictor,
        "overall_mse": score.overall_mse,
        "percent_update": score.percent_update,
        "updates": score.updates,
        "exec_time_s": score.exec_time_s,
    }


def write_table(rows: Sequence[Dict], columns: Sequence[str], path: Union[str, Path]) -> Path:
    path = Path(path)
    frame = pd.DataFrame(list(rows), columns=list(columns))
    frame.to_csv(path, index=False, na_rep=NA, float_format="%.10g", lineterminator="\n")
    return path


def read_table(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path, na_values=[NA], keep_default_na=False)
