import itertools

import numpy as np
import pytest

from app.evaluation import (
    DetectionScore,
    aggregate_predictions,
    aggregate_scores,
    collapse_detections,
    match_detections,
    prediction_score,
    rates,
    tolerance_for,
)
from app.evaluation.reports import DETECTION_TRIAL_COLUMNS, detection_trial_row, read_table, write_table


def _best_assignment_tp(events, truth, tolerance):
    """Largest number of one-to-one event/breakpoint pairs over every assignment."""
    best = 0
    for perm in itertools.permutations(range(len(events)), min(len(events), len(truth))):
        tp = sum(1 for i, e in zip(range(len(truth)), perm) if truth[i] <= events[e] <= truth[i] + tolerance)
        best = max(best, tp)
    return best


# ===== match_detections =====

def test_single_match_with_delay():
    score = match_detections([405], [400], 1000)
    assert (score.tp, score.fp, score.fn) == (1, 0, 0)
    assert score.delays == [5]


def test_missed_breakpoint():
    score = match_detections([], [400], 1000)
    assert (score.tp, score.fn) == (0, 1)
    assert rates(score)["hit"] == 0.0


def test_mixed_detections_match_exhaustive_oracle():
    detected, truth = [100, 405, 900], [400, 700]
    score = match_detections(detected, truth, 1000)
    assert (score.tp, score.fp, score.fn) == (1, 2, 1)
    assert score.tp == _best_assignment_tp(detected, truth, tolerance_for(1000))


def test_tolerance_is_five_percent_rounded_up():
    assert tolerance_for(1000) == 50
    assert tolerance_for(30) == 2


def test_detection_before_breakpoint_is_false_positive():
    score = match_detections([399], [400], 1000)
    assert (score.tp, score.fp, score.fn) == (0, 1, 1)


def test_detection_past_tolerance_is_false_positive():
    assert match_detections([451], [400], 1000).tp == 0
    assert match_detections([450], [400], 1000).tp == 1


def test_symmetric_window_accepts_early_detection():
    score = match_detections([390], [400], 1000, symmetric=True)
    assert score.tp == 1
    assert score.delays == [-10]


def test_each_breakpoint_matched_once():
    score = match_detections([405, 410], [400], 1000, collapse=False)
    assert (score.tp, score.fp) == (1, 1)


def test_consecutive_flags_collapse_to_one_event():
    assert collapse_detections([405, 406, 407, 470], 50) == [405, 470]
    score = match_detections([405, 406, 407], [400], 1000)
    assert (score.tp, score.fp) == (1, 0)
    assert score.detected_count_histogram == {1: 1}


def test_separated_flags_are_separate_events():
    assert collapse_detections([395, 405], 50) == [395, 405]
    score = match_detections([395, 405], [400], 1000)
    assert (score.tp, score.fp, score.fn) == (1, 1, 0)
    assert score.delays == [5]


def test_long_run_splits_every_tolerance_steps():
    assert collapse_detections(list(range(100, 230)), 50) == [100, 150, 200]


def test_true_negatives_exclude_truth_windows_and_flags():
    score = match_detections([405, 800], [400], 1000)
    # 51 steps in [400, 450] plus the flag at 800
    assert score.tn == 1000 - 51 - 1


def test_warmup_steps_are_not_negatives():
    score = match_detections([], [], 100, warmup=10)
    assert score.tn == 90


def test_permuting_false_positives_does_not_change_score(rng):
    detected = [50, 120, 405, 600, 900]
    base = match_detections(detected, [400, 700], 1000)
    shuffled = sorted(rng.permutation(detected).tolist())
    again = match_detections(shuffled, [400, 700], 1000)
    assert (base.tp, base.fp, base.tn, base.fn) == (again.tp, again.fp, again.tn, again.fn)


def test_unsorted_indices_rejected():
    with pytest.raises(ValueError):
        match_detections([500, 400], [400], 1000)
    with pytest.raises(ValueError):
        match_detections([1000], [400], 1000)


# ===== rates =====

def test_hit_rate():
    assert rates(DetectionScore(tp=98, fn=2))["hit"] == pytest.approx(0.98)


def test_empty_denominator_is_undefined():
    result = rates(DetectionScore())
    assert result["hit"] is None
    assert result["missed"] is None


def test_false_alarm_and_specificity_complement():
    result = rates(DetectionScore(fp=5, tn=95))
    assert result["false_alarm"] == pytest.approx(0.05)
    assert result["specificity"] == pytest.approx(0.95)


def test_hit_plus_missed_is_one():
    result = rates(DetectionScore(tp=3, fn=4))
    assert result["hit"] + result["missed"] == pytest.approx(1.0)


# ===== aggregation =====

def test_pooled_rates_use_pooled_counts():
    scores = [DetectionScore(tp=1, fn=0, fp=0, tn=10, delays=[4]),
              DetectionScore(tp=1, fn=3, fp=2, tn=8, delays=[10])]
    aggregate = aggregate_scores(scores)
    assert aggregate.pooled_rates["hit"] == pytest.approx(2 / 5)
    assert aggregate.mean_rates["hit"] == pytest.approx((1.0 + 0.25) / 2)
    assert aggregate.delay_mean == pytest.approx(7.0)
    assert aggregate.delay_std == pytest.approx(3.0)


def test_histogram_counts_trials():
    scores = [match_detections(d, [400, 700], 1000) for d in ([405, 705], [405], [405, 705])]
    assert aggregate_scores(scores).pooled.detected_count_histogram == {1: 1, 2: 2}


def test_undefined_rates_written_as_na(tmp_path):
    row = detection_trial_row(0, 1, DetectionScore(), 0.5)
    path = write_table([row], DETECTION_TRIAL_COLUMNS, tmp_path / "trials.csv")
    text = path.read_text()
    assert "n/a" in text
    assert "nan" not in text.lower().replace("n/a", "")
    assert read_table(path)["hit"].isna().all()


# ===== prediction_score =====

def test_perfect_predictions():
    score = prediction_score([1.0, 2.0], [1.0, 2.0], [False, False], 0.1)
    assert score.overall_mse == 0.0


def test_percent_update():
    flags = [True] * 15 + [False] * 85
    score = prediction_score(np.zeros(100), np.zeros(100), flags, 0.0)
    assert score.percent_update == 15.0
    assert score.updates == 15


def test_trajectory_ends_at_overall_mse(rng):
    predictions, targets = rng.normal(size=1000), rng.normal(size=1000)
    score = prediction_score(predictions, targets, np.zeros(1000, dtype=bool), 1.0)
    oracle = sum((p - t) ** 2 for p, t in zip(predictions, targets)) / 1000
    assert score.overall_mse == pytest.approx(oracle, rel=1e-12)
    assert score.mse_trajectory[-1] == pytest.approx(score.overall_mse, abs=1e-12)
    assert score.mse_trajectory[0] == pytest.approx((predictions[0] - targets[0]) ** 2)


def test_length_mismatch_rejected():
    with pytest.raises(ValueError):
        prediction_score([1.0], [1.0, 2.0], [False], 0.0)


def test_aggregate_predictions():
    scores = [prediction_score([0.0], [1.0], [True], 1.0), prediction_score([0.0], [3.0], [False], 3.0)]
    summary = aggregate_predictions(scores)
    assert summary["overall_mse"] == {"mean": 5.0, "std": 4.0}
    assert summary["percent_update"]["mean"] == 50.0
