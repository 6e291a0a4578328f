"""Trial runners for the detection, prediction and timing experiments."""
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Dict, List, Optional, TypeVar

import numpy as np

from app.adaptation import AdaptationReport, ReplayAdapter
from app.datagen import build_preset, generate, load_csv, minmax_scale, read_noise, split_chronological
from app.datagen.io import Normalization
from app.detector import DetectionOutcome, SafeDetector, flagged_indices
from app.evaluation import DetectionScore, PredictionScore, aggregate_scores, match_detections, prediction_score
from app.predictors import FrozenPredictor, build_predictor, embed
from app.schemas.adaptation import AdaptationMode
from app.schemas.detector import DetectorConfig, FeatureKind
from app.schemas.experiment import ExperimentConfig
from app.schemas.predictor import PredictorKind
from app.schemas.series import LabeledSeries

logger = logging.getLogger(__name__)

T = TypeVar("T")


def resolve_series(config: ExperimentConfig, seed: int) -> LabeledSeries:
    """Series for one trial; generated sources are re-seeded per trial."""
    source = config.series
    if source.csv_path is not None:
        series = load_csv(source.csv_path, column=source.column)
        return series.model_copy(update={"breakpoints": list(source.breakpoints)})
    spec = build_preset(source.process, seed=seed, alpha=source.alpha) if source.process else source.spec
    spec = spec.model_copy(update={"seed": seed})
    noise = read_noise(source.noise_path) if source.noise_path is not None else None
    return generate(spec, noise=noise)


def run_trials(
    runner: Callable[[ExperimentConfig, int], T], config: ExperimentConfig, workers: Optional[int] = None
) -> List[T]:
    """Results ordered by trial index whatever the worker count."""
    workers = workers or config.workers
    indices = range(config.trials)
    if workers <= 1 or config.trials == 1:
        return [runner(config, i) for i in indices]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(partial(runner, config), indices))


# ===== Detection =====

@dataclass
class DetectionTrial:
    trial: int
    seed: int
    score: DetectionScore
    wall_s: float
    time_per_step: float
    flagged: List[int]
    values: List[float] = field(default_factory=list)
    outcomes: List[DetectionOutcome] = field(default_factory=list)
    breakpoints: List[int] = field(default_factory=list)


def run_detection_trial(config: ExperimentConfig, trial_index: int, keep_trace: bool = False) -> DetectionTrial:
    seed = config.trial_seed(trial_index)
    series = resolve_series(config, seed)
    detector = SafeDetector(config.detector)

    started = time.perf_counter()
    outcomes = detector.run(series.values)
    wall = time.perf_counter() - started

    flagged = flagged_indices(outcomes)
    score = match_detections(
        flagged, series.breakpoints, len(series),
        symmetric=config.symmetric_window,
        warmup=config.detector.warmup,
        collapse=config.collapse_events,
    )
    logger.debug("detection trial %d (seed %d): tp=%d fp=%d fn=%d", trial_index, seed, score.tp, score.fp, score.fn)
    return DetectionTrial(
        trial=trial_index,
        seed=seed,
        score=score,
        wall_s=wall,
        time_per_step=wall / len(series),
        flagged=flagged,
        values=series.values if keep_trace else [],
        outcomes=outcomes if keep_trace else [],
        breakpoints=series.breakpoints,
    )


# ===== Prediction =====

@dataclass
class PredictionTrial:
    trial: int
    seed: int
    predictor: str
    adaptive: PredictionScore
    baseline: PredictionScore
    test_start: int
    targets: np.ndarray
    predictions: np.ndarray
    baseline_predictions: np.ndarray
    reports: List[AdaptationReport] = field(default_factory=list)
    breakpoints: List[int] = field(default_factory=list)


def prepare_prediction_data(config: ExperimentConfig, series: LabeledSeries):
    """Normalize on the training range, then split chronologically."""
    n_train = int(round(len(series) * config.split.train_frac))
    if Normalization(config.split.normalization) == Normalization.MINMAX:
        scaled, _ = minmax_scale(series.array, fit_range=(0, max(n_train, 1)))
        series = series.model_copy(update={"values": scaled.tolist()})
    train, val, test = split_chronological(series, config.split.train_frac, config.split.val_frac)
    return series, len(train), len(train) + len(val)


def run_prediction_trial(config: ExperimentConfig, trial_index: int) -> PredictionTrial:
    """Offline fit, frozen baseline copy, then the test split streamed through detector and adapter."""
    seed = config.trial_seed(trial_index)
    series, val_start, test_start = prepare_prediction_data(config, resolve_series(config, seed))
    values = series.array
    order = config.predictor.lag_order
    if val_start <= order:
        raise ValueError(f"training split of {val_start} samples is too short for lag order {order}")

    inputs, targets, target_t = embed(values, order)
    train_mask = target_t < val_start
    val_mask = (target_t >= val_start) & (target_t < test_start)

    kind = PredictorKind(config.predictor.kind)
    trained_kind = PredictorKind.MLP if kind == PredictorKind.BASELINE else kind
    predictor_config = config.predictor.model_copy(update={"kind": trained_kind})
    for family in ("par", "ksvr", "mlp"):
        family_config = getattr(predictor_config, family)
        if "seed" in type(family_config).model_fields:
            predictor_config = predictor_config.model_copy(
                update={family: family_config.model_copy(update={"seed": family_config.seed + seed})}
            )
    predictor = build_predictor(predictor_config)
    offline = predictor.fit_batch(
        inputs[train_mask], targets[train_mask], inputs[val_mask], targets[val_mask],
        config.predictor.offline_policy,
    )
    logger.info("trial %d: offline %s fit ran %d epochs (val mse %.4g)",
                trial_index, trained_kind.value, offline.epochs_run, offline.val_after)

    frozen = FrozenPredictor.from_predictor(predictor)
    adaptation = config.adaptation
    if kind == PredictorKind.BASELINE:
        predictor = frozen
        adaptation = adaptation.model_copy(update={"mode": AdaptationMode.NONE})

    detector = SafeDetector(config.detector)
    detector.run(values[:test_start])
    adapter = ReplayAdapter(predictor, adaptation)
    for x, y, t in zip(inputs[target_t < test_start], targets[target_t < test_start], target_t[target_t < test_start]):
        adapter.push(int(t), x, float(y))

    steps = range(test_start, len(values))
    adaptive_predictions, baseline_predictions = [], []
    baseline_time = 0.0
    started = time.perf_counter()
    for t in steps:
        x = values[t - order:t]
        adaptive_predictions.append(predictor.predict(x))
        tick = time.perf_counter()
        baseline_predictions.append(frozen.predict(x))
        baseline_time += time.perf_counter() - tick
        adapter.push(t, x, float(values[t]))
        adapter.observe(detector.step(float(values[t])), t=t)
    wall = time.perf_counter() - started - baseline_time

    test_targets = values[test_start:]
    adaptive = prediction_score(adaptive_predictions, test_targets, adapter.update_flags(list(steps)), wall)
    baseline = prediction_score(baseline_predictions, test_targets, [False] * len(test_targets), baseline_time)
    logger.info("trial %d: %s mse %.4g (baseline %.4g), %.2f%% updates",
                trial_index, kind.value, adaptive.overall_mse, baseline.overall_mse, adaptive.percent_update)
    return PredictionTrial(
        trial=trial_index,
        seed=seed,
        predictor=kind.value,
        adaptive=adaptive,
        baseline=baseline,
        test_start=test_start,
        targets=test_targets,
        predictions=np.asarray(adaptive_predictions),
        baseline_predictions=np.asarray(baseline_predictions),
        reports=adapter.reports,
        breakpoints=series.breakpoints,
    )


# ===== Timing =====

BENCH_FEATURES = (FeatureKind.SPECTRAL_ENERGY, FeatureKind.TIME_DOMAIN)


def bench_detector_config(config: ExperimentConfig, feature_kind: FeatureKind) -> DetectorConfig:
    base = config.detector
    return DetectorConfig.defaults_for(
        base.distance, feature_kind,
        lam=base.lam, sma_window=base.sma_window, sigma_window=base.sigma_window,
        stft_window=max(base.stft_window, 4) if feature_kind == FeatureKind.TIME_DOMAIN else base.stft_window,
    )


def run_bench_trial(config: ExperimentConfig, trial_index: int) -> Dict[str, float]:
    """Seconds per step of the feature, distance and chart pipeline for each feature kind."""
    series = resolve_series(config, config.trial_seed(trial_index))
    timings = {}
    for kind in BENCH_FEATURES:
        detector = SafeDetector(bench_detector_config(config, kind))
        started = time.perf_counter()
        detector.run(series.values)
        timings[kind.value] = (time.perf_counter() - started) / len(series)
    return timings


# ===== Calibration =====

@dataclass
class CalibrationStep:
    warning_mult: float
    trigger_mult: float
    false_alarm: Optional[float]
    hit: Optional[float]


@dataclass
class Calibration:
    """Multiplier pair whose pooled false-alarm rate came closest to the target."""
    warning_mult: float
    trigger_mult: float
    false_alarm: Optional[float]
    hit: Optional[float]
    steps: List[CalibrationStep] = field(default_factory=list)


def with_multipliers(config: ExperimentConfig, warning_mult: float, trigger_mult: float) -> ExperimentConfig:
    detector = config.detector.model_copy(update={"warning_mult": warning_mult, "trigger_mult": trigger_mult})
    return config.model_copy(update={"detector": detector})


def calibrate_multipliers(
    config: ExperimentConfig,
    target_false_alarm: float = 0.05,
    gap: float = 0.5,
    low: float = 0.05,
    high: float = 6.0,
    iterations: int = 10,
) -> Calibration:
    """Bisect the warning multiplier, trigger fixed ``gap`` above it, towards a pooled false-alarm target.

    The false-alarm rate falls as the multipliers rise, so each round halves
    the bracket. Every round replays the same seeded trials.
    """
    if not 0 < target_false_alarm < 1:
        raise ValueError(f"target false-alarm rate must be in (0, 1), got {target_false_alarm}")
    if not 0 < low < high:
        raise ValueError(f"need 0 < low < high, got low={low} high={high}")
    steps: List[CalibrationStep] = []
    for _ in range(iterations):
        mid = (low + high) / 2
        trial_config = with_multipliers(config, mid, mid + gap)
        aggregate = aggregate_scores([t.score for t in run_trials(run_detection_trial, trial_config)])
        false_alarm = aggregate.pooled_rates["false_alarm"]
        steps.append(CalibrationStep(mid, mid + gap, false_alarm, aggregate.pooled_rates["hit"]))
        logger.info("calibration W=%.4f T=%.4f: false alarm %s", mid, mid + gap, false_alarm)
        if false_alarm is not None and false_alarm > target_false_alarm:
            low = mid
        else:
            high = mid

    scored = [s for s in steps if s.false_alarm is not None]
    best = min(scored or steps, key=lambda s: abs((s.false_alarm or 0.0) - target_false_alarm))
    return Calibration(best.warning_mult, best.trigger_mult, best.false_alarm, best.hit, steps)
