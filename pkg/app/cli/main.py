"""Command-line harness: ``python -m app.cli <generate|detect|calibrate|predict|bench|report>``."""
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from pydantic import ValidationError

from app.adaptation import write_adaptation_log
from app.cli import plots
from app.cli.experiments import (
    BENCH_FEATURES,
    calibrate_multipliers,
    run_bench_trial,
    run_detection_trial,
    run_prediction_trial,
    run_trials,
)
from app.cli.manifest import prepare_output_dir, read_manifest, record_run, write_manifest
from app.core.config import settings
from app.core.exceptions import AcceptanceError, ConfigurationError, SafeError
from app.core.logging import configure_logging
from app.datagen import PROCESS_PRESETS, build_preset, generate, read_noise, write_breakpoints, write_series_csv
from app.detector import write_trace, trace_frame
from app.evaluation import aggregate_predictions, aggregate_scores, mean_std
from app.evaluation.reports import (
    CALIBRATION_COLUMNS,
    DETECTION_SUMMARY_COLUMNS,
    DETECTION_TRIAL_COLUMNS,
    HISTOGRAM_COLUMNS,
    PREDICTION_SUMMARY_COLUMNS,
    PREDICTION_TRIAL_COLUMNS,
    detection_summary_row,
    detection_trial_row,
    histogram_rows,
    prediction_trial_row,
    read_table,
    write_table,
)
from app.features.extractors import dump_features, feature_stream
from app.schemas.adaptation import AdaptationMode
from app.schemas.detector import DistanceKind, FeatureKind
from app.schemas.experiment import PREDICTION_DETECTOR, ExperimentConfig, load_experiment_config
from app.schemas.predictor import PredictorKind
from app.schemas.series import SegmentedProcessSpec

logger = logging.getLogger(__name__)

RECIPES_DIR = Path(__file__).parent / "recipes"


def _out_dir(args: argparse.Namespace, default_name: str) -> Path:
    return Path(args.out) if args.out else settings.OUTPUT_DIR / default_name


def _experiment_out(args: argparse.Namespace, config: ExperimentConfig, command: str) -> Path:
    return Path(args.out) if args.out else Path(config.output_dir) / f"{config.name}-{command}"


def _config_echo(config: ExperimentConfig) -> Dict[str, Any]:
    return config.model_dump(mode="json", by_alias=True)


# ===== Config assembly =====

def _set(target: Dict[str, Any], dotted: str, value: Any) -> None:
    keys = dotted.split(".")
    for key in keys[:-1]:
        target = target.setdefault(key, {})
    target[keys[-1]] = value


FLAG_FIELDS = {
    "process": "series.process",
    "alpha": "series.alpha",
    "csv": "series.csv_path",
    "column": "series.column",
    "noise": "series.noise_path",
    "distance": "detector.distance",
    "feature_kind": "detector.feature_kind",
    "lam": "detector.lambda",
    "warning_mult": "detector.warning_mult",
    "trigger_mult": "detector.trigger_mult",
    "warning_duration": "detector.warning_duration",
    "sma_window": "detector.sma_window",
    "sigma_window": "detector.sigma_window",
    "stft_window": "detector.stft_window",
    "predictor": "predictor.kind",
    "lag_order": "predictor.lag_order",
    "mode": "adaptation.mode",
    "beta": "adaptation.beta",
    "u_min": "adaptation.u_min",
    "u_max": "adaptation.u_max",
    "validation_pairs": "adaptation.validation_pairs",
    "trials": "trials",
    "seed": "base_seed",
    "workers": "workers",
}


def experiment_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Nested overrides for every flag the user actually passed."""
    overrides: Dict[str, Any] = {}
    for attr, dotted in FLAG_FIELDS.items():
        value = getattr(args, attr, None)
        if value is not None:
            _set(overrides, dotted, value)
    if getattr(args, "breakpoints", None):
        _set(overrides, "series.breakpoints", [int(b) for b in args.breakpoints.split(",") if b.strip()])
    if getattr(args, "symmetric_window", False):
        overrides["symmetric_window"] = True
    if getattr(args, "no_collapse", False):
        overrides["collapse_events"] = False
    # A source on the command line replaces the one from the config file
    sources = [k for k in ("process", "spec", "csv_path") if k in overrides.get("series", {})]
    if sources:
        for key in ("process", "spec", "csv_path"):
            overrides["series"].setdefault(key, None)
    return overrides


def load_config(args: argparse.Namespace, defaults: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    path = args.config
    if args.recipe:
        path = RECIPES_DIR / f"{args.recipe}.json"
    return load_experiment_config(path, experiment_overrides(args), defaults)


# ===== Commands =====

def cmd_generate(args: argparse.Namespace) -> None:
    if args.spec:
        spec_path = Path(args.spec)
        if not spec_path.exists():
            raise ConfigurationError(f"spec file not found: {spec_path}")
        spec = SegmentedProcessSpec.model_validate_json(spec_path.read_text(encoding="utf-8"))
        if args.seed is not None:
            spec = spec.model_copy(update={"seed": args.seed})
    elif args.process:
        spec = build_preset(args.process, seed=args.seed if args.seed is not None else settings.DEFAULT_SEED,
                            alpha=args.alpha)
    else:
        raise ConfigurationError("generate needs --process or --spec")

    noise = read_noise(args.noise) if args.noise else None
    series = generate(spec, noise=noise)
    out = prepare_output_dir(_out_dir(args, f"{spec.name}-seed{spec.seed}"))

    artifacts = [
        write_series_csv(series, out / "series.csv"),
        write_breakpoints(series, out / "breakpoints.txt"),
    ]
    spec_echo = out / "spec.json"
    spec_echo.write_text(spec.model_dump_json(indent=2) + "\n", encoding="utf-8")
    artifacts.append(spec_echo)
    if args.features:
        kind = FeatureKind(args.features)
        window = args.stft_window or 5
        artifacts.append(dump_features(series.values, window, kind, out / "features.csv"))
        artifacts.append(plots.plot_feature_evolution(
            series.values, feature_stream(series.values, window, kind), out / "features.svg", series.breakpoints))

    config = {"spec": spec.model_dump(mode="json"), "noise": str(args.noise) if args.noise else None}
    sha = write_manifest(out, "generate", config, [spec.seed], artifacts)
    record_run("generate", spec.name, out, config, sha, [])
    print(f"{len(series)} samples, breakpoints {series.breakpoints} -> {out}")


def cmd_detect(args: argparse.Namespace) -> None:
    config = load_config(args)
    out = prepare_output_dir(_experiment_out(args, config, "detect"))
    logger.info("detect: %d trial(s) on %s", config.trials, out)

    trials = run_trials(run_detection_trial, config)
    first = run_detection_trial(config, 0, keep_trace=True)
    aggregate = aggregate_scores([t.score for t in trials])
    timing = mean_std([t.time_per_step for t in trials])
    label = f"{config.detector.feature_kind.value}/{config.detector.distance.value}"

    trial_rows = [detection_trial_row(t.trial, t.seed, t.score, t.wall_s) for t in trials]
    artifacts = [
        write_trace(first.values, first.outcomes, out / "trace.csv"),
        write_table(trial_rows, DETECTION_TRIAL_COLUMNS, out / "trials.csv"),
        write_table([detection_summary_row(label, aggregate, timing)], DETECTION_SUMMARY_COLUMNS, out / "summary.csv"),
        write_table(histogram_rows(label, aggregate), HISTOGRAM_COLUMNS, out / "histogram.csv"),
    ]
    plots.plot_detection_trace(trace_frame(first.values, first.outcomes), first.breakpoints, out / "trace.svg")

    seeds = [t.seed for t in trials]
    sha = write_manifest(out, "detect", _config_echo(config), seeds, artifacts)
    record_run("detect", config.name, out, _config_echo(config), sha, trial_rows)

    pooled = aggregate.pooled_rates
    print(f"{label}: hit {pooled['hit']}, false alarm {pooled['false_alarm']} over {config.trials} trial(s) -> {out}")
    _check_gates(args, hit=pooled["hit"], false_alarm=pooled["false_alarm"])


def cmd_calibrate(args: argparse.Namespace) -> None:
    config = load_config(args)
    out = prepare_output_dir(_experiment_out(args, config, "calibrate"))
    logger.info("calibrate: %d trial(s) per round towards false alarm %s", config.trials, args.target_false_alarm)

    result = calibrate_multipliers(config, target_false_alarm=args.target_false_alarm, gap=args.gap,
                                   iterations=args.iterations)
    rows = [
        {
            "warning_mult": s.warning_mult,
            "trigger_mult": s.trigger_mult,
            "false_alarm": s.false_alarm,
            "hit": s.hit,
            "selected": int(s.warning_mult == result.warning_mult),
        }
        for s in result.steps
    ]
    artifacts = [write_table(rows, CALIBRATION_COLUMNS, out / "calibration.csv")]
    seeds = [config.trial_seed(i) for i in range(config.trials)]
    echo = {**_config_echo(config), "target_false_alarm": args.target_false_alarm, "gap": args.gap}
    sha = write_manifest(out, "calibrate", echo, seeds, artifacts)
    record_run("calibrate", config.name, out, echo, sha, [])

    label = f"{config.detector.feature_kind.value}/{config.detector.distance.value}"
    print(f"{label}: warning {result.warning_mult:.4f}, trigger {result.trigger_mult:.4f} "
          f"(false alarm {result.false_alarm}, hit {result.hit}) -> {out}")


def cmd_predict(args: argparse.Namespace) -> None:
    config = load_config(args, defaults={"detector": dict(PREDICTION_DETECTOR)})
    out = prepare_output_dir(_experiment_out(args, config, "predict"))
    logger.info("predict: %d trial(s) with %s on %s", config.trials, config.predictor.kind.value, out)

    trials = run_trials(run_prediction_trial, config)
    kind = config.predictor.kind.value
    rows = []
    for t in trials:
        rows.append(prediction_trial_row(t.trial, t.seed, kind, t.adaptive))
        rows.append(prediction_trial_row(t.trial, t.seed, "baseline", t.baseline))
    summary = []
    for label, scores in ((kind, [t.adaptive for t in trials]), ("baseline", [t.baseline for t in trials])):
        stats = aggregate_predictions(scores)
        summary.append({
            "label": config.name, "predictor": label, "trials": len(scores),
            "mse_mean": stats["overall_mse"]["mean"], "mse_std": stats["overall_mse"]["std"],
            "percent_update_mean": stats["percent_update"]["mean"],
            "percent_update_std": stats["percent_update"]["std"],
            "exec_time_mean": stats["exec_time_s"]["mean"], "exec_time_std": stats["exec_time_s"]["std"],
        })

    first = trials[0]
    index = np.arange(first.test_start, first.test_start + len(first.targets))
    trajectory = pd.DataFrame({
        "t": index,
        "target": first.targets,
        "adapted": first.predictions,
        "baseline": first.baseline_predictions,
        "mse_adapted": first.adaptive.mse_trajectory,
        "mse_baseline": first.baseline.mse_trajectory,
    })
    trajectory_path = out / "mse_trajectory.csv"
    trajectory.to_csv(trajectory_path, index=False, float_format="%.17g", lineterminator="\n")
    artifacts = [
        write_table(rows, PREDICTION_TRIAL_COLUMNS, out / "trials.csv"),
        write_table(summary, PREDICTION_SUMMARY_COLUMNS, out / "summary.csv"),
        trajectory_path,
        write_adaptation_log(first.reports, out / "adaptation_log.csv"),
    ]
    plots.plot_prediction(
        first.targets, first.predictions, first.baseline_predictions,
        first.adaptive.mse_trajectory, first.baseline.mse_trajectory,
        out / "predictions.svg", offset=first.test_start,
    )

    seeds = [t.seed for t in trials]
    sha = write_manifest(out, "predict", _config_echo(config), seeds, artifacts)
    record_run("predict", config.name, out, _config_echo(config), sha, rows[::2])

    improved = sum(1 for t in trials if t.adaptive.overall_mse < t.baseline.overall_mse)
    print(f"{kind}: mse {summary[0]['mse_mean']:.4g} vs baseline {summary[1]['mse_mean']:.4g}, "
          f"improved in {improved}/{len(trials)} trial(s) -> {out}")
    _check_gates(args, improvement=improved / len(trials))


def cmd_bench(args: argparse.Namespace) -> None:
    config = load_config(args)
    out = prepare_output_dir(_experiment_out(args, config, "bench"))
    # Timing runs stay on one worker
    timings = run_trials(run_bench_trial, config, workers=1)
    rows = [{"trial": i, "seed": config.trial_seed(i), **t} for i, t in enumerate(timings)]
    summary = []
    for kind in BENCH_FEATURES:
        stats = mean_std([t[kind.value] for t in timings])
        summary.append({"feature_kind": kind.value, "time_per_step_mean": stats["mean"],
                        "time_per_step_std": stats["std"], "trials": len(timings)})
    spectral, time_domain = summary[0]["time_per_step_mean"], summary[1]["time_per_step_mean"]
    for row in summary:
        row["ratio_to_spectral"] = row["time_per_step_mean"] / spectral if spectral else None

    artifacts = [
        write_table(rows, ["trial", "seed"] + [k.value for k in BENCH_FEATURES], out / "bench.csv"),
        write_table(summary, ["feature_kind", "trials", "time_per_step_mean", "time_per_step_std",
                              "ratio_to_spectral"], out / "bench_summary.csv"),
    ]
    sha = write_manifest(out, "bench", _config_echo(config), [r["seed"] for r in rows], artifacts)
    record_run("bench", config.name, out, _config_echo(config), sha, rows)
    print(f"time_domain / spectral_energy per-step time: {time_domain / spectral:.2f}x -> {out}")


def cmd_report(args: argparse.Namespace) -> None:
    if args.list:
        from app.database import SessionLocal, init_db
        from app.models import ExperimentRun

        init_db()
        db = SessionLocal()
        try:
            runs = db.query(ExperimentRun).order_by(ExperimentRun.id).all()
            for run in runs:
                print(f"{run.id}\t{run.command}\t{run.status.value}\t{run.name}\t{run.output_dir}")
        finally:
            db.close()
        return

    if not args.run:
        raise ConfigurationError("report needs a run directory or --list")
    run_dir = Path(args.run)
    manifest = read_manifest(run_dir)
    print(f"{manifest['command']} run, {len(manifest['seeds'])} seed(s), schema v{manifest['schema_version']}")
    for name in ("summary.csv", "bench_summary.csv", "histogram.csv", "calibration.csv"):
        path = run_dir / name
        if path.exists():
            print(f"\n{name}")
            print(read_table(path).to_string(index=False, na_rep="n/a"))


# ===== Gates =====

def _check_gates(
    args: argparse.Namespace,
    hit: Optional[float] = None,
    false_alarm: Optional[float] = None,
    improvement: Optional[float] = None,
) -> None:
    failures: List[str] = []
    if getattr(args, "gate_hit_rate", None) is not None and (hit is None or hit < args.gate_hit_rate):
        failures.append(f"hit rate {hit} < {args.gate_hit_rate}")
    if getattr(args, "gate_false_alarm", None) is not None and (
        false_alarm is None or false_alarm > args.gate_false_alarm
    ):
        failures.append(f"false-alarm rate {false_alarm} > {args.gate_false_alarm}")
    if getattr(args, "gate_improvement", None) is not None and (
        improvement is None or improvement < args.gate_improvement
    ):
        failures.append(f"improved-trial share {improvement} < {args.gate_improvement}")
    if failures:
        raise AcceptanceError("; ".join(failures))


# ===== Parser =====

def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=str, default=None, help="JSON ExperimentConfig file")
    p.add_argument("--recipe", type=str, choices=sorted(f.stem for f in RECIPES_DIR.glob("*.json")),
                   default=None, help="Bundled config template")
    p.add_argument("--process", type=str, choices=sorted(PROCESS_PRESETS), default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--csv", type=str, default=None, help="Series CSV instead of a generated process")
    p.add_argument("--column", type=str, default=None)
    p.add_argument("--breakpoints", type=str, default=None, help="Ground truth for --csv, e.g. 400,700")
    p.add_argument("--noise", type=str, default=None, help="Pre-drawn standard normals, one per row")
    p.add_argument("--distance", choices=[k.value for k in DistanceKind], default=None)
    p.add_argument("--feature-kind", choices=[k.value for k in FeatureKind], default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--warning-mult", type=float, default=None)
    p.add_argument("--trigger-mult", type=float, default=None)
    p.add_argument("--warning-duration", type=int, default=None)
    p.add_argument("--sma-window", type=int, default=None)
    p.add_argument("--sigma-window", type=int, default=None, help="Prior distances sigma_x is estimated from")
    p.add_argument("--stft-window", type=int, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None, help="Base seed; trial i uses seed + i")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--symmetric-window", action="store_true")
    p.add_argument("--no-collapse", action="store_true", help="Score every flag, not one per event")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="safe", description="Drift detection and adaptive prediction harness")
    ap.add_argument("-v", "--verbose", action="store_true")
    ap.add_argument("-q", "--quiet", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    pg = sub.add_parser("generate", help="Write a generated series, its breakpoints and spec echo")
    pg.add_argument("--process", type=str, choices=sorted(PROCESS_PRESETS), default=None)
    pg.add_argument("--spec", type=str, default=None, help="JSON SegmentedProcessSpec file")
    pg.add_argument("--seed", type=int, default=None)
    pg.add_argument("--alpha", type=float, default=None)
    pg.add_argument("--noise", type=str, default=None)
    pg.add_argument("--features", choices=[k.value for k in FeatureKind], default=None,
                    help="Also dump per-arrival features and their plot")
    pg.add_argument("--stft-window", type=int, default=None)
    pg.add_argument("--out", type=str, default=None)
    pg.set_defaults(func=cmd_generate)

    pd_ = sub.add_parser("detect", help="Run the detector and score it against breakpoints")
    _add_experiment_flags(pd_)
    pd_.add_argument("--gate-hit-rate", type=float, default=None)
    pd_.add_argument("--gate-false-alarm", type=float, default=None)
    pd_.set_defaults(func=cmd_detect)

    pc = sub.add_parser("calibrate", help="Search warning/trigger multipliers for a target false-alarm rate")
    _add_experiment_flags(pc)
    pc.add_argument("--target-false-alarm", type=float, default=0.05)
    pc.add_argument("--gap", type=float, default=0.5, help="Trigger multiplier minus warning multiplier")
    pc.add_argument("--iterations", type=int, default=10)
    pc.set_defaults(func=cmd_calibrate)

    pp = sub.add_parser("predict", help="Offline fit, then stream the test split with adaptation")
    _add_experiment_flags(pp)
    pp.add_argument("--predictor", choices=[k.value for k in PredictorKind], default=None)
    pp.add_argument("--lag-order", type=int, default=None)
    pp.add_argument("--mode", choices=[m.value for m in AdaptationMode], default=None)
    pp.add_argument("--beta", type=float, default=None)
    pp.add_argument("--u-min", type=int, default=None)
    pp.add_argument("--u-max", type=int, default=None)
    pp.add_argument("--validation-pairs", type=int, default=None)
    pp.add_argument("--gate-improvement", type=float, default=None,
                    help="Minimum share of trials where adaptation beats the baseline")
    pp.set_defaults(func=cmd_predict)

    pb = sub.add_parser("bench", help="Per-step timing of both feature kinds on the same stream")
    _add_experiment_flags(pb)
    pb.set_defaults(func=cmd_bench)

    pr = sub.add_parser("report", help="Print the tables of a run directory or list recorded runs")
    pr.add_argument("run", nargs="?", default=None)
    pr.add_argument("--list", action="store_true")
    pr.set_defaults(func=cmd_report)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging("DEBUG" if args.verbose else "WARNING" if args.quiet else None)
    try:
        args.func(args)
    except ValidationError as exc:
        for error in exc.errors():
            location = ".".join(str(part) for part in error["loc"]) or "config"
            logger.error("%s: %s", location, error["msg"])
        return ConfigurationError.exit_code
    except SafeError as exc:
        logger.error("%s", exc)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        logger.error("%s", exc)
        return SafeError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
