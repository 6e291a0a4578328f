import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator

from app.core.config import settings
from app.core.exceptions import ConfigurationError
from app.datagen.io import Normalization
from app.schemas.adaptation import AdaptationConfig
from app.schemas.detector import DetectorConfig, DistanceKind, FeatureKind
from app.schemas.predictor import PredictorConfig
from app.schemas.series import SegmentedProcessSpec

# Detector used for prediction runs unless a config names its own; flags roughly
# one test step in six on Linear-1
PREDICTION_DETECTOR = {"lambda": 0.3, "warning_mult": 1.0, "trigger_mult": 1.5}


class SeriesSource(BaseModel):
    """Exactly one of a preset process, a full spec or a CSV file."""
    process: Optional[str] = None
    alpha: Optional[float] = None
    spec: Optional[SegmentedProcessSpec] = None
    csv_path: Optional[Path] = None
    column: Union[int, str] = 0
    # Ground truth for CSV sources
    breakpoints: List[int] = Field(default_factory=list)
    noise_path: Optional[Path] = None

    @model_validator(mode="after")
    def validate_source(self) -> "SeriesSource":
        given = [name for name in ("process", "spec", "csv_path") if getattr(self, name) is not None]
        if len(given) != 1:
            raise ValueError(f"exactly one of process, spec or csv_path is required, got {given or 'none'}")
        for name in ("csv_path", "noise_path"):
            path = getattr(self, name)
            if path is not None and not Path(path).exists():
                raise ValueError(f"{name} does not exist: {path}")
        return self


class SplitConfig(BaseModel):
    """Chronological train / validation / test fractions for prediction runs."""
    train_frac: float = Field(1 / 6, gt=0, lt=1)
    val_frac: float = Field(1 / 12, gt=0, lt=1)
    normalization: Normalization = Normalization.MINMAX

    @model_validator(mode="after")
    def validate_total(self) -> "SplitConfig":
        if self.train_frac + self.val_frac >= 1:
            raise ValueError("train_frac + val_frac must be below 1")
        return self


class ExperimentConfig(BaseModel):
    """One harness run: data source, pipeline settings, trial count and output."""
    name: str = "experiment"
    series: SeriesSource
    detector: DetectorConfig = Field(default_factory=DetectorConfig)
    predictor: PredictorConfig = Field(default_factory=PredictorConfig)
    adaptation: AdaptationConfig = Field(default_factory=AdaptationConfig)
    split: SplitConfig = Field(default_factory=SplitConfig)
    trials: int = Field(1, ge=1)
    base_seed: int = Field(default_factory=lambda: settings.DEFAULT_SEED, ge=0)
    output_dir: Path = Field(default_factory=lambda: settings.OUTPUT_DIR)
    workers: int = Field(default_factory=lambda: settings.WORKERS, ge=1)
    collapse_events: bool = True
    symmetric_window: bool = False

    @field_validator("detector", mode="before")
    @classmethod
    def calibrated_detector(cls, v: Any) -> Any:
        # Without explicit multipliers the calibrated pair for the distance/feature is used
        if isinstance(v, dict) and not {"warning_mult", "trigger_mult"} & v.keys():
            rest = dict(v)
            distance = rest.pop("distance", DistanceKind.EUCLIDEAN)
            feature_kind = rest.pop("feature_kind", FeatureKind.SPECTRAL_ENERGY)
            return DetectorConfig.defaults_for(distance, feature_kind, **rest)
        return v

    def trial_seed(self, trial_index: int) -> int:
        return self.base_seed + trial_index


def deep_merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_experiment_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
    defaults: Optional[Dict[str, Any]] = None,
) -> ExperimentConfig:
    """``defaults`` < JSON config file < ``overrides`` (CLI flags)."""
    data: Dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(f"config file not found: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: invalid JSON ({exc})") from None
        # A run manifest carries the resolved config under "config"
        if "schema_version" in data and isinstance(data.get("config"), dict):
            data = data["config"]
        # Relative data paths resolve against the config file
        series = data.get("series", {})
        for key in ("csv_path", "noise_path"):
            if series.get(key) and not Path(series[key]).is_absolute():
                candidate = path.parent / series[key]
                if candidate.exists():
                    series[key] = str(candidate)
    merged = deep_merge(deep_merge(defaults or {}, data), overrides or {})
    return ExperimentConfig.model_validate(merged)
