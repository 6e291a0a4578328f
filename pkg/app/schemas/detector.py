import logging
from enum import Enum
from typing import Dict, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

logger = logging.getLogger(__name__)


class FeatureKind(str, Enum):
    """Per-arrival feature family."""
    SPECTRAL_ENERGY = "spectral_energy"
    TIME_DOMAIN = "time_domain"


class DistanceKind(str, Enum):
    """Dissimilarity between consecutive feature vectors."""
    EUCLIDEAN = "euclidean"
    ABS_PEARSON = "abs_pearson"
    ABS_COSINE = "abs_cosine"


class Zone(str, Enum):
    """Control-chart zone of one step."""
    STATIONARY = "stationary"
    WARNING = "warning"
    TRIGGER = "trigger"


# (warning, trigger) multipliers for a step false-alarm rate near 0.05 on TS-B;
# `safe calibrate` re-derives a pair for any process and target
SPECTRAL_THRESHOLDS: Dict[DistanceKind, Tuple[float, float]] = {
    DistanceKind.EUCLIDEAN: (1.65, 2.15),
    DistanceKind.ABS_PEARSON: (1.75, 2.25),
    DistanceKind.ABS_COSINE: (1.75, 2.25),
}
TIME_DOMAIN_THRESHOLDS: Tuple[float, float] = (1.65, 2.15)

RECOMMENDED_LAMBDA = (0.1, 0.3)


class DetectorConfig(BaseModel):
    """Parameters of the SAFE control chart."""
    lam: float = Field(0.3, alias="lambda", gt=0, le=1)
    warning_mult: float = Field(1.65, gt=0)
    trigger_mult: float = Field(2.15, gt=0)
    warning_duration: int = Field(3, ge=1)
    sma_window: int = Field(20, ge=2)
    # Distances preceding the current one that sigma_x is estimated from
    sigma_window: int = Field(100, ge=2)
    stft_window: int = Field(5, ge=2)
    distance: DistanceKind = DistanceKind.EUCLIDEAN
    feature_kind: FeatureKind = FeatureKind.SPECTRAL_ENERGY
    sigma_inside_sqrt: bool = False
    # Steps with ns suppressed; None means stft_window
    warmup_steps: Optional[int] = Field(None, ge=0)

    class Config:
        populate_by_name = True

    @model_validator(mode="after")
    def validate_limits(self) -> "DetectorConfig":
        if self.trigger_mult < self.warning_mult:
            raise ValueError(
                f"trigger_mult ({self.trigger_mult}) must be >= warning_mult ({self.warning_mult})"
            )
        if self.sigma_window < self.sma_window:
            raise ValueError(
                f"sigma_window ({self.sigma_window}) must be >= sma_window ({self.sma_window})"
            )
        if self.feature_kind == FeatureKind.TIME_DOMAIN and self.stft_window < 4:
            raise ValueError("time-domain features need a window of at least 4 samples")
        low, high = RECOMMENDED_LAMBDA
        if not low <= self.lam <= high:
            logger.warning("lambda=%s is outside the recommended range [%s, %s]", self.lam, low, high)
        return self

    @property
    def warmup(self) -> int:
        return self.stft_window if self.warmup_steps is None else self.warmup_steps

    @classmethod
    def defaults_for(
        cls,
        distance: DistanceKind = DistanceKind.EUCLIDEAN,
        feature_kind: FeatureKind = FeatureKind.SPECTRAL_ENERGY,
        **overrides,
    ) -> "DetectorConfig":
        """Calibrated thresholds for a distance / feature combination."""
        if feature_kind == FeatureKind.TIME_DOMAIN:
            warning, trigger = TIME_DOMAIN_THRESHOLDS
        else:
            warning, trigger = SPECTRAL_THRESHOLDS[DistanceKind(distance)]
        params = {
            "lam": 0.3,
            "warning_mult": warning,
            "trigger_mult": trigger,
            "distance": distance,
            "feature_kind": feature_kind,
        }
        if "lambda" in overrides:
            params.pop("lam")
        params.update(overrides)
        return cls(**params)
