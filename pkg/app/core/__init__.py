from app.core.config import settings
from app.core.exceptions import (
    AcceptanceError,
    AdaptationError,
    ConfigurationError,
    FeatureError,
    SafeError,
    SeriesFormatError,
    StreamPoisonedError,
    TrainingDivergedError,
)
from app.core.logging import configure_logging

__all__ = [
    "settings",
    "configure_logging",
    "SafeError",
    "ConfigurationError",
    "SeriesFormatError",
    "FeatureError",
    "StreamPoisonedError",
    "TrainingDivergedError",
    "AdaptationError",
    "AcceptanceError",
]
