from app.features.extractors import (
    TIME_DOMAIN_NAMES,
    FeatureVector,
    dump_features,
    extract,
    feature_stream,
    hamming_weights,
    spectral_energy,
    time_domain_features,
)
from app.features.window import WindowBuffer

__all__ = [
    "WindowBuffer",
    "FeatureVector",
    "TIME_DOMAIN_NAMES",
    "hamming_weights",
    "spectral_energy",
    "time_domain_features",
    "extract",
    "feature_stream",
    "dump_features",
]
