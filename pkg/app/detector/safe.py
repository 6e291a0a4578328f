"""The SAFE control chart: per-arrival features, consecutive-feature distance,
EWMA against a simple moving average, and warning/trigger zones."""
import logging
import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Deque, Iterable, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from app.core.exceptions import StreamPoisonedError
from app.detector.chart import ewma_update, sigma_z
from app.detector.distances import distance
from app.features.extractors import FeatureVector, extract
from app.features.window import WindowBuffer
from app.schemas.detector import DetectorConfig, Zone

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ["t", "x", "d", "Z", "sma", "sigma", "zone", "ns"]


@dataclass
class DetectorState:
    """Mutable state of one stream."""
    window: WindowBuffer
    d_history: Deque[float]
    spread_history: Deque[float]
    t: int = 0
    Z: Optional[float] = None
    prev_features: Optional[FeatureVector] = None
    warning_count: int = 0
    poisoned: bool = False

    @classmethod
    def initial(cls, config: DetectorConfig) -> "DetectorState":
        return cls(
            window=WindowBuffer(config.stft_window),
            d_history=deque(maxlen=config.sma_window),
            spread_history=deque(maxlen=config.sigma_window),
        )

    @property
    def sigma_x(self) -> float:
        # Sample standard deviation of the distances before the current one
        if len(self.spread_history) < 2:
            return 0.0
        return float(np.std(self.spread_history, ddof=1))


@dataclass(frozen=True)
class DetectionOutcome:
    """Verdict of one step."""
    t: int
    ns: bool
    zone: Zone
    Z: float
    sma: float
    sigma: float
    deviation: float
    d: float = 0.0


def observe_distance(state: DetectorState, config: DetectorConfig, d: float) -> DetectionOutcome:
    """Advance the chart with one distance (EWMA, SMA, sigma and the zone test).

    sigma_x comes from up to ``sigma_window`` distances before ``d``; until
    ``sma_window`` of them exist the step is not tested.
    """
    state.t += 1
    state.Z = d if state.Z is None else ewma_update(state.Z, d, config.lam)
    state.d_history.append(d)

    sma = float(np.mean(state.d_history))
    sigma = sigma_z(state.t, config.lam, state.sigma_x, inside_sqrt=config.sigma_inside_sqrt)
    excess = state.Z - sma
    spread_ready = len(state.spread_history) >= config.sma_window
    state.spread_history.append(d)

    zone = Zone.STATIONARY
    ns = False
    if state.t <= config.warmup or not spread_ready:
        pass
    elif sigma <= 0 or excess <= 0:
        # A flat distance history has no spread to test against
        state.warning_count = max(0, state.warning_count - 1)
    elif excess >= config.trigger_mult * sigma:
        zone = Zone.TRIGGER
        ns = True
        state.warning_count = 0
    elif excess >= config.warning_mult * sigma:
        zone = Zone.WARNING
        state.warning_count += 1
        if state.warning_count >= config.warning_duration:
            ns = True
            state.warning_count = 0
    else:
        state.warning_count = max(0, state.warning_count - 1)

    return DetectionOutcome(
        t=state.t, ns=ns, zone=zone, Z=state.Z, sma=sma, sigma=sigma,
        deviation=abs(excess), d=d,
    )


def step(state: DetectorState, config: DetectorConfig, x_new: float) -> DetectionOutcome:
    """Process one arriving sample; ``state`` is updated in place."""
    if state.poisoned:
        raise StreamPoisonedError(f"stream poisoned at step {state.t}; reset the detector")
    if not math.isfinite(x_new):
        state.poisoned = True
        raise StreamPoisonedError(f"non-finite sample {x_new!r} at step {state.t + 1}")

    state.window.push(x_new)
    features = extract(state.window, config.feature_kind)
    previous = state.prev_features if state.prev_features is not None else features
    d = distance(previous, features, config.distance)
    state.prev_features = features
    return observe_distance(state, config, d)


class SafeDetector:
    """Owns one stream's state and config."""

    def __init__(self, config: Optional[DetectorConfig] = None):
        self.config = config or DetectorConfig()
        self.state = DetectorState.initial(self.config)

    def step(self, x_new: float) -> DetectionOutcome:
        return step(self.state, self.config, x_new)

    def run(self, values: Iterable[float]) -> List[DetectionOutcome]:
        return [self.step(x) for x in values]

    def reset(self) -> None:
        self.state = DetectorState.initial(self.config)


def run_detector(values: Iterable[float], config: Optional[DetectorConfig] = None) -> List[DetectionOutcome]:
    return SafeDetector(config).run(values)


def flagged_indices(outcomes: Sequence[DetectionOutcome], offset: int = 0) -> List[int]:
    """0-based sample indices of the flagged steps."""
    return [o.t - 1 + offset for o in outcomes if o.ns]


def trace_frame(values: Sequence[float], outcomes: Sequence[DetectionOutcome]) -> pd.DataFrame:
    return pd.DataFrame({
        "t": [o.t for o in outcomes],
        "x": list(values)[: len(outcomes)],
        "d": [o.d for o in outcomes],
        "Z": [o.Z for o in outcomes],
        "sma": [o.sma for o in outcomes],
        "sigma": [o.sigma for o in outcomes],
        "zone": [o.zone.value for o in outcomes],
        "ns": [int(o.ns) for o in outcomes],
    }, columns=TRACE_COLUMNS)


def write_trace(
    values: Sequence[float], outcomes: Sequence[DetectionOutcome], path: Union[str, Path]
) -> Path:
    """Per-step trace ``t,x,d,Z,sma,sigma,zone,ns``."""
    path = Path(path)
    trace_frame(values, outcomes).to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    return path
