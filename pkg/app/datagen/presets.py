"""Built-in processes: the detection suite (TS-A..TS-E), the prediction suite
(Linear-1/2, Nonlinear-1/2) and a demo of four non-stationarity modes."""
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from app.core.exceptions import ConfigurationError
from app.schemas.series import ModelKind, SegmentedProcessSpec, SegmentSpec

TS_A_ALPHAS: Tuple[float, ...] = (0.7, 0.4, 0.1, -0.1, -0.4, -0.7)
DETECTION_LENGTH = 1000
PREDICTION_SEGMENT = 3000
PREDICTION_VARIANCES = (0.5, 1.5, 2.5, 3.5)

# Coefficient sets per 3000-sample segment
LINEAR_1 = [
    [0.9, -0.2, 0.8, -0.5],
    [-0.3, 1.4, 0.4, -0.5],
    [1.5, -0.4, -0.3, 0.2],
    [-0.1, 1.4, 0.4, -0.7],
]
LINEAR_2 = [
    [1.1, -0.6, 0.8, -0.5, -0.1, 0.3],
    [-0.1, 1.2, 0.4, 0.3, -0.2, -0.6],
    [1.2, -0.4, -0.3, 0.7, -0.6, 0.4],
    [-0.1, 1.1, 0.5, 0.2, -0.2, -0.5],
]
NONLINEAR_1 = LINEAR_1
NONLINEAR_2 = [
    [-0.5, 0.8, -0.2, 0.9],
    [-0.5, 0.4, 1.4, -0.3],
    [0.2, -0.3, -0.4, 1.5],
    [-0.7, 0.4, 1.4, -0.1],
]


def _ar(coeffs: Sequence[float], end: int, noise_std: float = 1.0, **extra) -> SegmentSpec:
    return SegmentSpec(model_kind=ModelKind.AR, ar_coeffs=list(coeffs), noise_std=noise_std,
                       end_index=end, **extra)


def _arma(ar: float, ma: float, end: int) -> SegmentSpec:
    return SegmentSpec(model_kind=ModelKind.ARMA, ar_coeffs=[ar], ma_coeffs=[ma], noise_std=1.0,
                       end_index=end)


def ts_a(seed: int = 0, alpha: float = 0.7, length: int = DETECTION_LENGTH) -> SegmentedProcessSpec:
    """Stationary AR(1)."""
    return SegmentedProcessSpec(name=f"ts-a({alpha:g})", segments=[_ar([alpha], length)],
                                total_length=length, seed=seed)


def ts_b(seed: int = 0) -> SegmentedProcessSpec:
    """AR process with obvious changes at 400 and 700."""
    segments = [
        _ar([0.9], 400),
        _ar([1.68, -0.81], 700),
        _ar([1.32, -0.91], DETECTION_LENGTH),
    ]
    return SegmentedProcessSpec(name="ts-b", segments=segments, total_length=DETECTION_LENGTH, seed=seed)


def ts_c(seed: int = 0) -> SegmentedProcessSpec:
    """AR(1) with a subtle change at 600."""
    segments = [_ar([0.4], 600), _ar([0.6], DETECTION_LENGTH)]
    return SegmentedProcessSpec(name="ts-c", segments=segments, total_length=DETECTION_LENGTH, seed=seed)


def ts_d(seed: int = 0) -> SegmentedProcessSpec:
    """Near-unit-root AR(1) whose noise variance changes at 400 and 750."""
    segments = [
        _ar([0.999], 400, 1.0),
        _ar([0.999], 750, 1.5),
        _ar([0.999], DETECTION_LENGTH, 3.0),
    ]
    return SegmentedProcessSpec(name="ts-d", segments=segments, total_length=DETECTION_LENGTH, seed=seed)


def ts_e(seed: int = 0) -> SegmentedProcessSpec:
    """ARMA(1,1) with changes at 250, 500 and 750."""
    segments = [
        _arma(0.9, -0.5, 250),
        _ar([0.3], 500),
        _arma(0.7, 0.6, 750),
        _arma(0.4, -0.1, DETECTION_LENGTH),
    ]
    return SegmentedProcessSpec(name="ts-e", segments=segments, total_length=DETECTION_LENGTH, seed=seed)


def _table_process(name: str, kind: ModelKind, coeff_sets: List[List[float]], seed: int) -> SegmentedProcessSpec:
    segments = [
        SegmentSpec(
            model_kind=kind,
            ar_coeffs=coeffs,
            noise_std=math.sqrt(variance),
            end_index=PREDICTION_SEGMENT * (i + 1),
        )
        for i, (coeffs, variance) in enumerate(zip(coeff_sets, PREDICTION_VARIANCES))
    ]
    return SegmentedProcessSpec(name=name, segments=segments,
                                total_length=PREDICTION_SEGMENT * len(segments), seed=seed)


def linear_1(seed: int = 0) -> SegmentedProcessSpec:
    return _table_process("linear-1", ModelKind.AR, LINEAR_1, seed)


def linear_2(seed: int = 0) -> SegmentedProcessSpec:
    # Six coefficients per segment, hence AR(6)
    return _table_process("linear-2", ModelKind.AR, LINEAR_2, seed)


def nonlinear_1(seed: int = 0) -> SegmentedProcessSpec:
    return _table_process("nonlinear-1", ModelKind.NL1, NONLINEAR_1, seed)


def nonlinear_2(seed: int = 0) -> SegmentedProcessSpec:
    return _table_process("nonlinear-2", ModelKind.NL2, NONLINEAR_2, seed)


def modes_demo(seed: int = 0) -> SegmentedProcessSpec:
    """Variance change at 300, mean shift at 600, trending mean from 900, original regime from 1200."""
    segments = [
        _ar([0.5], 300),
        _ar([0.5], 600, 2.0),
        _ar([0.5], 900, level=3.0),
        _ar([0.5], 1200, level=3.0, slope=0.02),
        _ar([0.5], 1500),
    ]
    return SegmentedProcessSpec(name="modes", segments=segments, total_length=1500, seed=seed)


PROCESS_PRESETS: Dict[str, Callable[..., SegmentedProcessSpec]] = {
    "ts-a": ts_a,
    "ts-b": ts_b,
    "ts-c": ts_c,
    "ts-d": ts_d,
    "ts-e": ts_e,
    "linear-1": linear_1,
    "linear-2": linear_2,
    "nonlinear-1": nonlinear_1,
    "nonlinear-2": nonlinear_2,
    "modes": modes_demo,
}


def build_preset(name: str, seed: int = 0, alpha: Optional[float] = None) -> SegmentedProcessSpec:
    """Look up a preset by name; ``alpha`` only applies to ts-a."""
    try:
        factory = PROCESS_PRESETS[name.lower()]
    except KeyError:
        raise ConfigurationError(
            f"unknown process '{name}', expected one of {sorted(PROCESS_PRESETS)}"
        ) from None
    if name.lower() == "ts-a":
        return factory(seed=seed, alpha=TS_A_ALPHAS[0] if alpha is None else alpha)
    if alpha is not None:
        raise ConfigurationError("alpha only applies to process ts-a")
    return factory(seed=seed)
