from app.detector.chart import ewma_update, sigma_z
from app.detector.distances import distance
from app.detector.safe import (
    TRACE_COLUMNS,
    DetectionOutcome,
    DetectorState,
    SafeDetector,
    flagged_indices,
    observe_distance,
    run_detector,
    step,
    trace_frame,
    write_trace,
)

__all__ = [
    "distance",
    "ewma_update",
    "sigma_z",
    "DetectorState",
    "DetectionOutcome",
    "SafeDetector",
    "step",
    "observe_distance",
    "run_detector",
    "flagged_indices",
    "trace_frame",
    "write_trace",
    "TRACE_COLUMNS",
]
