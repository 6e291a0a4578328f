"""Turn detector flags into replay fits of the online predictor."""
import logging
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import pandas as pd

from app.adaptation.replay import ReplayBuffer, minibatch_size, stack
from app.core.exceptions import AdaptationError, TrainingDivergedError
from app.detector.safe import DetectionOutcome
from app.predictors.base import OnlinePredictor
from app.schemas.adaptation import AdaptationConfig, AdaptationMode

logger = logging.getLogger(__name__)

ADAPTATION_LOG_COLUMNS = ["t", "u", "epochs", "val_err_before", "val_err_after", "wall_ms"]


@dataclass
class AdaptationReport:
    t: int
    u: int = 0
    epochs: int = 0
    val_err_before: float = float("nan")
    val_err_after: float = float("nan")
    wall_ms: float = 0.0
    skipped: bool = False
    failed: bool = False

    @property
    def performed(self) -> bool:
        return not (self.skipped or self.failed)


def on_flag(
    predictor: OnlinePredictor,
    buffer: ReplayBuffer,
    outcome: DetectionOutcome,
    config: AdaptationConfig,
    t: Optional[int] = None,
    ignore_deviation: bool = False,
) -> AdaptationReport:
    """Fit ``predictor`` on the ``u`` pairs before ``t``, validating on the pair(s) ending at ``t``.

    ``t`` defaults to the newest pair in the buffer. ``ignore_deviation`` sizes
    the batch by the floor alone.
    """
    t = buffer.latest_t if t is None else t
    if t is None:
        return AdaptationReport(t=outcome.t, skipped=True)

    validation = buffer.window(t - config.validation_pairs + 1, t)
    if not validation:
        logger.debug("no validation pair at t=%d; adaptation skipped", t)
        return AdaptationReport(t=t, skipped=True)
    val_start = validation[0].t

    available = len(buffer.before(val_start))
    if ignore_deviation:
        u = min(max(config.u_min, 1), config.u_max, available)
    else:
        u = minibatch_size(
            outcome.Z, outcome.sma, config.beta,
            u_min=config.u_min, u_max=config.u_max, available=available,
        )
    if u == 0:
        return AdaptationReport(t=t, skipped=True)

    train_x, train_y, train_t = stack(buffer.before(val_start, u))
    val_x, val_y, val_t = stack(validation)
    if train_t.max() >= val_t.min() or val_t.max() > t:
        raise AdaptationError(
            f"replay window [{train_t.min()}, {train_t.max()}] overlaps validation [{val_t.min()}, {val_t.max()}]"
        )

    started = time.perf_counter()
    report = AdaptationReport(t=t, u=u)
    try:
        fit = predictor.fit_batch(train_x, train_y, val_x, val_y, config.epoch_policy)
    except TrainingDivergedError as exc:
        logger.warning("adaptation at t=%d failed: %s", t, exc)
        report.failed = True
    else:
        report.epochs = fit.epochs_run
        report.val_err_before = fit.val_before
        report.val_err_after = fit.val_after
    report.wall_ms = (time.perf_counter() - started) * 1000.0
    logger.debug("adaptation t=%d u=%d epochs=%d", t, u, report.epochs)
    return report


class ReplayAdapter:
    """Owns the replay buffer of one stream and applies the configured mode."""

    def __init__(self, predictor: OnlinePredictor, config: Optional[AdaptationConfig] = None):
        self.predictor = predictor
        self.config = config or AdaptationConfig()
        self.buffer = ReplayBuffer(self.config.buffer_capacity)
        self.reports: List[AdaptationReport] = []
        self.eligible_steps = 0

    def push(self, t: int, x: np.ndarray, y: float) -> None:
        self.buffer.push(t, x, y)

    def observe(self, outcome: DetectionOutcome, t: Optional[int] = None) -> Optional[AdaptationReport]:
        """Count one eligible step and adapt when the mode asks for it."""
        self.eligible_steps += 1
        mode = AdaptationMode(self.config.mode)
        if mode == AdaptationMode.NONE:
            return None
        if mode == AdaptationMode.PROPORTIONAL and not outcome.ns:
            return None
        report = on_flag(
            self.predictor, self.buffer, outcome, self.config, t=t,
            ignore_deviation=mode == AdaptationMode.BLIND,
        )
        self.reports.append(report)
        return report

    @property
    def updates(self) -> int:
        return sum(1 for r in self.reports if r.performed)

    @property
    def percent_update(self) -> float:
        return 100.0 * self.updates / self.eligible_steps if self.eligible_steps else 0.0

    def update_flags(self, steps: List[int]) -> List[bool]:
        """Per-step flags for the given step indices, true where an update ran."""
        done = {r.t for r in self.reports if r.performed}
        return [t in done for t in steps]


def adaptation_frame(reports: List[AdaptationReport]) -> pd.DataFrame:
    rows = [asdict(r) for r in reports if not r.skipped]
    return pd.DataFrame(rows, columns=ADAPTATION_LOG_COLUMNS + ["skipped", "failed"])[ADAPTATION_LOG_COLUMNS]


def write_adaptation_log(reports: List[AdaptationReport], path: Union[str, Path]) -> Path:
    """``t,u,epochs,val_err_before,val_err_after,wall_ms`` per attempted adaptation."""
    path = Path(path)
    adaptation_frame(reports).to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    return path
