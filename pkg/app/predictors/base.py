"""Contract shared by every online predictor, plus lag embedding of a series."""
import logging
import math
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Deque, Dict, List, Optional, Tuple

import numpy as np

from app.core.exceptions import TrainingDivergedError
from app.schemas.predictor import EpochPolicy, PredictorKind

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PredictorSnapshot:
    """Everything needed to rebuild a predictor bit-identically."""
    kind: PredictorKind
    input_dim: int
    config: Dict[str, Any]
    arrays: Dict[str, np.ndarray]
    state: Dict[str, Any] = field(default_factory=dict)


@dataclass
class FitReport:
    """Outcome of one ``fit_batch`` call; ``val_history[0]`` is the pre-fit error."""
    epochs_run: int = 0
    best_epoch: int = 0
    val_before: float = float("nan")
    val_after: float = float("nan")
    train_losses: List[float] = field(default_factory=list)
    val_history: List[float] = field(default_factory=list)
    updated: bool = False


def embed(values: np.ndarray, order: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Inputs ``[x(t-p), ..., x(t-1)]``, targets ``x(t)`` and target indices ``t >= p``."""
    values = np.asarray(values, dtype=np.float64)
    if order < 1:
        raise ValueError(f"lag order must be positive, got {order}")
    n = len(values) - order
    if n <= 0:
        return np.empty((0, order)), np.empty(0), np.empty(0, dtype=int)
    inputs = np.lib.stride_tricks.sliding_window_view(values, order)[:n].copy()
    targets = values[order:].copy()
    return inputs, targets, np.arange(order, len(values))


class LagEmbedding:
    """Streaming lag embedding; emits nothing until ``order`` samples were seen."""

    def __init__(self, order: int):
        if order < 1:
            raise ValueError(f"lag order must be positive, got {order}")
        self.order = order
        self._history: Deque[float] = deque(maxlen=order)

    def push(self, sample: float) -> Optional[Tuple[np.ndarray, float]]:
        pair = None
        if len(self._history) == self.order:
            pair = (np.array(self._history), float(sample))
        self._history.append(float(sample))
        return pair


def mean_squared_error(predicted: np.ndarray, targets: np.ndarray) -> float:
    diff = np.asarray(predicted, dtype=np.float64) - np.asarray(targets, dtype=np.float64)
    return float(np.mean(diff * diff)) if diff.size else float("nan")


class OnlinePredictor(ABC):
    """One-step-ahead regressor supporting batch and incremental fits."""

    kind: PredictorKind

    def __init__(self, input_dim: int):
        if input_dim < 1:
            raise ValueError(f"input_dim must be positive, got {input_dim}")
        self.input_dim = input_dim

    @abstractmethod
    def predict(self, x: np.ndarray) -> float:
        """Prediction for one input; never mutates the predictor."""

    def predict_many(self, inputs: np.ndarray) -> np.ndarray:
        return np.array([self.predict(row) for row in np.atleast_2d(inputs)])

    @abstractmethod
    def incremental_fit(self, inputs: np.ndarray, targets: np.ndarray) -> None:
        """One chronological pass over the given pairs."""

    @abstractmethod
    def snapshot(self) -> PredictorSnapshot:
        ...

    @abstractmethod
    def reset_to_snapshot(self, snapshot: PredictorSnapshot) -> None:
        ...

    @abstractmethod
    def _train_epoch(self, inputs: np.ndarray, targets: np.ndarray, policy: EpochPolicy, epoch: int) -> float:
        """Run one epoch and return its training loss."""

    def validation_error(self, inputs: np.ndarray, targets: np.ndarray) -> float:
        return mean_squared_error(self.predict_many(inputs), targets)

    def fit_batch(
        self,
        inputs: np.ndarray,
        targets: np.ndarray,
        val_inputs: np.ndarray,
        val_targets: np.ndarray,
        policy: Optional[EpochPolicy] = None,
    ) -> FitReport:
        """Train until validation error stops improving; keep the best epoch's parameters.

        A non-finite loss rolls the predictor back to its state before the call
        and raises ``TrainingDivergedError``.
        """
        policy = policy or EpochPolicy()
        inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
        targets = np.asarray(targets, dtype=np.float64).ravel()
        val_inputs = np.atleast_2d(np.asarray(val_inputs, dtype=np.float64))
        val_targets = np.asarray(val_targets, dtype=np.float64).ravel()
        if len(inputs) < 1 or len(inputs) != len(targets):
            raise ValueError(f"need >= 1 training pair with matching targets, got {len(inputs)}/{len(targets)}")

        start = self.snapshot()
        report = FitReport()
        report.val_before = self.validation_error(val_inputs, val_targets)
        report.val_history.append(report.val_before)
        best_error, best_snapshot, stale = report.val_before, start, 0

        try:
            for epoch in range(1, policy.max_epochs + 1):
                train_loss = self._train_epoch(inputs, targets, policy, epoch)
                val_error = self.validation_error(val_inputs, val_targets)
                if not (math.isfinite(train_loss) and math.isfinite(val_error)):
                    raise TrainingDivergedError(
                        f"{self.kind.value}: non-finite loss at epoch {epoch} "
                        f"(train={train_loss}, val={val_error})"
                    )
                report.epochs_run = epoch
                report.train_losses.append(train_loss)
                report.val_history.append(val_error)

                if val_error < best_error - policy.min_delta:
                    best_error, best_snapshot, stale = val_error, self.snapshot(), 0
                    report.best_epoch = epoch
                else:
                    stale += 1
                    if stale >= policy.patience:
                        break
        except TrainingDivergedError:
            self.reset_to_snapshot(start)
            logger.warning("%s fit rolled back to its pre-call state", self.kind.value)
            raise

        self.reset_to_snapshot(best_snapshot)
        report.val_after = best_error
        report.updated = report.best_epoch > 0
        return report
