import logging

import numpy as np

from app.predictors.base import FitReport, OnlinePredictor, PredictorSnapshot
from app.schemas.predictor import EpochPolicy, PredictorKind

logger = logging.getLogger(__name__)


class FrozenPredictor(OnlinePredictor):
    """Baseline that predicts with a fixed copy and ignores every fit request."""

    kind = PredictorKind.BASELINE

    def __init__(self, inner: OnlinePredictor):
        super().__init__(inner.input_dim)
        self.inner = inner

    @classmethod
    def from_predictor(cls, predictor: OnlinePredictor) -> "FrozenPredictor":
        from app.predictors.factory import predictor_from_snapshot

        return cls(predictor_from_snapshot(predictor.snapshot()))

    @property
    def inner_kind(self) -> PredictorKind:
        return self.inner.kind

    def predict(self, x: np.ndarray) -> float:
        return self.inner.predict(x)

    def predict_many(self, inputs: np.ndarray) -> np.ndarray:
        return self.inner.predict_many(inputs)

    def incremental_fit(self, inputs: np.ndarray, targets: np.ndarray) -> None:
        return None

    def fit_batch(self, inputs, targets, val_inputs, val_targets, policy=None) -> FitReport:
        error = self.validation_error(np.atleast_2d(val_inputs), np.ravel(val_targets))
        return FitReport(val_before=error, val_after=error, val_history=[error])

    def _train_epoch(self, inputs, targets, policy: EpochPolicy, epoch: int) -> float:
        raise NotImplementedError("frozen predictors do not train")

    def snapshot(self) -> PredictorSnapshot:
        return self.inner.snapshot()

    def reset_to_snapshot(self, snapshot: PredictorSnapshot) -> None:
        self.inner.reset_to_snapshot(snapshot)
