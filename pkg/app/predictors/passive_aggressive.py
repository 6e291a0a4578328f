"""Passive-aggressive regression (PA-I) with an epsilon-insensitive loss."""
import logging
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from app.predictors.base import OnlinePredictor, PredictorSnapshot, mean_squared_error
from app.schemas.predictor import EpochPolicy, PARConfig, PredictorKind

logger = logging.getLogger(__name__)

_zero_input_logged = False


@dataclass(frozen=True)
class PARParams:
    weights: np.ndarray
    bias: float = 0.0
    C: float = 0.05
    epsilon: float = 0.01
    fit_intercept: bool = True

    def predict(self, x: np.ndarray) -> float:
        return float(np.dot(self.weights, x) + self.bias)


def par_incremental_fit(params: PARParams, x: np.ndarray, target: float) -> PARParams:
    """One PA-I update; returns new parameters and leaves ``params`` alone.

    Inside the epsilon tube nothing changes. Otherwise the step size is
    ``min(C, loss / |x|^2)``, where the norm counts the intercept input.
    """
    global _zero_input_logged
    x = np.asarray(x, dtype=np.float64)
    if x.shape != params.weights.shape:
        raise ValueError(f"input shape {x.shape} does not match weights {params.weights.shape}")
    if not (np.all(np.isfinite(x)) and math.isfinite(target)):
        raise ValueError("non-finite PAR training pair")

    residual = target - params.predict(x)
    loss = max(0.0, abs(residual) - params.epsilon)
    if loss == 0.0:
        return params

    sq_norm = float(np.dot(x, x)) + (1.0 if params.fit_intercept else 0.0)
    if sq_norm == 0.0:
        if not _zero_input_logged:
            logger.warning("zero input without intercept: PAR update skipped")
            _zero_input_logged = True
        return params

    tau = min(params.C, loss / sq_norm)
    step = tau * math.copysign(1.0, residual)
    return replace(
        params,
        weights=params.weights + step * x,
        bias=params.bias + step if params.fit_intercept else params.bias,
    )


class PassiveAggressiveRegressor(OnlinePredictor):
    kind = PredictorKind.PAR

    def __init__(self, input_dim: int, config: Optional[PARConfig] = None):
        super().__init__(input_dim)
        self.config = config or PARConfig()
        self.params = PARParams(
            weights=np.zeros(input_dim),
            C=self.config.C,
            epsilon=self.config.epsilon,
            fit_intercept=self.config.fit_intercept,
        )

    def predict(self, x: np.ndarray) -> float:
        return self.params.predict(np.asarray(x, dtype=np.float64))

    def predict_many(self, inputs: np.ndarray) -> np.ndarray:
        return np.atleast_2d(inputs) @ self.params.weights + self.params.bias

    def incremental_fit(self, inputs: np.ndarray, targets: np.ndarray) -> None:
        for x, y in zip(np.atleast_2d(inputs), np.ravel(targets)):
            self.params = par_incremental_fit(self.params, x, float(y))

    def _train_epoch(self, inputs: np.ndarray, targets: np.ndarray, policy: EpochPolicy, epoch: int) -> float:
        self.incremental_fit(inputs, targets)
        return mean_squared_error(self.predict_many(inputs), targets)

    def snapshot(self) -> PredictorSnapshot:
        return PredictorSnapshot(
            kind=self.kind,
            input_dim=self.input_dim,
            config=self.config.model_dump(),
            arrays={"weights": self.params.weights.copy(), "bias": np.array([self.params.bias])},
        )

    def reset_to_snapshot(self, snapshot: PredictorSnapshot) -> None:
        self.params = replace(
            self.params,
            weights=snapshot.arrays["weights"].copy(),
            bias=float(snapshot.arrays["bias"][0]),
        )
