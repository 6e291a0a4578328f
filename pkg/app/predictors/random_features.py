"""Linear SVR on random Fourier features approximating a Gaussian kernel."""
import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
from scipy.spatial.distance import pdist

from app.predictors.base import OnlinePredictor, PredictorSnapshot, mean_squared_error
from app.schemas.predictor import EpochPolicy, PredictorKind, RFFSVRConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RFFSVRParams:
    """Projection (fixed after construction) plus the trainable linear head."""
    omega: np.ndarray
    phase: np.ndarray
    weights: np.ndarray
    bias: float
    bandwidth: float
    l2_constant: float = 1e-3
    epsilon: float = 0.01
    eta0: float = 0.01
    learning_rate: str = "invscaling"
    power_t: float = 0.25
    steps: int = 0

    @classmethod
    def initialize(cls, input_dim: int, config: RFFSVRConfig, bandwidth: float) -> "RFFSVRParams":
        if bandwidth <= 0:
            raise ValueError(f"bandwidth must be positive, got {bandwidth}")
        rng = np.random.Generator(np.random.Philox(config.seed))
        omega = rng.standard_normal((config.feature_dim, input_dim)) / bandwidth
        phase = rng.uniform(0.0, 2.0 * np.pi, config.feature_dim)
        omega.setflags(write=False)
        phase.setflags(write=False)
        return cls(
            omega=omega,
            phase=phase,
            weights=np.zeros(config.feature_dim),
            bias=0.0,
            bandwidth=float(bandwidth),
            l2_constant=config.l2_constant,
            epsilon=config.epsilon,
            eta0=config.eta0,
            learning_rate=config.learning_rate,
            power_t=config.power_t,
        )

    @property
    def feature_dim(self) -> int:
        return self.omega.shape[0]


def rff_map(x: np.ndarray, params: RFFSVRParams) -> np.ndarray:
    """z(x) = sqrt(2/D) cos(omega x + b); a 2-d input maps row by row."""
    x = np.asarray(x, dtype=np.float64)
    scale = math.sqrt(2.0 / params.feature_dim)
    return scale * np.cos(x @ params.omega.T + params.phase)


def median_bandwidth(inputs: np.ndarray, max_samples: int = 1000) -> float:
    """Median pairwise Euclidean distance; 1.0 when the inputs are all identical."""
    inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    if len(inputs) > max_samples:
        inputs = inputs[np.linspace(0, len(inputs) - 1, max_samples).astype(int)]
    if len(inputs) < 2:
        return 1.0
    median = float(np.median(pdist(inputs)))
    return median if median > 0 else 1.0


def current_learning_rate(params: RFFSVRParams) -> float:
    if params.learning_rate == "constant":
        return params.eta0
    return params.eta0 / (params.steps + 1) ** params.power_t


def svr_objective(params: RFFSVRParams, z: np.ndarray, target: float) -> Tuple[float, np.ndarray, float]:
    """Regularized epsilon-insensitive loss and its (sub)gradient in weights and bias."""
    residual = target - (float(np.dot(params.weights, z)) + params.bias)
    hinge = max(0.0, abs(residual) - params.epsilon)
    loss = hinge + 0.5 * params.l2_constant * float(np.dot(params.weights, params.weights))
    grad_w = params.l2_constant * params.weights
    grad_b = 0.0
    if hinge > 0:
        sign = math.copysign(1.0, residual)
        grad_w = grad_w - sign * z
        grad_b = -sign
    return loss, grad_w, grad_b


def svr_sgd_step(params: RFFSVRParams, z: np.ndarray, target: float) -> RFFSVRParams:
    """One SGD step: shrink by ``1 - eta * l2``, then correct outside the tube."""
    z = np.asarray(z, dtype=np.float64)
    if not (np.all(np.isfinite(z)) and math.isfinite(target)):
        raise ValueError("non-finite SVR training pair")
    eta = current_learning_rate(params)
    residual = target - (float(np.dot(params.weights, z)) + params.bias)
    weights = params.weights * (1.0 - eta * params.l2_constant)
    bias = params.bias
    if abs(residual) > params.epsilon:
        sign = math.copysign(1.0, residual)
        weights = weights + eta * sign * z
        bias = bias + eta * sign
    return replace(params, weights=weights, bias=bias, steps=params.steps + 1)


class RandomFeatureSVR(OnlinePredictor):
    kind = PredictorKind.KSVR

    def __init__(self, input_dim: int, config: Optional[RFFSVRConfig] = None):
        super().__init__(input_dim)
        self.config = config or RFFSVRConfig()
        # Without an explicit bandwidth the first batch fit picks one
        self.bandwidth_fitted = self.config.bandwidth is not None
        self.params = RFFSVRParams.initialize(input_dim, self.config, self.config.bandwidth or 1.0)

    def predict(self, x: np.ndarray) -> float:
        return float(np.dot(self.params.weights, rff_map(x, self.params)) + self.params.bias)

    def predict_many(self, inputs: np.ndarray) -> np.ndarray:
        return rff_map(np.atleast_2d(inputs), self.params) @ self.params.weights + self.params.bias

    def incremental_fit(self, inputs: np.ndarray, targets: np.ndarray) -> None:
        features = rff_map(np.atleast_2d(inputs), self.params)
        for z, y in zip(features, np.ravel(targets)):
            self.params = svr_sgd_step(self.params, z, float(y))

    def fit_batch(self, inputs, targets, val_inputs, val_targets, policy=None):
        if not self.bandwidth_fitted:
            bandwidth = median_bandwidth(inputs)
            logger.info("RFF bandwidth set to %.6g from %d training inputs", bandwidth, len(inputs))
            self.params = RFFSVRParams.initialize(self.input_dim, self.config, bandwidth)
            self.bandwidth_fitted = True
        return super().fit_batch(inputs, targets, val_inputs, val_targets, policy)

    def _train_epoch(self, inputs: np.ndarray, targets: np.ndarray, policy: EpochPolicy, epoch: int) -> float:
        self.incremental_fit(inputs, targets)
        return mean_squared_error(self.predict_many(inputs), targets)

    def snapshot(self) -> PredictorSnapshot:
        return PredictorSnapshot(
            kind=self.kind,
            input_dim=self.input_dim,
            config=self.config.model_dump(),
            arrays={
                "omega": self.params.omega.copy(),
                "phase": self.params.phase.copy(),
                "weights": self.params.weights.copy(),
                "bias": np.array([self.params.bias]),
            },
            state={"steps": self.params.steps, "bandwidth": self.params.bandwidth,
                   "bandwidth_fitted": self.bandwidth_fitted},
        )

    def reset_to_snapshot(self, snapshot: PredictorSnapshot) -> None:
        omega = snapshot.arrays["omega"].copy()
        phase = snapshot.arrays["phase"].copy()
        omega.setflags(write=False)
        phase.setflags(write=False)
        self.params = replace(
            self.params,
            omega=omega,
            phase=phase,
            weights=snapshot.arrays["weights"].copy(),
            bias=float(snapshot.arrays["bias"][0]),
            bandwidth=float(snapshot.state.get("bandwidth", self.params.bandwidth)),
            steps=int(snapshot.state.get("steps", 0)),
        )
        self.bandwidth_fitted = bool(snapshot.state.get("bandwidth_fitted", True))
