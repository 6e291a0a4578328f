"""Feed-forward regressor in torch (float64, CPU)."""
import logging
import math
from typing import Literal, Optional

import numpy as np
import torch
import torch.nn as nn

from app.core.exceptions import TrainingDivergedError
from app.predictors.base import FitReport, OnlinePredictor, PredictorSnapshot
from app.schemas.predictor import EpochPolicy, MLPConfig, PredictorKind

logger = logging.getLogger(__name__)

DTYPE = torch.float64


def build_network(input_dim: int, config: MLPConfig) -> nn.Sequential:
    """Linear -> ReLU -> Dropout per hidden layer, then a linear output."""
    layers = []
    width = input_dim
    for hidden in config.hidden_sizes:
        layers += [nn.Linear(width, hidden), nn.ReLU(), nn.Dropout(config.dropout_rate)]
        width = hidden
    layers.append(nn.Linear(width, 1))
    if config.nonneg_output:
        layers.append(nn.ReLU())
    return nn.Sequential(*layers).to(DTYPE)


def mlp_forward(network: nn.Module, inputs, mode: Literal["train", "infer"] = "infer") -> torch.Tensor:
    """Predictions of shape ``(n,)``; dropout is only active in train mode."""
    batch = torch.as_tensor(np.atleast_2d(np.asarray(inputs, dtype=np.float64)), dtype=DTYPE)
    expected = network[0].in_features
    if batch.shape[1] != expected:
        raise ValueError(f"input width {batch.shape[1]} does not match network input {expected}")
    if mode == "train":
        network.train()
        return network(batch).squeeze(-1)
    network.eval()
    with torch.no_grad():
        return network(batch).squeeze(-1)


class MLPRegressor(OnlinePredictor):
    kind = PredictorKind.MLP

    def __init__(self, input_dim: int, config: Optional[MLPConfig] = None):
        super().__init__(input_dim)
        self.config = config or MLPConfig()
        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(self.config.seed)
            self.network = build_network(input_dim, self.config)
        # Seeds each fit's shuffling and dropout so fit sequences replay exactly
        self.fit_count = 0
        self._optimizer: Optional[torch.optim.Optimizer] = None
        self._generator: Optional[torch.Generator] = None

    def _make_optimizer(self) -> torch.optim.Optimizer:
        if self.config.optimizer == "adam":
            return torch.optim.Adam(self.network.parameters(), lr=self.config.learning_rate)
        return torch.optim.SGD(self.network.parameters(), lr=self.config.learning_rate)

    def _fit_seed(self) -> int:
        return self.config.seed * 1_000_003 + self.fit_count

    def predict(self, x: np.ndarray) -> float:
        return float(mlp_forward(self.network, x)[0])

    def predict_many(self, inputs: np.ndarray) -> np.ndarray:
        return mlp_forward(self.network, inputs).numpy().copy()

    def _train_epoch(self, inputs: np.ndarray, targets: np.ndarray, policy: EpochPolicy, epoch: int) -> float:
        x = torch.as_tensor(inputs, dtype=DTYPE)
        y = torch.as_tensor(targets, dtype=DTYPE)
        order = torch.randperm(len(x), generator=self._generator)
        loss_fn = nn.MSELoss()
        total = 0.0
        for start in range(0, len(x), policy.batch_size):
            idx = order[start:start + policy.batch_size]
            self.network.train()
            self._optimizer.zero_grad()
            loss = loss_fn(self.network(x[idx]).squeeze(-1), y[idx])
            if not torch.isfinite(loss):
                raise TrainingDivergedError(f"mlp: non-finite batch loss at epoch {epoch}")
            loss.backward()
            self._optimizer.step()
            total += float(loss) * len(idx)
        return total / len(x)

    def _run_fit(self, run):
        self._optimizer = self._make_optimizer()
        self._generator = torch.Generator().manual_seed(self._fit_seed())
        try:
            with torch.random.fork_rng(devices=[]):
                torch.manual_seed(self._fit_seed())
                return run()
        finally:
            self.fit_count += 1
            self._optimizer = None
            self._generator = None

    def fit_batch(self, inputs, targets, val_inputs, val_targets, policy=None) -> FitReport:
        return self._run_fit(lambda: super(MLPRegressor, self).fit_batch(
            inputs, targets, val_inputs, val_targets, policy))

    def incremental_fit(self, inputs: np.ndarray, targets: np.ndarray) -> None:
        inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
        targets = np.ravel(np.asarray(targets, dtype=np.float64))
        policy = EpochPolicy(max_epochs=1, batch_size=max(1, len(inputs)))
        start = self.snapshot()
        try:
            loss = self._run_fit(lambda: self._train_epoch(inputs, targets, policy, 1))
            if not math.isfinite(loss):
                raise TrainingDivergedError("mlp: non-finite loss during incremental fit")
        except TrainingDivergedError:
            self.reset_to_snapshot(start)
            raise

    def snapshot(self) -> PredictorSnapshot:
        return PredictorSnapshot(
            kind=self.kind,
            input_dim=self.input_dim,
            config=self.config.model_dump(),
            arrays={name: tensor.detach().cpu().numpy().copy()
                    for name, tensor in self.network.state_dict().items()},
            state={"fit_count": self.fit_count},
        )

    def reset_to_snapshot(self, snapshot: PredictorSnapshot) -> None:
        self.network.load_state_dict({name: torch.from_numpy(array.copy())
                                      for name, array in snapshot.arrays.items()})
        # fit_count only moves forward while a fit is running
        if self._optimizer is None:
            self.fit_count = int(snapshot.state.get("fit_count", self.fit_count))


def mlp_fit_batch(predictor: MLPRegressor, inputs, targets, val_inputs, val_targets,
                  policy: Optional[EpochPolicy] = None) -> FitReport:
    return predictor.fit_batch(inputs, targets, val_inputs, val_targets, policy)
