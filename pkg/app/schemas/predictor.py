from enum import Enum
from typing import List, Literal, Optional

from pydantic import BaseModel, Field


class PredictorKind(str, Enum):
    """Online one-step-ahead regressors."""
    PAR = "par"
    KSVR = "ksvr"
    MLP = "mlp"
    BASELINE = "baseline"


class EpochPolicy(BaseModel):
    """Early-stopping policy for batch fits."""
    max_epochs: int = Field(200, ge=1)
    patience: int = Field(5, ge=1)
    batch_size: int = Field(32, ge=1)
    min_delta: float = Field(0.0, ge=0)


class PARConfig(BaseModel):
    """Passive-aggressive (PA-I) regressor hyper-parameters."""
    C: float = Field(0.05, gt=0)
    epsilon: float = Field(0.01, ge=0)
    fit_intercept: bool = True


class RFFSVRConfig(BaseModel):
    """Random-feature linear SVR hyper-parameters."""
    feature_dim: int = Field(512, ge=1)
    # None: median pairwise distance of the training inputs
    bandwidth: Optional[float] = Field(None, gt=0)
    l2_constant: float = Field(1e-3, gt=0)
    epsilon: float = Field(0.01, ge=0)
    eta0: float = Field(0.01, gt=0)
    learning_rate: Literal["constant", "invscaling"] = "invscaling"
    power_t: float = Field(0.25, ge=0)
    seed: int = Field(0, ge=0)


class MLPConfig(BaseModel):
    """Feed-forward network hyper-parameters."""
    hidden_sizes: List[int] = Field(default_factory=lambda: [200, 200])
    dropout_rate: float = Field(0.1, ge=0, lt=1)
    learning_rate: float = Field(1e-3, gt=0)
    optimizer: Literal["sgd", "adam"] = "sgd"
    # Rectified output for series that cannot go negative
    nonneg_output: bool = False
    seed: int = Field(0, ge=0)


class PredictorConfig(BaseModel):
    """Predictor choice plus the hyper-parameters of every family."""
    kind: PredictorKind = PredictorKind.MLP
    lag_order: int = Field(5, ge=1)
    par: PARConfig = Field(default_factory=PARConfig)
    ksvr: RFFSVRConfig = Field(default_factory=RFFSVRConfig)
    mlp: MLPConfig = Field(default_factory=MLPConfig)
    offline_policy: EpochPolicy = Field(default_factory=EpochPolicy)
