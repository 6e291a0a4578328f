from app.predictors.base import (
    FitReport,
    LagEmbedding,
    OnlinePredictor,
    PredictorSnapshot,
    embed,
    mean_squared_error,
)
from app.predictors.factory import build_predictor, predictor_from_snapshot
from app.predictors.frozen import FrozenPredictor
from app.predictors.mlp import MLPRegressor, mlp_fit_batch, mlp_forward
from app.predictors.passive_aggressive import PARParams, PassiveAggressiveRegressor, par_incremental_fit
from app.predictors.random_features import (
    RandomFeatureSVR,
    RFFSVRParams,
    median_bandwidth,
    rff_map,
    svr_objective,
    svr_sgd_step,
)
from app.predictors.serialization import load_predictor, load_snapshot, save_predictor, save_snapshot

__all__ = [
    "FitReport",
    "LagEmbedding",
    "OnlinePredictor",
    "PredictorSnapshot",
    "embed",
    "mean_squared_error",
    "build_predictor",
    "predictor_from_snapshot",
    "FrozenPredictor",
    "MLPRegressor",
    "mlp_fit_batch",
    "mlp_forward",
    "PARParams",
    "PassiveAggressiveRegressor",
    "par_incremental_fit",
    "RandomFeatureSVR",
    "RFFSVRParams",
    "median_bandwidth",
    "rff_map",
    "svr_objective",
    "svr_sgd_step",
    "load_predictor",
    "load_snapshot",
    "save_predictor",
    "save_snapshot",
]
