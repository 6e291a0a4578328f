from app.predictors.base import OnlinePredictor, PredictorSnapshot
from app.predictors.frozen import FrozenPredictor
from app.predictors.mlp import MLPRegressor
from app.predictors.passive_aggressive import PassiveAggressiveRegressor
from app.predictors.random_features import RandomFeatureSVR
from app.schemas.predictor import MLPConfig, PARConfig, PredictorConfig, PredictorKind, RFFSVRConfig


def build_predictor(config: PredictorConfig, base_kind: PredictorKind = PredictorKind.MLP) -> OnlinePredictor:
    """Fresh predictor for ``config.kind``.

    The ``baseline`` kind wraps an untrained ``base_kind`` model; in practice the
    harness freezes an offline-trained copy with ``FrozenPredictor.from_predictor``.
    """
    kind = PredictorKind(config.kind)
    if kind == PredictorKind.PAR:
        return PassiveAggressiveRegressor(config.lag_order, config.par)
    if kind == PredictorKind.KSVR:
        return RandomFeatureSVR(config.lag_order, config.ksvr)
    if kind == PredictorKind.MLP:
        return MLPRegressor(config.lag_order, config.mlp)
    if base_kind == PredictorKind.BASELINE:
        raise ValueError("baseline cannot wrap another baseline")
    return FrozenPredictor(build_predictor(config.model_copy(update={"kind": base_kind})))


def predictor_from_snapshot(snapshot: PredictorSnapshot) -> OnlinePredictor:
    """Rebuild a predictor from its snapshot (hyper-parameters included)."""
    kind = PredictorKind(snapshot.kind)
    if kind == PredictorKind.PAR:
        predictor = PassiveAggressiveRegressor(snapshot.input_dim, PARConfig(**snapshot.config))
    elif kind == PredictorKind.KSVR:
        predictor = RandomFeatureSVR(snapshot.input_dim, RFFSVRConfig(**snapshot.config))
    elif kind == PredictorKind.MLP:
        predictor = MLPRegressor(snapshot.input_dim, MLPConfig(**snapshot.config))
    else:
        raise ValueError(f"cannot rebuild a predictor of kind {kind.value!r}")
    predictor.reset_to_snapshot(snapshot)
    return predictor
