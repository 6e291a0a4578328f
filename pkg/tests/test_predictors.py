import math

import numpy as np
import pytest
import torch

from app.core.exceptions import ConfigurationError, TrainingDivergedError
from app.predictors import (
    FrozenPredictor,
    LagEmbedding,
    MLPRegressor,
    PARParams,
    PassiveAggressiveRegressor,
    RandomFeatureSVR,
    RFFSVRParams,
    build_predictor,
    embed,
    load_predictor,
    median_bandwidth,
    mlp_fit_batch,
    mlp_forward,
    par_incremental_fit,
    predictor_from_snapshot,
    rff_map,
    save_predictor,
    svr_objective,
    svr_sgd_step,
)
from app.predictors.serialization import load_snapshot, save_snapshot
from app.schemas.predictor import EpochPolicy, MLPConfig, PARConfig, PredictorConfig, PredictorKind, RFFSVRConfig


def _rff_params(dim=3, features=16, seed=0, **overrides):
    config = RFFSVRConfig(feature_dim=features, seed=seed, **overrides)
    return RFFSVRParams.initialize(dim, config, bandwidth=1.0)


def _toy_pairs(rng, n=64, dim=3):
    inputs = rng.normal(size=(n, dim))
    targets = inputs @ np.array([0.5, -0.3, 0.2])[:dim] + 0.05 * rng.normal(size=n)
    return inputs, targets


# ===== embedding =====

def test_embed_layout():
    inputs, targets, t_idx = embed(np.arange(1.0, 7.0), 2)
    np.testing.assert_array_equal(inputs, [[1, 2], [2, 3], [3, 4], [4, 5]])
    np.testing.assert_array_equal(targets, [3, 4, 5, 6])
    np.testing.assert_array_equal(t_idx, [2, 3, 4, 5])


def test_embed_too_short():
    inputs, targets, _ = embed([1.0, 2.0], 3)
    assert inputs.shape == (0, 3) and targets.size == 0


def test_streaming_embedding_matches_batch():
    values = np.arange(10.0) ** 2
    stream = LagEmbedding(3)
    pairs = [pair for pair in (stream.push(v) for v in values) if pair is not None]
    inputs, targets, _ = embed(values, 3)
    assert len(pairs) == len(targets)
    np.testing.assert_array_equal(np.vstack([p[0] for p in pairs]), inputs)
    np.testing.assert_array_equal([p[1] for p in pairs], targets)


# ===== passive-aggressive =====

def test_par_inside_tube_is_unchanged():
    params = PARParams(weights=np.array([1.0, 0.0]), epsilon=0.1)
    assert par_incremental_fit(params, np.array([1.0, 5.0]), 1.05) is params


def test_par_unbounded_step_reaches_target():
    params = PARParams(weights=np.zeros(1), C=math.inf, epsilon=0.0)
    updated = par_incremental_fit(params, np.array([1.0]), 2.0)
    assert updated.predict(np.array([1.0])) == pytest.approx(2.0, abs=1e-15)

    no_bias = PARParams(weights=np.zeros(1), C=math.inf, epsilon=0.0, fit_intercept=False)
    assert par_incremental_fit(no_bias, np.array([1.0]), 2.0).weights[0] == 2.0


def test_par_step_is_capped_by_c():
    x = np.array([0.3, -0.4])
    params = PARParams(weights=np.zeros(2), C=0.05, epsilon=0.0)
    updated = par_incremental_fit(params, x, 100.0)
    assert np.linalg.norm(updated.weights - params.weights) == pytest.approx(0.05 * np.linalg.norm(x), rel=1e-12)
    assert updated.bias == pytest.approx(0.05)


def test_par_zero_input_without_intercept_skips():
    params = PARParams(weights=np.zeros(2), fit_intercept=False)
    assert par_incremental_fit(params, np.zeros(2), 3.0) is params


def test_par_leaves_input_params_alone():
    params = PARParams(weights=np.zeros(2), epsilon=0.0)
    par_incremental_fit(params, np.ones(2), 1.0)
    np.testing.assert_array_equal(params.weights, np.zeros(2))


def test_par_fit_batch_improves_validation(rng):
    inputs, targets = _toy_pairs(rng)
    model = PassiveAggressiveRegressor(3, PARConfig(C=0.1, epsilon=0.0))
    report = model.fit_batch(inputs, targets, inputs[-8:], targets[-8:], EpochPolicy(max_epochs=20))
    assert report.updated
    assert report.val_after < report.val_before
    assert model.validation_error(inputs[-8:], targets[-8:]) == pytest.approx(report.val_after)


def test_par_update_never_raises_hinge_loss(rng):
    for _ in range(200):
        params = PARParams(weights=rng.normal(size=3), bias=float(rng.normal()), C=float(rng.uniform(0.01, 2.0)),
                           epsilon=float(rng.uniform(0.0, 0.2)))
        x, target = rng.normal(size=3) * 3, float(rng.normal() * 5)
        before = max(0.0, abs(target - params.predict(x)) - params.epsilon)
        updated = par_incremental_fit(params, x, target)
        after = max(0.0, abs(target - updated.predict(x)) - updated.epsilon)
        assert after <= before + 1e-12


# ===== random features =====

def test_rff_single_feature_at_origin():
    params = RFFSVRParams(omega=np.zeros((1, 3)), phase=np.zeros(1), weights=np.zeros(1), bias=0.0,
                          bandwidth=1.0)
    np.testing.assert_allclose(rff_map(np.array([0.4, -1.0, 2.0]), params), [math.sqrt(2)])


def test_rff_norm_bounded(rng):
    params = _rff_params(features=64)
    z = rff_map(rng.normal(size=(100, 3)) * 5, params)
    assert np.all(np.sum(z ** 2, axis=1) <= 2.0 + 1e-12)


def test_rff_approximates_gaussian_kernel(rng):
    sigma = 1.5
    config = RFFSVRConfig(feature_dim=4096, seed=3)
    params = RFFSVRParams.initialize(2, config, bandwidth=sigma)
    x, y = rng.normal(size=(200, 2)), rng.normal(size=(200, 2))
    approx = np.sum(rff_map(x, params) * rff_map(y, params), axis=1)
    exact = np.exp(-np.sum((x - y) ** 2, axis=1) / (2 * sigma ** 2))
    assert abs(approx.mean() - exact.mean()) < 0.05


def test_rff_kernel_error_shrinks_with_feature_count(rng):
    sigma = 1.0
    x, y = rng.normal(size=(500, 2)), rng.normal(size=(500, 2))
    exact = np.exp(-np.sum((x - y) ** 2, axis=1) / (2 * sigma ** 2))
    errors = []
    for features in (64, 1024, 4096):
        per_seed = []
        for seed in range(3):
            params = RFFSVRParams.initialize(2, RFFSVRConfig(feature_dim=features, seed=seed), bandwidth=sigma)
            approx = np.sum(rff_map(x, params) * rff_map(y, params), axis=1)
            per_seed.append(np.mean(np.abs(approx - exact)))
        errors.append(float(np.mean(per_seed)))
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < 0.02


def test_rff_projection_is_read_only():
    params = _rff_params()
    with pytest.raises(ValueError):
        params.omega[0, 0] = 1.0


def test_svr_in_tube_step_only_decays():
    params = _rff_params(learning_rate="constant", eta0=0.1, l2_constant=0.5, epsilon=10.0)
    params = RFFSVRParams(**{**params.__dict__, "weights": np.linspace(-1, 1, 16)})
    z = rff_map(np.ones(3), params)
    updated = svr_sgd_step(params, z, 0.0)
    np.testing.assert_array_equal(updated.weights, params.weights * (1 - 0.1 * 0.5))
    assert updated.bias == params.bias
    assert updated.steps == 1


def test_svr_repeated_sample_converges():
    params = _rff_params(features=8, learning_rate="constant", eta0=1e-4, l2_constant=1e-12, epsilon=0.0)
    z = rff_map(np.array([0.2, -0.1, 0.3]), params)
    for _ in range(20_000):
        params = svr_sgd_step(params, z, 1.0)
    assert float(np.dot(params.weights, z) + params.bias) == pytest.approx(1.0, abs=1e-3)


def test_svr_subgradient_matches_finite_differences(rng):
    params = _rff_params(l2_constant=0.3, epsilon=0.01)
    params = RFFSVRParams(**{**params.__dict__, "weights": rng.normal(size=16) * 0.1, "bias": 0.2})
    z = rff_map(rng.normal(size=3), params)
    target = 3.0
    _, grad_w, grad_b = svr_objective(params, z, target)

    h = 1e-6
    numeric = np.empty(16)
    for i in range(16):
        up, down = params.weights.copy(), params.weights.copy()
        up[i] += h
        down[i] -= h
        loss_up = svr_objective(RFFSVRParams(**{**params.__dict__, "weights": up}), z, target)[0]
        loss_down = svr_objective(RFFSVRParams(**{**params.__dict__, "weights": down}), z, target)[0]
        numeric[i] = (loss_up - loss_down) / (2 * h)
    np.testing.assert_allclose(grad_w, numeric, rtol=1e-6, atol=1e-8)

    bias_up = svr_objective(RFFSVRParams(**{**params.__dict__, "bias": params.bias + h}), z, target)[0]
    bias_down = svr_objective(RFFSVRParams(**{**params.__dict__, "bias": params.bias - h}), z, target)[0]
    assert grad_b == pytest.approx((bias_up - bias_down) / (2 * h), rel=1e-6)


def test_median_bandwidth():
    inputs = np.array([[0.0], [1.0], [3.0]])
    assert median_bandwidth(inputs) == 2.0
    assert median_bandwidth(np.zeros((5, 2))) == 1.0


def test_svr_fit_batch_picks_bandwidth(rng):
    inputs, targets = _toy_pairs(rng)
    model = RandomFeatureSVR(3, RFFSVRConfig(feature_dim=64))
    assert not model.bandwidth_fitted
    model.fit_batch(inputs, targets, inputs[-4:], targets[-4:], EpochPolicy(max_epochs=3))
    assert model.bandwidth_fitted
    assert model.params.bandwidth == pytest.approx(median_bandwidth(inputs))


# ===== MLP =====

def test_mlp_zero_weights_predict_zero(rng):
    model = MLPRegressor(4, MLPConfig(hidden_sizes=[8, 8]))
    with torch.no_grad():
        for param in model.network.parameters():
            param.zero_()
    assert np.all(model.predict_many(rng.normal(size=(5, 4))) == 0.0)


def test_mlp_rectifier_clamps_negative():
    model = MLPRegressor(1, MLPConfig(hidden_sizes=[1], dropout_rate=0.0))
    with torch.no_grad():
        for param in model.network.parameters():
            param.fill_(1.0)
        model.network[0].bias.zero_()
        model.network[-1].bias.zero_()
    hidden = model.network[1](model.network[0](torch.tensor([[-5.0]], dtype=torch.float64)))
    assert float(hidden) == 0.0
    assert model.predict(np.array([-5.0])) == 0.0


def test_mlp_without_dropout_train_equals_infer(rng):
    model = MLPRegressor(3, MLPConfig(hidden_sizes=[16], dropout_rate=0.0))
    x = rng.normal(size=(4, 3))
    train = mlp_forward(model.network, x, mode="train").detach().numpy()
    infer = mlp_forward(model.network, x, mode="infer").numpy()
    np.testing.assert_array_equal(train, infer)


def test_mlp_dropout_only_in_train_mode(rng):
    model = MLPRegressor(3, MLPConfig(hidden_sizes=[64], dropout_rate=0.5))
    x = rng.normal(size=(4, 3))
    np.testing.assert_array_equal(mlp_forward(model.network, x).numpy(), mlp_forward(model.network, x).numpy())


def test_mlp_shape_mismatch():
    model = MLPRegressor(3, MLPConfig(hidden_sizes=[4]))
    with pytest.raises(ValueError):
        model.predict(np.ones(5))


def test_mlp_nonneg_output(rng):
    model = MLPRegressor(3, MLPConfig(hidden_sizes=[8], nonneg_output=True))
    assert np.all(model.predict_many(rng.normal(size=(50, 3)) * 10) >= 0)


def test_linear_net_interpolates_single_pair():
    model = MLPRegressor(2, MLPConfig(hidden_sizes=[], learning_rate=0.1))
    x, y = np.array([[0.5, -0.2]]), np.array([0.7])
    mlp_fit_batch(model, x, y, x, y, EpochPolicy(max_epochs=500, patience=5, batch_size=1))
    assert model.predict(x[0]) == pytest.approx(0.7, abs=1e-6)


def test_backprop_matches_finite_differences(rng):
    model = MLPRegressor(2, MLPConfig(hidden_sizes=[200, 200], dropout_rate=0.0))
    x = torch.as_tensor(rng.normal(size=(5, 2)))
    y = torch.as_tensor(rng.normal(size=5))
    network = model.network.eval()

    def loss_value():
        return float(torch.mean((network(x).squeeze(-1) - y) ** 2))

    network.zero_grad()
    torch.mean((network(x).squeeze(-1) - y) ** 2).backward()
    params = list(network.parameters())
    h = 1e-6
    for _ in range(100):
        param = params[rng.integers(len(params))]
        flat = param.data.view(-1)
        i = int(rng.integers(flat.numel()))
        analytic = float(param.grad.view(-1)[i])
        original = float(flat[i])
        flat[i] = original + h
        up = loss_value()
        flat[i] = original - h
        down = loss_value()
        flat[i] = original
        numeric = (up - down) / (2 * h)
        assert numeric == pytest.approx(analytic, rel=1e-4, abs=1e-8)


def test_fit_batch_keeps_best_epoch(rng):
    inputs, targets = _toy_pairs(rng, n=128)
    model = MLPRegressor(3, MLPConfig(hidden_sizes=[16], learning_rate=0.05, seed=4))
    report = model.fit_batch(inputs[:96], targets[:96], inputs[96:], targets[96:],
                             EpochPolicy(max_epochs=30, patience=3, batch_size=16))
    assert report.val_history[0] == report.val_before
    assert report.val_after == min(report.val_history)
    assert report.val_history[report.best_epoch] == report.val_after
    assert model.validation_error(inputs[96:], targets[96:]) == report.val_after


def test_full_batch_loss_never_rises_without_dropout(rng):
    inputs, targets = _toy_pairs(rng, n=64)
    model = MLPRegressor(3, MLPConfig(hidden_sizes=[16, 16], dropout_rate=0.0, learning_rate=0.005, seed=1))
    report = model.fit_batch(inputs, targets, inputs, targets,
                             EpochPolicy(max_epochs=40, patience=40, batch_size=64))
    history = report.val_history[1:]
    assert history[-1] < report.val_before
    assert all(later <= earlier + 1e-9 for earlier, later in zip(history, history[1:]))


def test_mlp_fits_replay_exactly(rng):
    inputs, targets = _toy_pairs(rng)
    policy = EpochPolicy(max_epochs=5, batch_size=8)
    first, second = MLPRegressor(3, MLPConfig(seed=2)), MLPRegressor(3, MLPConfig(seed=2))
    for model in (first, second):
        model.fit_batch(inputs, targets, inputs[:4], targets[:4], policy)
    np.testing.assert_array_equal(first.predict_many(inputs), second.predict_many(inputs))


def test_divergent_fit_rolls_back(rng):
    model = MLPRegressor(3, MLPConfig(hidden_sizes=[], learning_rate=1e12))
    inputs, targets = rng.normal(size=(32, 3)) * 100, rng.normal(size=32) * 1e3
    before = model.predict_many(inputs)
    with pytest.raises(TrainingDivergedError):
        model.fit_batch(inputs, targets, inputs[:2], targets[:2], EpochPolicy(max_epochs=50, batch_size=1))
    np.testing.assert_array_equal(model.predict_many(inputs), before)


# ===== baseline, factory and files =====

def test_frozen_predictor_never_changes(rng):
    inputs, targets = _toy_pairs(rng)
    trained = PassiveAggressiveRegressor(3)
    trained.incremental_fit(inputs, targets)
    frozen = FrozenPredictor.from_predictor(trained)
    before = frozen.predict_many(inputs)
    report = frozen.fit_batch(inputs, targets, inputs[:2], targets[:2])
    frozen.incremental_fit(inputs, targets)
    assert not report.updated
    np.testing.assert_array_equal(frozen.predict_many(inputs), before)
    trained.incremental_fit(inputs, targets)
    np.testing.assert_array_equal(frozen.predict_many(inputs), before)


def test_build_predictor_kinds():
    assert isinstance(build_predictor(PredictorConfig(kind="par", lag_order=4)), PassiveAggressiveRegressor)
    assert isinstance(build_predictor(PredictorConfig(kind="ksvr")), RandomFeatureSVR)
    baseline = build_predictor(PredictorConfig(kind="baseline"), base_kind=PredictorKind.PAR)
    assert isinstance(baseline, FrozenPredictor)
    assert baseline.inner_kind == PredictorKind.PAR


def test_baseline_snapshot_cannot_rebuild_baseline():
    snapshot = PassiveAggressiveRegressor(2).snapshot()
    broken = type(snapshot)(kind=PredictorKind.BASELINE, input_dim=2, config={}, arrays={})
    with pytest.raises(ValueError):
        predictor_from_snapshot(broken)


@pytest.mark.parametrize("kind", ["par", "ksvr", "mlp"])
def test_snapshot_file_round_trip(kind, tmp_path, rng):
    inputs, targets = _toy_pairs(rng)
    config = PredictorConfig(kind=kind, lag_order=3, ksvr=RFFSVRConfig(feature_dim=32),
                             mlp=MLPConfig(hidden_sizes=[8]))
    model = build_predictor(config)
    model.fit_batch(inputs, targets, inputs[:4], targets[:4], EpochPolicy(max_epochs=3))
    restored = load_predictor(save_predictor(model, tmp_path / f"{kind}.npz"))
    assert restored.kind == model.kind
    np.testing.assert_array_equal(restored.predict_many(inputs), model.predict_many(inputs))


def test_snapshot_version_checked(tmp_path):
    path = save_snapshot(PassiveAggressiveRegressor(2).snapshot(), tmp_path / "par")
    assert path.suffix == ".npz"
    assert load_snapshot(path).input_dim == 2
    with pytest.raises(ConfigurationError):
        load_snapshot(tmp_path / "missing.npz")
