import numpy as np
import pytest
from pydantic import ValidationError

from app.adaptation import (
    ADAPTATION_LOG_COLUMNS,
    AdaptationReport,
    ReplayAdapter,
    ReplayBuffer,
    minibatch_size,
    on_flag,
    write_adaptation_log,
)
from app.adaptation.replay import round_half_away
from app.core.exceptions import TrainingDivergedError
from app.detector import DetectionOutcome
from app.predictors import PassiveAggressiveRegressor
from app.schemas.adaptation import AdaptationConfig, AdaptationMode
from app.schemas.detector import Zone


class SpyPredictor(PassiveAggressiveRegressor):
    """Records every batch it is asked to fit."""

    def __init__(self, input_dim=2, diverge=False):
        super().__init__(input_dim)
        self.calls = []
        self.diverge = diverge

    def fit_batch(self, inputs, targets, val_inputs, val_targets, policy=None):
        self.calls.append((np.array(inputs), np.array(targets), np.array(val_inputs), np.array(val_targets)))
        if self.diverge:
            raise TrainingDivergedError("spy diverged")
        return super().fit_batch(inputs, targets, val_inputs, val_targets, policy)


def _outcome(t=1, ns=True, Z=0.0, sma=0.0):
    return DetectionOutcome(t=t, ns=ns, zone=Zone.TRIGGER if ns else Zone.STATIONARY,
                            Z=Z, sma=sma, sigma=0.0, deviation=abs(Z - sma))


def _filled_buffer(n, capacity=1000):
    buffer = ReplayBuffer(capacity)
    for t in range(n):
        # Targets carry their own index so tests can see which pairs were used
        buffer.push(t, np.array([t, t + 1.0]), float(t))
    return buffer


# ===== minibatch_size =====

def test_zero_deviation_gives_floor():
    assert minibatch_size(3.0, 3.0, 0.1, u_min=8) == 8
    assert minibatch_size(3.0, 3.0, 0.1) == 0


@pytest.mark.parametrize("deviation, expected", [(53.0, 5), (55.0, 6), (54.9, 5), (5.0, 1), (4.9, 0)])
def test_rounding_table(deviation, expected):
    assert minibatch_size(deviation, 0.0, 0.1) == expected
    assert minibatch_size(0.0, deviation, 0.1) == expected


def test_round_half_away_from_zero():
    assert [round_half_away(v) for v in (0.5, 1.5, 2.5, -2.5, 2.4)] == [1, 2, 3, -3, 2]


def test_size_is_capped_by_history():
    assert minibatch_size(5000.0, 0.0, 0.1, u_min=8, u_max=2000, available=200) == 200
    assert minibatch_size(5000.0, 0.0, 0.1, u_max=300) == 300


def test_size_monotone_in_deviation():
    sizes = [minibatch_size(d, 0.0, 0.1) for d in np.linspace(0, 500, 101)]
    assert sizes == sorted(sizes)


def test_config_bounds():
    with pytest.raises(ValidationError):
        AdaptationConfig(u_min=10, u_max=5)
    with pytest.raises(ValidationError):
        AdaptationConfig(u_max=100, buffer_capacity=50)


# ===== ReplayBuffer =====

def test_buffer_requires_increasing_indices():
    buffer = _filled_buffer(3)
    with pytest.raises(ValueError):
        buffer.push(2, np.zeros(2), 0.0)


def test_buffer_evicts_oldest():
    buffer = _filled_buffer(10, capacity=4)
    assert len(buffer) == 4
    assert [p.t for p in buffer.before(100)] == [6, 7, 8, 9]
    assert [p.t for p in buffer.before(9, 2)] == [7, 8]
    assert buffer.before(9, 0) == []


# ===== on_flag =====

def test_replay_uses_only_pairs_before_validation_step():
    predictor = SpyPredictor()
    report = on_flag(predictor, _filled_buffer(100), _outcome(Z=120.0), AdaptationConfig(u_min=0))
    train_x, train_y, val_x, val_y = predictor.calls[0]
    assert report.u == 12
    np.testing.assert_array_equal(train_y, np.arange(87, 99))
    np.testing.assert_array_equal(val_y, [99])
    assert report.t == 99 and report.performed


def test_validation_window_of_several_pairs():
    predictor = SpyPredictor()
    config = AdaptationConfig(u_min=5, validation_pairs=3)
    on_flag(predictor, _filled_buffer(50), _outcome(), config)
    _, train_y, _, val_y = predictor.calls[0]
    np.testing.assert_array_equal(val_y, [47, 48, 49])
    np.testing.assert_array_equal(train_y, [42, 43, 44, 45, 46])


def test_large_deviation_trains_on_whole_history():
    predictor = SpyPredictor()
    report = on_flag(predictor, _filled_buffer(201), _outcome(Z=5000.0), AdaptationConfig())
    assert report.u == 200
    assert len(predictor.calls[0][1]) == 200


def test_empty_buffer_is_a_no_op():
    predictor = SpyPredictor()
    report = on_flag(predictor, ReplayBuffer(10), _outcome(), AdaptationConfig())
    assert report.skipped and not report.performed
    assert predictor.calls == []


def test_no_history_before_validation_is_skipped():
    predictor = SpyPredictor()
    report = on_flag(predictor, _filled_buffer(1), _outcome(Z=100.0), AdaptationConfig())
    assert report.skipped
    assert predictor.calls == []


def test_fit_failure_is_reported():
    report = on_flag(SpyPredictor(diverge=True), _filled_buffer(20), _outcome(), AdaptationConfig())
    assert report.failed and not report.performed


def test_report_records_validation_errors():
    report = on_flag(PassiveAggressiveRegressor(2), _filled_buffer(30), _outcome(), AdaptationConfig())
    assert report.epochs >= 1
    assert report.val_err_after <= report.val_err_before
    assert report.wall_ms >= 0


# ===== ReplayAdapter =====

def _drive(adapter, outcomes):
    for t, outcome in enumerate(outcomes):
        adapter.push(t, np.array([t, t + 1.0]), float(t))
        adapter.observe(outcome, t)


def test_no_flag_leaves_predictor_untouched():
    adapter = ReplayAdapter(PassiveAggressiveRegressor(2), AdaptationConfig())
    before = adapter.predictor.snapshot()
    _drive(adapter, [_outcome(t, ns=False) for t in range(1, 50)])
    after = adapter.predictor.snapshot()
    np.testing.assert_array_equal(before.arrays["weights"], after.arrays["weights"])
    assert adapter.updates == 0 and adapter.percent_update == 0.0


def test_percent_update_reconciles_with_reports():
    adapter = ReplayAdapter(SpyPredictor(), AdaptationConfig(u_min=4))
    flags = [t in (20, 45, 70) for t in range(100)]
    _drive(adapter, [_outcome(t + 1, ns=f) for t, f in enumerate(flags)])
    assert adapter.updates == 3
    assert adapter.eligible_steps == 100
    assert adapter.percent_update == pytest.approx(3.0)
    assert sum(adapter.update_flags(list(range(100)))) == adapter.updates


def test_blind_mode_updates_every_step_with_history():
    config = AdaptationConfig(mode=AdaptationMode.BLIND, u_min=3)
    adapter = ReplayAdapter(SpyPredictor(), config)
    _drive(adapter, [_outcome(t + 1, ns=False) for t in range(10)])
    # Step 0 has no history before it
    assert adapter.updates == 9
    assert [len(call[1]) for call in adapter.predictor.calls][:4] == [1, 2, 3, 3]


def test_mode_none_never_updates():
    adapter = ReplayAdapter(SpyPredictor(), AdaptationConfig(mode="none"))
    _drive(adapter, [_outcome(t + 1) for t in range(10)])
    assert adapter.reports == [] and adapter.eligible_steps == 10


def test_adaptation_log(tmp_path):
    reports = [AdaptationReport(t=5, u=8, epochs=3, val_err_before=0.5, val_err_after=0.25, wall_ms=1.5),
               AdaptationReport(t=6, skipped=True)]
    lines = write_adaptation_log(reports, tmp_path / "log.csv").read_text().splitlines()
    assert lines[0] == ",".join(ADAPTATION_LOG_COLUMNS)
    assert lines[1] == "5,8,3,0.5,0.25,1.5"
    assert len(lines) == 2
