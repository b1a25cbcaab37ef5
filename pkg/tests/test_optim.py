import math

import numpy as np
import pytest

from avhumor.optim import (
    Adam,
    AdamHyper,
    EarlyStopState,
    cross_entropy,
    cross_entropy_batch,
)


def naive_cross_entropy(logits, label):
    """Independent oracle: textbook formula, safe only for small logits."""
    e = np.exp(np.asarray(logits, dtype=np.float64))
    p = e / e.sum()
    return -math.log(p[label])


class TestCrossEntropy:
    def test_uniform_case(self):
        loss, grad = cross_entropy(np.array([0.0, 0.0]), 0)
        assert abs(loss - math.log(2)) < 1e-12
        assert np.allclose(grad, [-0.5, 0.5])

    def test_extreme_logits_no_overflow(self):
        loss, grad = cross_entropy(np.array([1000.0, 0.0]), 0)
        assert 0.0 <= loss < 1e-9
        assert np.isfinite(grad).all()

    def test_hand_value(self):
        loss, _ = cross_entropy(np.array([math.log(3), 0.0]), 1)
        assert abs(loss - math.log(4)) < 1e-12  # -ln(0.25)

    def test_label_out_of_range(self):
        with pytest.raises(ValueError):
            cross_entropy(np.zeros(2), 2)

    def test_matches_naive_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            logits = rng.standard_normal(2) * 3
            label = int(rng.integers(0, 2))
            loss, grad = cross_entropy(logits, label)
            assert abs(loss - naive_cross_entropy(logits, label)) < 1e-9
            # grad = softmax - onehot
            e = np.exp(logits - logits.max())
            p = e / e.sum()
            onehot = np.eye(2)[label]
            assert np.abs(grad - (p - onehot)).max() < 1e-9

    def test_batch_is_mean_of_singles(self):
        rng = np.random.default_rng(1)
        logits = rng.standard_normal((8, 2))
        labels = rng.integers(0, 2, 8)
        loss, grad = cross_entropy_batch(logits, labels)
        singles = [cross_entropy(logits[i], labels[i]) for i in range(8)]
        assert abs(loss - np.mean([s[0] for s in singles])) < 1e-12
        assert np.allclose(grad, np.stack([s[1] for s in singles]) / 8)


class TestAdam:
    def test_zero_gradient_leaves_params_unchanged(self):
        params = {"w": np.array([1.0, -2.0])}
        Adam().step(params, {"w": np.zeros(2)})
        assert np.array_equal(params["w"], [1.0, -2.0])

    def test_one_step_hand_computation(self):
        params = {"w": np.array([1.0])}
        adam = Adam(AdamHyper(lr=1e-3))
        adam.step(params, {"w": np.array([0.5])})
        # bias-corrected m_hat = 0.5, v_hat = 0.25 => update ~ lr
        expected = 1.0 - 1e-3 * (0.5 / (0.5 + 1e-8))
        assert abs(params["w"][0] - expected) < 1e-12
        assert adam.step_count == 1

    def test_bounded_update_property(self):
        # with a constant-sign gradient each update magnitude stays ~<= lr
        rng = np.random.default_rng(2)
        for _ in range(100):
            lr = 10 ** rng.uniform(-5, -2)
            g = abs(rng.standard_normal()) + 1e-3
            params = {"w": np.array([rng.standard_normal()])}
            adam = Adam(AdamHyper(lr=lr))
            prev = params["w"][0]
            for _step in range(100):
                adam.step(params, {"w": np.array([g])})
                assert abs(params["w"][0] - prev) <= lr * (1 + 1e-6)
                prev = params["w"][0]

    def test_scale_covariance_at_first_step(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            g = rng.standard_normal(4)
            g[np.abs(g) < 1e-3] = 1e-3
            updates = []
            for c in (1.0, 7.3):
                params = {"w": np.zeros(4)}
                Adam(AdamHyper(lr=1e-3)).step(params, {"w": g * c})
                updates.append(params["w"].copy())
            assert np.abs(updates[0] - updates[1]).max() < 1e-6 * 1e-3

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape mismatch"):
            Adam().step({"w": np.zeros(2)}, {"w": np.zeros(3)})


def run_early_stop(losses, patience=5, min_delta=1e-4):
    """Oracle: straightforward simulation of the stopping state machine."""
    state = EarlyStopState(patience=patience, min_delta=min_delta)
    stopped_at = None
    for epoch, loss in enumerate(losses, start=1):
        params = {"w": np.array([float(epoch)])}
        if state.update(epoch, loss, params) == "stop":
            stopped_at = epoch
            break
    return state, stopped_at


class TestEarlyStopping:
    def test_strictly_improving_never_stops(self):
        losses = [1.0 - 0.01 * i for i in range(50)]
        state, stopped_at = run_early_stop(losses)
        assert stopped_at is None
        assert state.best_epoch == 50

    def test_sub_delta_plateau_stops_after_epoch_seven(self):
        losses = [1.0] + [0.99999] * 20
        state, stopped_at = run_early_stop(losses)
        assert stopped_at == 7
        assert state.best_epoch == 1
        assert not state.failed

    def test_nan_stops_with_error_flag_and_keeps_snapshot(self):
        losses = [1.0, 0.9, float("nan")]
        state, stopped_at = run_early_stop(losses)
        assert stopped_at == 3
        assert state.failed
        assert state.best_epoch == 2
        restored = state.restore({"w": np.array([-1.0])})
        assert restored["w"][0] == 2.0  # snapshot taken at epoch 2

    def test_snapshot_is_a_copy(self):
        state = EarlyStopState()
        params = {"w": np.array([1.0])}
        state.update(1, 0.5, params)
        params["w"][0] = 99.0
        assert state.best_params["w"][0] == 1.0

    def test_counter_resets_on_improvement(self):
        losses = [1.0, 0.99999, 0.99999, 0.5, 0.49999, 0.49999]
        state, stopped_at = run_early_stop(losses)
        assert stopped_at is None
        assert state.best_epoch == 4
        assert state.epochs_since_improvement == 2
