import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dropdagger.nncore import (
    MLP,
    EmptyBatchError,
    Gradients,
    NetConfig,
    ShapeError,
    TrainingDivergence,
    adam_step,
    dumps,
    forward_deterministic,
    forward_stochastic,
    gradients,
    load,
    loads,
    loss,
    sample_masks,
    save,
    train,
)


def make_net(sizes, seed=0, **kw):
    return MLP.initialize(NetConfig(layer_sizes=sizes, **kw), np.random.default_rng(seed))


def zero_net(sizes, **kw):
    cfg = NetConfig(layer_sizes=sizes, **kw)
    return MLP(
        cfg,
        [np.zeros((a, b)) for a, b in zip(sizes[:-1], sizes[1:])],
        [np.zeros(b) for b in sizes[1:]],
    )


def hand_net():
    cfg = NetConfig(layer_sizes=(2, 3, 1), dropout_prob=0.0)
    w1 = np.array([[1.0, 2.0, -1.0], [0.5, -1.0, 1.0]])
    b1 = np.array([0.1, -0.2, 0.3])
    w2 = np.array([[1.0], [-0.5], [2.0]])
    b2 = np.array([0.25])
    return MLP(cfg, [w1, w2], [b1, b2])


def finite_difference(net, x, y, masks, step=1e-6):
    out = []
    for p in net.parameters():
        g = np.zeros_like(p)
        for idx in np.ndindex(p.shape):
            orig = p[idx]
            p[idx] = orig + step
            up = loss(net, x, y, masks)
            p[idx] = orig - step
            down = loss(net, x, y, masks)
            p[idx] = orig
            g[idx] = (up - down) / (2 * step)
        out.append(g)
    return out


def max_relative_error(analytic, numeric, floor=1e-8):
    worst = 0.0
    for a, n in zip(analytic, numeric):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


class TestConfig:
    def test_published_defaults(self):
        cfg = NetConfig(layer_sizes=(100, 64, 64, 32, 1))
        assert cfg.dropout_prob == 0.05
        assert cfg.learning_rate == 1e-3
        assert (cfg.adam_beta1, cfg.adam_beta2) == (0.9, 0.999)
        assert cfg.l2_weight == 1e-5
        assert (cfg.train_epochs, cfg.batch_size) == (100, 32)

    @pytest.mark.parametrize(
        "kw",
        [
            {"layer_sizes": (3,)},
            {"layer_sizes": (3, 0, 1)},
            {"layer_sizes": (3, 1), "dropout_prob": 1.0},
            {"layer_sizes": (3, 1), "dropout_prob": -0.1},
            {"layer_sizes": (3, 1), "learning_rate": 0.0},
            {"layer_sizes": (3, 1), "adam_beta1": 1.0},
            {"layer_sizes": (3, 1), "l2_weight": -1.0},
            {"layer_sizes": (3, 1), "batch_size": 0},
        ],
    )
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            NetConfig(**kw)


class TestForward:
    def test_zero_network(self):
        net = zero_net((4, 5, 2))
        assert np.array_equal(forward_deterministic(net, [1.0, -2.0, 3.0, 0.5]), np.zeros(2))

    def test_identity_layer(self):
        cfg = NetConfig(layer_sizes=(3, 3))
        net = MLP(cfg, [np.eye(3)], [np.zeros(3)])
        v = np.array([0.3, -1.2, 7.0])
        assert np.array_equal(forward_deterministic(net, v), v)

    def test_hand_computed_2_3_1(self):
        # hidden pre-activations [0.6, 2.8, -1.7] -> relu [0.6, 2.8, 0]; output 0.6 - 1.4 + 0.25
        out = forward_deterministic(hand_net(), [1.0, -1.0])
        assert out == pytest.approx([-0.55], abs=1e-15)

    def test_batch_matches_rows(self):
        net = make_net((3, 4, 2))
        x = np.random.default_rng(1).normal(size=(5, 3))
        batch = forward_deterministic(net, x)
        for i in range(5):
            assert np.allclose(batch[i], forward_deterministic(net, x[i]), rtol=1e-14, atol=1e-15)

    def test_shape_error(self):
        with pytest.raises(ShapeError):
            forward_deterministic(make_net((3, 2)), [1.0, 2.0])

    def test_stochastic_needs_rng_or_masks(self):
        with pytest.raises(ValueError):
            forward_stochastic(make_net((2, 3, 1)), [1.0, 2.0])

    @given(seed=st.integers(0, 2**32 - 1), rng_seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_zero_dropout_is_deterministic(self, seed, rng_seed):
        net = make_net((4, 6, 5, 2), seed=seed, dropout_prob=0.0)
        x = np.random.default_rng(seed + 1).normal(size=4)
        out = forward_stochastic(net, x, np.random.default_rng(rng_seed))
        assert np.array_equal(out, forward_deterministic(net, x))

    def test_forced_zero_mask_propagates_bias_only(self):
        net = make_net((3, 4, 1), dropout_prob=0.5)
        net.biases[1][:] = 0.7
        masks = [np.zeros(4)]
        out = forward_stochastic(net, [1.0, 2.0, 3.0], masks=masks)
        assert out == pytest.approx([0.7])

    def test_masks_are_binary_with_hidden_widths(self):
        net = make_net((3, 7, 5, 1), dropout_prob=0.3)
        masks = sample_masks(net, 11, np.random.default_rng(0))
        assert [m.shape for m in masks] == [(11, 7), (11, 5)]
        for m in masks:
            assert set(np.unique(m)) <= {0.0, 1.0}

    def test_inverted_dropout_unbiased(self):
        # all hidden units identical: every hidden unit outputs 1 before dropout
        cfg = NetConfig(layer_sizes=(1, 8, 1), dropout_prob=0.5)
        net = MLP(cfg, [np.ones((1, 8)), np.full((8, 1), 0.25)], [np.zeros(8), np.array([0.1])])
        rng = np.random.default_rng(20240)
        n = 100_000
        samples = forward_stochastic(net, np.ones((n, 1)), rng)[:, 0]
        expected = forward_deterministic(net, [1.0])[0]
        se = samples.std(ddof=1) / np.sqrt(n)
        assert abs(samples.mean() - expected) < 3 * se

    def test_single_unit_preactivation_unbiased(self):
        # masked, scaled activation of one unit has expectation equal to the unmasked value
        d = 0.3
        cfg = NetConfig(layer_sizes=(1, 1, 1), dropout_prob=d)
        net = MLP(cfg, [np.array([[2.0]]), np.array([[1.0]])], [np.array([0.5]), np.zeros(1)])
        rng = np.random.default_rng(7)
        n = 200_000
        samples = forward_stochastic(net, np.ones((n, 1)), rng)[:, 0]
        se = samples.std(ddof=1) / np.sqrt(n)
        assert abs(samples.mean() - 2.5) < 3 * se


class TestLoss:
    def test_zero(self):
        net = zero_net((2, 3, 1))
        assert loss(net, [[1.0, 2.0]], [[0.0]]) == 0.0

    def test_squared_error(self):
        net = zero_net((2, 1), l2_weight=0.0)
        net.biases[0][:] = 2.0
        assert loss(net, [1.0, 1.0], [0.0]) == pytest.approx(4.0)

    def test_empty_batch(self):
        with pytest.raises(EmptyBatchError):
            loss(make_net((2, 1)), np.empty((0, 2)), np.empty((0, 1)))

    def test_target_shape_error(self):
        with pytest.raises(ShapeError):
            loss(make_net((2, 2)), [[1.0, 2.0]], [[1.0, 2.0, 3.0]])

    def test_matches_scalar_recomputation(self):
        rng = np.random.default_rng(3)
        net = make_net((3, 4, 2), seed=5, l2_weight=0.01)
        x = rng.normal(size=(6, 3))
        y = rng.normal(size=(6, 2))
        # element-by-element loop, no matrix products
        total = 0.0
        for i in range(6):
            hidden = []
            for j in range(4):
                z = net.biases[0][j] + sum(x[i, k] * net.weights[0][k, j] for k in range(3))
                hidden.append(max(z, 0.0))
            for o in range(2):
                pred = net.biases[1][o] + sum(hidden[j] * net.weights[1][j, o] for j in range(4))
                total += (pred - y[i, o]) ** 2
        mse = total / 12
        penalty = 0.01 * sum(w**2 for layer in net.weights for w in layer.ravel())
        assert loss(net, x, y) == pytest.approx(mse + penalty, rel=1e-13)

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_nonnegative(self, seed):
        rng = np.random.default_rng(seed)
        net = make_net((2, 3, 1), seed=seed)
        assert loss(net, rng.normal(size=(4, 2)), rng.normal(size=(4, 1))) >= 0.0


class TestGradients:
    def test_zero_error_zero_weights(self):
        net = zero_net((2, 3, 1))
        g = gradients(net, [[1.0, -1.0]], [[0.0]])
        assert all(np.all(a == 0) for a in g.arrays())

    def test_l2_only(self):
        # predictions equal targets so only the penalty contributes
        net = make_net((2, 2), l2_weight=0.3)
        x = np.array([[0.5, -1.0]])
        y = forward_deterministic(net, x)
        g = gradients(net, x, y)
        assert np.allclose(g.weights[0], 2 * 0.3 * net.weights[0], atol=1e-15)
        assert np.allclose(g.biases[0], 0.0)

    @pytest.mark.parametrize("sizes", [(2, 3, 1), (3, 2, 2), (1, 2, 2, 1)])
    @pytest.mark.parametrize("dropout", [0.0, 0.4])
    def test_finite_differences_small(self, sizes, dropout):
        rng = np.random.default_rng(11)
        net = make_net(sizes, seed=2, dropout_prob=dropout, l2_weight=1e-3)
        for p in net.biases:
            p[:] = rng.normal(size=p.shape)
        x = rng.normal(size=(5, sizes[0]))
        y = rng.normal(size=(5, sizes[-1]))
        masks = sample_masks(net, 5, rng) if dropout else None
        analytic = gradients(net, x, y, masks).arrays()
        numeric = finite_difference(net, x, y, masks)
        assert max_relative_error(analytic, numeric) < 1e-5

    def test_mask_shape_error(self):
        net = make_net((2, 3, 1), dropout_prob=0.2)
        with pytest.raises(ShapeError):
            gradients(net, [[1.0, 2.0]], [[0.0]], masks=[np.ones((1, 4))])


class TestAdam:
    def test_zero_gradients_leave_parameters(self):
        net = make_net((2, 3, 1))
        before = [p.copy() for p in net.parameters()]
        adam_step(net, Gradients([np.zeros_like(w) for w in net.weights], [np.zeros_like(b) for b in net.biases]))
        assert all(np.array_equal(a, b) for a, b in zip(before, net.parameters()))
        assert net.adam_state.step_count == 1

    def test_first_step_hand_trace(self):
        cfg = NetConfig(layer_sizes=(1, 1))
        net = MLP(cfg, [np.array([[1.0]])], [np.array([0.0])])
        adam_step(net, Gradients([np.array([[0.5]])], [np.array([0.0])]))
        # m = 0.05, v = 0.00025, m_hat = 0.5, v_hat = 0.25 -> step 1e-3 * 0.5 / (0.5 + 1e-8)
        assert net.weights[0][0, 0] == pytest.approx(0.99900000002, abs=1e-15)
        assert net.biases[0][0] == 0.0

    def test_three_steps_match_reference_loop(self):
        x = np.array([[0.5], [-1.0], [2.0]])
        y = np.array([[1.0], [0.0], [3.0]])
        cfg = NetConfig(layer_sizes=(1, 1), l2_weight=0.0, learning_rate=0.05)
        net = MLP(cfg, [np.array([[0.3]])], [np.array([-0.2])])

        # independent scalar ADAM on mean((w x + b - y)^2)
        w, b = 0.3, -0.2
        mw = vw = mb = vb = 0.0
        for t in range(1, 4):
            r = [(w * xi + b - yi) for xi, yi in zip(x[:, 0], y[:, 0])]
            gw = sum(2 * ri * xi for ri, xi in zip(r, x[:, 0])) / 3
            gb = sum(2 * ri for ri in r) / 3
            mw = 0.9 * mw + 0.1 * gw
            vw = 0.999 * vw + 0.001 * gw * gw
            mb = 0.9 * mb + 0.1 * gb
            vb = 0.999 * vb + 0.001 * gb * gb
            w -= 0.05 * (mw / (1 - 0.9**t)) / ((vw / (1 - 0.999**t)) ** 0.5 + 1e-8)
            b -= 0.05 * (mb / (1 - 0.9**t)) / ((vb / (1 - 0.999**t)) ** 0.5 + 1e-8)
            adam_step(net, gradients(net, x, y))

        assert net.weights[0][0, 0] == pytest.approx(w, abs=1e-12)
        assert net.biases[0][0] == pytest.approx(b, abs=1e-12)
        assert net.adam_state.step_count == 3
        assert all(np.all(v >= 0) for v in net.adam_state.second_moments)

    def test_nonfinite_gradient(self):
        net = make_net((1, 1))
        with pytest.raises(TrainingDivergence):
            adam_step(net, Gradients([np.array([[np.nan]])], [np.zeros(1)]))

    def test_shape_mismatch(self):
        net = make_net((2, 1))
        with pytest.raises(ShapeError):
            adam_step(net, Gradients([np.zeros((1, 1))], [np.zeros(1)]))


class TestTrain:
    def test_linear_regression(self):
        rng = np.random.default_rng(0)
        x = rng.uniform(-1, 1, size=(512, 1))
        y = 2 * x
        # closed-form least squares on this data gives slope 2, intercept 0 exactly
        design = np.hstack([x, np.ones_like(x)])
        slope, intercept = np.linalg.lstsq(design, y, rcond=None)[0][:, 0]
        net = make_net((1, 1), dropout_prob=0.0, l2_weight=0.0, learning_rate=1e-2)
        train(net, x, y, np.random.default_rng(1))
        pred = forward_deterministic(net, x)
        assert np.max(np.abs(pred - (slope * x + intercept))) < 1e-2

    def test_repeated_pair_loss_decreases(self):
        x = np.tile([[0.3, -0.7]], (40, 1))
        y = np.tile([[1.5]], (40, 1))
        net = make_net((2, 8, 1), seed=4, dropout_prob=0.0, train_epochs=10)
        report = train(net, x, y, np.random.default_rng(2))
        drops = sum(b < a for a, b in zip(report.epoch_losses, report.epoch_losses[1:]))
        first = loss(make_net((2, 8, 1), seed=4, dropout_prob=0.0), x, y)
        drops += report.epoch_losses[0] < first
        assert drops >= 9
        assert report.epochs_run == 10

    def test_determinism(self):
        rng = np.random.default_rng(9)
        x = rng.normal(size=(70, 3))
        y = rng.normal(size=(70, 1))
        nets = []
        for _ in range(2):
            net = make_net((3, 5, 1), seed=1, dropout_prob=0.0, train_epochs=5)
            train(net, x, y, np.random.default_rng(123))
            nets.append(net)
        assert all(np.array_equal(a, b) for a, b in zip(nets[0].parameters(), nets[1].parameters()))

    def test_determinism_with_dropout(self):
        rng = np.random.default_rng(9)
        x = rng.normal(size=(70, 3))
        y = rng.normal(size=(70, 1))
        checks = set()
        for _ in range(2):
            net = make_net((3, 5, 1), seed=1, dropout_prob=0.2, train_epochs=5)
            train(net, x, y, np.random.default_rng(123))
            checks.add(net.checksum())
        assert len(checks) == 1

    def test_empty_dataset(self):
        with pytest.raises(EmptyBatchError):
            train(make_net((2, 1)), np.empty((0, 2)), np.empty((0, 1)), np.random.default_rng(0))

    def test_divergence_guard(self):
        net = make_net((1, 1), dropout_prob=0.0)
        with pytest.raises(TrainingDivergence):
            train(net, np.ones((4, 1)), np.full((4, 1), 1e4), np.random.default_rng(0))


class TestCheckpoint:
    def test_round_trip_bit_exact(self, tmp_path):
        net = make_net((5, 4, 3, 2), seed=8, dropout_prob=0.1, l2_weight=3e-5)
        net.biases[0][:] = np.random.default_rng(0).normal(size=4) / 3
        path = tmp_path / "net.txt"
        save(net, path)
        back = load(path)
        assert back.config == net.config
        for a, b in zip(net.parameters(), back.parameters()):
            assert a.tobytes() == b.tobytes()
        assert dumps(back) == dumps(net)

    def test_rejects_garbage(self):
        with pytest.raises(ValueError):
            loads("not a checkpoint\n")
