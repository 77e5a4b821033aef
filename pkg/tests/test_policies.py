import numpy as np
import pytest

from dropdagger.nncore import MLP, NetConfig, ShapeError, forward_deterministic
from dropdagger.policies import ActionSampleSet, NovicePolicy, novice_sample


def net(dropout=0.2, seed=0):
    return MLP.initialize(NetConfig(layer_sizes=(3, 16, 2), dropout_prob=dropout), np.random.default_rng(seed))


def test_sample_set_mean():
    s = ActionSampleSet.from_samples([[1.0, 2.0], [3.0, 6.0]])
    assert s.n == 2
    assert np.array_equal(s.mean, [2.0, 4.0])


def test_sample_set_needs_rows():
    with pytest.raises(ValueError):
        ActionSampleSet.from_samples(np.empty((0, 2)))


def test_novice_sample_shape_and_spread():
    s = novice_sample(net(), [0.5, -0.2, 1.0], 20, np.random.default_rng(1))
    assert s.samples.shape == (20, 2)
    assert np.allclose(s.mean, s.samples.mean(axis=0))
    # with d > 0 the passes use independent masks
    assert len({tuple(r) for r in s.samples}) > 1


def test_novice_sample_zero_dropout_collapses():
    n = net(dropout=0.0)
    obs = [0.5, -0.2, 1.0]
    s = novice_sample(n, obs, 7, np.random.default_rng(1))
    assert np.allclose(s.samples, forward_deterministic(n, obs), rtol=1e-14, atol=1e-15)


def test_novice_sample_seeded():
    a = novice_sample(net(), [1.0, 0.0, 0.0], 10, np.random.default_rng(5))
    b = novice_sample(net(), [1.0, 0.0, 0.0], 10, np.random.default_rng(5))
    assert np.array_equal(a.samples, b.samples)


def test_novice_sample_rejects_bad_input():
    with pytest.raises(ValueError):
        novice_sample(net(), [1.0, 0.0, 0.0], 0, np.random.default_rng(0))
    with pytest.raises(ShapeError):
        novice_sample(net(), [[1.0, 0.0, 0.0]], 3, np.random.default_rng(0))


def test_policy_scaling():
    n = net(dropout=0.0)
    pol = NovicePolicy(n, obs_scale=0.01)
    raw = np.array([50.0, 20.0, 100.0])
    assert np.array_equal(pol.features(raw), raw * 0.01)
    assert np.array_equal(pol.act(raw), forward_deterministic(n, raw * 0.01))
