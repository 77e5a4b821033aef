"""Expert and novice policy wrappers, and MC-dropout action sampling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Protocol

import numpy as np

from .nncore import MLP, ShapeError, forward_deterministic, forward_stochastic


@dataclass(frozen=True)
class ActionSampleSet:
    samples: np.ndarray  # (N, action_dim)
    mean: np.ndarray

    @classmethod
    def from_samples(cls, samples) -> ActionSampleSet:
        samples = np.atleast_2d(np.asarray(samples, dtype=np.float64))
        if samples.shape[0] < 1:
            raise ValueError("need at least one sample")
        return cls(samples=samples, mean=samples.mean(axis=0))

    @property
    def n(self) -> int:
        return self.samples.shape[0]


class ExpertPolicy(Protocol):
    """Deterministic controller with access to privileged environment state."""

    def act(self, state: Any) -> np.ndarray: ...


def novice_sample(net: MLP, obs, n: int, rng: np.random.Generator) -> ActionSampleSet:
    """``n`` stochastic passes, each with its own dropout masks."""
    if n < 1:
        raise ValueError(f"N must be >= 1, got {n}")
    obs = np.asarray(obs, dtype=np.float64)
    if obs.ndim != 1:
        raise ShapeError("observation must be a vector")
    batch = np.broadcast_to(obs, (n, obs.shape[0]))
    return ActionSampleSet.from_samples(forward_stochastic(net, batch, rng))


def novice_act_deterministic(net: MLP, obs) -> np.ndarray:
    return forward_deterministic(net, obs)


class NovicePolicy:
    """A network plus a fixed input scaling applied to raw observations.

    Lidar ranges in metres are divided by the maximum range before entering
    the network; the scale is part of the policy, not of the environment.
    """

    def __init__(self, net: MLP, obs_scale: float = 1.0):
        self.net = net
        self.obs_scale = float(obs_scale)

    def features(self, obs) -> np.ndarray:
        return np.asarray(obs, dtype=np.float64) * self.obs_scale

    def act(self, obs) -> np.ndarray:
        return novice_act_deterministic(self.net, self.features(obs))

    def sample(self, obs, n: int, rng: np.random.Generator) -> ActionSampleSet:
        return novice_sample(self.net, self.features(obs), n, rng)
