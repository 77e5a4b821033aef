from __future__ import annotations

import numpy as np

from .base import Env, StepResult


class GaussianObservationNoise(Env):
    """Adds i.i.d. N(0, sigma^2) to every novice-visible observation component.

    The privileged state, rewards and termination pass through untouched. The
    noise stream is spawned from the episode generator at reset without
    consuming any of its draws, so sigma = 0 leaves episodes bit-identical.
    """

    def __init__(self, env: Env, sigma: float):
        if sigma < 0:
            raise ValueError(f"sigma must be nonnegative, got {sigma}")
        self.env = env
        self.sigma = float(sigma)
        self.obs_dim = env.obs_dim
        self.act_dim = env.act_dim
        self.max_steps = env.max_steps
        self.obs_scale = env.obs_scale
        self._noise_rng: np.random.Generator | None = None

    @property
    def state(self):
        return self.env.state

    @property
    def config(self):
        return self.env.config

    def make_expert(self):
        return self.env.make_expert()

    def _noisy(self, obs: np.ndarray) -> np.ndarray:
        if self.sigma == 0.0:
            return obs
        return obs + self._noise_rng.normal(0.0, self.sigma, size=obs.shape)

    def reset(self, rng: np.random.Generator, **kwargs) -> np.ndarray:
        self._noise_rng = rng.spawn(1)[0]
        return self._noisy(self.env.reset(rng, **kwargs))

    def step(self, action) -> StepResult:
        result = self.env.step(action)
        result.observation = self._noisy(result.observation)
        return result

    def describe_state(self):
        return self.env.describe_state()
