"""One-dimensional velocity-controlled point mass; a fast analytic test bed.

The action is the commanded velocity. With the proportional expert
``u = -k x`` the position contracts by ``(1 - k dt)`` every step.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .base import Env, Outcome, ProtocolError, StepResult


@dataclass(frozen=True)
class PointMassConfig:
    dt: float = 0.1
    gain: float = 1.0
    max_steps: int = 50
    start_range: float = 1.0
    u_max: float = float("inf")

    def __post_init__(self):
        if self.dt <= 0 or self.gain <= 0:
            raise ValueError("dt and gain must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.start_range < 0:
            raise ValueError("start_range must be nonnegative")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PointMassState:
    x: float
    v: float
    step: int


class ProportionalExpert:
    def __init__(self, gain: float):
        self.gain = gain

    def act(self, state: PointMassState) -> np.ndarray:
        return np.array([-self.gain * state.x])


class PointMassEnv(Env):
    obs_dim = 2
    act_dim = 1

    def __init__(self, config: PointMassConfig | None = None):
        self.config = config or PointMassConfig()
        self.max_steps = self.config.max_steps
        self._state: PointMassState | None = None
        self._done = True

    @property
    def state(self) -> PointMassState:
        if self._state is None:
            raise ProtocolError("reset() has not been called")
        return self._state

    def make_expert(self) -> ProportionalExpert:
        return ProportionalExpert(self.config.gain)

    def reset(self, rng: np.random.Generator, x0: float | None = None) -> np.ndarray:
        r = self.config.start_range
        x = float(rng.uniform(-r, r)) if x0 is None else float(x0)
        self._state = PointMassState(x, 0.0, 0)
        self._done = False
        return self.observe()

    def observe(self) -> np.ndarray:
        return np.array([self.state.x, self.state.v])

    def step(self, action) -> StepResult:
        if self._done:
            raise ProtocolError("step() called on a finished episode; call reset()")
        cfg = self.config
        u = float(np.asarray(action, dtype=np.float64).reshape(-1)[0])
        u = min(max(u, -cfg.u_max), cfg.u_max)
        s = self.state
        x = s.x + u * cfg.dt
        self._state = PointMassState(x, u, s.step + 1)
        reward = -x * x
        outcome = Outcome.TIMED_OUT if self._state.step >= cfg.max_steps else Outcome.RUNNING
        self._done = outcome is not Outcome.RUNNING
        return StepResult(self.observe(), reward, outcome, {"u": u})

    def describe_state(self) -> dict[str, float]:
        return {"x": self.state.x, "v": self.state.v}
