from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

import numpy as np


class Outcome(str, enum.Enum):
    RUNNING = "running"
    EXITED = "exited"
    COLLIDED = "collided"
    TIMED_OUT = "timed_out"


class ProtocolError(RuntimeError):
    """Raised on step() after the episode has ended, or before reset()."""


class GeometryError(ValueError):
    pass


@dataclass
class StepResult:
    observation: np.ndarray
    reward: float
    outcome: Outcome
    info: dict[str, Any] = field(default_factory=dict)

    @property
    def done(self) -> bool:
        return self.outcome is not Outcome.RUNNING


class Env:
    """Episode protocol shared by every environment.

    ``state`` is the privileged simulator state handed to the expert;
    observations are what the novice sees.
    """

    obs_dim: int
    act_dim: int
    max_steps: int
    obs_scale: float = 1.0

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def step(self, action) -> StepResult:
        raise NotImplementedError

    @property
    def state(self) -> Any:
        raise NotImplementedError

    def make_expert(self):
        raise NotImplementedError

    def describe_state(self) -> dict[str, float]:
        """Flat numeric view of the state for trajectory dumps."""
        return {}
