"""Dubins car escaping a square room, observed through noisy lidar."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .base import Env, Outcome, ProtocolError, StepResult
from .dubins_path import DubinsPath, Pose, angle_diff, kinematics_step, plan_dubins
from .lidar import (
    corrupt,
    exit_segment,
    inside_room,
    point_segment_distance,
    room_walls,
    scan,
    segments_cross,
)

EXPERT_MODES = ("open_loop", "replan")
HEADING_MODES = ("uniform", "away")


@dataclass(frozen=True)
class DubinsRoomConfig:
    room_size: float = 100.0
    exit_width: float = 20.0
    lidar_rays: int = 100
    lidar_max_range: float = 100.0
    sigma1: float = 10.0
    sigma2: float = 10.0
    dt: float = 0.1
    omega_max: float = 1.0
    speed: float = 10.0
    max_steps: int = 300
    collision_buffer: float = 0.5
    goal_depth: float = 20.0
    start_x_min: float = 30.0
    start_x_max: float = 70.0
    start_y_min: float = 25.0
    start_y_max: float = 50.0
    start_heading: str = "uniform"
    expert_mode: str = "replan"

    def __post_init__(self):
        positive = ("room_size", "exit_width", "lidar_max_range", "dt", "omega_max", "speed")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.sigma1 < 0 or self.sigma2 < 0 or self.collision_buffer < 0:
            raise ValueError("noise scales and collision buffer must be nonnegative")
        if self.exit_width >= self.room_size:
            raise ValueError("exit_width must be smaller than room_size")
        if self.lidar_rays < 1 or self.max_steps < 1:
            raise ValueError("lidar_rays and max_steps must be >= 1")
        if not (0 <= self.start_x_min <= self.start_x_max <= self.room_size):
            raise ValueError("start x range must lie inside the room")
        if not (0 <= self.start_y_min <= self.start_y_max <= self.room_size):
            raise ValueError("start y range must lie inside the room")
        if not 0 < self.goal_depth < self.room_size:
            raise ValueError("goal_depth must lie inside the room")
        if self.start_heading not in HEADING_MODES:
            raise ValueError(f"start_heading must be one of {HEADING_MODES}")
        if self.expert_mode not in EXPERT_MODES:
            raise ValueError(f"expert_mode must be one of {EXPERT_MODES}")

    @property
    def turn_radius(self) -> float:
        return self.speed / self.omega_max

    @property
    def goal(self) -> Pose:
        return Pose(0.5 * self.room_size, self.room_size - self.goal_depth, math.pi / 2)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class DubinsState:
    pose: Pose
    step: int
    path: DubinsPath


def expert_controller(pose: Pose, path: DubinsPath, progress: float, speed: float) -> float:
    """Angular velocity of the path-following finite-state controller.

    ``progress`` is the arc length already travelled; past the end of the path
    the controller drives straight.
    """
    k = path.segment_at(progress)
    if k is None:
        return 0.0
    return path.curvature_sign(k) * speed / path.radius


class DubinsExpert:
    """Plans once at reset and tracks the path by arc length, or replans every step."""

    def __init__(self, config: DubinsRoomConfig):
        self.config = config

    def replan_goal(self, pose: Pose) -> Pose:
        goal = self.config.goal
        if pose.y < goal.y:
            return goal
        return Pose(goal.x, pose.y + 2.0 * self.config.turn_radius, math.pi / 2)

    def act(self, state: DubinsState) -> np.ndarray:
        cfg = self.config
        if cfg.expert_mode == "replan":
            # mean turn rate along the fresh path over the coming step
            path = plan_dubins(state.pose, self.replan_goal(state.pose), cfg.turn_radius)
            ahead = path.sample(cfg.speed * cfg.dt)
            u = angle_diff(ahead.theta, state.pose.theta) / cfg.dt
            u = min(max(u, -cfg.omega_max), cfg.omega_max)
        else:
            u = expert_controller(state.pose, state.path, state.step * cfg.speed * cfg.dt, cfg.speed)
        return np.array([u])


class DubinsCarEnv(Env):
    act_dim = 1

    def __init__(self, config: DubinsRoomConfig | None = None):
        self.config = config or DubinsRoomConfig()
        cfg = self.config
        self.obs_dim = cfg.lidar_rays
        self.max_steps = cfg.max_steps
        self.obs_scale = 1.0 / cfg.lidar_max_range
        self._walls = room_walls(cfg.room_size, cfg.exit_width)
        self._exit = exit_segment(cfg.room_size, cfg.exit_width)[None]
        self._state: DubinsState | None = None
        self._rng: np.random.Generator | None = None
        self._done = True

    @property
    def state(self) -> DubinsState:
        if self._state is None:
            raise ProtocolError("reset() has not been called")
        return self._state

    def make_expert(self) -> DubinsExpert:
        return DubinsExpert(self.config)

    def sample_start(self, rng: np.random.Generator) -> Pose:
        cfg = self.config
        x = rng.uniform(cfg.start_x_min, cfg.start_x_max)
        y = rng.uniform(cfg.start_y_min, cfg.start_y_max)
        if cfg.start_heading == "away":
            # heading with a component pointing away from the exit wall
            theta = rng.uniform(-math.pi, 0.0)
        else:
            theta = rng.uniform(-math.pi, math.pi)
        return Pose(x, y, theta)

    def reset(self, rng: np.random.Generator, start: Pose | None = None) -> np.ndarray:
        self._rng = rng
        pose = self.sample_start(rng) if start is None else start
        path = plan_dubins(pose, self.config.goal, self.config.turn_radius)
        self._state = DubinsState(pose, 0, path)
        self._done = False
        return self.observe()

    def clean_scan(self) -> np.ndarray:
        return scan(self.state.pose, self.config)

    def observe(self) -> np.ndarray:
        cfg = self.config
        return corrupt(self.clean_scan(), cfg.sigma1, cfg.sigma2, cfg.lidar_max_range, self._rng)

    def step(self, action) -> StepResult:
        if self._done:
            raise ProtocolError("step() called on a finished episode; call reset()")
        cfg = self.config
        u = float(np.asarray(action, dtype=np.float64).reshape(-1)[0])
        u = min(max(u, -cfg.omega_max), cfg.omega_max)
        old = self.state.pose
        new = kinematics_step(old, u, cfg.speed, cfg.dt)
        self._state = DubinsState(new, self.state.step + 1, self.state.path)

        p0, p1 = (old.x, old.y), (new.x, new.y)
        if segments_cross(p0, p1, self._exit).any():
            outcome, reward = Outcome.EXITED, 1.0
        elif (
            segments_cross(p0, p1, self._walls).any()
            or not inside_room(new.x, new.y, cfg.room_size)
            or point_segment_distance(p1, self._walls).min() < cfg.collision_buffer
        ):
            outcome, reward = Outcome.COLLIDED, -1.0
        elif self._state.step >= cfg.max_steps:
            outcome, reward = Outcome.TIMED_OUT, 0.0
        else:
            outcome, reward = Outcome.RUNNING, 0.0
        self._done = outcome is not Outcome.RUNNING
        return StepResult(self.observe(), reward, outcome, {"u": u})

    def describe_state(self) -> dict[str, float]:
        pose = self.state.pose
        return {"x": pose.x, "y": pose.y, "theta": pose.theta}
