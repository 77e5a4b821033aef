"""Unicycle kinematics and shortest Dubins paths over the six word classes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi
WORDS = ("LSL", "RSR", "LSR", "RSL", "RLR", "LRL")
ENDPOINT_TOL = 1e-6


class PlanningError(ValueError):
    pass


def normalize_angle(theta):
    """Wrap to (-pi, pi]; accepts scalars or arrays."""
    if isinstance(theta, np.ndarray):
        r = np.mod(math.pi - theta, TWO_PI)
        return math.pi - np.where(r >= TWO_PI, 0.0, r)
    r = (math.pi - theta) % TWO_PI
    # float rounding can land exactly on 2*pi
    return math.pi - (0.0 if r >= TWO_PI else r)


def angle_diff(a, b):
    return normalize_angle(a - b)


def _mod2pi(theta: float) -> float:
    return theta - TWO_PI * math.floor(theta / TWO_PI)


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", float(normalize_angle(float(self.theta))))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta])


def euler_step(x, y, theta, u, v, dt):
    """One explicit-Euler unicycle step; heading is left unwrapped."""
    return x + v * np.cos(theta) * dt, y + v * np.sin(theta) * dt, theta + u * dt


def kinematics_step(pose: Pose, u: float, v: float, dt: float, omega_max: float = math.inf) -> Pose:
    u = min(max(float(u), -omega_max), omega_max)
    x, y, theta = euler_step(pose.x, pose.y, pose.theta, u, v, dt)
    return Pose(float(x), float(y), float(theta))


def _advance(x: float, y: float, theta: float, kind: str, length: float, radius: float):
    if kind == "S":
        return x + length * math.cos(theta), y + length * math.sin(theta), theta
    phi = length / radius
    if kind == "L":
        return (
            x + radius * (math.sin(theta + phi) - math.sin(theta)),
            y + radius * (math.cos(theta) - math.cos(theta + phi)),
            theta + phi,
        )
    return (
        x + radius * (math.sin(theta) - math.sin(theta - phi)),
        y + radius * (math.cos(theta - phi) - math.cos(theta)),
        theta - phi,
    )


@dataclass(frozen=True)
class DubinsPath:
    start: Pose
    radius: float
    word: str
    lengths: tuple[float, float, float]  # metres per segment

    @property
    def length(self) -> float:
        return sum(self.lengths)

    def segment_at(self, s: float) -> int | None:
        """Index of the segment containing arc length ``s`` (half-open), None past the end."""
        if s < 0:
            return 0
        acc = 0.0
        for k, seg in enumerate(self.lengths):
            acc += seg
            if s < acc:
                return k
        return None

    def curvature_sign(self, k: int) -> int:
        return {"L": 1, "S": 0, "R": -1}[self.word[k]]

    def sample(self, s: float) -> Pose:
        """Exact pose after travelling arc length ``s`` along the path."""
        s = min(max(s, 0.0), self.length)
        x, y, theta = self.start.x, self.start.y, self.start.theta
        for kind, seg in zip(self.word, self.lengths):
            step = min(seg, s)
            x, y, theta = _advance(x, y, theta, kind, step, self.radius)
            s -= step
            if s <= 0:
                break
        return Pose(x, y, theta)

    def end_pose(self) -> Pose:
        return self.sample(self.length)


def _word_params(word: str, alpha: float, beta: float, d: float):
    """Normalized (t, p, q) for one word, or None if infeasible."""
    sa, sb = math.sin(alpha), math.sin(beta)
    ca, cb = math.cos(alpha), math.cos(beta)
    cab = math.cos(alpha - beta)
    if word == "LSL":
        p2 = 2 + d * d - 2 * cab + 2 * d * (sa - sb)
        if p2 < 0:
            return None
        tmp = math.atan2(cb - ca, d + sa - sb)
        return _mod2pi(-alpha + tmp), math.sqrt(p2), _mod2pi(beta - tmp)
    if word == "RSR":
        p2 = 2 + d * d - 2 * cab + 2 * d * (sb - sa)
        if p2 < 0:
            return None
        tmp = math.atan2(ca - cb, d - sa + sb)
        return _mod2pi(alpha - tmp), math.sqrt(p2), _mod2pi(-beta + tmp)
    if word == "LSR":
        p2 = -2 + d * d + 2 * cab + 2 * d * (sa + sb)
        if p2 < 0:
            return None
        p = math.sqrt(p2)
        tmp = math.atan2(-ca - cb, d + sa + sb) - math.atan2(-2.0, p)
        return _mod2pi(-alpha + tmp), p, _mod2pi(-beta + tmp)
    if word == "RSL":
        p2 = -2 + d * d + 2 * cab - 2 * d * (sa + sb)
        if p2 < 0:
            return None
        p = math.sqrt(p2)
        tmp = math.atan2(ca + cb, d - sa - sb) - math.atan2(2.0, p)
        return _mod2pi(alpha - tmp), p, _mod2pi(beta - tmp)
    if word == "RLR":
        c = (6.0 - d * d + 2 * cab + 2 * d * (sa - sb)) / 8.0
        if abs(c) > 1:
            return None
        p = _mod2pi(TWO_PI - math.acos(c))
        t = _mod2pi(alpha - math.atan2(ca - cb, d - sa + sb) + p / 2.0)
        return t, p, _mod2pi(alpha - beta - t + p)
    if word == "LRL":
        c = (6.0 - d * d + 2 * cab + 2 * d * (sb - sa)) / 8.0
        if abs(c) > 1:
            return None
        p = _mod2pi(TWO_PI - math.acos(c))
        t = _mod2pi(-alpha - math.atan2(ca - cb, d + sa - sb) + p / 2.0)
        return t, p, _mod2pi(beta - alpha - t + p)
    raise ValueError(f"unknown Dubins word {word!r}")


def _pose_error(a: Pose, b: Pose) -> float:
    return max(abs(a.x - b.x), abs(a.y - b.y), abs(angle_diff(a.theta, b.theta)))


def candidate_paths(start: Pose, goal: Pose, radius: float) -> dict[str, DubinsPath]:
    """All words whose closed form exists and whose endpoint reaches the goal."""
    if radius <= 0:
        raise PlanningError("turning radius must be positive")
    dx, dy = goal.x - start.x, goal.y - start.y
    d = math.hypot(dx, dy) / radius
    heading = math.atan2(dy, dx) if d > 0 else 0.0
    alpha = _mod2pi(start.theta - heading)
    beta = _mod2pi(goal.theta - heading)
    tol = ENDPOINT_TOL * max(1.0, radius)
    paths = {}
    for word in WORDS:
        params = _word_params(word, alpha, beta, d)
        if params is None:
            continue
        path = DubinsPath(start, radius, word, tuple(float(v * radius) for v in params))
        if _pose_error(path.end_pose(), goal) <= tol:
            paths[word] = path
    return paths


def plan_dubins(start: Pose, goal: Pose, radius: float) -> DubinsPath:
    paths = candidate_paths(start, goal, radius)
    if not paths:
        raise PlanningError(f"no feasible Dubins word from {start} to {goal}")
    return min(paths.values(), key=lambda p: (p.length, WORDS.index(p.word)))
