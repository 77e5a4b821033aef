"""Room geometry, analytic lidar raycasting and the range-noise model."""

from __future__ import annotations

import numpy as np

from .base import GeometryError


def room_walls(room_size: float, exit_width: float) -> np.ndarray:
    """Wall segments ``(k, 2, 2)`` of a square room with a centred gap in the top wall."""
    s = room_size
    lo = 0.5 * (s - exit_width)
    hi = 0.5 * (s + exit_width)
    return np.array(
        [
            [[0.0, 0.0], [s, 0.0]],
            [[s, 0.0], [s, s]],
            [[s, s], [hi, s]],
            [[lo, s], [0.0, s]],
            [[0.0, s], [0.0, 0.0]],
        ]
    )


def exit_segment(room_size: float, exit_width: float) -> np.ndarray:
    s = room_size
    return np.array([[0.5 * (s - exit_width), s], [0.5 * (s + exit_width), s]])


def ray_angles(theta: float, n_rays: int) -> np.ndarray:
    return theta + 2.0 * np.pi * np.arange(n_rays) / n_rays


def cast_rays(origin, angles, walls: np.ndarray, max_range: float) -> np.ndarray:
    """Distance along each ray to the first wall hit, capped at ``max_range``."""
    angles = np.atleast_1d(np.asarray(angles, dtype=np.float64))
    p = np.asarray(origin, dtype=np.float64)[:2]
    r = np.stack([np.cos(angles), np.sin(angles)], axis=-1)[:, None, :]  # (n, 1, 2)
    q = walls[None, :, 0, :]
    s = (walls[:, 1, :] - walls[:, 0, :])[None, :, :]
    qp = q - p
    denom = r[..., 0] * s[..., 1] - r[..., 1] * s[..., 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (qp[..., 0] * s[..., 1] - qp[..., 1] * s[..., 0]) / denom
        u = (qp[..., 0] * r[..., 1] - qp[..., 1] * r[..., 0]) / denom
    hit = (np.abs(denom) > 1e-12) & (t >= 0.0) & (u >= 0.0) & (u <= 1.0)
    t = np.where(hit, t, np.inf)
    return np.minimum(t.min(axis=1), max_range)


def inside_room(x: float, y: float, room_size: float) -> bool:
    return 0.0 <= x <= room_size and 0.0 <= y <= room_size


def raycast(pose, ray_index: int, room) -> float:
    """Range along ray ``ray_index`` of ``room.lidar_rays`` equally spaced rays."""
    if not 0 <= ray_index < room.lidar_rays:
        raise IndexError(f"ray index {ray_index} outside 0..{room.lidar_rays - 1}")
    if not inside_room(pose.x, pose.y, room.room_size):
        raise GeometryError(f"pose ({pose.x}, {pose.y}) is outside the room")
    angle = pose.theta + 2.0 * np.pi * ray_index / room.lidar_rays
    walls = room_walls(room.room_size, room.exit_width)
    return float(cast_rays((pose.x, pose.y), [angle], walls, room.lidar_max_range)[0])


def scan(pose, room) -> np.ndarray:
    walls = room_walls(room.room_size, room.exit_width)
    return cast_rays((pose.x, pose.y), ray_angles(pose.theta, room.lidar_rays), walls, room.lidar_max_range)


def perturb_range(x, z1, z2):
    """Pre-clamp corrupted range ``z1 + (1 + z2) * x``."""
    return z1 + (1.0 + z2) * x


def clamp_range(x, max_range: float):
    return np.maximum(np.minimum(x, max_range), 0.0)


def corrupt(x, sigma1: float, sigma2: float, max_range: float, rng: np.random.Generator):
    """Additive plus multiplicative Gaussian range noise, clamped to ``[0, max_range]``.

    ``sigma1`` and ``sigma2`` are standard deviations; one independent pair of
    draws per range value.
    """
    x = np.asarray(x, dtype=np.float64)
    z1 = rng.normal(0.0, sigma1, size=x.shape)
    z2 = rng.normal(0.0, sigma2, size=x.shape)
    return clamp_range(perturb_range(x, z1, z2), max_range)


def point_segment_distance(point, walls: np.ndarray) -> np.ndarray:
    p = np.asarray(point, dtype=np.float64)[:2]
    a = walls[:, 0, :]
    ab = walls[:, 1, :] - a
    t = np.clip(np.einsum("ij,ij->i", p - a, ab) / np.einsum("ij,ij->i", ab, ab), 0.0, 1.0)
    closest = a + t[:, None] * ab
    return np.linalg.norm(p - closest, axis=1)


def segments_cross(p0, p1, segments: np.ndarray) -> np.ndarray:
    """Whether the motion segment ``p0 -> p1`` intersects each of ``segments``."""
    p0 = np.asarray(p0, dtype=np.float64)
    r = np.asarray(p1, dtype=np.float64) - p0
    q = segments[:, 0, :]
    s = segments[:, 1, :] - q
    denom = r[0] * s[:, 1] - r[1] * s[:, 0]
    qp = q - p0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (qp[:, 0] * s[:, 1] - qp[:, 1] * s[:, 0]) / denom
        u = (qp[:, 0] * r[1] - qp[:, 1] * r[0]) / denom
    return (np.abs(denom) > 1e-12) & (t >= 0.0) & (t <= 1.0) & (u >= 0.0) & (u <= 1.0)
