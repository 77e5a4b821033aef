from .base import Env, GeometryError, Outcome, ProtocolError, StepResult
from .dubins import DubinsCarEnv, DubinsExpert, DubinsRoomConfig, DubinsState, expert_controller
from .dubins_path import (
    WORDS,
    DubinsPath,
    PlanningError,
    Pose,
    candidate_paths,
    euler_step,
    kinematics_step,
    normalize_angle,
    plan_dubins,
)
from .lidar import corrupt, raycast, scan
from .pointmass import PointMassConfig, PointMassEnv, PointMassState, ProportionalExpert
from .wrappers import GaussianObservationNoise

__all__ = [
    "Env",
    "GeometryError",
    "Outcome",
    "ProtocolError",
    "StepResult",
    "DubinsCarEnv",
    "DubinsExpert",
    "DubinsRoomConfig",
    "DubinsState",
    "expert_controller",
    "WORDS",
    "DubinsPath",
    "PlanningError",
    "Pose",
    "candidate_paths",
    "euler_step",
    "kinematics_step",
    "normalize_angle",
    "plan_dubins",
    "corrupt",
    "raycast",
    "scan",
    "PointMassConfig",
    "PointMassEnv",
    "PointMassState",
    "ProportionalExpert",
    "GaussianObservationNoise",
]
