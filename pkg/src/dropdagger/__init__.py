"""Safe imitation learning with MC-dropout decision rules."""

from .dagger import DaggerConfig, Dataset, EpochMetrics, aggregate, evaluate, rollout_combined, run_dagger
from .decision_rules import (
    Actor,
    BehaviorCloning,
    Decision,
    DropoutDAgger,
    DropoutRuleParams,
    ExpertLabelsOnly,
    SafeDAggerStar,
    VanillaDAgger,
    VanillaSchedule,
    beta_at,
    dr_behavior_cloning,
    dr_dropout,
    dr_expert_labels_only,
    dr_safedagger_star,
    dr_vanilla,
)
from .nncore import MLP, NetConfig
from .policies import ActionSampleSet, NovicePolicy, novice_act_deterministic, novice_sample

__version__ = "0.1.0"

__all__ = [
    "DaggerConfig",
    "Dataset",
    "EpochMetrics",
    "aggregate",
    "evaluate",
    "rollout_combined",
    "run_dagger",
    "Actor",
    "BehaviorCloning",
    "Decision",
    "DropoutDAgger",
    "DropoutRuleParams",
    "ExpertLabelsOnly",
    "SafeDAggerStar",
    "VanillaDAgger",
    "VanillaSchedule",
    "beta_at",
    "dr_behavior_cloning",
    "dr_dropout",
    "dr_expert_labels_only",
    "dr_safedagger_star",
    "dr_vanilla",
    "MLP",
    "NetConfig",
    "ActionSampleSet",
    "NovicePolicy",
    "novice_act_deterministic",
    "novice_sample",
]
