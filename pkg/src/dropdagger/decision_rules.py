"""Per-timestep arbitration between the expert's and the novice's action."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .policies import ActionSampleSet, NovicePolicy


class Actor(str, enum.Enum):
    EXPERT = "expert"
    NOVICE = "novice"


@dataclass(frozen=True)
class Decision:
    chosen_action: np.ndarray
    actor: Actor
    p_hat: float | None = None
    distance: float | None = None
    beta: float | None = None


@dataclass(frozen=True)
class VanillaSchedule:
    beta0: float = 1.0
    lam: float = 0.63
    epoch: int = 0

    def __post_init__(self):
        if not 0.0 <= self.beta0 <= 1.0:
            raise ValueError(f"beta0 must lie in [0, 1], got {self.beta0}")
        if not 0.0 < self.lam < 1.0:
            raise ValueError(f"lambda must lie in (0, 1), got {self.lam}")
        if self.epoch < 0:
            raise ValueError("epoch index must be nonnegative")


@dataclass(frozen=True)
class DropoutRuleParams:
    tau: float = 0.3
    p: float = 0.6
    n: int = 20

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError(f"tau must be >= 0, got {self.tau}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if self.n < 1:
            raise ValueError(f"N must be >= 1, got {self.n}")


NORMS = ("euclidean", "max")


def action_distance(a, b, norm: str = "euclidean") -> np.ndarray:
    """Distance along the last axis; broadcasts a sample matrix against one action."""
    diff = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    if norm == "euclidean":
        return np.sqrt(np.sum(diff * diff, axis=-1))
    if norm == "max":
        return np.max(np.abs(diff), axis=-1)
    raise ValueError(f"unknown norm {norm!r}; expected one of {NORMS}")


def beta_at(schedule: VanillaSchedule) -> float:
    return schedule.lam**schedule.epoch * schedule.beta0


def dr_vanilla(a_exp, a_nov, schedule: VanillaSchedule, rng: np.random.Generator) -> Decision:
    beta = beta_at(schedule)
    z = rng.uniform(0.0, 1.0)
    if z <= beta:
        return Decision(np.asarray(a_exp, dtype=np.float64), Actor.EXPERT, beta=beta)
    return Decision(np.asarray(a_nov, dtype=np.float64), Actor.NOVICE, beta=beta)


def dr_safedagger_star(a_exp, a_nov, tau: float, norm: str = "euclidean") -> Decision:
    dist = float(action_distance(a_nov, a_exp, norm))
    if dist <= tau:
        return Decision(np.asarray(a_nov, dtype=np.float64), Actor.NOVICE, distance=dist)
    return Decision(np.asarray(a_exp, dtype=np.float64), Actor.EXPERT, distance=dist)


def p_hat(a_exp, samples: ActionSampleSet, tau: float, norm: str = "euclidean") -> float:
    """Fraction of novice samples inside the closed tau-ball around the expert action."""
    inside = action_distance(samples.samples, a_exp, norm) <= tau
    return float(np.count_nonzero(inside)) / samples.n


def dr_dropout(a_exp, samples: ActionSampleSet, params: DropoutRuleParams, norm: str = "euclidean") -> Decision:
    if samples.n != params.n:
        raise ValueError(f"expected {params.n} samples, got {samples.n}")
    frac = p_hat(a_exp, samples, params.tau, norm)
    dist = float(action_distance(samples.mean, a_exp, norm))
    if frac >= params.p:
        return Decision(samples.mean, Actor.NOVICE, p_hat=frac, distance=dist)
    return Decision(np.asarray(a_exp, dtype=np.float64), Actor.EXPERT, p_hat=frac, distance=dist)


def dr_behavior_cloning(a_exp) -> Decision:
    return Decision(np.asarray(a_exp, dtype=np.float64), Actor.EXPERT)


def dr_expert_labels_only(a_nov) -> Decision:
    return Decision(np.asarray(a_nov, dtype=np.float64), Actor.NOVICE)


# -- rule objects used by the DAgger engine --------------------------------


class DecisionRule:
    """Queries the novice as the rule requires and returns a Decision."""

    name = "rule"
    uses_dropout = False

    def decide(self, a_exp, novice: NovicePolicy, obs, rng: np.random.Generator, epoch: int) -> Decision:
        raise NotImplementedError

    def params(self) -> dict:
        return {}


class BehaviorCloning(DecisionRule):
    name = "behavior_cloning"

    def decide(self, a_exp, novice, obs, rng, epoch):
        if novice is not None:
            novice.act(obs)
        return dr_behavior_cloning(a_exp)


class ExpertLabelsOnly(DecisionRule):
    name = "expert_labels_only"

    def decide(self, a_exp, novice, obs, rng, epoch):
        return dr_expert_labels_only(novice.act(obs))


class VanillaDAgger(DecisionRule):
    name = "vanilla"

    def __init__(self, beta0: float = 1.0, lam: float = 0.63):
        VanillaSchedule(beta0, lam, 0)
        self.beta0 = beta0
        self.lam = lam

    def schedule(self, epoch: int) -> VanillaSchedule:
        return VanillaSchedule(self.beta0, self.lam, epoch)

    def decide(self, a_exp, novice, obs, rng, epoch):
        return dr_vanilla(a_exp, novice.act(obs), self.schedule(epoch), rng)

    def params(self):
        return {"beta0": self.beta0, "lambda": self.lam}


class SafeDAggerStar(DecisionRule):
    name = "safedagger_star"

    def __init__(self, tau: float = 0.6, norm: str = "euclidean"):
        if tau < 0:
            raise ValueError(f"tau must be >= 0, got {tau}")
        if norm not in NORMS:
            raise ValueError(f"unknown norm {norm!r}")
        self.tau = tau
        self.norm = norm

    def decide(self, a_exp, novice, obs, rng, epoch):
        return dr_safedagger_star(a_exp, novice.act(obs), self.tau, self.norm)

    def params(self):
        return {"tau": self.tau, "norm": self.norm}


class DropoutDAgger(DecisionRule):
    name = "dropout"
    uses_dropout = True

    def __init__(self, tau: float = 0.3, p: float = 0.6, n: int = 20, norm: str = "euclidean"):
        if norm not in NORMS:
            raise ValueError(f"unknown norm {norm!r}")
        self.rule_params = DropoutRuleParams(tau, p, n)
        self.norm = norm

    def decide(self, a_exp, novice, obs, rng, epoch):
        samples = novice.sample(obs, self.rule_params.n, rng)
        return dr_dropout(a_exp, samples, self.rule_params, self.norm)

    def params(self):
        p = self.rule_params
        return {"tau": p.tau, "p": p.p, "samples": p.n, "norm": self.norm}


RULES = {
    cls.name: cls for cls in (BehaviorCloning, ExpertLabelsOnly, VanillaDAgger, SafeDAggerStar, DropoutDAgger)
}
