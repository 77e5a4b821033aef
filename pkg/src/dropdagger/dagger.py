"""DAgger data collection, aggregation, retraining and evaluation."""

from __future__ import annotations

import hashlib
import logging
from dataclasses import asdict, dataclass, field, replace
from typing import Callable

import numpy as np

from .decision_rules import Actor, BehaviorCloning, DecisionRule, VanillaDAgger, beta_at
from .envs.base import Env
from .nncore import MLP, NetConfig, TrainingDivergence, train
from .policies import NovicePolicy

log = logging.getLogger(__name__)

# Seed streams: every random draw in a run comes from
# SeedSequence(master_seed, spawn_key=(stream, epoch, episode)).
STREAM_INIT = 0
STREAM_BOOTSTRAP = 1
STREAM_COLLECT = 2
STREAM_TRAIN = 3
STREAM_EVAL = 4


def stream_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


class Dataset:
    """Append-only (observation, expert action) pairs."""

    def __init__(self, obs_dim: int, act_dim: int):
        self.obs_dim = obs_dim
        self.act_dim = act_dim
        self._obs: list[np.ndarray] = []
        self._act: list[np.ndarray] = []

    def __len__(self) -> int:
        return len(self._obs)

    def append(self, obs, action) -> None:
        obs = np.array(obs, dtype=np.float64).reshape(-1)
        action = np.array(action, dtype=np.float64).reshape(-1)
        if obs.shape != (self.obs_dim,) or action.shape != (self.act_dim,):
            raise ValueError(
                f"pair dims ({obs.size}, {action.size}) do not match dataset ({self.obs_dim}, {self.act_dim})"
            )
        self._obs.append(obs)
        self._act.append(action)

    def pairs(self):
        return zip(self._obs, self._act)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if not self._obs:
            return np.empty((0, self.obs_dim)), np.empty((0, self.act_dim))
        return np.stack(self._obs), np.stack(self._act)

    def copy(self) -> Dataset:
        out = Dataset(self.obs_dim, self.act_dim)
        out._obs = list(self._obs)
        out._act = list(self._act)
        return out

    def checksum(self) -> str:
        h = hashlib.sha256()
        for o, a in self.pairs():
            h.update(o.tobytes())
            h.update(a.tobytes())
        return h.hexdigest()

    def dumps(self) -> str:
        """One pair per line: observation values then action values, comma separated."""
        lines = [f"# obs_dim={self.obs_dim} act_dim={self.act_dim}"]
        for o, a in self.pairs():
            lines.append(",".join(repr(float(v)) for v in (*o, *a)))
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> Dataset:
        lines = text.splitlines()
        header = dict(part.split("=") for part in lines[0].lstrip("# ").split())
        out = cls(int(header["obs_dim"]), int(header["act_dim"]))
        for line in lines[1:]:
            if not line.strip():
                continue
            values = [float(v) for v in line.split(",")]
            out.append(values[: out.obs_dim], values[out.obs_dim :])
        return out


def aggregate(data: Dataset, new: Dataset) -> Dataset:
    """Union of the two datasets, ``data`` first; duplicates are kept."""
    if (data.obs_dim, data.act_dim) != (new.obs_dim, new.act_dim):
        raise ValueError("cannot aggregate datasets of different dimensions")
    out = data.copy()
    out._obs.extend(new._obs)
    out._act.extend(new._act)
    return out


@dataclass
class Rollout:
    observations: list[np.ndarray]
    labels: list[np.ndarray]
    states: list
    actors: list[Actor]
    total_return: float
    outcome: str
    steps: int
    trace: list[dict] = field(default_factory=list)

    def dataset(self, obs_dim: int, act_dim: int) -> Dataset:
        out = Dataset(obs_dim, act_dim)
        for o, a in zip(self.observations, self.labels):
            out.append(o, a)
        return out

    @property
    def expert_steps(self) -> int:
        return sum(actor is Actor.EXPERT for actor in self.actors)


def _episode_rngs(rng: np.random.Generator) -> tuple[np.random.Generator, np.random.Generator]:
    env_rng, rule_rng = rng.spawn(2)
    return env_rng, rule_rng


def rollout_combined(
    env: Env,
    expert,
    novice: NovicePolicy | None,
    rule: DecisionRule,
    rng: np.random.Generator,
    horizon: int | None = None,
    epoch: int = 0,
    record_trace: bool = False,
) -> Rollout:
    """Run one episode where ``rule`` picks the executed action at each step.

    Every visited observation is labelled with the expert's action, whichever
    actor was in control.
    """
    horizon = env.max_steps if horizon is None else horizon
    env_rng, rule_rng = _episode_rngs(rng)
    obs = env.reset(env_rng)
    observations, labels, states, actors, trace = [], [], [], [], []
    total = 0.0
    outcome = "running"
    for t in range(horizon):
        state = env.state
        a_exp = expert.act(state)
        decision = rule.decide(a_exp, novice, obs, rule_rng, epoch)
        observations.append(obs)
        labels.append(a_exp)
        states.append(state)
        actors.append(decision.actor)
        if record_trace:
            row = {"t": t, **env.describe_state()}
        result = env.step(decision.chosen_action)
        total += result.reward
        if record_trace:
            row.update(
                u=float(result.info.get("u", decision.chosen_action[0])),
                u_expert=float(a_exp[0]),
                actor=decision.actor.value,
                reward=result.reward,
                p_hat=decision.p_hat,
                distance=decision.distance,
                beta=decision.beta,
            )
            trace.append(row)
        obs = result.observation
        outcome = result.outcome.value
        if result.done:
            break
    return Rollout(observations, labels, states, actors, total, outcome, len(actors), trace)


def rollout_novice(env: Env, novice: NovicePolicy, rng: np.random.Generator, horizon: int | None = None) -> Rollout:
    """The novice acting alone with dropout switched off."""
    horizon = env.max_steps if horizon is None else horizon
    env_rng, _ = _episode_rngs(rng)
    obs = env.reset(env_rng)
    total = 0.0
    outcome = "running"
    steps = 0
    for _ in range(horizon):
        result = env.step(novice.act(obs))
        steps += 1
        total += result.reward
        obs = result.observation
        outcome = result.outcome.value
        if result.done:
            break
    return Rollout([], [], [], [Actor.NOVICE] * steps, total, outcome, steps)


@dataclass
class EpochMetrics:
    epoch: int
    safety_mean: float
    safety_std: float
    learning_mean: float
    learning_std: float
    expert_action_fraction: float
    dataset_size: int = 0
    train_loss: float = float("nan")
    beta: float | None = None
    safety_outcomes: dict = field(default_factory=dict)
    learning_outcomes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _outcome_counts(rollouts: list[Rollout]) -> dict:
    counts: dict[str, int] = {}
    for r in rollouts:
        counts[r.outcome] = counts.get(r.outcome, 0) + 1
    return dict(sorted(counts.items()))


def evaluate(
    env: Env,
    expert,
    novice: NovicePolicy,
    rule: DecisionRule,
    eval_episodes: int,
    seed: int,
    epoch: int = 0,
    horizon: int | None = None,
) -> EpochMetrics:
    """Combined-system (safety) and novice-alone (learning) returns.

    Episode ``j`` of both halves starts from the same evaluation seed, which
    is disjoint from every data-collection seed. Nothing is added to any
    dataset.
    """
    safety, learning = [], []
    for j in range(eval_episodes):
        safety.append(rollout_combined(env, expert, novice, rule, stream_rng(seed, STREAM_EVAL, j), horizon, epoch))
        learning.append(rollout_novice(env, novice, stream_rng(seed, STREAM_EVAL, j), horizon))
    s = np.array([r.total_return for r in safety])
    lr = np.array([r.total_return for r in learning])
    steps = sum(r.steps for r in safety)
    expert_steps = sum(r.expert_steps for r in safety)
    beta = beta_at(rule.schedule(epoch)) if isinstance(rule, VanillaDAgger) else None
    return EpochMetrics(
        epoch=epoch,
        safety_mean=float(s.mean()),
        safety_std=float(s.std()),
        learning_mean=float(lr.mean()),
        learning_std=float(lr.std()),
        expert_action_fraction=expert_steps / steps if steps else 0.0,
        beta=beta,
        safety_outcomes=_outcome_counts(safety),
        learning_outcomes=_outcome_counts(learning),
    )


@dataclass
class DaggerConfig:
    env_factory: Callable[[], Env]
    rule: DecisionRule
    net: NetConfig
    epochs: int = 10
    episodes_per_epoch: int = 5
    eval_episodes: int = 50
    bootstrap_episodes: int = 1
    horizon: int | None = None
    warm_start: bool = True
    seed: int = 0

    def __post_init__(self):
        for name in ("epochs", "episodes_per_epoch", "eval_episodes", "bootstrap_episodes"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.horizon is not None and self.horizon < 1:
            raise ValueError("horizon must be >= 1")


@dataclass
class DaggerResult:
    metrics: list[EpochMetrics]
    dataset: Dataset
    novice: NovicePolicy | None
    trace: list[dict] = field(default_factory=list)
    dataset_sizes: list[int] = field(default_factory=list)
    error: str | None = None

    @property
    def partial(self) -> bool:
        return self.error is not None


def _net_for(config: DaggerConfig, env: Env, rng: np.random.Generator) -> MLP:
    sizes = (env.obs_dim, *config.net.hidden_sizes, env.act_dim)
    return MLP.initialize(replace(config.net, layer_sizes=sizes), rng)


def run_dagger(
    config: DaggerConfig,
    record_trace: bool = False,
    observer: Callable[[str, int, object], None] | None = None,
) -> DaggerResult:
    """Bootstrap from expert episodes, then collect, aggregate, retrain, evaluate.

    ``observer(event, epoch, payload)`` sees every collection rollout
    ("rollout") and the dataset just before and after evaluation
    ("pre_eval", "post_eval").
    """
    notify = observer or (lambda event, epoch, payload: None)
    env = config.env_factory()
    expert = env.make_expert()
    rule = config.rule
    seed = config.seed
    obs_dim, act_dim = env.obs_dim, env.act_dim

    data = Dataset(obs_dim, act_dim)
    bootstrap_rule = BehaviorCloning()
    for j in range(config.bootstrap_episodes):
        r = rollout_combined(env, expert, None, bootstrap_rule, stream_rng(seed, STREAM_BOOTSTRAP, j), config.horizon)
        notify("rollout", -1, r)
        data = aggregate(data, r.dataset(obs_dim, act_dim))

    net = _net_for(config, env, stream_rng(seed, STREAM_INIT, 0))
    novice = NovicePolicy(net, env.obs_scale)
    result = DaggerResult([], data, novice, dataset_sizes=[len(data)])

    def fit(key: int) -> float:
        nonlocal net
        if not config.warm_start and key > 0:
            net = _net_for(config, env, stream_rng(seed, STREAM_INIT, key))
            novice.net = net
        x, y = data.arrays()
        report = train(net, x * env.obs_scale, y, stream_rng(seed, STREAM_TRAIN, key))
        return report.final_loss

    try:
        fit(0)
        for epoch in range(config.epochs):
            new = Dataset(obs_dim, act_dim)
            for j in range(config.episodes_per_epoch):
                r = rollout_combined(
                    env,
                    expert,
                    novice,
                    rule,
                    stream_rng(seed, STREAM_COLLECT, epoch, j),
                    config.horizon,
                    epoch,
                    record_trace,
                )
                notify("rollout", epoch, r)
                new = aggregate(new, r.dataset(obs_dim, act_dim))
                for row in r.trace:
                    result.trace.append({"epoch": epoch, "episode": j, **row})
            data = aggregate(data, new)
            result.dataset = data
            result.dataset_sizes.append(len(data))
            loss = fit(epoch + 1)
            notify("pre_eval", epoch, data)
            metrics = evaluate(env, expert, novice, rule, config.eval_episodes, seed, epoch, config.horizon)
            notify("post_eval", epoch, data)
            metrics.dataset_size = len(data)
            metrics.train_loss = loss
            result.metrics.append(metrics)
            log.info(
                "%s epoch %d: safety %.3f learning %.3f expert %.3f |D|=%d",
                rule.name,
                epoch,
                metrics.safety_mean,
                metrics.learning_mean,
                metrics.expert_action_fraction,
                len(data),
            )
    except TrainingDivergence as exc:
        result.error = f"training diverged: {exc}"
        log.error("%s: %s", rule.name, result.error)
    return result
