"""Experiment configuration: INI text with dotted section names.

    [experiment]        env, seed, output_dir, obs_noise_sigma
    [dagger]            epochs, episodes_per_epoch, eval_episodes, ...
    [net]               hidden, dropout, learning_rate, ...
    [env.dubins]        DubinsRoomConfig fields
    [env.pointmass]     PointMassConfig fields
    [algorithm.<label>] rule = dropout | vanilla | safedagger_star | behavior_cloning | expert_labels_only
                        plus that rule's parameters and an optional dropout override
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, fields
from pathlib import Path

from .decision_rules import (
    BehaviorCloning,
    DecisionRule,
    DropoutDAgger,
    ExpertLabelsOnly,
    SafeDAggerStar,
    VanillaDAgger,
)
from .envs import DubinsCarEnv, DubinsRoomConfig, GaussianObservationNoise, PointMassConfig, PointMassEnv
from .nncore import NetConfig


class ConfigError(ValueError):
    pass


ENVIRONMENTS = {"dubins": DubinsRoomConfig, "pointmass": PointMassConfig}

RULE_PARAMS = {
    "dropout": {"tau": 0.3, "p": 0.6, "samples": 20, "norm": "euclidean"},
    "safedagger_star": {"tau": 0.6, "norm": "euclidean"},
    "vanilla": {"beta0": 1.0, "lambda": 0.63},
    "behavior_cloning": {},
    "expert_labels_only": {},
}

DEFAULT_ROSTER = (
    ("DropoutDAgger", "dropout"),
    ("VanillaDAgger", "vanilla"),
    ("SafeDAgger*", "safedagger_star"),
    ("BehaviorCloning", "behavior_cloning"),
    ("ExpertLabelsOnly", "expert_labels_only"),
)


@dataclass(frozen=True)
class AlgorithmSpec:
    label: str
    rule: str
    params: dict = field(default_factory=dict)
    dropout: float | None = None

    def build_rule(self) -> DecisionRule:
        p = {**RULE_PARAMS[self.rule], **self.params}
        if self.rule == "dropout":
            return DropoutDAgger(float(p["tau"]), float(p["p"]), int(p["samples"]), p["norm"])
        if self.rule == "safedagger_star":
            return SafeDAggerStar(float(p["tau"]), p["norm"])
        if self.rule == "vanilla":
            return VanillaDAgger(float(p["beta0"]), float(p["lambda"]))
        if self.rule == "behavior_cloning":
            return BehaviorCloning()
        return ExpertLabelsOnly()

    def dropout_prob(self, net_default: float) -> float:
        """Only the dropout rule trains with dropout unless overridden."""
        if self.dropout is not None:
            return self.dropout
        return net_default if self.rule == "dropout" else 0.0


@dataclass(frozen=True)
class NetSettings:
    hidden: tuple[int, ...] = (64, 64, 32)
    dropout: float = 0.05
    learning_rate: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    l2_weight: float = 1e-5
    train_epochs: int = 100
    batch_size: int = 32

    def net_config(self, dropout: float) -> NetConfig:
        # input/output sizes are placeholders until the environment is known
        return NetConfig(
            layer_sizes=(1, *self.hidden, 1),
            dropout_prob=dropout,
            learning_rate=self.learning_rate,
            adam_beta1=self.adam_beta1,
            adam_beta2=self.adam_beta2,
            adam_epsilon=self.adam_epsilon,
            l2_weight=self.l2_weight,
            train_epochs=self.train_epochs,
            batch_size=self.batch_size,
        )


@dataclass(frozen=True)
class DaggerSettings:
    epochs: int = 10
    episodes_per_epoch: int = 5
    eval_episodes: int = 50
    bootstrap_episodes: int = 1
    horizon: int = 0  # 0 means the environment's max_steps
    warm_start: bool = True


@dataclass(frozen=True)
class ExperimentConfig:
    env: str = "dubins"
    env_params: DubinsRoomConfig | PointMassConfig = field(default_factory=DubinsRoomConfig)
    obs_noise_sigma: float = 0.0
    algorithms: tuple[AlgorithmSpec, ...] = ()
    dagger: DaggerSettings = field(default_factory=DaggerSettings)
    net: NetSettings = field(default_factory=NetSettings)
    output_dir: str = "results"
    seed: int = 0

    def make_env(self):
        env = DubinsCarEnv(self.env_params) if self.env == "dubins" else PointMassEnv(self.env_params)
        if self.obs_noise_sigma > 0:
            env = GaussianObservationNoise(env, self.obs_noise_sigma)
        return env


# -- parsing -----------------------------------------------------------------


def _coerce(section: str, key: str, raw: str, default):
    try:
        if isinstance(default, bool):
            lowered = raw.strip().lower()
            if lowered in ("true", "yes", "1", "on"):
                return True
            if lowered in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            return tuple(int(v) for v in raw.replace(",", " ").split())
        return raw.strip()
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from None


def _section_values(parser, section: str, cls) -> dict:
    defaults = {f.name: f.default for f in fields(cls)}
    out = {}
    for key, raw in parser.items(section):
        if key not in defaults:
            raise ConfigError(f"[{section}] unknown key {key!r}; allowed: {sorted(defaults)}")
        out[key] = _coerce(section, key, raw, defaults[key])
    return out


def _build(section: str, cls, values: dict):
    try:
        return cls(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section}] {exc}") from None


def _parse_algorithm(parser, section: str) -> AlgorithmSpec:
    label = section.split(".", 1)[1]
    items = dict(parser.items(section))
    rule = items.pop("rule", None)
    if rule not in RULE_PARAMS:
        raise ConfigError(f"[{section}] rule must be one of {sorted(RULE_PARAMS)}, got {rule!r}")
    dropout = None
    if "dropout" in items:
        dropout = _coerce(section, "dropout", items.pop("dropout"), 0.0)
    allowed = RULE_PARAMS[rule]
    params = {}
    for key, raw in items.items():
        if key not in allowed:
            raise ConfigError(f"[{section}] unknown key {key!r} for rule {rule}; allowed: {sorted(allowed)}")
        params[key] = _coerce(section, key, raw, allowed[key])
    spec = AlgorithmSpec(label, rule, {**allowed, **params}, dropout)
    try:
        spec.build_rule()
        if dropout is not None:
            NetSettings().net_config(dropout)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {exc}") from None
    return spec


def parse_config(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None

    known = {"experiment", "dagger", "net"} | {f"env.{name}" for name in ENVIRONMENTS}
    for section in parser.sections():
        if section not in known and not section.startswith("algorithm."):
            raise ConfigError(f"unknown section [{section}]")

    exp = {}
    if parser.has_section("experiment"):
        exp_defaults = {"env": "dubins", "seed": 0, "output_dir": "results", "obs_noise_sigma": 0.0}
        for key, raw in parser.items("experiment"):
            if key not in exp_defaults:
                raise ConfigError(f"[experiment] unknown key {key!r}; allowed: {sorted(exp_defaults)}")
            exp[key] = _coerce("experiment", key, raw, exp_defaults[key])
    env_name = exp.get("env", "dubins")
    if env_name not in ENVIRONMENTS:
        raise ConfigError(f"[experiment] env must be one of {sorted(ENVIRONMENTS)}, got {env_name!r}")
    if exp.get("obs_noise_sigma", 0.0) < 0:
        raise ConfigError("[experiment] obs_noise_sigma must be nonnegative")
    for other in ENVIRONMENTS:
        if other != env_name and parser.has_section(f"env.{other}"):
            raise ConfigError(f"section [env.{other}] given but experiment env is {env_name!r}")

    env_section = f"env.{env_name}"
    env_cls = ENVIRONMENTS[env_name]
    env_values = _section_values(parser, env_section, env_cls) if parser.has_section(env_section) else {}
    env_params = _build(env_section, env_cls, env_values)

    dagger = DaggerSettings()
    if parser.has_section("dagger"):
        dagger = DaggerSettings(**_section_values(parser, "dagger", DaggerSettings))
    for name in ("epochs", "episodes_per_epoch", "eval_episodes", "bootstrap_episodes"):
        if getattr(dagger, name) < 1:
            raise ConfigError(f"[dagger] {name} must be >= 1")
    if dagger.horizon < 0:
        raise ConfigError("[dagger] horizon must be >= 0")

    net = NetSettings()
    if parser.has_section("net"):
        net = NetSettings(**_section_values(parser, "net", NetSettings))
    try:
        net.net_config(net.dropout)
    except ValueError as exc:
        raise ConfigError(f"[net] {exc}") from None

    algorithms = tuple(_parse_algorithm(parser, s) for s in parser.sections() if s.startswith("algorithm."))
    if not algorithms:
        algorithms = tuple(AlgorithmSpec(label, rule, dict(RULE_PARAMS[rule])) for label, rule in DEFAULT_ROSTER)
    labels = [a.label for a in algorithms]
    if len(set(labels)) != len(labels):
        raise ConfigError("algorithm labels must be unique")

    return ExperimentConfig(
        env=env_name,
        env_params=env_params,
        obs_noise_sigma=float(exp.get("obs_noise_sigma", 0.0)),
        algorithms=algorithms,
        dagger=dagger,
        net=net,
        output_dir=exp.get("output_dir", "results"),
        seed=exp.get("seed", 0),
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text())


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(str(v) for v in value)
    return str(value)


def dump_config(config: ExperimentConfig) -> str:
    """Fully defaulted INI text; ``parse_config(dump_config(c)) == c``."""
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    parser["experiment"] = {
        "env": config.env,
        "seed": str(config.seed),
        "output_dir": config.output_dir,
        "obs_noise_sigma": _fmt(float(config.obs_noise_sigma)),
    }
    parser["dagger"] = {f.name: _fmt(getattr(config.dagger, f.name)) for f in fields(DaggerSettings)}
    parser["net"] = {f.name: _fmt(getattr(config.net, f.name)) for f in fields(NetSettings)}
    parser[f"env.{config.env}"] = {f.name: _fmt(getattr(config.env_params, f.name)) for f in fields(config.env_params)}
    for alg in config.algorithms:
        section = {"rule": alg.rule, **{k: _fmt(v) for k, v in alg.params.items()}}
        if alg.dropout is not None:
            section["dropout"] = _fmt(float(alg.dropout))
        parser[f"algorithm.{alg.label}"] = section
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()
