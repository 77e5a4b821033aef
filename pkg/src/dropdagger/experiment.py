"""Multi-algorithm sweeps and their CSV / JSON outputs."""

from __future__ import annotations

import csv
import io
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, dump_config
from .dagger import DaggerConfig, EpochMetrics, run_dagger

log = logging.getLogger(__name__)

RESULT_COLUMNS = (
    "algorithm",
    "epoch",
    "safety_mean",
    "safety_std",
    "learning_mean",
    "learning_std",
    "expert_action_fraction",
)
TRACE_COLUMNS = (
    "epoch",
    "episode",
    "t",
    "x",
    "y",
    "theta",
    "v",
    "u",
    "u_expert",
    "actor",
    "reward",
    "p_hat",
    "distance",
    "beta",
)


def fmt_float(value: float) -> str:
    return format(float(value), ".17g")


@dataclass(frozen=True)
class ResultRow:
    algorithm: str
    epoch: int
    safety_mean: float
    safety_std: float
    learning_mean: float
    learning_std: float
    expert_action_fraction: float


@dataclass
class ResultsTable:
    rows: list[ResultRow] = field(default_factory=list)
    partial: dict[str, str] = field(default_factory=dict)

    def algorithms(self) -> list[str]:
        seen = []
        for r in self.rows:
            if r.algorithm not in seen:
                seen.append(r.algorithm)
        return seen

    def series(self, algorithm: str, column: str) -> list[float]:
        rows = sorted((r for r in self.rows if r.algorithm == algorithm), key=lambda r: r.epoch)
        return [getattr(r, column) for r in rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(RESULT_COLUMNS)
        for r in self.rows:
            writer.writerow(
                [r.algorithm, r.epoch] + [fmt_float(getattr(r, c)) for c in RESULT_COLUMNS[2:]]
            )
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> ResultsTable:
        reader = csv.DictReader(io.StringIO(text))
        if tuple(reader.fieldnames or ()) != RESULT_COLUMNS:
            raise ValueError(f"unexpected results header {reader.fieldnames}")
        rows = [
            ResultRow(
                rec["algorithm"],
                int(rec["epoch"]),
                *(float(rec[c]) for c in RESULT_COLUMNS[2:]),
            )
            for rec in reader
        ]
        return cls(rows)


def metrics_row(label: str, m: EpochMetrics) -> ResultRow:
    return ResultRow(
        label, m.epoch, m.safety_mean, m.safety_std, m.learning_mean, m.learning_std, m.expert_action_fraction
    )


def algorithm_seed(master: int, index: int) -> int:
    return int(np.random.SeedSequence(master, spawn_key=(1000 + index,)).generate_state(1)[0])


def safe_name(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]", "_", label.replace("*", "_star"))


def dagger_config(config: ExperimentConfig, index: int) -> DaggerConfig:
    alg = config.algorithms[index]
    d = config.dagger
    return DaggerConfig(
        env_factory=config.make_env,
        rule=alg.build_rule(),
        net=config.net.net_config(alg.dropout_prob(config.net.dropout)),
        epochs=d.epochs,
        episodes_per_epoch=d.episodes_per_epoch,
        eval_episodes=d.eval_episodes,
        bootstrap_episodes=d.bootstrap_episodes,
        horizon=d.horizon or None,
        warm_start=d.warm_start,
        seed=algorithm_seed(config.seed, index),
    )


def write_trace(path: Path, trace: list[dict]) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for row in trace:
            out = []
            for col in TRACE_COLUMNS:
                value = row.get(col)
                if value is None:
                    out.append("")
                elif isinstance(value, float):
                    out.append(fmt_float(value))
                else:
                    out.append(str(value))
            writer.writerow(out)


def run_experiment(config: ExperimentConfig, out_dir=None, write: bool = True) -> ResultsTable:
    """Run every configured algorithm; a failing algorithm is recorded, not fatal."""
    out = Path(out_dir or config.output_dir)
    if write:
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.ini").write_text(dump_config(config))
    table = ResultsTable()
    summary = {"seed": config.seed, "algorithms": []}
    for i, alg in enumerate(config.algorithms):
        dcfg = dagger_config(config, i)
        log.info("running %s (rule %s, seed %d)", alg.label, alg.rule, dcfg.seed)
        entry = {
            "label": alg.label,
            "rule": alg.rule,
            "params": dcfg.rule.params(),
            "dropout": dcfg.net.dropout_prob,
            "seed": dcfg.seed,
        }
        try:
            result = run_dagger(dcfg, record_trace=write)
        except Exception as exc:  # recorded per algorithm; the sweep continues
            log.exception("%s failed", alg.label)
            table.partial[alg.label] = f"{type(exc).__name__}: {exc}"
            entry["error"] = table.partial[alg.label]
            summary["algorithms"].append(entry)
            continue
        if result.partial:
            table.partial[alg.label] = result.error
            entry["error"] = result.error
        table.rows.extend(metrics_row(alg.label, m) for m in result.metrics)
        entry["epochs"] = [m.to_dict() for m in result.metrics]
        entry["dataset_sizes"] = result.dataset_sizes
        summary["algorithms"].append(entry)
        if write:
            write_trace(out / f"trace_{safe_name(alg.label)}.csv", result.trace)

    summary["partial"] = table.partial
    summary["complete"] = not table.partial and all(
        len(table.series(a.label, "safety_mean")) == config.dagger.epochs for a in config.algorithms
    )
    if write:
        (out / "results.csv").write_text(table.to_csv())
        (out / "results.json").write_text(json.dumps(summary, indent=2, sort_keys=True, default=_json_default))
    return table


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")
