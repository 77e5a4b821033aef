"""Command line: ``dropdagger {run,plot,replay,validate}``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, dump_config, load_config
from .experiment import ResultsTable, run_experiment
from .plotting import read_trajectory, render_plots, render_trajectory_svg

OUTPUT_DIR_ENV = "DROPDAGGER_OUTPUT_DIR"


def _output_dir(arg: str | None, configured: str) -> str:
    if arg:
        return arg
    return os.environ.get(OUTPUT_DIR_ENV) or configured


def cmd_run(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    config = replace(config, output_dir=_output_dir(args.output_dir, config.output_dir))
    table = run_experiment(config)
    paths = render_plots(table, config.output_dir) if table.rows else []
    print(f"wrote {Path(config.output_dir) / 'results.csv'}")
    for p in paths:
        print(f"wrote {p}")
    for label, err in table.partial.items():
        print(f"partial: {label}: {err}", file=sys.stderr)
    return 1 if table.partial else 0


def cmd_plot(args) -> int:
    table = ResultsTable.from_csv(Path(args.results).read_text())
    out = args.output_dir or str(Path(args.results).parent)
    for p in render_plots(table, out):
        print(f"wrote {p}")
    return 0


def cmd_replay(args) -> int:
    rows = read_trajectory(args.trajectory, args.epoch, args.episode)
    svg = render_trajectory_svg(rows, args.room_size, args.exit_width)
    out = Path(args.output or Path(args.trajectory).with_suffix(".svg"))
    out.write_text(svg)
    print(f"wrote {out}")
    return 0


def cmd_validate(args) -> int:
    config = load_config(args.config)
    sys.stdout.write(dump_config(config))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dropdagger", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run every configured algorithm and write results")
    run.add_argument("config")
    run.add_argument("--output-dir", default=None)
    run.add_argument("--seed", type=int, default=None, help="override the master seed")
    run.set_defaults(func=cmd_run)

    plot = sub.add_parser("plot", help="render safety/learning curves from a results CSV")
    plot.add_argument("results")
    plot.add_argument("--output-dir", default=None)
    plot.set_defaults(func=cmd_plot)

    replay = sub.add_parser("replay", help="draw one episode of a trace CSV inside the room")
    replay.add_argument("trajectory")
    replay.add_argument("--epoch", type=int, default=None)
    replay.add_argument("--episode", type=int, default=None)
    replay.add_argument("--room-size", type=float, default=100.0)
    replay.add_argument("--exit-width", type=float, default=20.0)
    replay.add_argument("-o", "--output", default=None)
    replay.set_defaults(func=cmd_replay)

    validate = sub.add_parser("validate", help="check a config and print it with defaults filled in")
    validate.add_argument("config")
    validate.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
