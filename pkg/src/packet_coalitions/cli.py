"""Command-line entry point: ``packet-coalitions <experiment> [--config FILE] ...``."""
from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, UnknownExperiment
from .experiments import EXPERIMENTS, GAME_DEFAULTS, RADIO_DEFAULTS, emit_csv, format_csv, load_config, run_experiment


def _epilog() -> str:
    lines = ["experiments:"]
    for name, exp in EXPERIMENTS.items():
        lines.append(f"  {name:<14} {exp.summary} (trials={exp.trials})")
    lines.append("")
    lines.append("defaults:")
    lines.append("  [radio] " + ", ".join(f"{k}={v}" for k, v in RADIO_DEFAULTS.items()))
    lines.append("  [game]  " + ", ".join(f"{k}={v}" for k, v in GAME_DEFAULTS.items()))
    for name, exp in EXPERIMENTS.items():
        lines.append(f"  [geometry] for {name}: " + ", ".join(f"{k}={v}" for k, v in exp.geometry.items()))
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="packet-coalitions",
        description="Run a boundary/backbone coalition experiment and write its table as CSV.",
        epilog=_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("experiment", help="experiment name (see list below)")
    parser.add_argument("--config", metavar="FILE", help="INI configuration file")
    parser.add_argument("--seed", type=int, help="master seed (overrides run.seed)")
    parser.add_argument("--out", metavar="PATH", help="CSV output path (default: run.output or stdout)")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one configuration key; may repeat")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = ""
        if args.config:
            try:
                with open(args.config, encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as err:
                raise ConfigError("--config", f"cannot read {args.config}: {err.strerror}") from None
        overrides = list(args.overrides)
        if args.seed is not None:
            overrides.append(f"run.seed={args.seed}")
        cfg = load_config(args.experiment, text, overrides)
        table = run_experiment(cfg)
        out = args.out or cfg.output
        if out:
            emit_csv(table, out)
        else:
            sys.stdout.write(format_csv(table))
    except UnknownExperiment as err:
        print(f"error: unknown experiment {err.args[0]!r}; choose from {', '.join(EXPERIMENTS)}", file=sys.stderr)
        return 2
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    return 0
