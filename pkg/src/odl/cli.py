"""Command-line experiment runner.

    odl <experiment> [--config FILE] [--seed N] [--out PATH]
    odl calibrate <experiment> [--config FILE] [--seed N] [--out PATH]

Exit codes: 0 success, 2 configuration error, 3 budget exhaustion.
"""

from __future__ import annotations

import argparse
import sys

from .config import EXPERIMENTS, load_config
from .errors import BUDGET_ERRORS, ConfigError
from .experiments import calibrate, fixture_name, run, write_fixture


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="INI file with a section per experiment")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", default=None, help="output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="odl", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for exp in EXPERIMENTS:
        p = sub.add_parser(exp, help=f"run the {exp} experiment")
        _add_common(p)
    pc = sub.add_parser("calibrate", help="run a calibration oracle and write a fixture")
    pc.add_argument("experiment", choices=sorted(EXPERIMENTS))
    _add_common(pc)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "calibrate":
            config = load_config(args.config, args.experiment, args.seed, args.out)
            fixture = calibrate(config)
            path = args.out or fixture_name(args.experiment)
            write_fixture(fixture, path)
            print(f"wrote fixture {path}", file=sys.stderr)
        else:
            config = load_config(args.config, args.command, args.seed, args.out)
            report = run(config)
            if args.out:
                report.write(args.out)
            else:
                sys.stdout.write(report.render())
            print(f"{args.command}: {report.wall_time:.2f}s", file=sys.stderr)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except BUDGET_ERRORS as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
