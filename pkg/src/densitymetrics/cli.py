"""``densitymetrics --experiment NAME ...``: run one experiment and write its artifact."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .experiments import (
    EXIT_ASSERTION,
    EXIT_IO,
    EXIT_OK,
    EXIT_USAGE,
    EXPERIMENTS,
    ExperimentConfig,
    UsageError,
    run,
)

log = logging.getLogger("densitymetrics")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="densitymetrics",
        description="Reproduce the density-space metric computations as checked experiments.",
    )
    # defaults are None so that config-file values survive unless a flag is given
    p.add_argument("--experiment", choices=sorted(EXPERIMENTS), default=None)
    p.add_argument("--out", help="output file (default: <experiment>.<format>)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int, help="trials per suite, or probe families per shape")
    p.add_argument("--nmin", type=int, help="first n for strict-fineness")
    p.add_argument("--nmax", type=int, help="last n for strict-fineness")
    p.add_argument("--kmax", type=int, help="last k for c2-inequivalence")
    p.add_argument("--tol", type=float, help="override the experiment's pass/fail tolerance")
    p.add_argument("--config", help="JSON file with any of the keys above; flags win")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _exit_code_for_argparse(exc: SystemExit) -> int:
    return EXIT_OK if exc.code in (0, None) else EXIT_USAGE


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    data = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {args.config} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
    for key in ExperimentConfig.keys():
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    try:
        config = ExperimentConfig.from_mapping(data)
    except TypeError as exc:
        raise UsageError(str(exc)) from exc
    config.validate()
    return config


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return _exit_code_for_argparse(exc)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = resolve_config(args)
        outcome = run(config)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if outcome.exit_code == EXIT_IO:
        print(outcome.failures[0], file=sys.stderr)
        return EXIT_IO
    for failure in outcome.failures:
        print(f"FAIL {failure}", file=sys.stderr)
    status = "FAIL" if outcome.exit_code == EXIT_ASSERTION else "ok"
    print(f"{config.experiment}: {status} -> {outcome.path}")
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
