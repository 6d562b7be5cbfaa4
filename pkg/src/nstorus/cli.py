"""Command-line front end.

Subcommands:
    run           advance the induction solver and write CSV artifacts
    oracle        Picard-only reference run
    check         certificate-only re-analysis of a saved run directory
    bisect-delta  bracket the largest converging smallness scale

Flags mirror the configuration keys; `--config PATH` loads a file first and
later flags override it. The environment variable NSTORUS_OUTPUT_DIR, when
set, overrides the output directory.

Exit codes: 0 success, 1 configuration error, 2 usage error (argparse),
3 fixed-point non-convergence, 4 oracle mismatch.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import fields as dc_fields
from pathlib import Path

from .config import RunConfig, config_from_mapping, parse_config
from .errors import ConfigError
from .runner import bisect_delta, check_run, run, run_oracle

OUTPUT_DIR_ENV = "NSTORUS_OUTPUT_DIR"


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH",
                        help="configuration file (flat key = value lines)")
    for f in dc_fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        parser.add_argument(flag, dest=f.name, default=argparse.SUPPRESS,
                            metavar=f.name.upper())


def _build_config(args: argparse.Namespace) -> RunConfig:
    mapping: dict = {}
    config_path = getattr(args, "config", None)
    if config_path:
        text = Path(config_path).read_text()
        base = parse_config(text)  # validate the file on its own first
        mapping.update({f.name: getattr(base, f.name) for f in dc_fields(RunConfig)})
    for f in dc_fields(RunConfig):
        if hasattr(args, f.name):
            mapping[f.name] = getattr(args, f.name)
    if os.environ.get(OUTPUT_DIR_ENV):
        mapping["output_dir"] = os.environ[OUTPUT_DIR_ENV]
    return config_from_mapping(mapping)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nstorus",
        description="Spectral unit-interval induction solver for 3D "
                    "Navier-Stokes on the torus.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="advance the induction solver")
    _add_config_flags(p_run)

    p_oracle = sub.add_parser("oracle", help="Picard-only reference run")
    _add_config_flags(p_oracle)

    p_check = sub.add_parser("check", help="re-analyze saved fields")
    p_check.add_argument("run_dir", help="directory written by a previous run")

    p_bisect = sub.add_parser("bisect-delta",
                              help="bracket the largest converging delta")
    _add_config_flags(p_bisect)
    p_bisect.add_argument("--delta-lo", type=float, default=1e-6)
    p_bisect.add_argument("--delta-hi", type=float, default=1.0)
    p_bisect.add_argument("--bisect-steps", type=int, default=20)
    p_bisect.add_argument("--bisect-horizon", type=int, default=50)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "check":
            outcome = check_run(args.run_dir)
        else:
            config = _build_config(args)
            if args.command == "run":
                outcome = run(config)
            elif args.command == "oracle":
                outcome = run_oracle(config)
            else:
                outcome = bisect_delta(config, args.delta_lo, args.delta_hi,
                                       args.bisect_steps, args.bisect_horizon)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(outcome.message)
    return outcome.status


if __name__ == "__main__":
    sys.exit(main())
