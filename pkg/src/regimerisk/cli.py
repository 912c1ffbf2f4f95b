"""
regimerisk.cli
~~~~~~~~~~~~~~
Command-line interface.

    regimerisk <subcommand> --config PATH [--out DIR] [--seed N] [--force]
    regimerisk simulate --out DIR [--seed N] [--weeks N] [--insurers N]

Pipeline subcommands run the stage workflow up to their stage (`run-all` and `report` run every
stage) and write the manifest. Exit codes: 0 success, 1 configuration error, 2 data error,
3 numeric failure.

Functions:
    - build_parser: The argument parser.
    - main: Entry point; returns the exit code.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from regimerisk import __version__
from regimerisk.exceptions import ConfigError, RegimeRiskError
from regimerisk.models.config_model import PipelineConfig
from regimerisk.workflows.pipeline import run_workflow
from regimerisk.workflows.synthetic import SyntheticMarketSpec, simulate_market, write_market

logger = logging.getLogger(__name__)

STAGE_COMMANDS = ("ingest", "fit-margins", "fit-dcc", "regimes", "covar", "report", "run-all")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="regimerisk",
                                     description="Copula-DCC-GARCH market regimes and CoVaR for insurers.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in STAGE_COMMANDS:
        sub = subparsers.add_parser(command, help=f"Run the pipeline up to '{command}'."
                                    if command != "run-all" else "Run every stage.")
        sub.add_argument("--config", required=True, type=Path, help="JSON run configuration.")
        sub.add_argument("--out", type=Path, help="Output directory (overrides output_dir).")
        sub.add_argument("--seed", type=int, help="Seed (overrides seed).")
        sub.add_argument("--force", action="store_true", help="Refit models even when stored fits are valid.")
    simulate = subparsers.add_parser("simulate", help="Write a synthetic weekly market and a matching configuration.")
    simulate.add_argument("--out", required=True, type=Path)
    simulate.add_argument("--seed", type=int, default=12345)
    simulate.add_argument("--weeks", type=int, default=520)
    simulate.add_argument("--insurers", type=int, default=8)
    return parser


def _load_config(args: argparse.Namespace) -> PipelineConfig:
    return PipelineConfig.load(args.config, output_dir=str(args.out) if args.out else None, seed=args.seed,
                               force=True if args.force else None)


def _simulate(args: argparse.Namespace) -> None:
    try:
        spec = SyntheticMarketSpec(n_weeks=args.weeks, n_insurers=args.insurers)
    except ValueError as e:
        raise ConfigError(f"Invalid simulation settings: {e}")
    market = simulate_market(spec, seed=args.seed)
    paths = write_market(market, args.out, seed=args.seed)
    print(f"Wrote {', '.join(str(path) for path in paths.values())}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            _simulate(args)
            return 0
        config = _load_config(args)
        logging.basicConfig(level=config.logging.level, format="%(levelname)s %(name)s: %(message)s")
        _, manifest = run_workflow(config, until=None if args.command == "run-all" else args.command)
    except RegimeRiskError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.debug("unexpected failure in %s", args.command, exc_info=True)
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return RegimeRiskError.exit_code
    print(f"{args.command}: {len(manifest.files)} files in {config.output_dir}")
    for insurer, failure in manifest.failures.items():
        print(f"warning: pair {insurer} failed: {failure}", file=sys.stderr)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
