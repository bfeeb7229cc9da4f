#!/usr/bin/env python3
# coding=utf-8

"""
``lattice-scattering``: run one stage of the impurity scattering pipeline from a JSON configuration.

Exit codes: 0 success, 2 malformed configuration or usage, 3 numerical failure, 4 physics violation (a failed
Levinson ledger among them), 130 interrupted.
"""

import argparse
import logging
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from vt.lattice.scattering.cli.artifacts import ArtifactWriter
from vt.lattice.scattering.cli.cache import DensityCache
from vt.lattice.scattering.cli.commands import COMMANDS
from vt.lattice.scattering.cli.config import SEED_MAX, RunConfig, load_config
from vt.lattice.scattering.cli.pipeline import Pipeline
from vt.lattice.scattering.error_specs import (
    EXIT_OK,
    LatticeScatteringExitingException,
)
from vt.lattice.scattering.handlers import get_error_handler
from vt.lattice.scattering.helpers.argparse_helpers import Directory, FilePath, JsonMapping, PositiveInt
from vt.lattice.scattering.warnings import WarningLog, collect_warnings

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"


def build_parser() -> argparse.ArgumentParser:
    """
    >>> args = build_parser().parse_args(["levinson", "--config", __file__, "--seed", "7"])
    >>> args.command, args.seed, args.threads
    ('levinson', 7, 1)
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=FilePath(), required=True, help="JSON run configuration.")
    common.add_argument(
        "--out",
        type=Directory(allow_missing=True),
        help="output directory, created if missing; the 'outputs' entry of the configuration or '.' by default.",
    )
    common.add_argument(
        "--seed", type=PositiveInt(upper=SEED_MAX, allow_zero=True), help="overrides the seed of the configuration."
    )
    common.add_argument("--threads", type=PositiveInt(), default=1, help="workers for the flow transport.")
    common.add_argument(
        "--tol-overrides",
        type=JsonMapping(),
        help='tolerance overrides as a JSON object, e.g. \'{"levinson": 0.05}\'.',
    )
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="count", default=0, help="more log output, repeatable.")
    verbosity.add_argument("-q", "--quiet", action="count", default=0, help="less log output, repeatable.")

    parser = argparse.ArgumentParser(
        prog="lattice-scattering",
        description="Scattering theory of a periodic tight-binding band perturbed by a finite impurity.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, cmd in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=cmd.help, description=cmd.help)
    return parser


def configure_logging(verbosity: int) -> None:
    """
    ``0`` is ``WARNING``, every step up or down moves one level.
    """
    level = min(max(logging.WARNING - 10 * verbosity, logging.DEBUG), logging.CRITICAL)
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)
    logging.captureWarnings(True)


def run(command: str, config: RunConfig, out: Path, *, threads: int = 1) -> Path:
    """
    Run one subcommand and write its manifest, also when the subcommand fails after producing artifacts.

    :return: the manifest path.
    :raises LatticeScatteringExitingException: whatever the subcommand raised, after the manifest is written.
    """
    pipeline = Pipeline(config, cache=DensityCache(out), threads=threads)
    writer = ArtifactWriter(out, command)
    status = "ok"
    warned = WarningLog()
    try:
        with collect_warnings() as warned, writer.timed("total"):
            COMMANDS[command].run(pipeline, writer)
    except LatticeScatteringExitingException as e:
        status = type(e).__name__
        raise
    finally:
        for line in warned.entries:
            logger.warning(line)
        manifest = writer.manifest(
            config=config.to_dict(),
            config_hash=config.digest(),
            tolerances=config.tolerances.to_dict(),
            tolerance_overrides=config.tolerance_overrides,
            cache=pipeline.cache_info,
            status=status,
            warnings=warned.entries,
        )
    return manifest


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose - args.quiet)
    try:
        config = load_config(args.config, seed=args.seed, tol_overrides=args.tol_overrides)
        out = args.out or Path(config.outputs or ".")
        run(args.command, config, out, threads=args.threads)
    except (LatticeScatteringExitingException, np.linalg.LinAlgError, KeyboardInterrupt) as e:
        get_error_handler("bomb", logger).handle(e, args.command)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
