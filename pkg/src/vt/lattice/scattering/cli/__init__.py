#!/usr/bin/env python3
# coding=utf-8

"""
Command line of the pipeline: run configuration, density cache, artifact writers and the subcommands.
"""

# region re-export configuration
from vt.lattice.scattering.cli.config import BandSpec as BandSpec
from vt.lattice.scattering.cli.config import ImpuritySpec as ImpuritySpec
from vt.lattice.scattering.cli.config import RunConfig as RunConfig
from vt.lattice.scattering.cli.config import ScanSpec as ScanSpec
from vt.lattice.scattering.cli.config import canonical_hash as canonical_hash
from vt.lattice.scattering.cli.config import load_config as load_config
# endregion

# region re-export run machinery
from vt.lattice.scattering.cli.artifacts import ArtifactWriter as ArtifactWriter
from vt.lattice.scattering.cli.cache import DensityCache as DensityCache
from vt.lattice.scattering.cli.cache import density_key as density_key
from vt.lattice.scattering.cli.commands import COMMANDS as COMMANDS
from vt.lattice.scattering.cli.pipeline import Pipeline as Pipeline
# endregion

# region re-export entry points
from vt.lattice.scattering.cli.main import build_parser as build_parser
from vt.lattice.scattering.cli.main import main as main
from vt.lattice.scattering.cli.main import run as run
# endregion
