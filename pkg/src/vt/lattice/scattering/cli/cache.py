#!/usr/bin/env python3
# coding=utf-8

"""
Content-addressed cache of spectral densities under ``<out>/cache/<key>/``.

The key hashes everything the density depends on: the band, the site set, the grid, the density method, the seed
and the tolerances used by the transport. Green boundary values are rebuilt from a cached density by the Hilbert
transform, which is deterministic, so a cache hit changes no numeric output.
"""

import io
import json
import logging
import zipfile
from pathlib import Path

import numpy as np

from vt.lattice.scattering.band import Site
from vt.lattice.scattering.cli.config import BandSpec, canonical_hash
from vt.lattice.scattering.green import GridSpec, SpectralDensityMatrix
from vt.lattice.scattering.handlers import get_error_handler
from vt.lattice.scattering.helpers.path_helpers import atomic_write_bytes, atomic_write_text
from vt.lattice.scattering.tolerances import Tolerances

logger = logging.getLogger(__name__)

CACHE_DIR = "cache"
DENSITY_FILE = "density.npz"
META_FILE = "meta.json"

TRANSPORT_TOLERANCES = (
    "transport_exclusion_radius",
    "ode_rtol",
    "ode_atol",
    "energy_residual",
    "surface",
)
"Tolerances the density depends on."


def density_key(
    band: BandSpec,
    sites: tuple[Site, ...],
    grid: GridSpec,
    method: str,
    seed: int,
    tolerances: Tolerances,
) -> str:
    """
    >>> a = density_key(BandSpec(3), ((0, 0, 0),), GridSpec(), "flow", 0, Tolerances())
    >>> a == density_key(BandSpec(3), ((0, 0, 0),), GridSpec(), "flow", 1, Tolerances())
    False
    >>> a == density_key(BandSpec(3), ((0, 0, 0),), GridSpec(), "flow", 0, Tolerances(levinson=0.5))
    True
    """
    tol = tolerances.to_dict()
    return canonical_hash(
        {
            "band": band.to_dict(),
            "sites": [list(s) for s in sites],
            "grid": grid.to_dict(),
            "method": method,
            "seed": seed,
            "tolerances": {k: tol[k] for k in TRANSPORT_TOLERANCES},
        }
    )


class DensityCache:
    """
    Reads and writes spectral densities by key. A cache rooted at ``None`` never hits and never stores.
    """

    def __init__(self, root: Path | None):
        self.root = None if root is None else root / CACHE_DIR
        self.hits: list[str] = []
        self.misses: list[str] = []

    def _entry(self, key: str) -> Path:
        assert self.root is not None
        return self.root / key

    def load(self, key: str) -> SpectralDensityMatrix | None:
        """
        Cached density under ``key``; ``None`` on a miss. An unreadable entry is logged and counts as a miss.
        """
        if self.root is None:
            return None
        entry = self._entry(key)
        if not (entry / DENSITY_FILE).is_file() or not (entry / META_FILE).is_file():
            self.misses.append(key)
            logger.debug("cache miss %s", key[:12])
            return None
        try:
            density = self._read(entry)
        except (OSError, ValueError, KeyError, zipfile.BadZipFile) as e:
            get_error_handler("log", logger).handle(e, f"unreadable cache entry {key[:12]}")
            self.misses.append(key)
            return None
        self.hits.append(key)
        logger.info("cache hit %s: density on %d energies", key[:12], len(density.energies))
        return density

    @staticmethod
    def _read(entry: Path) -> SpectralDensityMatrix:
        with np.load(entry / DENSITY_FILE) as arrays:
            meta = json.loads((entry / META_FILE).read_text(encoding="utf-8"))
            holder = {
                float(c): (float(left), float(right))
                for c, left, right in zip(arrays["holder_at"], arrays["holder_left"], arrays["holder_right"])
            }
            return SpectralDensityMatrix(
                energies=arrays["energies"],
                sites=tuple(tuple(int(x) for x in s) for s in arrays["sites"]),
                differences=arrays["differences"],
                index=arrays["index"],
                values=arrays["values"],
                E_minus=float(meta["E_minus"]),
                E_plus=float(meta["E_plus"]),
                critical_values=tuple(float(c) for c in arrays["critical_values"]),
                method=meta["method"],
                holder=holder,
                meta=meta["meta"],
            )

    def store(self, key: str, density: SpectralDensityMatrix) -> None:
        if self.root is None:
            return
        entry = self._entry(key)
        at = sorted(density.holder)
        buf = io.BytesIO()
        np.savez(
            buf,
            energies=density.energies,
            sites=np.asarray(density.sites, dtype=np.int64).reshape(len(density.sites), -1),
            differences=density.differences,
            index=density.index,
            values=density.values,
            critical_values=np.asarray(density.critical_values, dtype=float),
            holder_at=np.asarray(at, dtype=float),
            holder_left=np.asarray([density.holder[c][0] for c in at], dtype=float),
            holder_right=np.asarray([density.holder[c][1] for c in at], dtype=float),
        )
        atomic_write_bytes(entry / DENSITY_FILE, buf.getvalue())
        meta = {
            "E_minus": density.E_minus,
            "E_plus": density.E_plus,
            "method": density.method,
            "meta": density.meta,
        }
        atomic_write_text(entry / META_FILE, json.dumps(meta, sort_keys=True, indent=2))
        logger.info("cached density under %s", key[:12])
