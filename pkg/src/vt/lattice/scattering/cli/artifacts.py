#!/usr/bin/env python3
# coding=utf-8

"""
Artifact writers of the command line: CSV tables with 17 significant digits, JSON reports with sorted keys and the
run manifest.

Every file is written atomically. The manifest records a sha256 digest of every artifact, so two runs can be
compared by their digests while the timings differ.
"""

import csv
import hashlib
import io
import json
import logging
import math
import platform
import time
from collections.abc import Iterable, Iterator, Mapping, Sequence
from contextlib import contextmanager
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Any

import numpy as np
import scipy

from vt.lattice.scattering.helpers.path_helpers import atomic_write_text

logger = logging.getLogger(__name__)

DISTRIBUTION = "vt-lattice-scattering"
MANIFEST = "manifest.json"


def format_value(value: Any) -> str:
    """
    >>> [format_value(v) for v in (0.1, 3, True, "x", float("nan"), np.float64(2.5))]
    ['0.10000000000000001', '3', '1', 'x', 'nan', '2.5']
    """
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def json_safe(value: Any) -> Any:
    """
    Plain JSON values for numpy scalars and arrays, complex numbers as ``[re, im]`` and non-finite floats as strings.

    >>> json_safe({"a": np.arange(2), "z": 1 + 2j, "t": (np.float64(0.5), float("inf"))})
    {'a': [0, 1], 'z': [1.0, 2.0], 't': [0.5, 'inf']}
    """
    if isinstance(value, Mapping):
        return {str(k): json_safe(v) for k, v in value.items()}
    if isinstance(value, np.ndarray):
        return json_safe(value.tolist())
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [json_safe(float(value.real)), json_safe(float(value.imag))]
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else str(v)
    return value


def render_csv(columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row of {len(row)} values for {len(columns)} columns")
        w.writerow([format_value(v) for v in row])
    return buf.getvalue()


def render_json(obj: Any) -> str:
    return json.dumps(json_safe(obj), sort_keys=True, indent=2) + "\n"


def package_versions() -> dict[str, str]:
    try:
        own = metadata.version(DISTRIBUTION)
    except metadata.PackageNotFoundError:
        own = "unknown"
    return {
        DISTRIBUTION: own,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


@dataclass
class ArtifactWriter:
    """
    Writes the products of one subcommand under ``out`` and collects the manifest.

    >>> import tempfile
    >>> with tempfile.TemporaryDirectory() as tmp:
    ...     w = ArtifactWriter(Path(tmp), "band-info")
    ...     _ = w.csv("t.csv", ["E", "n"], [(0.5, 1)])
    ...     (Path(tmp) / "t.csv").read_text()
    'E,n\\n0.5,1\\n'
    """

    out: Path
    command: str
    digests: dict[str, str] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)

    def _write(self, name: str, text: str) -> Path:
        path = atomic_write_text(self.out / name, text)
        self.digests[name] = hashlib.sha256(text.encode("utf-8")).hexdigest()
        logger.debug("wrote %s", path)
        return path

    def csv(self, name: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        return self._write(name, render_csv(columns, rows))

    def json(self, name: str, obj: Any) -> Path:
        return self._write(name, render_json(obj))

    @contextmanager
    def timed(self, stage: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[stage] = time.perf_counter() - start
            logger.info("%s: %s took %.3f s", self.command, stage, self.timings[stage])

    def manifest(
        self,
        *,
        config: Mapping[str, Any],
        config_hash: str,
        tolerances: Mapping[str, float],
        tolerance_overrides: Mapping[str, float],
        cache: Mapping[str, Any],
        status: str,
        warnings: Sequence[str] = (),
    ) -> Path:
        """
        Write ``manifest.json``. Its ``determinism_sha256`` covers everything but the cache record, the warnings,
        the timings and the versions: warnings raised while computing a density do not repeat on a cache hit.
        """
        stable = {
            "command": self.command,
            "config": config,
            "config_sha256": config_hash,
            "tolerances": dict(tolerances),
            "tolerance_overrides": dict(tolerance_overrides),
            "artifacts": dict(sorted(self.digests.items())),
            "status": status,
        }
        determinism = hashlib.sha256(render_json(stable).encode("utf-8")).hexdigest()
        doc = {
            **stable,
            "determinism_sha256": determinism,
            "cache": dict(cache),
            "warnings": list(warnings),
            "versions": package_versions(),
            "timings": dict(self.timings),
        }
        path = atomic_write_text(self.out / MANIFEST, render_json(doc))
        logger.info("%s: manifest %s, determinism digest %s", self.command, path, determinism[:12])
        return path
