#!/usr/bin/env python3
# coding=utf-8

"""
The JSON run configuration: band, impurity, grid, scan parameters, tolerances, seed and output directory.

Every value is validated where it is read, and a failure names its JSON path::

    'impurity.sites[2][1]' must be an int
"""

import dataclasses
import hashlib
import json
import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

from vt.utils.commons.commons.core_py import fallback_on_none_strict

from vt.lattice.scattering.band import BandFunction, Site
from vt.lattice.scattering.error_specs import ConfigError, ErrorMsgFormer
from vt.lattice.scattering.error_specs.utils import require_iterable, require_keys, require_type
from vt.lattice.scattering.green import GridSpec
from vt.lattice.scattering.helpers.path_helpers import require_file
from vt.lattice.scattering.spectral import ImpurityModel
from vt.lattice.scattering.tolerances import Tolerances

logger = logging.getLogger(__name__)

IMPURITY_KINDS = ("point", "diagonal", "general", "barrier")
DENSITY_METHODS = ("flow", "oracle")

SEED_MAX = 2**64 - 1


def _config_error(path: str, requirement: str) -> ConfigError:
    errmsg = ErrorMsgFormer.at_path(path, requirement)
    return ConfigError(errmsg, path=path)


def _number(value: Any, path: str) -> float:
    require_type(value, path, float, lenient=True)
    return float(value)


def _int(value: Any, path: str, low: int | None = None) -> int:
    require_type(value, path, int)
    if low is not None and value < low:
        raise _config_error(path, f"must be at least {low}, got {value}") from ValueError(path)
    return int(value)


def _sites(value: Any, path: str, dimension: int) -> tuple[Site, ...]:
    require_iterable(value, path, empty=False)
    out = []
    for i, site in enumerate(value):
        require_iterable(site, ErrorMsgFormer.join_path(path, i), int, length=dimension)
        out.append(tuple(int(x) for x in site))
    if len(set(out)) != len(out):
        raise _config_error(path, "must not repeat a site") from ValueError(path)
    return tuple(out)


def _complex(value: Any, path: str) -> complex:
    """
    A JSON number, or ``[re, im]``.
    """
    if isinstance(value, list):
        require_iterable(value, path, float, length=2)
        return complex(float(value[0]), float(value[1]))
    return complex(_number(value, path))


@dataclass(frozen=True)
class BandSpec:
    """
    The nearest neighbour Laplacian ``2t sum cos k_j`` unless ``terms`` lists Fourier coefficients.

    >>> BandSpec.from_mapping({"dimension": 3}).build().dimension
    3
    >>> try:
    ...     BandSpec.from_mapping({"dimension": 2, "terms": [{"offset": [1], "value": 1.0}]})
    ... except ConfigError as e:
    ...     print(e)
    ValueError: 'band.terms[0].offset' must have 2 items, got 1
    """

    dimension: int
    hopping: float = 1.0
    terms: tuple[tuple[Site, complex], ...] = ()

    @classmethod
    def from_mapping(cls, data: Any, var_name: str = "band") -> "BandSpec":
        require_keys(data, var_name, required=["dimension"], optional=["hopping", "terms"])
        d = _int(data["dimension"], ErrorMsgFormer.join_path(var_name, "dimension"), low=1)
        hopping = _number(data.get("hopping", 1.0), ErrorMsgFormer.join_path(var_name, "hopping"))
        terms = []
        if "terms" in data:
            if "hopping" in data:
                path = ErrorMsgFormer.join_path(var_name, "terms")
                raise _config_error(path, "can not be combined with 'hopping'") from ValueError(path)
            path = ErrorMsgFormer.join_path(var_name, "terms")
            require_iterable(data["terms"], path, empty=False)
            for i, term in enumerate(data["terms"]):
                tpath = ErrorMsgFormer.join_path(path, i)
                require_keys(term, tpath, required=["offset", "value"])
                opath = ErrorMsgFormer.join_path(tpath, "offset")
                require_iterable(term["offset"], opath, int, length=d)
                value = _complex(term["value"], ErrorMsgFormer.join_path(tpath, "value"))
                terms.append((tuple(int(x) for x in term["offset"]), value))
        return cls(d, hopping, tuple(terms))

    def build(self) -> BandFunction:
        if self.terms:
            return BandFunction.from_terms(self.dimension, self.terms)
        return BandFunction.laplacian(self.dimension, self.hopping)

    def to_dict(self) -> dict[str, object]:
        out: dict[str, object] = {"dimension": self.dimension}
        if self.terms:
            out["terms"] = [{"offset": list(o), "value": [v.real, v.imag]} for o, v in self.terms]
        else:
            out["hopping"] = self.hopping
        return out


@dataclass(frozen=True)
class ImpuritySpec:
    """
    ``point`` takes a ``coupling`` at the origin, ``diagonal`` a list of ``potentials``, ``general`` a Hermitian
    ``matrix`` (with optional ``matrix_imag``) and ``barrier`` only the ``sites``, whose hopping to the outside is cut.
    """

    kind: str
    sites: tuple[Site, ...] = ()
    coupling: float = 0.0
    potentials: tuple[float, ...] = ()
    matrix: tuple[tuple[complex, ...], ...] = ()

    @classmethod
    def from_mapping(cls, data: Any, dimension: int, var_name: str = "impurity") -> "ImpuritySpec":
        require_keys(
            data, var_name, required=["kind"], optional=["sites", "coupling", "potentials", "matrix", "matrix_imag"]
        )
        kpath = ErrorMsgFormer.join_path(var_name, "kind")
        require_type(data["kind"], kpath, str)
        kind = data["kind"]
        if kind not in IMPURITY_KINDS:
            errmsg = ErrorMsgFormer.errmsg_for_choices(kind, kpath, list(IMPURITY_KINDS))
            raise ConfigError(errmsg, path=kpath) from ValueError(errmsg)
        path = lambda key: ErrorMsgFormer.join_path(var_name, key)  # noqa: E731
        if kind == "point":
            require_keys(data, var_name, required=["kind", "coupling"])
            return cls(kind, (tuple([0] * dimension),), coupling=_number(data["coupling"], path("coupling")))
        if "sites" not in data:
            raise _config_error(path("sites"), f"is required for kind {kind!r}") from ValueError(path("sites"))
        sites = _sites(data["sites"], path("sites"), dimension)
        if kind == "diagonal":
            require_keys(data, var_name, required=["kind", "sites", "potentials"])
            require_iterable(data["potentials"], path("potentials"), float, length=len(sites))
            return cls(kind, sites, potentials=tuple(float(v) for v in data["potentials"]))
        if kind == "general":
            require_keys(data, var_name, required=["kind", "sites", "matrix"], optional=["matrix_imag"])
            rows = []
            imag = data.get("matrix_imag")
            require_iterable(data["matrix"], path("matrix"), length=len(sites))
            if imag is not None:
                require_iterable(imag, path("matrix_imag"), length=len(sites))
            for i, row in enumerate(data["matrix"]):
                require_iterable(row, ErrorMsgFormer.join_path(path("matrix"), i), float, length=len(sites))
                im_row = [0.0] * len(sites)
                if imag is not None:
                    im_path = ErrorMsgFormer.join_path(path("matrix_imag"), i)
                    require_iterable(imag[i], im_path, float, length=len(sites))
                    im_row = imag[i]
                rows.append(tuple(complex(float(a), float(b)) for a, b in zip(row, im_row)))
            return cls(kind, sites, matrix=tuple(rows))
        require_keys(data, var_name, required=["kind", "sites"])
        return cls(kind, sites)

    def build(self, band: BandFunction) -> ImpurityModel:
        """
        :raises ConfigError: when the model refuses the values, e.g. a non-Hermitian matrix.
        """
        try:
            if self.kind == "point":
                return ImpurityModel.point(band.dimension, self.coupling)
            if self.kind == "diagonal":
                return ImpurityModel.diagonal(self.sites, self.potentials)
            if self.kind == "general":
                return ImpurityModel.general(self.sites, self.matrix)
            return ImpurityModel.barrier(band, self.sites)
        except ValueError as e:
            raise ConfigError(f"impurity: {e}", path="impurity") from e

    def to_dict(self) -> dict[str, object]:
        out: dict[str, object] = {"kind": self.kind}
        if self.kind == "point":
            out["coupling"] = self.coupling
            return out
        out["sites"] = [list(s) for s in self.sites]
        if self.kind == "diagonal":
            out["potentials"] = list(self.potentials)
        elif self.kind == "general":
            out["matrix"] = [[v.real for v in row] for row in self.matrix]
            out["matrix_imag"] = [[v.imag for v in row] for row in self.matrix]
        return out


@dataclass(frozen=True)
class ScanSpec:
    """
    Parameters of the scanning subcommands.
    """

    energies: tuple[float, ...] = ()
    "Energies of ``time-delay`` and ``embedded-search``; ``n_points`` uniform interior energies if empty."
    n_points: int = 20
    b_values: tuple[float, ...] = (-2.0, -1.0, 0.0, 1.0, 2.0)
    "Rescaled energies of ``flow-trace`` and of the density consistency check of ``dos``."
    n_starts: int = 100
    "Random starting points of ``flow-trace``."
    couplings: tuple[float, ...] = ()
    "Couplings of ``point-impurity``; the threshold table ``0, l+/2, 2l+, 2l-, l+, l-`` if empty."
    spectral_check: bool = True
    "Compare the time delay with the resolvent trace in ``time-delay``."

    @classmethod
    def from_mapping(cls, data: Any, var_name: str = "scan") -> "ScanSpec":
        names = [f.name for f in fields(cls)]
        require_keys(data, var_name, optional=names)
        path = lambda key: ErrorMsgFormer.join_path(var_name, key)  # noqa: E731
        kw: dict[str, Any] = {}
        for key in ("energies", "b_values", "couplings"):
            if key in data:
                require_iterable(data[key], path(key), float)
                kw[key] = tuple(float(v) for v in data[key])
        for key in ("n_points", "n_starts"):
            if key in data:
                kw[key] = _int(data[key], path(key), low=1)
        if "spectral_check" in data:
            require_type(data["spectral_check"], path("spectral_check"), bool)
            kw["spectral_check"] = data["spectral_check"]
        return cls(**kw)

    def to_dict(self) -> dict[str, object]:
        return {
            "energies": list(self.energies),
            "n_points": self.n_points,
            "b_values": list(self.b_values),
            "n_starts": self.n_starts,
            "couplings": list(self.couplings),
            "spectral_check": self.spectral_check,
        }


def grid_from_mapping(data: Any, var_name: str = "grid") -> GridSpec:
    """
    >>> grid_from_mapping({"uniform_points": 400, "edge_decades": [1, 6]}).edge_decades
    (1.0, 6.0)
    """
    names = [f.name for f in fields(GridSpec)]
    require_keys(data, var_name, optional=names)
    kw: dict[str, Any] = {}
    for key, value in data.items():
        path = ErrorMsgFormer.join_path(var_name, key)
        if key == "edge_decades":
            require_iterable(value, path, float, length=2)
            kw[key] = (float(value[0]), float(value[1]))
        else:
            kw[key] = _int(value, path, low=0)
    return GridSpec(**kw)


@dataclass(frozen=True)
class RunConfig:
    """
    A complete run configuration.

    >>> cfg = RunConfig.from_mapping({"band": {"dimension": 3}, "impurity": {"kind": "point", "coupling": 8.0}})
    >>> cfg.impurity.coupling, cfg.seed, cfg.density
    (8.0, 0, 'flow')
    >>> try:
    ...     RunConfig.from_mapping({"band": {"dimension": 3}, "impurity": {"kind": "diagonal", "sites": [[0, 0, 0], [1, "0", 0]], "potentials": [1, 2]}})
    ... except ConfigError as e:
    ...     print(e)
    TypeError: 'impurity.sites[1][1]' must be an int
    """

    band: BandSpec
    impurity: ImpuritySpec | None = None
    grid: GridSpec = field(default_factory=GridSpec)
    density: str = "flow"
    scan: ScanSpec = field(default_factory=ScanSpec)
    tolerances: Tolerances = field(default_factory=Tolerances)
    tolerance_overrides: Mapping[str, float] = field(default_factory=dict)
    seed: int = 0
    outputs: str | None = None

    @classmethod
    def from_mapping(cls, data: Any, *, tol_overrides: Mapping[str, Any] | None = None) -> "RunConfig":
        """
        :param data: the parsed JSON document.
        :param tol_overrides: tolerances given on the command line, applied over those of the document.
        :raises ConfigError: naming the JSON path of the first invalid value.
        """
        require_keys(
            data,
            "",
            required=["band"],
            optional=["impurity", "grid", "density", "scan", "tolerances", "seed", "outputs"],
        )
        band = BandSpec.from_mapping(data["band"])
        impurity = (
            ImpuritySpec.from_mapping(data["impurity"], band.dimension) if "impurity" in data else None
        )
        grid = grid_from_mapping(data.get("grid", {}))
        density = data.get("density", "flow")
        require_type(density, "density", str)
        if density not in DENSITY_METHODS:
            errmsg = ErrorMsgFormer.errmsg_for_choices(density, "density", list(DENSITY_METHODS))
            raise ConfigError(errmsg, path="density") from ValueError(errmsg)
        scan = ScanSpec.from_mapping(data.get("scan", {}))
        require_keys(data.get("tolerances", {}), "tolerances", optional=Tolerances.field_names())
        overrides = dict(data.get("tolerances", {}))
        overrides.update(fallback_on_none_strict(tol_overrides, {}))
        tolerances = Tolerances().merged(overrides)
        seed = _int(data.get("seed", 0), "seed", low=0)
        if seed > SEED_MAX:
            raise _config_error("seed", f"must not exceed {SEED_MAX}") from ValueError("seed")
        outputs = data.get("outputs")
        if outputs is not None:
            require_type(outputs, "outputs", str)
        return cls(
            band=band,
            impurity=impurity,
            grid=grid,
            density=density,
            scan=scan,
            tolerances=tolerances,
            tolerance_overrides={k: float(v) for k, v in overrides.items()},
            seed=seed,
            outputs=outputs,
        )

    def with_seed(self, seed: int | None) -> "RunConfig":
        if seed is None:
            return self
        if seed > SEED_MAX:
            raise _config_error("seed", f"must not exceed {SEED_MAX}") from ValueError("seed")
        return dataclasses.replace(self, seed=int(seed))

    def require_impurity(self, command: str) -> ImpuritySpec:
        if self.impurity is None:
            raise _config_error("impurity", f"is required by '{command}'") from ValueError("impurity")
        return self.impurity

    def to_dict(self) -> dict[str, object]:
        return {
            "band": self.band.to_dict(),
            "impurity": self.impurity.to_dict() if self.impurity else None,
            "grid": self.grid.to_dict(),
            "density": self.density,
            "scan": self.scan.to_dict(),
            "tolerance_overrides": dict(sorted(self.tolerance_overrides.items())),
            "seed": self.seed,
            "outputs": self.outputs,
        }

    def digest(self) -> str:
        """
        sha256 over the canonical JSON of the configuration.
        """
        return canonical_hash(self.to_dict())


def canonical_hash(obj: Any) -> str:
    """
    >>> canonical_hash({"b": 1, "a": [1.0, 2]}) == canonical_hash({"a": [1.0, 2], "b": 1})
    True
    """
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def load_config(
    path: Path, *, seed: int | None = None, tol_overrides: Mapping[str, Any] | None = None
) -> RunConfig:
    """
    Read and validate a JSON configuration file.

    :param path: the file.
    :param seed: overrides the seed of the document.
    :param tol_overrides: tolerance overrides, applied last.
    :raises ConfigError: for a missing file, malformed JSON or an invalid value.
    """
    require_file(path, "config")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"config '{path}' is not valid JSON: {e}", path="<root>") from e
    cfg = RunConfig.from_mapping(data, tol_overrides=tol_overrides).with_seed(seed)
    logger.debug("configuration %s loaded from %s", cfg.digest()[:12], path)
    return cfg


def site_list(sites: Sequence[Site]) -> list[list[int]]:
    return [list(s) for s in sites]
