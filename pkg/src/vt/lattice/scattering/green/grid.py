#!/usr/bin/env python3
# coding=utf-8

"""
Energy grids that resolve the band edges and the van Hove energies.
"""

import logging
from dataclasses import asdict, dataclass

import numpy as np
from numpy.typing import NDArray

from vt.lattice.scattering.band import CriticalPointSet
from vt.lattice.scattering.error_specs import ConfigError, ErrorMsgFormer

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridSpec:
    """
    Resolution of the energy grid and of the surface and Brillouin zone samplers behind the density.

    >>> GridSpec().uniform_points
    2000
    >>> try:
    ...     GridSpec(uniform_points=1)
    ... except ConfigError as e:
    ...     print(e)
    'grid.uniform_points' must be at least 2, got 1
    """

    uniform_points: int = 2000
    edge_decades: tuple[float, float] = (1.0, 9.0)
    "Edge refinement places nodes at ``E-+ +- Delta 10^{-t}`` for ``t`` in this range."
    edge_points_per_decade: int = 40
    dyadic_levels: int = 12
    "Refinement levels around every interior critical value."
    surface_points: int = 6000
    "Least number of quadrature nodes on the reference surface."
    oracle_resolution: int = 0
    "Grid points per axis of the Brillouin zone oracle, 0 for a dimension dependent default."
    extended_decades: int = 13
    "Decades (in units of ``Delta 10^{-9}``) covered outside the band by the extended real part table."

    def __post_init__(self):
        if self.uniform_points < 2:
            raise ConfigError(
                ErrorMsgFormer.at_path(
                    "grid.uniform_points", f"must be at least 2, got {self.uniform_points}"
                ),
                path="grid.uniform_points",
            )
        lo, hi = self.edge_decades
        if not 0 < lo <= hi:
            raise ConfigError(
                ErrorMsgFormer.at_path("grid.edge_decades", f"must satisfy 0 < lo <= hi, got {lo}, {hi}"),
                path="grid.edge_decades",
            )

    def to_dict(self) -> dict[str, object]:
        out = asdict(self)
        out["edge_decades"] = list(self.edge_decades)
        return out


@dataclass(frozen=True)
class EnergyGrid:
    energies: NDArray[np.float64]
    "Sorted energies covering ``[E-, E+]``, both edges included."
    E_minus: float
    E_plus: float
    critical_values: tuple[float, ...]
    "Interior critical values, each of which is a node."

    def __len__(self) -> int:
        return len(self.energies)

    @property
    def interior(self) -> NDArray[np.bool_]:
        return (self.energies > self.E_minus) & (self.energies < self.E_plus)

    def critical_nodes(self) -> NDArray[np.int64]:
        return np.array(
            [int(np.argmin(np.abs(self.energies - c))) for c in self.critical_values],
            dtype=np.int64,
        )


def energy_grid(critical: CriticalPointSet, spec: GridSpec = GridSpec()) -> EnergyGrid:
    """
    Uniform nodes over the band, logarithmic refinement toward both edges and dyadic refinement around every
    interior critical value.

    >>> from vt.lattice.scattering.band import BandFunction, find_critical_points
    >>> grid = energy_grid(find_critical_points(BandFunction.laplacian(3)))
    >>> float(grid.energies[0]), float(grid.energies[-1]), 2.0 in grid.energies
    (-6.0, 6.0, True)
    >>> bool(np.all(np.diff(grid.energies) > 0))
    True
    """
    lo, hi = critical.E_minus, critical.E_plus
    delta = 0.5 * (hi - lo)
    parts = [np.linspace(lo, hi, spec.uniform_points)]
    t_lo, t_hi = spec.edge_decades
    count = int(round((t_hi - t_lo) * spec.edge_points_per_decade)) + 1
    gaps = delta * 10.0 ** (-np.linspace(t_lo, t_hi, count))
    parts += [lo + gaps, hi - gaps]
    spacing = (hi - lo) / (spec.uniform_points - 1)
    steps = spacing * 2.0 ** (-np.arange(spec.dyadic_levels + 1))
    for c in critical.interior_values:
        parts += [np.array([c]), c - steps, c + steps]
    nodes = np.concatenate(parts)
    nodes = np.sort(nodes[(nodes >= lo) & (nodes <= hi)])
    keep = np.concatenate([[True], np.diff(nodes) > 1e-14 * delta])
    nodes = nodes[keep]
    # Exact critical values survive deduplication against nearby uniform nodes.
    for c in critical.interior_values:
        nodes[np.argmin(np.abs(nodes - c))] = c
    nodes[0], nodes[-1] = lo, hi
    logger.debug("energy grid of %d nodes on [%g, %g]", len(nodes), lo, hi)
    return EnergyGrid(
        energies=nodes,
        E_minus=lo,
        E_plus=hi,
        critical_values=tuple(critical.interior_values),
    )


def extended_energies(
    energies: NDArray[np.float64],
    E_minus: float,
    E_plus: float,
    decades: int = 13,
    per_decade: int = 40,
) -> NDArray[np.float64]:
    """
    Band energies extended by geometrically spaced nodes from ``Delta 10^{-9}`` out to ``Delta 10^{decades - 9}``
    past either edge.

    >>> ext = extended_energies(np.linspace(-1.0, 1.0, 5), -1.0, 1.0, decades=2, per_decade=1)
    >>> len(ext), bool(np.all(np.diff(ext) > 0)), round(float(ext[-1]) - 1.0, 12)
    (11, True, 1e-07)
    """
    delta = 0.5 * (E_plus - E_minus)
    gaps = delta * 10.0 ** (np.linspace(-9.0, decades - 9.0, decades * per_decade + 1))
    return np.concatenate([E_minus - gaps[::-1], energies, E_plus + gaps])
