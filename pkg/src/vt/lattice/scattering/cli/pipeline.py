#!/usr/bin/env python3
# coding=utf-8

"""
The stages of a run, band to Levinson, built on first use and kept for the rest of the subcommand.
"""

import logging
from functools import cached_property

from vt.lattice.scattering.band import (
    BandFunction,
    CriticalPointSet,
    RescaledEnergyMap,
    Site,
    find_critical_points,
    rescale_maps,
)
from vt.lattice.scattering.cli.cache import DensityCache, density_key
from vt.lattice.scattering.cli.config import RunConfig
from vt.lattice.scattering.flow import FlowField, SurfaceSample
from vt.lattice.scattering.flow.surface import sample_reference_surface
from vt.lattice.scattering.green import GreenBoundary, SpectralDensityMatrix, compute_density, hilbert_transform
from vt.lattice.scattering.spectral import BoundStateReport, ImpurityModel, find_bound_states

logger = logging.getLogger(__name__)


class Pipeline:
    """
    Lazily built stages of one run.

    >>> from vt.lattice.scattering.cli.config import RunConfig
    >>> p = Pipeline(RunConfig.from_mapping({"band": {"dimension": 3}}))
    >>> p.critical.E_plus, round(p.rescale.Delta, 12)
    (6.0, 6.0)
    """

    def __init__(self, config: RunConfig, *, cache: DensityCache | None = None, threads: int = 1):
        self.config = config
        self.tolerances = config.tolerances
        self.cache = cache or DensityCache(None)
        self.threads = threads
        self._density: dict[tuple[Site, ...], tuple[SpectralDensityMatrix, bool]] = {}
        self._green: dict[tuple[Site, ...], GreenBoundary] = {}

    @cached_property
    def band(self) -> BandFunction:
        return self.config.band.build()

    @cached_property
    def critical(self) -> CriticalPointSet:
        cps = find_critical_points(self.band)
        logger.info("%d critical points, band [%g, %g]", len(cps.points), cps.E_minus, cps.E_plus)
        return cps

    @cached_property
    def rescale(self) -> RescaledEnergyMap:
        return rescale_maps(self.critical)

    @cached_property
    def flow(self) -> FlowField:
        """
        The flow with the single-trajectory exclusion radius.
        """
        tol = self.tolerances
        return FlowField(
            self.band,
            self.rescale,
            self.critical,
            exclusion_radius=tol.exclusion_radius,
            rtol=tol.ode_rtol,
            atol=tol.ode_atol,
            energy_tol=tol.energy_residual,
        )

    @cached_property
    def transport_flow(self) -> FlowField:
        return self.flow.with_exclusion_radius(self.tolerances.transport_exclusion_radius)

    @cached_property
    def sample(self) -> SurfaceSample:
        return sample_reference_surface(
            self.transport_flow, self.config.grid.surface_points, seed=self.config.seed
        )

    @cached_property
    def model(self) -> ImpurityModel:
        return self.config.require_impurity("impurity").build(self.band)

    def density(self, sites: tuple[Site, ...]) -> tuple[SpectralDensityMatrix, bool]:
        """
        The spectral density on ``sites``, from the cache when possible.

        :return: the density and whether it came from the cache.
        """
        if sites in self._density:
            return self._density[sites]
        cfg = self.config
        key = density_key(cfg.band, sites, cfg.grid, cfg.density, cfg.seed, self.tolerances)
        cached = self.cache.load(key)
        if cached is not None:
            self._density[sites] = (cached, True)
            return cached, True
        density = compute_density(
            self.band,
            sites,
            grid_spec=cfg.grid,
            method=cfg.density,
            critical=self.critical,
            flow=self.transport_flow,
            tolerances=self.tolerances,
            seed=cfg.seed,
            workers=self.threads,
        )
        self.cache.store(key, density)
        self._density[sites] = (density, False)
        return density, False

    def green(self, sites: tuple[Site, ...] | None = None) -> GreenBoundary:
        """
        Green boundary values on ``sites``, the impurity sites by default.
        """
        key = tuple(sites) if sites is not None else tuple(self.model.sites)
        if key not in self._green:
            density, _ = self.density(key)
            self._green[key] = hilbert_transform(density, self.critical, tolerances=self.tolerances)
        return self._green[key]

    @cached_property
    def report(self) -> BoundStateReport:
        return find_bound_states(self.model, self.green(), self.band, self.critical, tolerances=self.tolerances)

    @property
    def cache_info(self) -> dict[str, object]:
        return {"hits": list(self.cache.hits), "misses": list(self.cache.misses)}
