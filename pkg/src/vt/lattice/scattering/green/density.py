#!/usr/bin/env python3
# coding=utf-8

"""
The spectral density matrix ``rho_nm(E) = (2 pi)^{-d} int_{E(k) = E} e^{i(m - n).k} nu / |grad E|`` on a finite site
set.

Only the difference ``m - n`` enters, so the density is computed once per distinct difference vector and the matrix
is assembled on demand.

Two routes are provided. The flow route samples the reference surface once, transports the nodes along the energy
flow to every interior energy of the grid and sums the transported density-of-states weights against the phases.
The oracle route integrates over a Brillouin zone grid: linear interpolation on triangles (``d = 2``) or tetrahedra
(``d = 3``) with closed-form cumulative fractions, a plain histogram in higher dimensions. It returns bin averages.
"""

import itertools
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from vt.lattice.scattering.band import (
    BandFunction,
    CriticalPointSet,
    Site,
    find_critical_points,
    rescale_maps,
)
from vt.lattice.scattering.error_specs import DomainError, ErrorMsgFormer
from vt.lattice.scattering.flow import (
    FlowField,
    sample_reference_surface,
    transport_dos_weights,
)
from vt.lattice.scattering.flow.field import DEFAULT_CHUNK
from vt.lattice.scattering.flow.surface import kuhn_simplices, grid_shift
from vt.lattice.scattering.green.grid import EnergyGrid, GridSpec, energy_grid
from vt.lattice.scattering.tolerances import DEFAULT_TOLERANCES, Tolerances
from vt.lattice.scattering.warnings import HolderOnlyWarning, vt_warn

logger = logging.getLogger(__name__)

METHODS = ("flow", "oracle")

SLAB = 64
"Rescaled times whose phases are summed in one block."

CELL_BLOCK = 1 << 18
"Grid cells handled at once by the simplex oracle."


def difference_vectors(sites: Sequence[Site]) -> tuple[NDArray[np.int64], NDArray[np.int64]]:
    """
    Distinct differences ``m - n`` over all ordered pairs and, for every pair, the index of its difference.

    >>> diffs, index = difference_vectors([(0, 0), (1, 0)])
    >>> diffs.tolist(), index.tolist()
    ([[-1, 0], [0, 0], [1, 0]], [[1, 2], [0, 1]])
    """
    arr = np.asarray(sites, dtype=np.int64)
    if arr.ndim != 2 or not len(arr):
        raise DomainError(f"sites must be a non-empty list of integer vectors, got shape {arr.shape}")
    pairs = arr[None, :, :] - arr[:, None, :]
    diffs, inverse = np.unique(pairs.reshape(-1, arr.shape[1]), axis=0, return_inverse=True)
    return diffs, inverse.reshape(len(arr), len(arr))


def edge_constant(hessian: NDArray[np.float64], n_sites: int = 1) -> float:
    """
    ``D = 2^{d/2 - 1} pi |Lambda| |S^{d-1}| (2 pi)^{-d} |det E''|^{-1/2}``, the coefficient of
    ``Im G(E -+ i0) ~ D |E - E+-|^{d/2 - 1} M+-`` at a band edge.

    >>> round(edge_constant(2.0 * np.eye(3)), 12) == round(1 / (4 * np.pi), 12)
    True
    >>> round(edge_constant(np.eye(2)) / np.pi, 12) == round(1 / (2 * np.pi), 12)
    True
    """
    d = hessian.shape[0]
    sphere = 2 * np.pi ** (d / 2) / math.gamma(d / 2)
    det = abs(float(np.linalg.det(hessian)))
    return 2 ** (d / 2 - 1) * np.pi * n_sites * sphere / (2 * np.pi) ** d / math.sqrt(det)


@dataclass(frozen=True)
class SpectralDensityMatrix:
    """
    ``rho_nm(E)`` tabulated on an energy grid, stored per difference vector.
    """

    energies: NDArray[np.float64]
    sites: tuple[Site, ...]
    differences: NDArray[np.int64]
    index: NDArray[np.int64]
    "``index[n, m]`` is the row of ``differences`` holding ``m - n``."
    values: NDArray[np.complex128]
    "``rho_delta(E_j)``, shape ``(len(energies), len(differences))``."
    E_minus: float
    E_plus: float
    critical_values: tuple[float, ...] = ()
    method: str = "flow"
    holder: dict[float, tuple[float, float]] = field(default_factory=dict)
    "Observed exponents ``(left, right)`` of ``|rho(E) - rho(c)|`` at every interior critical value ``c``."
    meta: dict[str, object] = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return self.differences.shape[1]

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def rho(self) -> NDArray[np.complex128]:
        """
        The full matrices, shape ``(len(energies), |Lambda|, |Lambda|)``.
        """
        return self.values[:, self.index]

    def delta_row(self, delta: Sequence[int]) -> int:
        hit = np.flatnonzero(np.all(self.differences == np.asarray(delta), axis=1))
        if not len(hit):
            raise DomainError(f"difference {tuple(delta)} does not occur in the site set")
        return int(hit[0])

    def at(self, energy: float) -> NDArray[np.complex128]:
        """
        ``rho(E)`` by linear interpolation, zero outside ``[E-, E+]``.

        Queried exactly at an interior critical value the result is only Hölder continuous in ``E`` and
        a :class:`HolderOnlyWarning` is issued.
        """
        if any(abs(energy - c) <= 1e-12 * max(1.0, abs(c)) for c in self.critical_values):
            vt_warn("density at a critical value is only Hölder continuous", HolderOnlyWarning, energy=energy)
        row = np.array(
            [
                np.interp(energy, self.energies, self.values[:, j].real, left=0.0, right=0.0)
                + 1j * np.interp(energy, self.energies, self.values[:, j].imag, left=0.0, right=0.0)
                for j in range(len(self.differences))
            ]
        )
        return row[self.index]

    def cumulative(self, energies: NDArray[np.float64]) -> NDArray[np.complex128]:
        e, v = self.energies, self.values
        trapezoids = 0.5 * np.diff(e)[:, None] * (v[1:] + v[:-1])
        cum = np.concatenate([np.zeros((1, v.shape[1])), np.cumsum(trapezoids, axis=0)])
        x = np.clip(energies, e[0], e[-1])
        i = np.clip(np.searchsorted(e, x, side="right") - 1, 0, len(e) - 2)
        t = (x - e[i])[:, None]
        slope = (v[i + 1] - v[i]) / (e[i + 1] - e[i])[:, None]
        return cum[i] + t * v[i] + 0.5 * t**2 * slope

    def total_weight(self) -> NDArray[np.complex128]:
        """
        ``int rho(E) dE``, the identity for an exact density.
        """
        return self.cumulative(np.array([self.energies[-1]]))[0][self.index]

    def bin_averages(self, edges: ArrayLike) -> NDArray[np.complex128]:
        """
        Averages of the interpolated density over the bins between consecutive ``edges``, per difference vector.
        """
        e = np.asarray(edges, dtype=float)
        cum = self.cumulative(e)
        return np.diff(cum, axis=0) / np.diff(e)[:, None]

    def to_dict(self) -> dict[str, object]:
        return {
            "method": self.method,
            "n_energies": int(len(self.energies)),
            "sites": [list(s) for s in self.sites],
            "E_minus": self.E_minus,
            "E_plus": self.E_plus,
            "critical_values": list(self.critical_values),
            "holder_exponents": {str(c): list(v) for c, v in self.holder.items()},
            **self.meta,
        }


# region flow route
def _flow_values(
    flow: FlowField,
    energies: NDArray[np.float64],
    diffs: NDArray[np.int64],
    *,
    n_target: int,
    seed: int,
    workers: int,
    chunk_size: int,
) -> tuple[NDArray[np.complex128], dict[str, object]]:
    d = flow.dimension
    rescale = flow.rescale
    sample = sample_reference_surface(flow, n_target, seed=seed).only_valid()
    mu = sample.dos_weights
    b = rescale.f(energies)
    order = np.argsort(b)
    b_sorted = b[order]
    acc = np.zeros((len(b), len(diffs)), dtype=complex)
    kept = 0.0
    pruned = 0
    logger.info("transporting %d surface nodes to %d energies", len(sample), len(b))
    for sl, sol in flow.iter_transport(sample.points, b_sorted, chunk_size=chunk_size, workers=workers):
        valid = sol.valid
        pruned += int(np.count_nonzero(~valid))
        if not np.any(valid):
            continue
        kept += float(mu[sl][valid].sum())
        pts = sol.points[:, valid]
        weights = transport_dos_weights(mu[sl][valid], sol.divergence[:, valid], sol.b, rescale)
        for start in range(0, len(sol.b), SLAB):
            rows = slice(start, start + SLAB)
            phases = np.exp(1j * np.einsum("jnd,Dd->jnD", pts[rows], diffs))
            acc[rows] += np.einsum("jn,jnD->jD", weights[rows], phases)
    total = float(mu.sum())
    if kept <= 0.0:
        raise DomainError("every transported trajectory was pruned")
    acc *= total / kept
    values = np.empty_like(acc)
    values[order] = acc
    meta = {
        "surface_nodes": len(sample),
        "surface_method": sample.method,
        "pruned_trajectories": pruned,
    }
    logger.info("density from %d trajectories, %d pruned", len(sample), pruned)
    return values / (2 * np.pi) ** d, meta


def _edge_values(
    critical: CriticalPointSet, diffs: NDArray[np.int64], sign: int
) -> NDArray[np.complex128]:
    """
    ``rho_delta`` exactly at a band edge: zero for ``d >= 3``, the step height of the edge in two dimensions.
    """
    point = critical.maximum if sign > 0 else critical.minimum
    d = diffs.shape[1]
    if d != 2:
        return np.zeros(len(diffs), dtype=complex)
    height = edge_constant(point.hessian) / np.pi
    return height * np.exp(1j * (diffs @ np.asarray(point.k, dtype=float)))


def holder_exponents(
    energies: NDArray[np.float64],
    values: NDArray[np.float64],
    critical_values: Sequence[float],
    levels: int = 12,
) -> dict[float, tuple[float, float]]:
    """
    Slopes of ``log |rho(c +- h) - rho(c)|`` against ``log h`` over the nodes within ``2^levels`` times the closest
    node on either side of every ``c``.

    >>> e = np.concatenate([-(2.0 ** -np.arange(8)), [0.0], 2.0 ** -np.arange(8)[::-1]])
    >>> rho = np.where(e < 0, 1.0, 1.0 + np.sqrt(np.abs(e)))
    >>> rho[e < 0] -= np.abs(e[e < 0])
    >>> {c: tuple(round(x, 6) for x in v) for c, v in holder_exponents(e, rho, [0.0]).items()}
    {0.0: (1.0, 0.5)}
    """
    out: dict[float, tuple[float, float]] = {}
    for c in critical_values:
        at = int(np.argmin(np.abs(energies - c)))
        exps = []
        for side in (-1, 1):
            h = side * (energies - c)
            sel = (h > 0) & (h <= np.min(np.where(h > 0, h, np.inf)) * 2**levels * (1 + 1e-9))
            y = np.abs(values[sel] - values[at])
            h = h[sel]
            good = y > 0
            if np.count_nonzero(good) < 3:
                exps.append(float("nan"))
                continue
            slope = np.polyfit(np.log(h[good]), np.log(y[good]), 1)[0]
            exps.append(float(slope))
        out[float(c)] = (exps[0], exps[1])
    return out


# endregion


# region oracle route
def _bz_grid(band: BandFunction, n: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    d = band.dimension
    h = 2 * np.pi / n
    shift = grid_shift(d)
    axes = [h * (np.arange(n) + shift[j]) for j in range(d)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    return grid, band.evaluate(grid)


def _cumulative_fraction(e: NDArray[np.float64], x: NDArray[np.float64]) -> NDArray[np.float64]:
    """
    Volume fraction of a simplex where the linear interpolant of the sorted vertex values ``e`` lies below ``x``.

    >>> e = np.array([[0.0, 1.0, 2.0]])
    >>> _cumulative_fraction(e, np.array([1.0])).tolist()
    [0.5]
    >>> e = np.array([[0.0, 1.0, 2.0, 3.0]])
    >>> _cumulative_fraction(e, np.array([1.5])).tolist()
    [0.5]
    """
    x = np.broadcast_to(np.asarray(x, dtype=float), e.shape[:1])
    out = np.where(x >= e[:, -1], 1.0, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        if e.shape[1] == 3:
            e1, e2, e3 = e.T
            r1 = (x >= e1) & (x < e2)
            r2 = (x >= e2) & (x < e3)
            out = np.where(r1, (x - e1) ** 2 / ((e2 - e1) * (e3 - e1)), out)
            out = np.where(r2, 1.0 - (e3 - x) ** 2 / ((e3 - e1) * (e3 - e2)), out)
            return out
        e1, e2, e3, e4 = e.T
        r1 = (x >= e1) & (x < e2)
        r2 = (x >= e2) & (x < e3)
        r3 = (x >= e3) & (x < e4)
        e21, e31, e41, e32, e42, e43 = e2 - e1, e3 - e1, e4 - e1, e3 - e2, e4 - e2, e4 - e3
        u = x - e2
        out = np.where(r1, (x - e1) ** 3 / (e21 * e31 * e41), out)
        middle = (e21**2 + 3 * e21 * u + 3 * u**2 - (e31 + e42) / (e32 * e42) * u**3) / (e31 * e41)
        out = np.where(r2, middle, out)
        out = np.where(r3, 1.0 - (e4 - x) ** 3 / (e41 * e42 * e43), out)
    return out


def _simplex_histogram(
    band: BandFunction, diffs: NDArray[np.int64], edges: NDArray[np.float64], n: int
) -> NDArray[np.complex128]:
    d = band.dimension
    grid, values = _bz_grid(band, n)
    h = 2 * np.pi / n
    base = np.stack(np.meshgrid(*[np.arange(n)] * d, indexing="ij"), axis=-1).reshape(-1, d)
    simplices = kuhn_simplices(d)
    # Every simplex carries the same share of the zone.
    share = 1.0 / (len(base) * len(simplices))
    width = np.diff(edges)
    acc = np.zeros((len(edges) - 1, len(diffs)), dtype=complex)
    for simplex, start in itertools.product(simplices, range(0, len(base), CELL_BLOCK)):
        cells = base[start : start + CELL_BLOCK]
        idx = (cells[:, None, :] + simplex[None]) % n
        ev = np.sort(values[tuple(idx[..., j] for j in range(d))], axis=1)
        centre = (cells + simplex.mean(axis=0) + grid_shift(d)) * h
        phase = np.exp(1j * centre @ diffs.T)
        first = np.clip(np.searchsorted(edges, ev[:, 0], side="right") - 1, 0, len(edges) - 2)
        last = np.clip(np.searchsorted(edges, ev[:, -1], side="right") - 1, 0, len(edges) - 2)
        span = int((last - first).max()) + 1
        lower = _cumulative_fraction(ev, edges[first])
        for step in range(span):
            bins = first + step
            live = bins <= last
            upper = _cumulative_fraction(ev, edges[np.minimum(bins + 1, len(edges) - 1)])
            frac = np.where(live, upper - lower, 0.0) * share
            for j in range(len(diffs)):
                w = frac * phase[:, j]
                acc[:, j] += np.bincount(bins[live], weights=w.real[live], minlength=len(width))
                acc[:, j] += 1j * np.bincount(bins[live], weights=w.imag[live], minlength=len(width))
            lower = upper
    return acc / width[:, None]


def _plain_histogram(
    band: BandFunction, diffs: NDArray[np.int64], edges: NDArray[np.float64], n: int
) -> NDArray[np.complex128]:
    grid, values = _bz_grid(band, n)
    d = band.dimension
    k = grid.reshape(-1, d)
    e = values.reshape(-1)
    bins = np.clip(np.searchsorted(edges, e, side="right") - 1, 0, len(edges) - 2)
    acc = np.zeros((len(edges) - 1, len(diffs)), dtype=complex)
    for j, delta in enumerate(diffs):
        w = np.exp(1j * k @ delta) / len(e)
        acc[:, j] = np.bincount(bins, weights=w.real, minlength=len(edges) - 1) + 1j * np.bincount(
            bins, weights=w.imag, minlength=len(edges) - 1
        )
    return acc / np.diff(edges)[:, None]


def oracle_resolution(dimension: int) -> int:
    """
    Default points per axis of the Brillouin zone oracle.

    >>> [oracle_resolution(d) for d in (2, 3, 4, 5)]
    [1024, 128, 40, 20]
    """
    return {2: 1024, 3: 128, 4: 40}.get(dimension, 20)


def histogram_density(
    band: BandFunction,
    sites: Sequence[Site],
    edges: ArrayLike,
    *,
    resolution: int = 0,
) -> tuple[NDArray[np.float64], NDArray[np.complex128]]:
    """
    Bin averages of ``rho_delta`` from a Brillouin zone grid.

    >>> band = BandFunction.laplacian(2, hopping=0.5)
    >>> _, avg = histogram_density(band, [(0, 0)], np.linspace(-2.0, 2.0, 9), resolution=64)
    >>> round(float((avg[:, 0].real * 0.5).sum()), 10)
    1.0

    :param band: the band function.
    :param sites: the site set.
    :param edges: sorted bin edges covering the band.
    :param resolution: points per axis, see :func:`oracle_resolution` for the default.
    :return: bin edges and bin averages per difference vector, in the order of :func:`difference_vectors`.
    """
    diffs, _ = difference_vectors(sites)
    edges = np.asarray(edges, dtype=float)
    n = resolution or oracle_resolution(band.dimension)
    logger.info("Brillouin zone oracle with %d^%d points", n, band.dimension)
    if band.dimension in (2, 3):
        return edges, _simplex_histogram(band, diffs, edges, n)
    return edges, _plain_histogram(band, diffs, edges, n)


# endregion


def compute_density(
    band: BandFunction,
    sites: Sequence[Sequence[int]],
    *,
    grid: EnergyGrid | None = None,
    grid_spec: GridSpec = GridSpec(),
    method: str = "flow",
    critical: CriticalPointSet | None = None,
    flow: FlowField | None = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    seed: int = 0,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK,
) -> SpectralDensityMatrix:
    """
    The spectral density matrix of ``sites`` on the energy grid.

    At a band edge the density is zero for ``d >= 3`` and equals the step height in two dimensions. In two
    dimensions the density diverges logarithmically at the saddle value; the node there takes the value of its lower
    neighbour.

    :param band: the band function.
    :param sites: the site set ``Lambda``.
    :param grid: the energy grid, built from ``grid_spec`` if ``None``.
    :param grid_spec: resolution of grid, surface sample and oracle.
    :param method: ``"flow"`` or ``"oracle"``.
    :param critical: critical points of the band, found if ``None``.
    :param flow: flow field to transport with, built with the transport exclusion radius if ``None``.
    :param tolerances: numerical tolerances.
    :param seed: seed of the surface sampler.
    :param workers: chunks transported concurrently.
    :param chunk_size: trajectories per solver call.
    :raises DomainError: for an unknown method or an empty site set.
    """
    if method not in METHODS:
        raise DomainError(ErrorMsgFormer.errmsg_for_choices(method, "method", list(METHODS)))
    site_tuple = tuple(tuple(int(x) for x in s) for s in sites)
    diffs, index = difference_vectors(site_tuple)
    if diffs.shape[1] != band.dimension:
        raise DomainError(f"sites are {diffs.shape[1]}-dimensional, the band is {band.dimension}-dimensional")
    if critical is None:
        critical = find_critical_points(band)
    if grid is None:
        grid = energy_grid(critical, grid_spec)
    d = band.dimension

    if method == "oracle":
        count = max(grid_spec.uniform_points // 4, 16)
        edges = np.linspace(critical.E_minus, critical.E_plus, count + 1)
        _, avg = histogram_density(band, site_tuple, edges, resolution=grid_spec.oracle_resolution)
        return SpectralDensityMatrix(
            energies=0.5 * (edges[1:] + edges[:-1]),
            sites=site_tuple,
            differences=diffs,
            index=index,
            values=avg,
            E_minus=critical.E_minus,
            E_plus=critical.E_plus,
            critical_values=(),
            method="oracle",
            meta={"bin_edges": edges.tolist(), "resolution": grid_spec.oracle_resolution or oracle_resolution(d)},
        )

    if flow is None:
        flow = FlowField(
            band,
            rescale_maps(critical),
            critical,
            exclusion_radius=tolerances.transport_exclusion_radius,
            rtol=tolerances.ode_rtol,
            atol=tolerances.ode_atol,
            energy_tol=tolerances.energy_residual,
        )
    energies = grid.energies
    inside = grid.interior
    values = np.zeros((len(energies), len(diffs)), dtype=complex)
    values[inside], meta = _flow_values(
        flow,
        energies[inside],
        diffs,
        n_target=grid_spec.surface_points,
        seed=seed,
        workers=workers,
        chunk_size=chunk_size,
    )
    values[0] = _edge_values(critical, diffs, -1)
    values[-1] = _edge_values(critical, diffs, 1)
    if d == 2:
        for node in grid.critical_nodes():
            values[node] = values[node - 1]
    zero = int(np.flatnonzero(np.all(diffs == 0, axis=1))[0])
    holder = holder_exponents(energies, values[:, zero].real, grid.critical_values)
    for c, (left, right) in holder.items():
        logger.info("observed Hölder exponents at E=%g: %.3f (below), %.3f (above)", c, left, right)
    return SpectralDensityMatrix(
        energies=energies,
        sites=site_tuple,
        differences=diffs,
        index=index,
        values=values,
        E_minus=critical.E_minus,
        E_plus=critical.E_plus,
        critical_values=grid.critical_values,
        method="flow",
        holder=holder,
        meta=meta,
    )
