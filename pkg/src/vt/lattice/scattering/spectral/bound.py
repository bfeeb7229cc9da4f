#!/usr/bin/env python3
# coding=utf-8

"""
Bound states of ``H = H0 + V``: isolated eigenvalues outside the band, eigenvalues embedded in it and the threshold
singularities at the band edges.
"""

import dataclasses
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy import optimize

from vt.lattice.scattering.band import BandFunction, CriticalPointSet, Site, lattice_fourier
from vt.lattice.scattering.green import GreenBoundary
from vt.lattice.scattering.linalg import kernel
from vt.lattice.scattering.spectral.embedded import (
    EmbeddedState,
    check_first_order,
    exact_embedded_states,
)
from vt.lattice.scattering.spectral.model import Channels, ImpurityModel
from vt.lattice.scattering.tolerances import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)

EDGE_OFFSET = 1e-9
"Distance from the edge, in units of ``Delta``, where the isolated scan starts when ``G`` diverges at the edge."

SCAN_ZERO = 1e-2
"Smallest singular value of the channel matrix, relative to its scale, below which a scan minimum is a zero."

SCAN_GUARD = 1e-3
"Half width of the windows around the edges and the van Hove energies skipped by the Green scan, over the band width."

SCAN_MATCH = 5e-3
"Largest distance between a scan level and the exact level it confirms, in units of the band width."


@dataclass(frozen=True)
class BoundState:
    energy: float
    multiplicity: int
    vectors: NDArray[np.complex128]
    "``psi`` restricted to ``Lambda``, one normalised column per degenerate state."

    def to_dict(self) -> dict[str, object]:
        return {"energy": self.energy, "multiplicity": self.multiplicity}


@dataclass(frozen=True)
class ThresholdState:
    """
    Kernel of ``V_r^{-1} - G_r(E+-)`` at one band edge, split into threshold eigenvalues and threshold resonances.
    """

    sign: int
    energy: float
    dimension: int
    "``dim S_{E+-}``."
    eigenvalue_mult: int
    resonance_mult: int
    "``m+-``."
    sources: NDArray[np.complex128] = field(repr=False)
    "Kernel vectors ``phi = V psi`` on ``Lambda`` as columns."
    supported: bool = True
    "``False`` in dimensions where ``G`` diverges at the edge and no threshold analysis is done."

    def to_dict(self) -> dict[str, object]:
        return {
            "energy": self.energy,
            "dimension": self.dimension,
            "eigenvalue_mult": self.eigenvalue_mult,
            "resonance_mult": self.resonance_mult,
            "supported": self.supported,
        }


@dataclass(frozen=True)
class ScanLevel:
    energy: float
    multiplicity: int
    defect: float
    "Smallest singular value of ``V_r^{-1} - G_r(E - i0)`` at the level, relative to the scan scale."

    def to_dict(self) -> dict[str, object]:
        return {"energy": self.energy, "multiplicity": self.multiplicity, "defect": self.defect}


@dataclass(frozen=True)
class GreenScan:
    """
    Embedded levels seen by the Green function alone, as the zeros of the channel matrix ``V_r^{-1} - G_r(E - i0)``
    inside the band, compared with the exact finite-support levels.

    ``Im G_r(E - i0)`` is positive semi-definite, so the kernel of the channel matrix is the joint kernel of
    ``V_r^{-1} - Re G_r(E)`` and ``Im G_r(E)``.
    """

    levels: tuple[ScanLevel, ...]
    unresolved: tuple[float, ...] = ()
    "Exact levels inside a skipped window around an edge or a van Hove energy."
    missed: tuple[float, ...] = ()
    "Exact levels without a scan level of the same multiplicity nearby."
    spurious: tuple[float, ...] = ()
    "Scan levels without an exact level nearby."

    @property
    def agrees(self) -> bool:
        return not self.missed and not self.spurious

    def to_dict(self) -> dict[str, object]:
        return {
            "levels": [level.to_dict() for level in self.levels],
            "unresolved": list(self.unresolved),
            "missed": list(self.missed),
            "spurious": list(self.spurious),
            "agrees": self.agrees,
        }


@dataclass(frozen=True)
class BoundStateReport:
    dimension: int
    isolated: tuple[BoundState, ...]
    embedded: tuple[EmbeddedState, ...]
    threshold: dict[int, ThresholdState]
    scan: GreenScan | None = None
    "Green function cross-check of the embedded levels."

    @property
    def N_total(self) -> int:
        """
        Isolated plus embedded plus threshold eigenvalues, with multiplicity.
        """
        return (
            sum(s.multiplicity for s in self.isolated)
            + sum(s.multiplicity for s in self.embedded)
            + sum(t.eigenvalue_mult for t in self.threshold.values())
        )

    @property
    def m_plus(self) -> int:
        t = self.threshold.get(1)
        return t.resonance_mult if t else 0

    @property
    def m_minus(self) -> int:
        t = self.threshold.get(-1)
        return t.resonance_mult if t else 0

    def to_dict(self) -> dict[str, object]:
        return {
            "isolated": [s.to_dict() for s in self.isolated],
            "embedded": [s.to_dict() for s in self.embedded],
            "threshold": {
                "minus": self.threshold[-1].to_dict() if -1 in self.threshold else None,
                "plus": self.threshold[1].to_dict() if 1 in self.threshold else None,
            },
            "N_total": self.N_total,
            "green_scan": self.scan.to_dict() if self.scan is not None else None,
        }


def _channel_at(ch: Channels, green: GreenBoundary, energy: float) -> NDArray[np.complex128]:
    m = ch.inverse - ch.compress(green.green_at(energy))
    return 0.5 * (m + np.conj(m.T))


def _scan_side(
    ch: Channels,
    green: GreenBoundary,
    sign: int,
    norm_v: float,
    tolerances: Tolerances,
) -> list[tuple[float, NDArray[np.complex128]]]:
    """
    Roots of the eigenvalues of ``V_r^{-1} - G_r(E)`` beyond one band edge. The eigenvalues are non-decreasing in
    ``E`` outside the band, and every eigenvalue of ``H`` lies within ``||V||`` of the band.
    """
    delta = 0.5 * (green.E_plus - green.E_minus)
    edge = green.E_plus if sign > 0 else green.E_minus
    near = edge + sign * (EDGE_OFFSET * delta if green.dimension <= 2 else 0.0)
    far = edge + sign * (norm_v * (1.0 + 1e-9) + 1e-12 * delta)
    m_near = _channel_at(ch, green, near)
    scale = max(float(np.linalg.norm(ch.inverse, 2)), float(np.linalg.norm(m_near, 2)), 1.0)
    mu_near = np.linalg.eigvalsh(m_near)
    mu_far = np.linalg.eigvalsh(_channel_at(ch, green, far))
    tol = tolerances.kernel_zero * scale
    if green.dimension > 2:
        # a branch within the edge resolution of zero at the edge belongs to the threshold
        tol = max(tol, edge_resolution(ch, green, sign))
    if sign > 0:
        crossing = np.flatnonzero((mu_near < -tol) & (mu_far >= 0.0))
    else:
        crossing = np.flatnonzero((mu_near > tol) & (mu_far <= 0.0))
    lo, hi = sorted((near, far))
    roots = []
    for idx in crossing:
        def branch(energy: float, i: int = int(idx)) -> float:
            return float(np.linalg.eigvalsh(_channel_at(ch, green, energy))[i])

        root = float(optimize.brentq(branch, lo, hi, xtol=tolerances.bisection * delta, rtol=4 * np.finfo(float).eps))
        _, u = np.linalg.eigh(_channel_at(ch, green, root))
        roots.append((root, u[:, int(idx)]))
    logger.debug("%d eigenvalue branch crossings beyond the edge at %g", len(roots), edge)
    return roots


def _group(
    roots: list[tuple[float, NDArray[np.complex128]]], ch: Channels, green: GreenBoundary, resolution: float
) -> list[BoundState]:
    roots = sorted(roots, key=lambda r: r[0])
    states: list[BoundState] = []
    i = 0
    while i < len(roots):
        j = i + 1
        while j < len(roots) and roots[j][0] - roots[i][0] < resolution:
            j += 1
        energy = float(np.mean([r[0] for r in roots[i:j]]))
        g0 = green.green_at(energy)
        cols = [g0 @ (ch.unitary @ r[1]) for r in roots[i:j]]
        vecs = np.column_stack([c / np.linalg.norm(c) for c in cols])
        states.append(BoundState(energy, j - i, vecs))
        i = j
    return states


def isolated_states(
    model: ImpurityModel, green: GreenBoundary, *, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> list[BoundState]:
    """
    Eigenvalues of ``H`` outside ``[E-, E+]`` as the zeros of ``det(V_r^{-1} - G_r(E))``, located by bracketing each
    monotone eigenvalue branch of the channel matrix.
    """
    ch = model.channels(tolerances)
    if ch.rank == 0:
        return []
    delta = 0.5 * (green.E_plus - green.E_minus)
    roots = _scan_side(ch, green, -1, model.norm, tolerances) + _scan_side(ch, green, 1, model.norm, tolerances)
    states = _group(roots, ch, green, 1e3 * tolerances.bisection * delta)
    for s in states:
        logger.info("isolated eigenvalue E=%.12g of multiplicity %d", s.energy, s.multiplicity)
    return states


def vanishing_order_defects(
    sites: tuple[Site, ...], sources: NDArray[np.complex128], extremum: NDArray[np.float64], order: int
) -> NDArray[np.complex128]:
    """
    Rows of Taylor coefficients of ``phi(k) = sum_n phi_n e^{i n.k}`` at ``k*`` up to (excluding) ``order``, one
    column per source vector. ``phi`` vanishes to that order iff the column is zero.
    """
    rows = []
    for j in range(sources.shape[1]):
        col = []
        if order >= 1:
            col.append(np.atleast_1d(lattice_fourier(sites, sources[:, j], extremum)))
        if order >= 2:
            col.append(np.atleast_1d(lattice_fourier(sites, sources[:, j], extremum, order=1)))
        if order >= 3:
            col.append(np.ravel(lattice_fourier(sites, sources[:, j], extremum, order=2)))
        rows.append(np.concatenate(col) if col else np.zeros(0, dtype=complex))
    return np.column_stack(rows) if rows else np.zeros((0, 0), dtype=complex)


def edge_resolution(ch: Channels, green: GreenBoundary, sign: int) -> float:
    """
    Norm of the compressed ``Im G(E - i0)`` at the tabulated energy closest to the edge ``E+-`` inside the band. A
    shift of ``V^{-1}`` smaller than this leaves the phase of the channel matrix on the tabulated energies unchanged,
    so it bounds how closely the table resolves a threshold zero.
    """
    e = green.energies
    inside = np.flatnonzero((e > green.E_minus) & (e < green.E_plus))
    if ch.rank == 0 or len(inside) == 0:
        return 0.0
    j = inside[-1] if sign > 0 else inside[0]
    return float(np.linalg.norm(ch.compress(np.asarray(green.im_table[j], dtype=complex)), 2))


def threshold_state(
    model: ImpurityModel,
    green: GreenBoundary,
    sign: int,
    extremum: NDArray[np.float64],
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> ThresholdState:
    """
    Classify the threshold singularity at ``E-`` (``sign = -1``) or ``E+``. A kernel vector ``phi`` of
    ``V^{-1} - G0(E+-)`` yields a threshold eigenvalue when ``phi(k)`` vanishes at ``k*+-`` to order ``5 - d``, and a
    threshold resonance otherwise. In ``d >= 5`` every kernel vector is an eigenvalue.
    """
    edge = green.E_plus if sign > 0 else green.E_minus
    d = green.dimension
    ch = model.channels(tolerances)
    if d <= 2 or ch.rank == 0:
        if d <= 2:
            logger.info("no threshold analysis in d = %d, where G diverges at the edges", d)
        return ThresholdState(sign, edge, 0, 0, 0, np.zeros((model.n_sites, 0), dtype=complex), supported=d > 2)
    g0 = ch.compress(green.green_at(edge))
    m = ch.inverse - g0
    scale = max(float(np.linalg.norm(ch.inverse, 2)), float(np.linalg.norm(g0, 2)))
    resolved = edge_resolution(ch, green, sign) / scale
    if resolved > tolerances.kernel_zero:
        # a defect below the tabulated Im G near the edge is indistinguishable from a zero
        tolerances = dataclasses.replace(
            tolerances, kernel_zero=resolved, kernel_warn=max(tolerances.kernel_warn, 10.0 * resolved)
        )
    k = kernel(m, tolerances, scale=scale, context=f"threshold matrix at E={edge:g}")
    sources = ch.unitary @ k.basis
    if k.dimension == 0:
        return ThresholdState(sign, edge, 0, 0, 0, sources)
    order = max(5 - d, 0)
    if order == 0:
        eig = k.dimension
    else:
        c = vanishing_order_defects(model.sites, sources, np.asarray(extremum, dtype=float), order)
        sv = np.linalg.svd(c, compute_uv=False)
        rank = int(np.count_nonzero(sv > tolerances.threshold_zero))
        eig = k.dimension - rank
    logger.info(
        "threshold at E=%g: dim S = %d, %d eigenvalue(s), %d resonance(s)",
        edge, k.dimension, eig, k.dimension - eig,
    )
    return ThresholdState(sign, edge, k.dimension, eig, k.dimension - eig, sources)


def _scan_minima(
    ch: Channels, green: GreenBoundary, keep: NDArray[np.bool_], scale: float, tolerances: Tolerances
) -> list[ScanLevel]:
    e = green.energies
    g = green.re_table + 1j * green.im_table
    smallest = np.full(len(e), np.inf)
    smallest[keep] = np.linalg.svd(ch.inverse - ch.compress(g[keep]), compute_uv=False)[:, -1]
    width = green.E_plus - green.E_minus

    def channel_singular(energy: float) -> NDArray[np.float64]:
        return np.linalg.svd(ch.inverse - ch.compress(green.boundary(energy, -1)), compute_uv=False)

    levels: list[ScanLevel] = []
    for j in range(1, len(e) - 1):
        if not (keep[j - 1] and keep[j] and keep[j + 1]):
            continue
        if not (smallest[j] <= smallest[j - 1] and smallest[j] < smallest[j + 1]):
            continue
        if smallest[j] >= 10.0 * SCAN_ZERO * scale:
            continue
        res = optimize.minimize_scalar(
            lambda energy: float(channel_singular(energy)[-1]),
            bounds=(float(e[j - 1]), float(e[j + 1])),
            method="bounded",
            options={"xatol": tolerances.bisection * width},
        )
        sv = channel_singular(float(res.x))
        if sv[-1] >= SCAN_ZERO * scale:
            continue
        if levels and abs(levels[-1].energy - float(res.x)) < 1e3 * tolerances.bisection * width:
            continue
        levels.append(ScanLevel(float(res.x), int(np.count_nonzero(sv < SCAN_ZERO * scale)), float(sv[-1] / scale)))
    return levels


def green_scan(
    model: ImpurityModel,
    green: GreenBoundary,
    exact: Sequence[EmbeddedState] = (),
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> GreenScan:
    """
    Locate embedded levels from the Green boundary values: the smallest singular value of ``V_r^{-1} - G_r(E - i0)``
    is tabulated on the interior grid, every dip is refined by a bounded minimisation, and a refined minimum below
    ``SCAN_ZERO`` (relative to ``max(||V_r^{-1}||, 1)``) is a level whose multiplicity is the number of singular
    values below that bound.

    Windows of half width ``SCAN_GUARD`` around the edges and the van Hove energies are skipped, since ``G`` is
    singular there. The levels are matched against ``exact`` within ``SCAN_MATCH``.

    :param exact: the exact embedded levels to compare with.
    """
    ch = model.channels(tolerances)
    width = green.E_plus - green.E_minus
    guard = SCAN_GUARD * width
    singular = np.array([green.E_minus, green.E_plus, *green.density.critical_values])
    e = green.energies
    keep = (e > green.E_minus) & (e < green.E_plus) & (np.min(np.abs(e[:, None] - singular[None, :]), axis=1) > guard)
    unresolved = tuple(s.energy for s in exact if np.min(np.abs(s.energy - singular)) <= guard)
    if ch.rank == 0 or not keep.any():
        levels: list[ScanLevel] = []
    else:
        scale = max(float(np.linalg.norm(ch.inverse, 2)), 1.0)
        levels = _scan_minima(ch, green, keep, scale, tolerances)

    match = SCAN_MATCH * width
    missed = tuple(
        s.energy
        for s in exact
        if s.energy not in unresolved
        and sum(lv.multiplicity for lv in levels if abs(lv.energy - s.energy) <= match) != s.multiplicity
    )
    spurious = tuple(lv.energy for lv in levels if all(abs(lv.energy - s.energy) > match for s in exact))
    scan = GreenScan(tuple(levels), unresolved, missed, spurious)
    if scan.agrees:
        logger.info("Green scan: %d level(s), in agreement with the exact embedded levels", len(levels))
    else:
        logger.warning(
            "Green scan disagrees with the exact embedded levels: missed %s, spurious %s",
            [f"{x:.6g}" for x in missed], [f"{x:.6g}" for x in spurious],
        )
    return scan


def find_bound_states(
    model: ImpurityModel,
    green: GreenBoundary,
    band: BandFunction,
    critical: CriticalPointSet,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    check_order: bool = True,
    scan: bool = True,
) -> BoundStateReport:
    """
    Isolated, embedded and threshold eigenvalues of ``H0 + V``.

    Isolated eigenvalues come from the monotone channel eigenvalue branches outside the band, embedded ones from the
    exact finite-support construction, and threshold data from the kernel of the channel matrix at the edges. The
    embedded levels are cross-checked by :func:`green_scan`, which only reports.

    :param model: the impurity.
    :param green: Green boundary values tabulated on ``model.sites``.
    :param band: the band.
    :param critical: critical points of the band, for the extrema ``k*+-``.
    :param tolerances: ``kernel_zero``, ``bisection`` and ``threshold_zero``.
    :param check_order: check the order of the zero at every embedded eigenvalue.
    :param scan: run the Green scan of the embedded levels.
    """
    isolated = isolated_states(model, green, tolerances=tolerances)
    embedded = exact_embedded_states(model, band, green.E_minus, green.E_plus, tolerances=tolerances)
    if check_order:
        for state in embedded:
            check_first_order(model, green, state, tolerances=tolerances)
    threshold = {
        -1: threshold_state(model, green, -1, critical.minimum.k, tolerances=tolerances),
        1: threshold_state(model, green, 1, critical.maximum.k, tolerances=tolerances),
    }
    cross_check = green_scan(model, green, embedded, tolerances=tolerances) if scan else None
    report = BoundStateReport(green.dimension, tuple(isolated), tuple(embedded), threshold, cross_check)
    logger.info(
        "bound states: %d isolated, %d embedded levels, N_total = %d, m- = %d, m+ = %d",
        len(isolated), len(embedded), report.N_total, report.m_minus, report.m_plus,
    )
    return report
