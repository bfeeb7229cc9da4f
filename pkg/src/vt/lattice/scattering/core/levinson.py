#!/usr/bin/env python3
# coding=utf-8

"""
Levinson's sum rule ``(1/2 pi) int Tr T_E dE + N = rhs`` for an impurity, and the contour data of its argument
principle form.

The integral of the time delay is the total change of the scattering phase ``arg det s_E = 2 arg det M(E - i0)``
across the band, with ``M = V_r^{-1} - G_r``. It is obtained by unwrapping the phase with step control rather than by
quadrature of ``Tr T_E``, so the winding can not alias a full turn. ``det M(E - i0)`` vanishes at every embedded
eigenvalue and the phase of the determinant jumps there by ``2 pi`` times the multiplicity while the scattering phase
itself stays continuous; the unwrapping skips a small window around each embedded energy and the jump is booked into
``N``.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from vt.lattice.scattering.band import CriticalPointSet
from vt.lattice.scattering.core.corners import CornerData, corner_operators
from vt.lattice.scattering.core.winding import PhaseTrack, track_phase, wrap
from vt.lattice.scattering.error_specs import DomainError, LevinsonViolation, Unsupported
from vt.lattice.scattering.green import GreenBoundary
from vt.lattice.scattering.spectral import BoundStateReport, ImpurityModel
from vt.lattice.scattering.tolerances import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)

EMBEDDED_WINDOW = 1e-6
"Half-width, in units of ``Delta``, of the window skipped around an embedded eigenvalue."

INDEPENDENT_NODES = 4001
"Uniform nodes of the argument principle path."

EDGE_DECADES = (1, 9)
"The argument principle path adds nodes at ``Delta 10^{-t}`` from both edges for ``t`` in this range."

CONTOUR_NODES = 200
"Nodes on each real-axis piece of the point impurity contour outside the band."


@dataclass(frozen=True)
class PhaseInterval:
    start: float
    end: float
    turns: float
    "Change of the scattering phase over the interval, in units of ``2 pi``."
    refined: int

    def to_dict(self) -> dict[str, object]:
        return {"start": self.start, "end": self.end, "turns": self.turns, "refined": self.refined}


@dataclass(frozen=True)
class EmbeddedJump:
    energy: float
    multiplicity: int
    "The phase of ``det M(E - i0)`` jumps by ``2 pi multiplicity``; the jump is counted in ``N``."

    def to_dict(self) -> dict[str, object]:
        return {"energy": self.energy, "multiplicity": self.multiplicity}


@dataclass(frozen=True)
class LevinsonLedger:
    """
    Both sides of the sum rule with everything that entered them.
    """

    dimension: int
    total_time_delay: float
    "``(1/2 pi) int Tr T_E dE``."
    N: int
    "Isolated, embedded and threshold eigenvalues."
    m_plus: int
    m_minus: int
    rhs: float
    intervals: tuple[PhaseInterval, ...]
    jumps: tuple[EmbeddedJump, ...]
    corner_terms: dict[int, float] | None
    "``Tr T+-``; ``None`` where the corners were not constructed."
    argument_principle: float
    "Counterclockwise winding of ``det(1 - V G(z))`` around the band, from its lower boundary values."
    tolerance: float
    phase_track: tuple[PhaseTrack, ...] = field(default=(), repr=False, compare=False)

    @property
    def lhs(self) -> float:
        return self.total_time_delay + self.N

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def corner_closure(self) -> float | None:
        """
        ``|total + N + Tr T+ + Tr T-|``, the sum rule in the form where the resonances enter through the corners.
        """
        if self.corner_terms is None:
            return None
        return abs(self.total_time_delay + self.N + sum(self.corner_terms.values()))

    @property
    def path_agreement(self) -> float:
        """
        ``|argument_principle + total_time_delay|``; the two paths count the same winding with opposite orientation.
        """
        return abs(self.argument_principle + self.total_time_delay)

    @property
    def holds(self) -> bool:
        return self.residual <= self.tolerance

    def to_dict(self) -> dict[str, object]:
        return {
            "dimension": self.dimension,
            "total_time_delay": self.total_time_delay,
            "N": self.N,
            "m_plus": self.m_plus,
            "m_minus": self.m_minus,
            "corner_terms": None if self.corner_terms is None else {
                "minus": self.corner_terms.get(-1, 0.0),
                "plus": self.corner_terms.get(1, 0.0),
            },
            "lhs": self.lhs,
            "rhs": self.rhs,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "holds": self.holds,
            "corner_closure": self.corner_closure,
            "argument_principle": self.argument_principle,
            "path_agreement": self.path_agreement,
            "intervals": [i.to_dict() for i in self.intervals],
            "embedded_jumps": [j.to_dict() for j in self.jumps],
        }


def levinson_rhs(dimension: int, m_plus: int, m_minus: int) -> float:
    """
    Right hand side of the sum rule: threshold resonances weigh one half in three dimensions, one in four and do not
    occur from five on.

    >>> levinson_rhs(3, 1, 0), levinson_rhs(4, 1, 1), levinson_rhs(5, 0, 0)
    (-0.5, -2.0, 0.0)
    >>> try:
    ...     levinson_rhs(2, 0, 0)
    ... except Unsupported as e:
    ...     print(e)
    no threshold analysis in d = 2, where G diverges at the band edges
    """
    if dimension <= 2:
        raise Unsupported(f"no threshold analysis in d = {dimension}, where G diverges at the band edges")
    if dimension == 3:
        return -0.5 * (m_plus + m_minus)
    if dimension == 4:
        return -float(m_plus + m_minus)
    return 0.0


def _channel_phase(model: ImpurityModel, green: GreenBoundary, tolerances: Tolerances) -> Callable[[float], float]:
    ch = model.channels(tolerances)

    def phase(energy: float) -> float:
        m = ch.inverse - ch.compress(green.boundary(energy, -1))
        sign, _ = np.linalg.slogdet(m)
        return float(2.0 * np.angle(sign))

    return phase


def _site_phase(model: ImpurityModel, green: GreenBoundary) -> Callable[[float], float]:
    eye = np.eye(model.n_sites)

    def phase(energy: float) -> float:
        sign, _ = np.linalg.slogdet(eye - model.v_matrix @ green.boundary(energy, -1))
        return float(2.0 * np.angle(sign))

    return phase


def _breakpoints(green: GreenBoundary, report: BoundStateReport) -> tuple[list[tuple[float, float]], list[EmbeddedJump]]:
    """
    Open intervals of the band between embedded windows, and the jumps the windows hide.
    """
    delta = 0.5 * (green.E_plus - green.E_minus)
    w = EMBEDDED_WINDOW * delta
    jumps = [
        EmbeddedJump(float(s.energy), int(s.multiplicity))
        for s in sorted(report.embedded, key=lambda s: s.energy)
        if green.E_minus < s.energy < green.E_plus
    ]
    intervals = []
    lo = green.E_minus
    for j in jumps:
        intervals.append((lo, j.energy - w))
        lo = j.energy + w
    intervals.append((lo, green.E_plus))
    return intervals, jumps


def _track_segments(
    argument: Callable[[float], float],
    segments: list[NDArray[np.float64]],
    initial: list[NDArray[np.float64] | None],
    max_step: float,
) -> tuple[float, list[PhaseTrack]]:
    """
    Unwrap each segment separately and join neighbours by the wrapped step between them.
    """
    total = 0.0
    tracks = []
    last: float | None = None
    for nodes, values in zip(segments, initial):
        track = track_phase(argument, nodes, max_step=max_step, initial=values)
        if last is not None:
            total += float(wrap(track.phases[0] - last))
        total += track.total
        last = float(track.phases[-1])
        tracks.append(track)
    return total, tracks


def scattering_phase_change(
    model: ImpurityModel,
    green: GreenBoundary,
    report: BoundStateReport,
    *,
    critical_values: tuple[float, ...] = (),
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> tuple[float, tuple[PhaseInterval, ...], tuple[EmbeddedJump, ...], tuple[PhaseTrack, ...]]:
    """
    ``(1/2 pi) (arg det s_{E+} - arg det s_{E-})`` from the tabulated boundary values, refined where the phase steps
    more than ``tolerances.phase_step``.

    :return: the total in turns, the per interval turns split at critical values and embedded windows, the embedded
        jumps and the phase tracks.
    """
    ch = model.channels(tolerances)
    if ch.rank == 0:
        return 0.0, (), (), ()
    e = green.energies
    interior = (e > green.E_minus) & (e < green.E_plus)
    nodes = e[interior]
    tables = green.re_table[interior] + 1j * green.im_table[interior]
    raw = np.array([2.0 * np.angle(np.linalg.slogdet(ch.inverse - ch.compress(g))[0]) for g in tables])
    argument = _channel_phase(model, green, tolerances)
    windows, jumps = _breakpoints(green, report)
    cuts = sorted(v for v in critical_values if green.E_minus < v < green.E_plus)
    segments: list[NDArray[np.float64]] = []
    initial: list[NDArray[np.float64] | None] = []
    for lo, hi in windows:
        bounds = [lo, *(c for c in cuts if lo < c < hi), hi]
        for a, b in zip(bounds[:-1], bounds[1:]):
            sel = (nodes >= a) & (nodes <= b) & (nodes > lo) & (nodes < hi)
            inner = nodes[sel]
            vals = raw[sel]
            # window edges are not grid nodes
            pre = [a] if a == lo and lo > green.E_minus else []
            post = [b] if b == hi and hi < green.E_plus else []
            seg = np.concatenate([pre, inner, post])
            if len(seg) < 2:
                continue
            segments.append(seg)
            initial.append(np.concatenate([[argument(x) for x in pre], vals, [argument(x) for x in post]]))
    total, tracks = _track_segments(argument, segments, initial, tolerances.phase_step)
    intervals = tuple(
        PhaseInterval(float(t.nodes[0]), float(t.nodes[-1]), t.total / (2 * np.pi), t.refined) for t in tracks
    )
    for j in jumps:
        logger.info(
            "embedded eigenvalue at E=%.12g: phase jump of 2 pi x %d booked into N", j.energy, j.multiplicity
        )
    return total / (2 * np.pi), intervals, tuple(jumps), tuple(tracks)


def independent_energies(green: GreenBoundary, n_nodes: int = INDEPENDENT_NODES) -> NDArray[np.float64]:
    """
    Uniform interior nodes plus geometric clusters at both edges, shifted off the tabulation grid.
    """
    delta = 0.5 * (green.E_plus - green.E_minus)
    u = green.E_minus + 2 * delta * (np.arange(n_nodes) + 0.5) / n_nodes
    t = np.arange(EDGE_DECADES[0], EDGE_DECADES[1] + 1, dtype=float) + 0.5
    cluster = delta * 10.0 ** -t
    out = np.unique(np.concatenate([u, green.E_minus + cluster, green.E_plus - cluster]))
    return out[(out > green.E_minus) & (out < green.E_plus)]


def argument_principle_winding(
    model: ImpurityModel,
    green: GreenBoundary,
    report: BoundStateReport,
    *,
    n_nodes: int = INDEPENDENT_NODES,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """
    Counterclockwise winding of ``det(1 - V G(z))`` along a contour hugging the band, built from the lower boundary
    values on the site space at energies away from the tabulation grid. The upper side contributes the same change
    as the lower one, so the winding is ``-Delta arg det(1 - V G(E - i0)) / pi``.
    """
    if model.norm == 0.0:
        return 0.0
    es = independent_energies(green, n_nodes)
    delta = 0.5 * (green.E_plus - green.E_minus)
    w = EMBEDDED_WINDOW * delta
    _, jumps = _breakpoints(green, report)
    keep = np.ones(len(es), dtype=bool)
    for j in jumps:
        keep &= np.abs(es - j.energy) > w
    es = es[keep]
    bounds = [green.E_minus, *(j.energy for j in jumps), green.E_plus]
    segments = [es[(es > a) & (es < b)] for a, b in zip(bounds[:-1], bounds[1:])]
    segments = [s for s in segments if len(s) >= 2]
    total, _ = _track_segments(_site_phase(model, green), segments, [None] * len(segments), tolerances.phase_step)
    return -total / (2 * np.pi)


def levinson_check(
    model: ImpurityModel,
    green: GreenBoundary,
    report: BoundStateReport,
    critical: CriticalPointSet | None = None,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    raise_on_violation: bool = True,
) -> LevinsonLedger:
    """
    Close Levinson's sum rule for the impurity.

    :param model: the impurity.
    :param green: Green boundary values on ``model.sites``.
    :param report: bound states and threshold data of the impurity.
    :param critical: critical points; enables the corner terms in three dimensions and splits the phase intervals at
        the interior critical values.
    :param tolerances: ``phase_step`` of the unwrapping and the ``levinson`` tolerance of the residual.
    :param raise_on_violation: raise instead of returning a failing ledger.
    :raises LevinsonViolation: if the residual exceeds ``tolerances.levinson``.
    :raises Unsupported: in one and two dimensions.
    """
    if tuple(green.sites) != tuple(model.sites):
        raise DomainError("Green boundary values were tabulated on a different site set than the impurity")
    d = report.dimension
    rhs = levinson_rhs(d, report.m_plus, report.m_minus)
    critical_values = critical.interior_values if critical is not None else ()
    total, intervals, jumps, tracks = scattering_phase_change(
        model, green, report, critical_values=critical_values, tolerances=tolerances
    )
    corners: dict[int, CornerData] | None = None
    if critical is not None and d == 3:
        try:
            corners = corner_operators(model, report, critical, tolerances=tolerances)
        except Unsupported as e:
            logger.warning("corner terms skipped: %s", e)
    winding = argument_principle_winding(model, green, report, tolerances=tolerances)
    ledger = LevinsonLedger(
        dimension=d,
        total_time_delay=total,
        N=report.N_total,
        m_plus=report.m_plus,
        m_minus=report.m_minus,
        rhs=rhs,
        intervals=intervals,
        jumps=jumps,
        corner_terms=None if corners is None else {s: c.trace for s, c in corners.items()},
        argument_principle=winding,
        tolerance=tolerances.levinson,
        phase_track=tracks,
    )
    logger.info(
        "Levinson: total %.6f + N %d = %.6f, rhs %.3f, residual %.3g",
        ledger.total_time_delay, ledger.N, ledger.lhs, ledger.rhs, ledger.residual,
    )
    if ledger.path_agreement > tolerances.levinson and not jumps:
        logger.warning(
            "argument principle winding %.4f does not match the scattering phase %.4f",
            ledger.argument_principle, ledger.total_time_delay,
        )
    if not ledger.holds and raise_on_violation:
        raise LevinsonViolation(
            f"Levinson residual {ledger.residual:.4g} exceeds {tolerances.levinson:g}; "
            "a bound state may have been missed or a threshold left unresolved",
            ledger=ledger,
        )
    return ledger


@dataclass(frozen=True)
class ContourData:
    """
    The closed curve ``G(Gamma)`` of a point impurity: the real axis left of the band, the lower side of the cut, the
    real axis right of the band and the upper side of the cut back.
    """

    coupling: float
    energies: NDArray[np.float64]
    sides: NDArray[np.int64]
    "``0`` on the real axis outside the band, ``-1`` on the lower and ``1`` on the upper side of the cut."
    values: NDArray[np.complex128]
    winding: float
    "Counterclockwise winding of ``1/lambda - G`` around the band."

    def to_rows(self) -> list[tuple[float, int, float, float]]:
        return [(float(e), int(s), float(v.real), float(v.imag)) for e, s, v in zip(self.energies, self.sides, self.values)]

    def to_dict(self) -> dict[str, object]:
        return {"coupling": self.coupling, "winding": self.winding, "n_points": int(len(self.energies))}


def point_impurity_contour(
    green: GreenBoundary,
    coupling: float,
    *,
    extent: float | None = None,
    n_outside: int = CONTOUR_NODES,
) -> ContourData:
    """
    Contour data of the point impurity ``V = lambda |0><0|``.

    :param green: Green boundary values on a single site.
    :param coupling: ``lambda``.
    :param extent: length of the real-axis pieces outside the band, ``Delta`` by default.
    :param n_outside: nodes per outside piece, clustered at the edge.
    :raises DomainError: unless ``green`` has exactly one site.
    """
    if len(green.sites) != 1:
        raise DomainError(f"the point impurity contour needs Green values on one site, got {len(green.sites)}")
    delta = 0.5 * (green.E_plus - green.E_minus)
    ext = delta if extent is None else float(extent)
    offsets = ext * np.geomspace(1e-9, 1.0, n_outside)
    e = green.energies
    interior = (e > green.E_minus) & (e < green.E_plus)
    cut = e[interior]
    lower = (green.re_table[interior] + 1j * green.im_table[interior])[:, 0, 0]
    left = green.E_minus - offsets[::-1]
    right = green.E_plus + offsets
    g_left = np.array([green.green_at(x)[0, 0] for x in left])
    g_right = np.array([green.green_at(x)[0, 0] for x in right])
    energies = np.concatenate([left, cut, right, cut[::-1]])
    sides = np.concatenate([np.zeros(len(left)), -np.ones(len(cut)), np.zeros(len(right)), np.ones(len(cut))]).astype(int)
    values = np.concatenate([g_left, lower, g_right, np.conj(lower[::-1])])
    if coupling == 0.0:
        winding = 0.0
    else:
        loop = 1.0 / coupling - np.concatenate([lower, np.conj(lower[::-1])])
        phases = np.unwrap(np.angle(loop))
        # the lower side runs left to right, which is clockwise around the band
        winding = float(-(phases[-1] - phases[0]) / (2 * np.pi))
    logger.info("point impurity contour for lambda=%g: winding %.4f", coupling, winding)
    return ContourData(float(coupling), energies, sides, values, winding)
