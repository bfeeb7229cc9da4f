#!/usr/bin/env python3
# coding=utf-8

"""
Corner operators ``R+-`` at the band edges and the traces of their time delays, computed as rotation numbers.

Without a threshold singularity ``R+- = 1``. A three dimensional threshold resonance of multiplicity one gives

    ``R+-,a = (1 - |psi+-><psi+-|) + r+-(a) |psi+-><psi+-|``,   ``r+-(a) = (e^{pi a} -+ i) / (e^{pi a} +- i)``,

which runs from ``1 - 2|psi+-><psi+-|`` at ``a = -inf`` to the identity at ``a = +inf`` and rotates by half a turn.
"""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from vt.lattice.scattering.band import CriticalPointSet
from vt.lattice.scattering.core.fiber import fiber_from_matrices
from vt.lattice.scattering.core.winding import track_phase
from vt.lattice.scattering.error_specs import DomainError, ErrorMsgFormer, Unsupported
from vt.lattice.scattering.flow import LimitState, check_isotropic
from vt.lattice.scattering.green import GreenBoundary, edge_vector
from vt.lattice.scattering.spectral import BoundStateReport, ImpurityModel
from vt.lattice.scattering.tolerances import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)

A_MAX = 20.0
"The rotation number is tracked over ``a`` in ``[-A_MAX, A_MAX]``."

A_NODES = 81

EDGE_OFFSETS = (1e-3, 1e-4, 1e-5, 1e-6)
"Distances from a band edge, in units of ``Delta``, at which the edge limit of the scattering matrix is sampled."


def corner_factor(sign: int, a: float) -> complex:
    """
    ``r+-(a) = (e^{pi a} -+ i) / (e^{pi a} +- i)``.

    >>> round(abs(corner_factor(1, 0.3)), 12)
    1.0
    >>> [round(corner_factor(s, 0.0).imag, 12) for s in (1, -1)]
    [-1.0, 1.0]
    """
    x = np.exp(np.pi * a)
    return complex((x - sign * 1j) / (x + sign * 1j))


@dataclass(frozen=True)
class CornerData:
    sign: int
    trivial: bool
    trace: float
    "``Tr T+-``, the rotation number of ``a -> r+-(a)``; zero for the identity corner."
    vector: NDArray[np.complex128]
    "Normalised ``e^{-i n.k*}`` on the impurity sites, the site space shadow of ``psi+-``."
    limit_state: LimitState | None = None
    refined: int = 0

    def factor(self, a: float) -> complex:
        return 1.0 + 0j if self.trivial else corner_factor(self.sign, a)

    def matrix(self, a: float) -> NDArray[np.complex128]:
        """
        ``R+-,a`` on the span of the impurity sites.
        """
        n = len(self.vector)
        if self.trivial:
            return np.eye(n, dtype=complex)
        p = np.outer(self.vector, np.conj(self.vector))
        return np.eye(n) - p + self.factor(a) * p

    def to_dict(self) -> dict[str, object]:
        return {"sign": self.sign, "trivial": self.trivial, "trace": self.trace, "refined": self.refined}


def rotation_number(sign: int, a_max: float = A_MAX, n_nodes: int = A_NODES) -> tuple[float, int]:
    """
    Winding of ``r+-`` between its limits ``-1`` and ``1``. The upper corner is traversed with ``a`` ascending, the
    lower one with ``a`` descending, matching the orientation of the boundary of the rescaled energy band.

    >>> [round(rotation_number(s)[0], 6) for s in (1, -1)]
    [0.5, 0.5]

    :return: the rotation number and the number of refinement nodes the phase tracking inserted.
    """
    nodes = np.linspace(-a_max, a_max, n_nodes)
    if sign < 0:
        nodes = nodes[::-1]
    track = track_phase(lambda a: float(np.angle(corner_factor(sign, a))), nodes)
    # the tails beyond +-a_max are below exp(-pi a_max)
    return track.winding, track.refined


def _threshold_case(report: BoundStateReport, sign: int) -> bool:
    """
    ``True`` for a nontrivial corner; raises for threshold data the construction does not cover.
    """
    t = report.threshold.get(sign)
    d = report.dimension
    if t is None or not t.supported or d >= 5 or t.resonance_mult == 0:
        return False
    if d == 4:
        raise Unsupported(
            f"threshold resonance at E={t.energy:g} in d = 4; the corner construction covers d = 3 only",
            sign=sign,
            resonance_mult=t.resonance_mult,
        )
    if t.resonance_mult > 1:
        raise Unsupported(
            f"threshold resonance of multiplicity {t.resonance_mult} at E={t.energy:g}; at most one is supported",
            sign=sign,
            resonance_mult=t.resonance_mult,
        )
    return True


def corner_operators(
    model: ImpurityModel,
    report: BoundStateReport,
    critical: CriticalPointSet,
    *,
    limit_states: dict[int, LimitState] | None = None,
    a_max: float = A_MAX,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> dict[int, CornerData]:
    """
    Both corner operators of the impurity.

    :param model: the impurity.
    :param report: bound states and threshold data.
    :param critical: critical points, for the extrema and their Hessians.
    :param limit_states: optional flow limits ``psi+-`` attached to the nontrivial corners.
    :param a_max: half-width of the tracked interval.
    :param tolerances: ``isotropy`` of the extremal Hessians.
    :raises Unsupported: for a resonance of multiplicity two or more, or a resonance in ``d = 4``.
    :raises IsotropyViolation: for a nontrivial corner at an anisotropic extremum.
    """
    if not a_max > 0:
        raise DomainError(ErrorMsgFormer.out_of_range("a_max", a_max, 0.0, None, inclusive=False))
    out: dict[int, CornerData] = {}
    for sign, point in ((-1, critical.minimum), (1, critical.maximum)):
        vector = edge_vector(model.sites, point.k)
        if not _threshold_case(report, sign):
            out[sign] = CornerData(sign, True, 0.0, vector)
            continue
        check_isotropic(point.hessian, tolerances.isotropy)
        trace, refined = rotation_number(sign, a_max)
        state = (limit_states or {}).get(sign)
        out[sign] = CornerData(sign, False, trace, vector, state, refined)
        logger.info("corner %+d: resonance, rotation number %.9f (%d refinements)", sign, trace, refined)
    return out


@dataclass(frozen=True)
class EdgeLimit:
    sign: int
    energies: tuple[float, ...]
    overlaps: tuple[float, ...]
    "``Re <e|(1 - s)/2|e>``; tends to one for ``s -> 1 - 2|psi><psi|`` and to zero for ``s -> 1``."
    distances: tuple[float, ...]
    "``||s - 1||``."

    @property
    def overlap(self) -> float:
        return self.overlaps[-1]

    def to_dict(self) -> dict[str, object]:
        return {
            "sign": self.sign,
            "energies": list(self.energies),
            "overlaps": list(self.overlaps),
            "distances": list(self.distances),
        }


def edge_limit(
    model: ImpurityModel,
    green: GreenBoundary,
    sign: int,
    *,
    offsets: tuple[float, ...] = EDGE_OFFSETS,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> EdgeLimit:
    """
    The on-shell scattering matrix approaching the band edge ``E+-``, from boundary values at ``E+- -+ Delta t``.

    :raises DomainError: for a sign other than ``+-1``.
    """
    if sign not in (-1, 1):
        raise DomainError(ErrorMsgFormer.errmsg_for_choices(str(sign), "sign", [-1, 1]))
    delta = 0.5 * (green.E_plus - green.E_minus)
    edge = green.E_plus if sign > 0 else green.E_minus
    energies, overlaps, distances = [], [], []
    for t in offsets:
        e = edge - sign * delta * t
        fiber = fiber_from_matrices(model, green.boundary(e, -1), 0.0, e, tolerances=tolerances)
        energies.append(float(e))
        overlaps.append(float(fiber.edge_overlap().real))
        distances.append(fiber.distance_from_identity())
    logger.debug("edge %+d overlaps %s", sign, ["%.6f" % o for o in overlaps])
    return EdgeLimit(sign, tuple(energies), tuple(overlaps), tuple(distances))
