#!/usr/bin/env python3
# coding=utf-8

"""
Trace of the time delay operator at a fixed energy, and its spectral property
``Tr T_E = 2 Im Tr((E - i0 - H)^{-1} - (E - i0 - H0)^{-1})``.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from vt.lattice.scattering.core.fiber import fiber_from_matrices
from vt.lattice.scattering.error_specs import DomainError, ErrorMsgFormer
from vt.lattice.scattering.green import GreenBoundary
from vt.lattice.scattering.spectral import ImpurityModel
from vt.lattice.scattering.tolerances import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)

EPSILONS = (1e-2, 5e-3, 2.5e-3)
"Distances from the real axis of the extrapolated spectral property check, each half the previous one."


def _channel(model: ImpurityModel, g: NDArray[np.complex128], tolerances: Tolerances) -> NDArray[np.complex128]:
    ch = model.channels(tolerances)
    return ch.inverse - ch.compress(g)


def time_delay_trace(
    model: ImpurityModel,
    green: GreenBoundary,
    energy: float,
    *,
    method: Literal["determinant", "cayley"] = "determinant",
    step: float | None = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """
    ``Tr T_E = d/dE arg det s_E``.

    ``determinant`` evaluates ``2 Im Tr(M^{-1} dM/dE)`` for the channel matrix ``M = V_r^{-1} - G_r(E - i0)``, which
    equals the derivative of ``arg det s = 2 arg det M(E - i0)``. ``cayley`` evaluates ``2 Tr((C^2 + 1)^{-1} dC/dE)``
    from fibers on either side of ``E``; it needs ``Im G_r`` of full rank and falls back to ``determinant`` otherwise.
    Near band edges and critical values the derivative is one-sided, with a :class:`OneSidedDifferenceWarning`.

    :param model: the impurity.
    :param green: Green boundary values on ``model.sites``.
    :param energy: an energy inside the band.
    :param method: ``determinant`` or ``cayley``.
    :param step: finite difference step; half the distance to the nearer grid node by default.
    :param tolerances: channel and range cutoffs.
    :raises DomainError: for an energy outside the open band or an unknown method.
    """
    if method not in ("determinant", "cayley"):
        raise DomainError(ErrorMsgFormer.errmsg_for_choices(method, "method", ["determinant", "cayley"]))
    if not green.E_minus < energy < green.E_plus:
        raise DomainError(ErrorMsgFormer.out_of_range("E", energy, green.E_minus, green.E_plus, inclusive=False))
    ch = model.channels(tolerances)
    if ch.rank == 0:
        return 0.0
    if method == "cayley":
        value = _cayley_trace(model, green, energy, step, tolerances)
        if value is not None:
            return value
        logger.debug("Im G_r not of full rank near E=%g; using the determinant formula", energy)
    m = _channel(model, green.boundary(energy, -1), tolerances)
    dm = -ch.compress(green.boundary_derivative(energy, -1, step=step))
    return float(2.0 * np.imag(np.trace(np.linalg.solve(m, dm))))


def _cayley_trace(
    model: ImpurityModel, green: GreenBoundary, energy: float, step: float | None, tolerances: Tolerances
) -> float | None:
    e = green.energies
    if step is None:
        j = int(np.searchsorted(e, energy))
        gaps = [abs(energy - e[i]) for i in (j - 1, j, j + 1) if 0 <= i < len(e) and e[i] != energy]
        step = 0.5 * min(gaps)
    lo, hi = energy - step, energy + step
    if not green.E_minus < lo < hi < green.E_plus:
        return None
    rank = model.channels(tolerances).rank
    fibers = [fiber_from_matrices(model, green.boundary(x, -1), 0.0, x, tolerances=tolerances) for x in (lo, energy, hi)]
    if any(f.rank != rank for f in fibers):
        return None
    # In full rank the range basis is the eigenbasis of Im G_r and must be rotated back to channel coordinates.
    c_lo, c_mid, c_hi = (f.range_basis @ f.c_matrix @ np.conj(f.range_basis.T) for f in fibers)
    dc = (c_hi - c_lo) / (2.0 * step)
    eye = np.eye(rank)
    trace = 2.0 * np.trace(np.linalg.solve(c_mid @ c_mid + eye, dc)).real
    return float(trace)


@dataclass(frozen=True)
class SpectralPropertyCheck:
    energy: float
    trace: float
    "``Tr T_E`` from the boundary values."
    epsilons: tuple[float, ...]
    values: tuple[float, ...]
    "``2 Im Tr(resolvent difference)`` at ``E - i eps``."
    extrapolated: float

    @property
    def deviation(self) -> float:
        return abs(self.trace - self.extrapolated)

    def to_dict(self) -> dict[str, object]:
        return {
            "energy": self.energy,
            "trace": self.trace,
            "epsilons": list(self.epsilons),
            "values": list(self.values),
            "extrapolated": self.extrapolated,
            "deviation": self.deviation,
        }


def resolvent_trace_difference(
    model: ImpurityModel, green: GreenBoundary, z: complex, *, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> complex:
    """
    ``Tr((z - H)^{-1} - (z - H0)^{-1}) = Tr(Pi (z - H0)^{-2} Pi^* (V^{-1} - G0(z))^{-1})`` off the real axis, in the
    channel form ``-Tr(M(z)^{-1} U^* G0'(z) U)``.
    """
    if complex(z).imag == 0.0:
        raise DomainError(f"z={z} must lie off the real axis")
    ch = model.channels(tolerances)
    if ch.rank == 0:
        return 0j
    m = _channel(model, green.green_at(z), tolerances)
    dg = ch.compress(green.derivative(z))
    return complex(-np.trace(np.linalg.solve(m, dg)))


def richardson(values: Sequence[float]) -> float:
    """
    Limit at ``eps = 0`` of values at ``eps, eps/2, eps/4`` with errors ``O(eps) + O(eps^2)``.

    >>> round(richardson([1.0 + 0.1 + 0.01, 1.0 + 0.05 + 0.0025, 1.0 + 0.025 + 0.000625]), 12)
    1.0
    """
    f1, f2, f4 = values
    return (8.0 * f4 - 6.0 * f2 + f1) / 3.0


def spectral_property(
    model: ImpurityModel,
    green: GreenBoundary,
    energy: float,
    *,
    epsilons: Sequence[float] = EPSILONS,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> SpectralPropertyCheck:
    """
    Compare ``Tr T_E`` with ``2 Im Tr((E - i eps - H)^{-1} - (E - i eps - H0)^{-1})`` extrapolated to ``eps = 0``.
    """
    if len(epsilons) != 3:
        raise DomainError("the extrapolation takes exactly three distances eps, eps/2, eps/4")
    trace = time_delay_trace(model, green, energy, tolerances=tolerances)
    values = tuple(
        2.0 * resolvent_trace_difference(model, green, complex(energy, -eps), tolerances=tolerances).imag
        for eps in epsilons
    )
    check = SpectralPropertyCheck(float(energy), trace, tuple(float(e) for e in epsilons), values, richardson(values))
    logger.info("spectral property at E=%g: trace %.6g, extrapolated %.6g", energy, trace, check.extrapolated)
    return check
