#!/usr/bin/env python3
# coding=utf-8

"""
The T-matrix ``T(z) = (1 - V G0(z))^{-1} V`` and the perturbed Green matrix ``G(z) = G0 + G0 T G0`` on ``Lambda``.

Both are computed in the channel space of the impurity, ``T = U (V_r^{-1} - U^* G0 U)^{-1} U^*``, so that impurities of
lower rank than ``|Lambda|`` need no special treatment.
"""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from vt.lattice.scattering.error_specs import DomainError
from vt.lattice.scattering.green import GreenBoundary
from vt.lattice.scattering.linalg import hermitian_part, restricted_inverse_matrix
from vt.lattice.scattering.spectral.model import ImpurityModel
from vt.lattice.scattering.tolerances import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ImpuritySolution:
    z: complex
    g0: NDArray[np.complex128]
    t_matrix: NDArray[np.complex128]
    green: NDArray[np.complex128]
    "``G^Pi(z)``."
    smallest_singular: float
    "Smallest singular value of ``V_r^{-1} - G_r(z)`` relative to its norm."
    candidate: bool
    "Whether ``V_r^{-1} - G_r(z)`` is singular at a real ``z``, i.e. ``z`` is a candidate eigenvalue."


def channel_matrix(model: ImpurityModel, g0: NDArray[np.complex128], tolerances: Tolerances = DEFAULT_TOLERANCES):
    """
    ``V_r^{-1} - U^* G0 U`` on the channel space of the impurity.
    """
    ch = model.channels(tolerances)
    return ch.inverse - ch.compress(g0)


def solve_from_green(
    model: ImpurityModel,
    g0: NDArray[np.complex128],
    z: complex,
    *,
    real_axis: bool = False,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> ImpuritySolution:
    """
    T-matrix and perturbed Green matrix from a free Green matrix ``G0`` on the sites of the model.

    :param model: the impurity.
    :param g0: ``G0(z)`` (or a boundary value) on ``model.sites``.
    :param z: the spectral parameter, for bookkeeping.
    :param real_axis: ``True`` for real energies and boundary values, where a singular channel matrix flags a
        candidate eigenvalue and is inverted on the complement of its kernel.
    :param tolerances: ``invertibility`` for the channels, ``kernel_zero`` for singularity.
    """
    g0 = np.asarray(g0, dtype=complex)
    if g0.shape != (model.n_sites, model.n_sites):
        raise DomainError(f"free Green matrix of shape {g0.shape} does not match {model.n_sites} impurity sites")
    ch = model.channels(tolerances)
    if ch.rank == 0:
        zeros = np.zeros_like(g0)
        return ImpuritySolution(complex(z), g0, zeros, g0.copy(), 1.0, False)
    m = ch.inverse - ch.compress(g0)
    s = np.linalg.svd(m, compute_uv=False)
    rel = float(s[-1] / s[0]) if s[0] > 0 else 0.0
    candidate = real_axis and rel < tolerances.kernel_zero
    if candidate:
        logger.info("channel matrix singular at z=%s (relative singular value %.2e): candidate eigenvalue", z, rel)
        a = hermitian_part(m)
        b = (m - np.conj(m.T)) / 2j
        m_inv = restricted_inverse_matrix(a, b, tolerances)
    else:
        m_inv = np.linalg.inv(m)
    t = ch.expand(m_inv)
    return ImpuritySolution(complex(z), g0, t, g0 + g0 @ t @ g0, rel, bool(candidate))


def _check_sites(model: ImpurityModel, green: GreenBoundary) -> None:
    if tuple(green.sites) != tuple(model.sites):
        raise DomainError("Green boundary values were tabulated on a different site set than the impurity")


def solve_impurity(
    model: ImpurityModel,
    green: GreenBoundary,
    z: complex,
    side: int | None = None,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> ImpuritySolution:
    """
    Solve the impurity problem at ``z``, or at ``E -+ i0`` for a real ``z`` inside the band with ``side`` given.

    :raises AmbiguousBoundary: for a real ``z`` inside the band without a side.
    """
    _check_sites(model, green)
    g0 = green.green_at(z, side)
    return solve_from_green(model, g0, z, real_axis=complex(z).imag == 0.0, tolerances=tolerances)


def t_matrix(
    model: ImpurityModel,
    green: GreenBoundary,
    z: complex,
    side: int | None = None,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> NDArray[np.complex128]:
    """
    ``T^Pi(z) = (1 - V^Pi G0^Pi(z))^{-1} V^Pi``; for a point impurity ``lambda / (1 - lambda G0(z))``.
    """
    return solve_impurity(model, green, z, side, tolerances=tolerances).t_matrix


def perturbed_green(
    model: ImpurityModel,
    green: GreenBoundary,
    z: complex,
    side: int | None = None,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> NDArray[np.complex128]:
    """
    ``G^Pi(z) = (G0^Pi(z)^{-1} - V^Pi)^{-1} = G0 + G0 T G0``.
    """
    return solve_impurity(model, green, z, side, tolerances=tolerances).green
