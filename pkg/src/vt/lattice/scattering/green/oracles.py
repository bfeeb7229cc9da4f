#!/usr/bin/env python3
# coding=utf-8

"""
Closed forms for the nearest-neighbour Laplacian ``E(k) = 2t sum_j cos k_j``, used to check tabulated Green
functions.

Outside the band the Green function is a Laplace transform of modified Bessel functions,
``G_delta(z) = int_0^inf e^{-(z - 2td) s} prod_j I_{delta_j}(2ts) e^{-2ts} ds`` for ``z >= 2td``, with
``G_delta(-z) = -(-1)^{|delta|_1} G_delta(z)`` below the band.
"""

import logging
from collections.abc import Sequence

import numpy as np
from scipy import integrate, special

from vt.lattice.scattering.error_specs import DomainError, ErrorMsgFormer

logger = logging.getLogger(__name__)


def laplacian_green(
    dimension: int,
    energy: float,
    delta: Sequence[int] | None = None,
    *,
    hopping: float = 1.0,
) -> float:
    """
    ``G_delta(E)`` of the Laplacian at a real energy outside the open band, edges included for ``d >= 3``.

    >>> round(laplacian_green(3, 6.0), 6)
    0.252731
    >>> round(laplacian_green(3, -6.0), 6)
    -0.252731
    >>> abs(laplacian_green(1, 3.0) - 1 / np.sqrt(5.0)) < 1e-9
    True

    :param dimension: lattice dimension ``d``.
    :param energy: real energy with ``|E| >= 2td``.
    :param delta: difference vector ``m - n``, the origin if ``None``.
    :param hopping: the hopping ``t > 0``.
    :raises DomainError: inside the band, or at an edge where ``G`` diverges (``d <= 2``).
    """
    if hopping <= 0:
        raise DomainError(ErrorMsgFormer.out_of_range("hopping", hopping, 0.0, None, inclusive=False))
    vec = [0] * dimension if delta is None else [abs(int(x)) for x in delta]
    if len(vec) != dimension:
        raise DomainError(f"difference vector {tuple(vec)} is not {dimension}-dimensional")
    edge = 2 * hopping * dimension
    if abs(energy) < edge:
        raise DomainError(ErrorMsgFormer.out_of_range("|E|", abs(energy), edge, None))
    if abs(energy) == edge and dimension <= 2:
        raise DomainError(f"G diverges at the band edge in d = {dimension}")
    if energy < 0:
        return -((-1) ** sum(vec)) * laplacian_green(dimension, -energy, vec, hopping=hopping)
    gap = energy - edge

    def integrand(s: float) -> float:
        return float(np.exp(-gap * s) * np.prod(special.ive(vec, 2 * hopping * s)))

    head, _ = integrate.quad(integrand, 0.0, 1.0, limit=200, epsabs=1e-14, epsrel=1e-12)
    tail, err = integrate.quad(integrand, 1.0, np.inf, limit=500, epsabs=1e-13, epsrel=1e-11)
    logger.debug("Bessel integral at E=%g: %.3e estimated error", energy, err)
    return head + tail


def watson_constant(dps: int = 30) -> float:
    """
    ``W = (1/pi^3) int_{[0, pi]^3} dk / (1 - (cos k_1 + cos k_2 + cos k_3)/3)`` in closed form,
    ``sqrt(6)/(32 pi^3) Gamma(1/24) Gamma(5/24) Gamma(7/24) Gamma(11/24)``. Needs ``mpmath``.

    >>> round(watson_constant(), 12)
    1.516386059152
    """
    import mpmath

    with mpmath.workdps(dps):
        value = (
            mpmath.sqrt(6)
            / (32 * mpmath.pi**3)
            * mpmath.gamma(mpmath.mpf(1) / 24)
            * mpmath.gamma(mpmath.mpf(5) / 24)
            * mpmath.gamma(mpmath.mpf(7) / 24)
            * mpmath.gamma(mpmath.mpf(11) / 24)
        )
        return float(value)


def cubic_edge_green(hopping: float = 1.0) -> float:
    """
    ``G_0(E+)`` of the simple cubic Laplacian, ``W / (6t)``.

    >>> round(cubic_edge_green(), 6)
    0.252731
    """
    return watson_constant() / (6 * hopping)
