#!/usr/bin/env python3
# coding=utf-8

"""
Momentum space kernel of the wave operators ``Omega_+- - 1``.
"""

import logging

import numpy as np
from numpy.typing import ArrayLike

from vt.lattice.scattering.band import BandFunction
from vt.lattice.scattering.error_specs import DomainError, ErrorMsgFormer
from vt.lattice.scattering.green import GreenBoundary
from vt.lattice.scattering.spectral import ImpurityModel, t_matrix
from vt.lattice.scattering.tolerances import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)


def wave_operator_kernel(
    model: ImpurityModel,
    green: GreenBoundary,
    band: BandFunction,
    k: ArrayLike,
    k_prime: ArrayLike,
    sign: int,
    epsilon: float,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> complex:
    """
    ``sum_{n,m in Lambda} <n|T(z')|m> e^{i(k.n - k'.m)} / (z' - E(k))`` with ``z' = E(k') - sign i eps``.

    The kernel is evaluated pointwise for checks on finite truncations; the operators themselves are never
    assembled.

    :param model: the impurity.
    :param green: Green boundary values on ``model.sites``, evaluated off the real axis.
    :param band: the band.
    :param k: outgoing momentum.
    :param k_prime: incoming momentum.
    :param sign: ``+1`` for ``Omega_+``, ``-1`` for ``Omega_-``.
    :param epsilon: distance of ``z'`` from the real axis.
    :raises DomainError: for ``epsilon <= 0`` or a sign other than ``+-1``.
    """
    if not epsilon > 0:
        raise DomainError(ErrorMsgFormer.out_of_range("epsilon", epsilon, 0.0, None, inclusive=False))
    if sign not in (-1, 1):
        raise DomainError(ErrorMsgFormer.errmsg_for_choices(str(sign), "sign", [-1, 1]))
    kk = np.asarray(k, dtype=float)
    kp = np.asarray(k_prime, dtype=float)
    z = complex(float(band.evaluate(kp)), -sign * epsilon)
    t = t_matrix(model, green, z, tolerances=tolerances)
    sites = np.asarray(model.sites, dtype=float)
    left = np.exp(1j * sites @ kk)
    right = np.exp(-1j * sites @ kp)
    value = complex(left @ t @ right / (z - float(band.evaluate(kk))))
    logger.debug("wave operator kernel at z'=%s: %s", z, value)
    return value
