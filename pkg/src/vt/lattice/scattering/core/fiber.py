#!/usr/bin/env python3
# coding=utf-8

"""
On-shell scattering data at one rescaled energy ``b``.

With ``A = V_r^{-1} - Re G_r`` and ``B = Im G_r = pi rho_r`` in the channel space of the impurity and ``P`` the
projection onto ``Ran B``, the on-shell scattering matrix on ``Ran P`` is

    ``s = 1 - 2i B^{1/2} (A + iB)^{-1} B^{1/2} = (C - i)(C + i)^{-1}``,

with the Hermitian ``C = B^{-1/2} (A - A_{12} A_{22}^{-1} A_{21}) B^{-1/2}``. Where ``A + iB`` has a joint kernel (an
embedded eigenvalue) its inverse is taken on the complement of that kernel.
"""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from vt.lattice.scattering.band import RescaledEnergyMap
from vt.lattice.scattering.error_specs import DomainError
from vt.lattice.scattering.green import GreenBoundary
from vt.lattice.scattering.linalg import hermitian_part, range_basis, restricted_inverse_matrix
from vt.lattice.scattering.spectral import ImpurityModel
from vt.lattice.scattering.tolerances import DEFAULT_TOLERANCES, Tolerances
from vt.lattice.scattering.warnings import RankAmbiguity, vt_warn

logger = logging.getLogger(__name__)

RANK_MARGIN = 100.0
"Eigenvalues of ``Im G_r`` within this factor above the cutoff make the rank decision ambiguous."


@dataclass(frozen=True)
class ScatteringFiber:
    b: float
    energy: float
    rank: int
    "``dim F_b``."
    c_matrix: NDArray[np.complex128]
    s_block: NDArray[np.complex128]
    phase_det: complex
    o_matrix: NDArray[np.complex128]
    "``(|Lambda|, rank)`` matrix of ``O_{-,b}``."
    range_basis: NDArray[np.complex128]
    "Orthonormal basis of ``Ran P`` in channel coordinates, ascending in the eigenvalues of ``Im G_r``."
    im_eigenvalues: NDArray[np.float64]

    @property
    def phase(self) -> float:
        """
        ``arg det s = -2 sum_j atan2(1, c_j)``, continuous in the eigenvalues ``c_j`` of ``C``.
        """
        c = np.linalg.eigvalsh(self.c_matrix) if self.rank else np.zeros(0)
        return float(-2.0 * np.sum(np.arctan2(1.0, c)))

    def unitarity_defect(self) -> float:
        """
        ``||s^* s - Id||``.
        """
        if self.rank == 0:
            return 0.0
        s = self.s_block
        return float(np.linalg.norm(np.conj(s.T) @ s - np.eye(self.rank), 2))

    def distance_from_identity(self) -> float:
        if self.rank == 0:
            return 0.0
        return float(np.linalg.norm(self.s_block - np.eye(self.rank), 2))

    def edge_overlap(self) -> complex:
        """
        ``<e| (1 - s) / 2 |e>`` along the dominant direction ``e`` of ``Im G_r``. Near a band edge this direction is
        the one carried by the limiting state ``psi+-``; the overlap tends to one when ``s`` tends to
        ``1 - 2|psi+-><psi+-|`` and to zero when ``s`` tends to the identity.
        """
        if self.rank == 0:
            return 0j
        return complex(0.5 * (1.0 - self.s_block[-1, -1]))

    def to_row(self) -> tuple[float, float, int, float, float]:
        return (self.b, self.energy, self.rank, self.phase_det.real, self.phase_det.imag)


def _rescaled(green: GreenBoundary, energy: float) -> float:
    mid = 0.5 * (green.E_plus + green.E_minus)
    delta = 0.5 * (green.E_plus - green.E_minus)
    return float(np.arctanh((energy - mid) / delta))


def fiber_from_matrices(
    model: ImpurityModel,
    g_lower: NDArray[np.complex128],
    b: float,
    energy: float,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> ScatteringFiber:
    """
    Fiber from the boundary value ``G(E - i0)`` on the sites of the model.
    """
    ch = model.channels(tolerances)
    pref = 1.0 / (np.exp(0.5 * b) + np.exp(-0.5 * b))
    if ch.rank == 0:
        empty = np.zeros((0, 0), dtype=complex)
        return ScatteringFiber(
            b, energy, 0, empty, empty, 1.0 + 0j, np.zeros((model.n_sites, 0), dtype=complex),
            np.zeros((0, 0), dtype=complex), np.zeros(0),
        )
    g_r = ch.compress(g_lower)
    re_r = hermitian_part(g_r)
    im_r = hermitian_part((g_r - np.conj(g_r.T)) / 2j)
    a = ch.inverse - re_r
    q, w = range_basis(im_r, tolerances.svd_cutoff)
    top = float(np.max(np.linalg.eigvalsh(im_r))) if ch.rank else 0.0
    near = (w < RANK_MARGIN * tolerances.svd_cutoff * top) if top > 0 else np.zeros(0, dtype=bool)
    if np.any(near):
        vt_warn(f"rank of Im G at E={energy:.12g} decided within a factor {RANK_MARGIN:g} of the cutoff", RankAmbiguity)
    rank = q.shape[1]
    if rank == 0:
        empty = np.zeros((0, 0), dtype=complex)
        return ScatteringFiber(
            b, energy, 0, empty, empty, 1.0 + 0j, np.zeros((model.n_sites, 0), dtype=complex), q, w,
        )
    x = restricted_inverse_matrix(a, im_r, tolerances)
    root = q * np.sqrt(w)
    k = np.conj(root.T) @ x @ root
    s = np.eye(rank) - 2j * k
    c = hermitian_part(np.linalg.inv(k) - 1j * np.eye(rank))
    o = pref * ch.unitary @ np.conj(x.T) @ root
    return ScatteringFiber(b, energy, rank, c, s, complex(np.linalg.det(s)), o, q, w)


def fiber_at(
    model: ImpurityModel,
    green: GreenBoundary,
    b: float | None = None,
    *,
    energy: float | None = None,
    rescale: RescaledEnergyMap | None = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> ScatteringFiber:
    """
    The scattering fiber at ``b`` (with ``E = f^{-1}(b)``) or directly at an energy inside the band.

    For a point impurity ``s = (lambda^{-1} - G0(E - i0)) / (lambda^{-1} - G0(E + i0))``.

    :param model: the impurity.
    :param green: Green boundary values on ``model.sites``.
    :param b: rescaled energy; needs ``rescale``.
    :param energy: energy, instead of ``b``.
    :param rescale: the rescaled energy map; without it ``b = artanh((E - E_mid) / Delta)``.
    :param tolerances: ``svd_cutoff`` of the range projection.
    :raises DomainError: unless exactly one of ``b`` and ``energy`` is given, or for an energy outside the band.
    """
    if (b is None) == (energy is None):
        raise DomainError("give exactly one of b and energy")
    if b is not None:
        if rescale is None:
            raise DomainError("a rescaled energy b needs the rescale map")
        e = float(rescale.f_inv(b))
        bb = float(b)
    else:
        e = float(energy)  # type: ignore[arg-type]
        if not green.E_minus < e < green.E_plus:
            raise DomainError(f"E={e} lies outside the open band ({green.E_minus}, {green.E_plus})")
        bb = float(rescale.f(e)) if rescale is not None else _rescaled(green, e)
    if tuple(green.sites) != tuple(model.sites):
        raise DomainError("Green boundary values were tabulated on a different site set than the impurity")
    return fiber_from_matrices(model, green.boundary(e, -1), bb, e, tolerances=tolerances)


def fiber_scan(
    model: ImpurityModel,
    green: GreenBoundary,
    energies: NDArray[np.float64] | None = None,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> list[ScatteringFiber]:
    """
    Fibers at the interior grid energies of ``green`` (or at the given energies), from the tabulated boundary values.
    """
    if energies is None:
        e = green.energies
        sel = (e > green.E_minus) & (e < green.E_plus)
        es = e[sel]
        tables = green.re_table[sel] + 1j * green.im_table[sel]
    else:
        es = np.asarray(energies, dtype=float)
        tables = green.boundary(es, -1)
    fibers = [
        fiber_from_matrices(model, g, _rescaled(green, float(en)), float(en), tolerances=tolerances)
        for en, g in zip(es, tables)
    ]
    ranks = sorted({f.rank for f in fibers})
    logger.info("%d fibers, ranks %s", len(fibers), ranks)
    return fibers
