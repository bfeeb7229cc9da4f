#!/usr/bin/env python3
# coding=utf-8

"""
Periodic boxes ``(Z / L Z)^d`` on which ``H0`` and ``H = H0 + V`` are finite matrices, used as independent checks of
the Green-matrix formulas.

On the box the plane waves are ``<n|k> = L^{-d/2} e^{-i n.k}`` at ``k = 2 pi j / L``, so that
``G0_{nm}(z) = L^{-d} sum_k e^{i (m - n).k} / (z - E(k))`` exactly.
"""

import itertools
import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import sparse
from scipy.sparse import linalg as splinalg

from vt.lattice.scattering.band import BandFunction, Site
from vt.lattice.scattering.error_specs import DomainError, ErrorMsgFormer
from vt.lattice.scattering.spectral.model import ImpurityModel
from vt.lattice.scattering.spectral.tmatrix import solve_from_green
from vt.lattice.scattering.tolerances import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)


def _require_side(side: int, model: ImpurityModel | None = None) -> None:
    if side < 2:
        raise DomainError(ErrorMsgFormer.out_of_range("box side", side, 2, None))
    if model is not None:
        span = max(max(s[j] for s in model.sites) - min(s[j] for s in model.sites) for j in range(model.dimension))
        if span >= side:
            raise DomainError(f"impurity of extent {span + 1} does not fit into a box of side {side}")


def box_momenta(dimension: int, side: int) -> NDArray[np.float64]:
    """
    The ``side^d`` box momenta in C order of ``(j_1, ..., j_d)``.
    """
    axes = np.meshgrid(*([2 * np.pi * np.arange(side) / side] * dimension), indexing="ij")
    return np.stack([a.ravel() for a in axes], axis=-1)


def box_index(site: Sequence[int], side: int) -> int:
    """
    Flat C order index of a lattice site reduced modulo the box.

    >>> box_index((-1, 0), 4)
    12
    """
    idx = 0
    for c in site:
        idx = idx * side + int(c) % side
    return idx


def box_green(
    band: BandFunction, side: int, z: complex, sites: Sequence[Site]
) -> NDArray[np.complex128]:
    """
    Exact box Green matrix ``G0(z)`` on ``sites``, from an inverse FFT of ``1 / (z - E(k))``.
    """
    _require_side(side)
    d = band.dimension
    k = box_momenta(d, side)
    resolvent = (1.0 / (z - band.evaluate(k))).reshape((side,) * d)
    per_delta = np.fft.ifftn(resolvent)
    out = np.empty((len(sites), len(sites)), dtype=complex)
    for i, n in enumerate(sites):
        for j, m in enumerate(sites):
            out[i, j] = per_delta[tuple((b - a) % side for a, b in zip(n, m))]
    return out


def box_hamiltonian(band: BandFunction, side: int, model: ImpurityModel | None = None) -> sparse.csr_matrix:
    """
    Sparse ``H0`` (plus ``V`` when a model is given) on the periodic box.
    """
    _require_side(side, model)
    d = band.dimension
    n_total = side**d
    coords = np.array(list(itertools.product(range(side), repeat=d)), dtype=np.int64)
    rows, cols, vals = [], [], []
    weights = side ** np.arange(d - 1, -1, -1)
    for s in band.support:
        target = ((coords - np.asarray(s)) % side) @ weights
        rows.append(np.arange(n_total))
        cols.append(target)
        vals.append(np.full(n_total, band.coefficient(s), dtype=complex))
    h = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n_total, n_total)
    ).tocsr()
    if model is not None:
        idx = [box_index(s, side) for s in model.sites]
        v = sparse.coo_matrix(
            (model.v_matrix.ravel(), (np.repeat(idx, len(idx)), np.tile(idx, len(idx)))), shape=(n_total, n_total)
        )
        h = (h + v).tocsr()
    return h


def box_resolvent_block(
    band: BandFunction, side: int, z: complex, model: ImpurityModel | None, sites: Sequence[Site]
) -> NDArray[np.complex128]:
    """
    ``((z - H)^{-1})_{nm}`` for ``n, m`` in ``sites`` by a sparse LU solve.
    """
    h = box_hamiltonian(band, side, model)
    a = (complex(z) * sparse.identity(h.shape[0], dtype=complex, format="csc") - h.tocsc()).tocsc()
    lu = splinalg.splu(a)
    idx = [box_index(s, side) for s in sites]
    rhs = np.zeros((h.shape[0], len(idx)), dtype=complex)
    rhs[idx, np.arange(len(idx))] = 1.0
    return lu.solve(rhs)[idx, :]


def resolvent_identity_defect(
    model: ImpurityModel,
    band: BandFunction,
    side: int,
    z: complex,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """
    Largest entry of ``(z - H)^{-1} - (G0 + G0 T G0)`` on ``Lambda``, with the left side from a sparse solve on the
    box and the right side from the box Green matrix.
    """
    direct = box_resolvent_block(band, side, z, model, model.sites)
    g0 = box_green(band, side, z, model.sites)
    reconstructed = solve_from_green(model, g0, z, tolerances=tolerances).green
    defect = float(np.max(np.abs(direct - reconstructed)))
    logger.debug("resolvent identity on a box of side %d at z=%s: defect %.3e", side, z, defect)
    return defect


def lattice_residual(
    band: BandFunction,
    model: ImpurityModel,
    energy: float,
    sites: Sequence[Site],
    vector: ArrayLike,
    side: int,
) -> float:
    """
    ``||(H - E) psi||`` for a finitely supported ``psi`` placed in a box of the given side.
    """
    h = box_hamiltonian(band, side, model)
    psi = np.zeros(h.shape[0], dtype=complex)
    for s, a in zip(sites, np.asarray(vector, dtype=complex)):
        psi[box_index(s, side)] += a
    return float(np.linalg.norm(h @ psi - energy * psi))


@dataclass(frozen=True)
class IntertwiningDefect:
    defect: float
    "``||(H (1 + K) - (1 + K) H0) phi||`` over unit vectors ``phi`` localised on ``Lambda``."
    expected: float
    "``||eps K phi||``, the exact value of the defect on the box."
    residual: float
    "``||(H (1 + K) - (1 + K) H0 + sign i eps K) phi||``, zero up to rounding."


def intertwining_defect(
    model: ImpurityModel,
    band: BandFunction,
    side: int,
    epsilon: float,
    sign: int = 1,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> IntertwiningDefect:
    """
    Intertwining shadow of ``Omega_+-`` on the box. The kernel
    ``K(k, k') = L^{-d} sum_{n,m} e^{i k.n} T_{nm}(z') e^{-i k'.m} / (z' - E(k))`` with ``z' = E(k') - sign i eps``
    satisfies ``H (1 + K) - (1 + K) H0 = -sign i eps K`` exactly on the box.
    """
    if epsilon <= 0:
        raise DomainError(ErrorMsgFormer.out_of_range("epsilon", epsilon, 0.0, None, inclusive=False))
    _require_side(side, model)
    d = band.dimension
    k = box_momenta(d, side)
    n_total = len(k)
    energies = band.evaluate(k)
    sites = np.asarray(model.sites, dtype=float)
    phi = np.exp(1j * k @ sites.T) / np.sqrt(n_total)
    kern = np.empty((n_total, n_total), dtype=complex)
    for col in range(n_total):
        zc = energies[col] - sign * 1j * epsilon
        g0 = (np.conj(phi).T * (1.0 / (zc - energies))) @ phi
        t = solve_from_green(model, g0, zc, tolerances=tolerances).t_matrix
        kern[:, col] = (phi @ t @ np.conj(phi[col])) / (zc - energies)
    v_mom = phi @ model.v_matrix @ np.conj(phi.T)
    one_k = np.eye(n_total) + kern
    d_mat = (np.diag(energies) + v_mom) @ one_k - one_k * energies[None, :]
    local = phi
    defect = float(np.linalg.norm(d_mat @ local, 2))
    expected = float(np.linalg.norm(epsilon * kern @ local, 2))
    residual = float(np.linalg.norm((d_mat + sign * 1j * epsilon * kern) @ local, 2))
    logger.debug("intertwining on a box of side %d: defect %.3e, expected %.3e", side, defect, expected)
    return IntertwiningDefect(defect, expected, residual)
