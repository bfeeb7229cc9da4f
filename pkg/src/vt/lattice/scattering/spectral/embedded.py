#!/usr/bin/env python3
# coding=utf-8

"""
Eigenvalues embedded in the band.

For a trigonometric polynomial band every eigenvector of ``H0 + V`` at an energy inside the band has finite support
in the convex hull of the impurity support. Embedded states are therefore found exactly, as the eigenpairs of ``H``
on the hull points whose eigenvectors are annihilated by the rows of ``H`` leading out of the hull.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from vt.lattice.scattering.band import (
    BandFunction,
    Site,
    hull_interior_chain,
    hull_lattice_points,
    s_interior,
    s_interior_chain,
)
from vt.lattice.scattering.error_specs import DomainError
from vt.lattice.scattering.green import GreenBoundary
from vt.lattice.scattering.linalg import kernel
from vt.lattice.scattering.spectral.model import ImpurityModel
from vt.lattice.scattering.tolerances import DEFAULT_TOLERANCES, Tolerances
from vt.lattice.scattering.warnings import FirstOrderZeroWarning, vt_warn

logger = logging.getLogger(__name__)

CLUSTER = 1e-9
"Eigenvalues closer than this (relative to the band width) form one degenerate level."

MAX_INVARIANT_STEPS = 64


@dataclass(frozen=True)
class EmbeddedState:
    energy: float
    multiplicity: int
    sites: tuple[Site, ...]
    "Sites carrying the eigenvectors."
    vectors: NDArray[np.complex128]
    "``(len(sites), multiplicity)`` orthonormal eigenvectors."
    residual: float
    "``max ||(H - E) psi||`` over the eigenvectors, evaluated on every row of ``H`` they reach."

    def support(self, threshold: float = 1e-12) -> tuple[Site, ...]:
        weight = np.sum(np.abs(self.vectors) ** 2, axis=1)
        return tuple(s for s, w in zip(self.sites, weight) if w > threshold)

    def to_dict(self) -> dict[str, object]:
        return {
            "energy": self.energy,
            "multiplicity": self.multiplicity,
            "residual": self.residual,
            "support": [list(s) for s in self.support()],
        }


def _outgoing(cs: Sequence[Site], support: frozenset[Site]) -> list[Site]:
    inside = set(cs)
    return sorted({tuple(a + b for a, b in zip(c, s)) for c in cs for s in support} - inside)


def _impurity_block(model: ImpurityModel, cs: Sequence[Site]) -> NDArray[np.complex128]:
    index = {s: i for i, s in enumerate(cs)}
    out = np.zeros((len(cs), len(cs)), dtype=complex)
    pos = [index[s] for s in model.sites]
    out[np.ix_(pos, pos)] = model.v_matrix
    return out


def largest_invariant_subspace(
    h: NDArray[np.complex128], basis: NDArray[np.complex128], tolerances: Tolerances = DEFAULT_TOLERANCES
) -> NDArray[np.complex128]:
    """
    Orthonormal basis of the largest ``h``-invariant subspace inside the span of ``basis``.

    >>> h = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 2.0]])
    >>> largest_invariant_subspace(h, np.eye(3)[:, [0, 2]]).shape
    (3, 1)
    """
    q = basis
    scale = max(float(np.linalg.norm(h, 2)), 1.0)
    for _ in range(MAX_INVARIANT_STEPS):
        if q.shape[1] == 0:
            return q
        leak = h @ q - q @ (np.conj(q.T) @ h @ q)
        k = kernel(leak, tolerances, scale=scale, context="invariant subspace")
        if k.dimension == q.shape[1]:
            return q
        q = q @ k.basis
    raise DomainError("invariant subspace iteration did not settle")


def exact_embedded_states(
    model: ImpurityModel,
    band: BandFunction,
    E_minus: float,
    E_plus: float,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    include_outside: bool = False,
) -> list[EmbeddedState]:
    """
    Finitely supported eigenvectors of ``H = H0 + V`` by exact linear algebra on ``C = Conv(Lambda) cap Z^d``.

    A vector supported in ``C`` is an eigenvector iff it lies in the kernel of the outgoing rows
    ``H0[(C + S) \\ C, C]`` and is an eigenvector of ``H[C, C]`` there. The largest ``H[C, C]``-invariant subspace of
    that kernel is diagonalised.

    :param model: the impurity.
    :param band: a trigonometric polynomial band.
    :param E_minus: lower band edge.
    :param E_plus: upper band edge.
    :param tolerances: ``kernel_zero`` for the kernels.
    :param include_outside: also return finitely supported eigenvectors outside the open band.
    """
    if not band.is_polynomial:
        raise DomainError("the exact embedded path needs a trigonometric polynomial band")
    cs = sorted(hull_lattice_points(model.sites))
    outer = _outgoing(cs, band.support)
    h = band.hamiltonian_block(cs) + _impurity_block(model, cs)
    out_rows = band.hamiltonian_block(outer, cs)
    k = kernel(out_rows, tolerances, context="outgoing rows")
    q = largest_invariant_subspace(h, k.basis, tolerances)
    logger.info(
        "exact embedded search: %d hull points, %d outgoing rows, invariant subspace of dimension %d",
        len(cs), len(outer), q.shape[1],
    )
    if q.shape[1] == 0:
        return []
    w, y = np.linalg.eigh(np.conj(q.T) @ h @ q)
    vecs = q @ y
    width = E_plus - E_minus
    states: list[EmbeddedState] = []
    i = 0
    while i < len(w):
        j = i + 1
        while j < len(w) and w[j] - w[i] < CLUSTER * width:
            j += 1
        energy = float(np.mean(w[i:j]))
        if include_outside or E_minus < energy < E_plus:
            block = vecs[:, i:j]
            residual = max(
                float(np.linalg.norm(np.concatenate([h @ block[:, c] - energy * block[:, c], out_rows @ block[:, c]])))
                for c in range(j - i)
            )
            states.append(EmbeddedState(energy, j - i, tuple(cs), block, residual))
        i = j
    logger.info("%d embedded levels found exactly", len(states))
    return states


def check_first_order(
    model: ImpurityModel,
    green: GreenBoundary,
    state: EmbeddedState,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    steps: tuple[float, float] = (1e-3, 2e-3),
) -> float:
    """
    Ratio of the smallest singular values of the channel matrix ``V_r^{-1} - G_r(E - i0)`` at two distances from an
    embedded eigenvalue. A first order zero gives a ratio near ``steps[1] / steps[0]``; otherwise a
    :class:`FirstOrderZeroWarning` is issued.
    """
    ch = model.channels(tolerances)
    if ch.rank == 0:
        return float("nan")
    width = green.E_plus - green.E_minus

    def smallest(energy: float) -> float:
        if not green.E_minus < energy < green.E_plus:
            return float("nan")
        m = ch.inverse - ch.compress(green.boundary(energy, -1))
        return float(np.linalg.svd(m, compute_uv=False)[-1])

    values = [
        0.5 * (smallest(state.energy + h * width) + smallest(state.energy - h * width)) for h in steps
    ]
    ratio = values[1] / values[0] if values[0] > 0 else float("inf")
    expected = steps[1] / steps[0]
    if not np.isfinite(ratio) or abs(ratio / expected - 1.0) > 0.25:
        vt_warn(
            f"smallest singular value near an embedded eigenvalue scales by {ratio:.3g} instead of {expected:.3g}",
            FirstOrderZeroWarning,
            energy=state.energy,
        )
    return ratio


@dataclass(frozen=True)
class EmbeddedSearch:
    """
    Kernel dimension of ``A(E) = R (E - H0)(1 - P)(E - H0) R`` on ``l^2(Conv(Lambda)^S)`` against ``E``.
    """

    energies: NDArray[np.float64]
    kernel_dims: NDArray[np.int64]
    smallest: NDArray[np.float64]
    "Smallest eigenvalue of ``A(E)`` relative to its norm."
    box: tuple[Site, ...]
    "``Conv(Lambda)^S``."
    generic_dim: int = 0
    exceptional: tuple[float, ...] = field(default=())
    "Energies where the kernel dimension exceeds its generic value."

    def to_rows(self) -> list[tuple[float, int, float]]:
        return [(float(e), int(k), float(s)) for e, k, s in zip(self.energies, self.kernel_dims, self.smallest)]


def _a_factor(band: BandFunction, sites: Sequence[Site], box: Sequence[Site], energy: float) -> NDArray[np.complex128]:
    """
    ``(1 - P)(E - H0) R`` as a matrix from ``box`` to the rows it reaches outside ``Lambda``.
    """
    lam = set(sites)
    rows = sorted((set(box) | set(_outgoing(box, band.support))) - lam)
    x = -band.hamiltonian_block(rows, box)
    col = {s: j for j, s in enumerate(box)}
    for i, r in enumerate(rows):
        if r in col:
            x[i, col[r]] += energy
    return x


def embedded_eigenvector_search(
    band: BandFunction,
    sites: Sequence[Sequence[int]],
    energies: ArrayLike,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> EmbeddedSearch:
    """
    Scan the kernel of ``A(E)``. A kernel vector ``w`` is a finitely supported function for which ``(E - H0) w`` is
    supported in ``Lambda``, so that ``v = Pi (E - H0) w`` is orthogonal to the energy shell.

    >>> from vt.lattice.scattering.band import BandFunction
    >>> lam = [(0, 0), (-1, 0), (0, -1), (1, 1), (1, 2), (2, 1)]
    >>> search = embedded_eigenvector_search(BandFunction.laplacian(2, 0.5), lam, [-1.0, 0.3])
    >>> bool(np.all(search.kernel_dims >= 1))
    True

    :param band: a trigonometric polynomial band.
    :param sites: ``Lambda``.
    :param energies: energies to scan.
    :param tolerances: ``kernel_zero`` for the kernel dimension.
    """
    lam = [tuple(int(c) for c in s) for s in sites]
    es = np.atleast_1d(np.asarray(energies, dtype=float))
    box = tuple(sorted(s_interior(hull_lattice_points(lam), band.support)))
    if not box:
        logger.info("Conv(Lambda)^S is empty: no candidates")
        return EmbeddedSearch(es, np.zeros(len(es), dtype=np.int64), np.ones(len(es)), box)
    dims = np.zeros(len(es), dtype=np.int64)
    smallest = np.zeros(len(es))
    for i, energy in enumerate(es):
        x = _a_factor(band, lam, box, float(energy))
        k = kernel(x, tolerances, context=f"A(E={energy:.6g})")
        dims[i] = k.dimension
        smallest[i] = (k.smallest / k.scale) ** 2 if k.scale > 0 else 0.0
    values, counts = np.unique(dims, return_counts=True)
    generic = int(values[np.argmax(counts)])
    exceptional = tuple(float(e) for e, k in zip(es, dims) if k > generic)
    logger.info("A(E) kernel: generic dimension %d, %d exceptional energies", generic, len(exceptional))
    return EmbeddedSearch(es, dims, smallest, box, generic, exceptional)


def shell_candidates(
    band: BandFunction,
    sites: Sequence[Sequence[int]],
    energy: float,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> NDArray[np.complex128]:
    """
    The vectors ``v = Pi (E - H0) w`` on ``Lambda`` for a basis ``w`` of the kernel of ``A(E)``, as columns.
    """
    lam = [tuple(int(c) for c in s) for s in sites]
    box = tuple(sorted(s_interior(hull_lattice_points(lam), band.support)))
    if not box:
        return np.zeros((len(lam), 0), dtype=complex)
    k = kernel(_a_factor(band, lam, box, energy), tolerances, context=f"A(E={energy:.6g})")
    to_lam = -band.hamiltonian_block(lam, box)
    col = {s: j for j, s in enumerate(box)}
    for i, s in enumerate(lam):
        if s in col:
            to_lam[i, col[s]] += energy
    return to_lam @ k.basis


@dataclass(frozen=True)
class NoEmbeddedCertificate:
    chain: tuple[frozenset[Site], ...]
    "``Lambda, Lambda^S, (Lambda^S)^S, ...``"
    hull_chain: tuple[frozenset[Site], ...]
    "``Lambda_{j+1} = Lambda cap (Conv(Lambda_j) cap Z^d)^S``."

    @property
    def holds(self) -> bool:
        """
        The hull chain reaches the empty set, so no embedded eigenvalue exists.
        """
        return not self.hull_chain[-1]

    def to_dict(self) -> dict[str, object]:
        return {
            "holds": self.holds,
            "chain": [len(s) for s in self.chain],
            "hull_chain": [len(s) for s in self.hull_chain],
        }


def no_embedded_check(model: ImpurityModel, band: BandFunction) -> NoEmbeddedCertificate:
    """
    Certificate that a diagonal potential without vanishing entries has no embedded eigenvalue: the iterated interior
    chain of its support runs down to the empty set.

    >>> from vt.lattice.scattering.band import BandFunction
    >>> block = [(i, j) for i in range(3) for j in range(3)]
    >>> cert = no_embedded_check(ImpurityModel.diagonal(block, [1.0] * 9), BandFunction.laplacian(2, 0.5))
    >>> cert.holds, [len(s) for s in cert.chain]
    (True, [9, 1, 0])

    :raises DomainError: for a non-diagonal model or a vanishing potential.
    """
    if model.kind != "diagonal":
        raise DomainError(f"the certificate applies to diagonal potentials, got kind {model.kind!r}")
    if np.any(np.abs(np.diag(model.v_matrix)) == 0.0):
        raise DomainError("the certificate needs a potential without vanishing entries")
    chain = s_interior_chain(model.sites, band.support)
    hull_chain = hull_interior_chain(model.sites, band.support)
    cert = NoEmbeddedCertificate(tuple(chain), tuple(hull_chain))
    logger.info("no-embedded certificate: chain %s, holds %s", [len(s) for s in hull_chain], cert.holds)
    return cert
