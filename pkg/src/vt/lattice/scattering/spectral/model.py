#!/usr/bin/env python3
# coding=utf-8

"""
Finite rank impurities ``V = Pi^* V^Pi Pi`` on a finite site set ``Lambda``.
"""

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from vt.lattice.scattering.band import BandFunction, Site
from vt.lattice.scattering.error_specs import DomainError, ErrorMsgFormer
from vt.lattice.scattering.tolerances import DEFAULT_TOLERANCES, Tolerances

logger = logging.getLogger(__name__)

type ImpurityKind = Literal["diagonal", "barrier", "general"]

KINDS: tuple[ImpurityKind, ...] = ("diagonal", "barrier", "general")


@dataclass(frozen=True)
class Channels:
    """
    ``V^Pi = U diag(values) U^*`` over the non-zero eigenvalues of ``V^Pi``.
    """

    unitary: NDArray[np.complex128]
    "``(|Lambda|, r)`` isometry."
    values: NDArray[np.float64]

    @property
    def rank(self) -> int:
        return len(self.values)

    @property
    def inverse(self) -> NDArray[np.complex128]:
        """
        ``diag(1 / values)``, the inverse of ``V^Pi`` on its range.
        """
        return np.diag(1.0 / self.values).astype(complex)

    def compress(self, matrix: ArrayLike) -> NDArray[np.complex128]:
        """
        ``U^* M U`` for one matrix or a stack of them.
        """
        u = self.unitary
        return np.conj(u.T) @ np.asarray(matrix, dtype=complex) @ u

    def expand(self, matrix: ArrayLike) -> NDArray[np.complex128]:
        u = self.unitary
        return u @ np.asarray(matrix, dtype=complex) @ np.conj(u.T)


@dataclass(frozen=True)
class ImpurityModel:
    """
    The perturbation ``H = H0 + V`` encoded by the ``|Lambda| x |Lambda|`` Hermitian matrix ``V^Pi``.

    >>> model = ImpurityModel.point(3, 2.0)
    >>> model.sites, model.v_matrix.real.tolist()
    (((0, 0, 0),), [[2.0]])
    >>> try:
    ...     ImpurityModel.general([(0,), (1,)], [[0.0, 1.0], [0.0, 0.0]])
    ... except DomainError as e:
    ...     print(e)
    impurity matrix is not Hermitian
    """

    sites: tuple[Site, ...]
    v_matrix: NDArray[np.complex128]
    kind: ImpurityKind = "general"
    core_sites: tuple[Site, ...] = ()
    "The sites the impurity is attached to; for a barrier ``Lambda`` itself, while ``sites`` is ``Lambda_eff``."

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(ErrorMsgFormer.errmsg_for_choices(str(self.kind), "impurity.kind", list(KINDS)))
        v = np.asarray(self.v_matrix, dtype=complex)
        n = len(self.sites)
        if n == 0:
            raise DomainError("impurity site set is empty")
        if len(set(self.sites)) != n:
            raise DomainError("impurity sites are not distinct")
        if len({len(s) for s in self.sites}) != 1:
            raise DomainError("impurity sites have mixed dimensions")
        if v.shape != (n, n):
            raise DomainError(f"impurity matrix has shape {v.shape}, expected {(n, n)}")
        if not np.allclose(v, np.conj(v.T), atol=1e-12, rtol=0.0):
            raise DomainError("impurity matrix is not Hermitian")
        object.__setattr__(self, "v_matrix", 0.5 * (v + np.conj(v.T)))
        if not self.core_sites:
            object.__setattr__(self, "core_sites", tuple(self.sites))

    # region constructors
    @classmethod
    def diagonal(cls, sites: Sequence[Sequence[int]], potentials: Sequence[float]) -> "ImpurityModel":
        """
        ``V = sum_n v_n |n><n|``.
        """
        ss = tuple(tuple(int(x) for x in s) for s in sites)
        if len(potentials) != len(ss):
            raise DomainError(f"{len(potentials)} potentials for {len(ss)} sites")
        return cls(ss, np.diag(np.asarray(potentials, dtype=float)).astype(complex), "diagonal")

    @classmethod
    def point(cls, dimension: int, coupling: float) -> "ImpurityModel":
        """
        ``lambda |0><0|``.
        """
        return cls.diagonal([(0,) * dimension], [coupling])

    @classmethod
    def general(cls, sites: Sequence[Sequence[int]], matrix: ArrayLike) -> "ImpurityModel":
        ss = tuple(tuple(int(x) for x in s) for s in sites)
        return cls(ss, np.asarray(matrix, dtype=complex), "general")

    @classmethod
    def barrier(cls, band: BandFunction, sites: Sequence[Sequence[int]]) -> "ImpurityModel":
        """
        ``V = -P H0 Q - Q H0 P`` with ``P`` the projection onto ``Lambda``: it cuts every hopping across the boundary
        of ``Lambda``. Its support is ``Lambda_eff = Lambda cup (Lambda + S)``, on which it is stored.

        >>> from vt.lattice.scattering.band import BandFunction
        >>> model = ImpurityModel.barrier(BandFunction.laplacian(1), [(0,)])
        >>> model.sites, model.v_matrix.real.tolist()
        (((-1,), (0,), (1,)), [[0.0, -1.0, 0.0], [-1.0, 0.0, -1.0], [0.0, -1.0, 0.0]])
        """
        core = tuple(tuple(int(x) for x in s) for s in sites)
        core_set = set(core)
        ring = {tuple(a + b for a, b in zip(n, s)) for n in core for s in band.support} - core_set
        eff = tuple(sorted(core_set | ring))
        h = band.hamiltonian_block(eff)
        inside = np.array([s in core_set for s in eff])
        cut = inside[:, None] != inside[None, :]
        v = np.where(cut, -h, 0.0)
        logger.debug("barrier on %d sites, effective support %d sites", len(core), len(eff))
        return cls(eff, v, "barrier", core)

    # endregion

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def dimension(self) -> int:
        return len(self.sites[0])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.v_matrix, 2))

    def is_invertible(self, tolerances: Tolerances = DEFAULT_TOLERANCES) -> bool:
        s = np.linalg.svd(self.v_matrix, compute_uv=False)
        return bool(s[-1] >= tolerances.invertibility * max(float(s[0]), 1e-300))

    def channels(self, tolerances: Tolerances = DEFAULT_TOLERANCES) -> Channels:
        """
        Eigen-decomposition of ``V^Pi`` over its non-zero eigenvalues. For an invertible ``V^Pi`` the channels span
        the whole of ``l^2(Lambda)``; a barrier or a vanishing coupling has fewer channels than sites.

        >>> ImpurityModel.point(3, 0.0).channels().rank
        0
        """
        w, u = np.linalg.eigh(self.v_matrix)
        scale = float(np.max(np.abs(w)))
        keep = np.abs(w) > tolerances.invertibility * scale if scale > 0 else np.zeros(len(w), dtype=bool)
        if not np.all(keep):
            logger.debug("impurity of rank %d on %d sites", int(np.count_nonzero(keep)), len(w))
        return Channels(u[:, keep], w[keep])

    def site_index(self) -> Mapping[Site, int]:
        return {s: i for i, s in enumerate(self.sites)}

    def to_dict(self) -> dict[str, object]:
        return {
            "kind": self.kind,
            "sites": [list(s) for s in self.sites],
            "core_sites": [list(s) for s in self.core_sites],
            "v_real": self.v_matrix.real.tolist(),
            "v_imag": self.v_matrix.imag.tolist(),
        }
