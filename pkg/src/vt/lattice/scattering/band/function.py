#!/usr/bin/env python3
# coding=utf-8

"""
The one-band symbol ``E(k) = sum_n E_n exp(i n.k)`` of a translation invariant hopping Hamiltonian on ``Z^d``.

Matrix elements follow ``(H0)_{nm} = E_{n-m}``, so that the lattice site ``m`` corresponds to the plane wave
``(2 pi)^{-d/2} exp(i m.k)`` on the torus.
"""

import hashlib
import json
import logging
from collections.abc import Iterable, Mapping, Sequence
from typing import Literal, overload

import numpy as np
from numpy.typing import ArrayLike, NDArray

from vt.lattice.scattering.error_specs import DomainError, ErrorMsgFormer

logger = logging.getLogger(__name__)

type Site = tuple[int, ...]


class BandFunction:
    """
    Finite Fourier coefficient table of a real band function on the torus ``T^d``.

    The table must be Hermitian, ``E_{-n} = conj(E_n)``, so that the band is real. Coefficients below ``zero_tol`` are
    dropped and the remaining offsets form the support ``S``.

    >>> band = BandFunction.laplacian(3)
    >>> band.dimension, len(band.support)
    (3, 6)
    >>> float(band.evaluate([0.0, 0.0, 0.0]))
    6.0

    A non-Hermitian table is refused at construction:

    >>> try:
    ...     BandFunction({(1,): 1.0, (-1,): 0.5})
    ... except DomainError as e:
    ...     print(e)
    coefficient table is not Hermitian: E_(-1,) != conj(E_(1,))
    """

    def __init__(
        self,
        coefficients: Mapping[Sequence[int], complex],
        *,
        zero_tol: float = 1e-14,
        hermitian_tol: float = 1e-12,
    ):
        """
        :param coefficients: map from integer offset ``n`` to the coefficient ``E_n``.
        :param zero_tol: coefficients of smaller modulus are dropped from the support.
        :param hermitian_tol: tolerance of the Hermiticity check.
        :raises DomainError: for an empty, ragged or non-Hermitian table.
        """
        table: dict[Site, complex] = {}
        for offset, value in coefficients.items():
            site = tuple(int(x) for x in offset)
            if abs(value) > zero_tol:
                table[site] = complex(value)
        if not table:
            raise DomainError("band has no non-zero Fourier coefficient")
        dims = {len(s) for s in table}
        if len(dims) != 1 or 0 in dims:
            raise DomainError(f"offsets of mixed or zero length: {sorted(dims)}")
        for site, value in table.items():
            partner = tuple(-x for x in site)
            if abs(table.get(partner, 0.0) - np.conj(value)) > hermitian_tol:
                raise DomainError(
                    f"coefficient table is not Hermitian: E_{partner} != conj(E_{site})"
                )
        self._table = table
        self._dimension = dims.pop()
        ordered = sorted(table)
        self._offsets = np.array(ordered, dtype=np.int64).reshape(
            len(ordered), self._dimension
        )
        self._coefficients = np.array([table[s] for s in ordered], dtype=complex)
        self._offsets.setflags(write=False)
        self._coefficients.setflags(write=False)

    # region constructors
    @classmethod
    def laplacian(cls, dimension: int, hopping: float = 1.0) -> "BandFunction":
        """
        Nearest neighbour band ``2 t sum_j cos k_j``.

        >>> BandFunction.laplacian(2, hopping=0.5).coefficient((1, 0))
        (0.5+0j)

        :param dimension: lattice dimension ``d``.
        :param hopping: hopping amplitude ``t``.
        """
        if dimension < 1:
            raise DomainError(
                ErrorMsgFormer.out_of_range("dimension", dimension, low=1)
            )
        terms: dict[Site, complex] = {}
        for j in range(dimension):
            e = [0] * dimension
            e[j] = 1
            terms[tuple(e)] = hopping
            e[j] = -1
            terms[tuple(e)] = hopping
        return cls(terms)

    @classmethod
    def from_terms(
        cls, dimension: int, terms: Iterable[tuple[Sequence[int], complex]]
    ) -> "BandFunction":
        """
        Build a band from ``(offset, coefficient)`` pairs. Missing Hermitian partners are added, repeated offsets
        are summed.

        >>> b = BandFunction.from_terms(1, [((1,), 1.0)])
        >>> sorted(b.support)
        [(-1,), (1,)]

        :param dimension: lattice dimension.
        :param terms: offsets and coefficients.
        """
        table: dict[Site, complex] = {}
        for offset, value in terms:
            site = tuple(int(x) for x in offset)
            if len(site) != dimension:
                raise DomainError(
                    f"offset {site} does not have {dimension} components"
                )
            table[site] = table.get(site, 0.0) + complex(value)
        for site in list(table):
            partner = tuple(-x for x in site)
            if partner not in table:
                table[partner] = np.conj(table[site])
        return cls(table)

    # endregion

    @property
    def dimension(self) -> int:
        return self._dimension

    @property
    def offsets(self) -> NDArray[np.int64]:
        """
        :return: ``(|S|, d)`` array of the support, sorted lexicographically.
        """
        return self._offsets

    @property
    def coefficients(self) -> NDArray[np.complex128]:
        return self._coefficients

    @property
    def support(self) -> frozenset[Site]:
        return frozenset(self._table)

    @property
    def is_real(self) -> bool:
        """
        ``True`` when all coefficients are real, in which case ``E(-k) = E(k)``.
        """
        return bool(np.all(np.abs(self._coefficients.imag) == 0.0))

    @property
    def is_polynomial(self) -> bool:
        """
        Finite coefficient tables always describe trigonometric polynomials.
        """
        return True

    def coefficient(self, offset: Sequence[int]) -> complex:
        return self._table.get(tuple(int(x) for x in offset), 0j)

    def _phases(self, k: ArrayLike) -> tuple[NDArray[np.complex128], tuple[int, ...]]:
        pts = np.asarray(k, dtype=float)
        if pts.shape[-1] != self._dimension:
            raise DomainError(
                f"torus point must have {self._dimension} components, got shape {pts.shape}"
            )
        lead = pts.shape[:-1]
        flat = pts.reshape(-1, self._dimension)
        return np.exp(1j * (flat @ self._offsets.T)), lead

    def evaluate(self, k: ArrayLike) -> NDArray[np.float64]:
        """
        ``E(k)``, vectorised over leading axes of ``k``.

        >>> band = BandFunction.laplacian(3)
        >>> float(band.evaluate([np.pi, np.pi, np.pi]))
        -6.0
        """
        ph, lead = self._phases(k)
        return (ph @ self._coefficients).real.reshape(lead)

    def gradient(self, k: ArrayLike) -> NDArray[np.float64]:
        """
        Exact gradient of the finite Fourier sum, shape ``(..., d)``.

        >>> band = BandFunction.laplacian(3)
        >>> np.round(band.gradient([np.pi / 2] * 3), 12)
        array([-2., -2., -2.])
        """
        ph, lead = self._phases(k)
        weights = 1j * self._coefficients[:, None] * self._offsets
        return (ph @ weights).real.reshape(*lead, self._dimension)

    def hessian(self, k: ArrayLike) -> NDArray[np.float64]:
        """
        Exact Hessian of the finite Fourier sum, shape ``(..., d, d)``.
        """
        ph, lead = self._phases(k)
        outer = np.einsum("si,sj->sij", self._offsets, self._offsets)
        weights = -self._coefficients[:, None, None] * outer
        hess = np.einsum("ns,sij->nij", ph, weights).real
        return hess.reshape(*lead, self._dimension, self._dimension)

    def jet(
        self, k: ArrayLike
    ) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
        """
        Value, gradient and Hessian from one evaluation of the phases.
        """
        ph, lead = self._phases(k)
        c = self._coefficients
        n = self._offsets
        value = (ph @ c).real.reshape(lead)
        grad = (ph @ (1j * c[:, None] * n)).real.reshape(*lead, self._dimension)
        outer = np.einsum("si,sj->sij", n, n)
        hess = np.einsum("ns,sij->nij", ph, -c[:, None, None] * outer).real
        return value, grad, hess.reshape(*lead, self._dimension, self._dimension)

    def jet_relative(
        self, k: ArrayLike, k_ref: ArrayLike
    ) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
        """
        Excess ``E(k) - E(k_ref)``, gradient and Hessian computed from ``theta = k - k_ref`` through
        ``exp(i n.theta) - 1 = -2 sin^2(n.theta/2) + i sin(n.theta)``, with the gradient at ``k_ref`` dropped.

        When ``k_ref`` is a critical point the three quantities keep full relative accuracy as ``k -> k_ref``, which
        the energy flow needs near the band edges.

        >>> band = BandFunction.laplacian(3)
        >>> ex, g, _ = band.jet_relative([[1e-9, 0.0, 0.0]], [0.0, 0.0, 0.0])
        >>> round(float(ex[0] / 1e-18), 9), round(float(g[0, 0] / 1e-9), 9)
        (-1.0, -2.0)
        """
        pts = np.asarray(k, dtype=float)
        lead = pts.shape[:-1]
        flat = pts.reshape(-1, self._dimension)
        ref = np.asarray(k_ref, dtype=float).reshape(-1, self._dimension)
        theta = flat - ref
        theta = theta - 2 * np.pi * np.round(theta / (2 * np.pi))
        phi = theta @ self._offsets.T
        em1 = -2.0 * np.sin(0.5 * phi) ** 2 + 1j * np.sin(phi)
        base = self._coefficients * np.exp(1j * (ref @ self._offsets.T))
        excess = (em1 * base).sum(axis=1)
        grad = (em1 * base) @ (1j * self._offsets)
        outer = np.einsum("si,sj->sij", self._offsets, self._offsets)
        hess = np.einsum("ns,sij->nij", (em1 + 1.0) * base, -outer.astype(complex))
        return (
            excess.real.reshape(lead),
            grad.real.reshape(*lead, self._dimension),
            hess.real.reshape(*lead, self._dimension, self._dimension),
        )

    def hamiltonian_block(
        self, rows: Sequence[Site], cols: Sequence[Site] | None = None
    ) -> NDArray[np.complex128]:
        """
        Matrix ``(H0)_{nm} = E_{n-m}`` for ``n`` in ``rows`` and ``m`` in ``cols``.

        >>> BandFunction.laplacian(1).hamiltonian_block([(0,), (1,)]).real
        array([[0., 1.],
               [1., 0.]])
        """
        cols = rows if cols is None else cols
        out = np.zeros((len(rows), len(cols)), dtype=complex)
        for i, n in enumerate(rows):
            for j, m in enumerate(cols):
                out[i, j] = self._table.get(tuple(a - b for a, b in zip(n, m)), 0j)
        return out

    def to_terms(self) -> list[dict[str, object]]:
        """
        JSON friendly form used by run manifests and cache keys.
        """
        return [
            {"offset": list(s), "re": c.real, "im": c.imag}
            for s, c in sorted(self._table.items())
        ]

    def fingerprint(self) -> str:
        """
        Stable sha256 of the coefficient table.
        """
        payload = json.dumps(
            {"d": self._dimension, "terms": self.to_terms()}, sort_keys=True
        )
        return hashlib.sha256(payload.encode()).hexdigest()

    def __repr__(self) -> str:
        return f"BandFunction(dimension={self._dimension}, support={len(self._table)} offsets)"


@overload
def evaluate_band(
    band: BandFunction, k: ArrayLike, order: Literal[0] = 0
) -> NDArray[np.float64]: ...


@overload
def evaluate_band(
    band: BandFunction, k: ArrayLike, order: Literal[1]
) -> NDArray[np.float64]: ...


@overload
def evaluate_band(
    band: BandFunction, k: ArrayLike, order: Literal[2]
) -> NDArray[np.float64]: ...


def evaluate_band(band: BandFunction, k: ArrayLike, order: int = 0) -> NDArray[np.float64]:
    """
    Evaluate the band, its gradient (``order=1``) or its Hessian (``order=2``) at torus points. Coordinates are
    reduced modulo ``2 pi`` first.

    >>> band = BandFunction.laplacian(3)
    >>> abs(float(evaluate_band(band, [np.pi / 2] * 3))) < 1e-12
    True
    >>> bool(np.allclose(evaluate_band(band, [2 * np.pi, 0.0, 0.0], order=2), -2 * np.eye(3)))
    True

    :param band: the band.
    :param k: torus point(s), last axis of length ``d``.
    :param order: derivative order.
    :raises DomainError: for an unknown order or a wrongly shaped point.
    """
    reduced = np.mod(np.asarray(k, dtype=float), 2 * np.pi)
    if order == 0:
        return band.evaluate(reduced)
    if order == 1:
        return band.gradient(reduced)
    if order == 2:
        return band.hessian(reduced)
    raise DomainError(ErrorMsgFormer.errmsg_for_choices(str(order), "order", [0, 1, 2]))


def lattice_fourier(
    sites: Sequence[Site], values: ArrayLike, k: ArrayLike, order: int = 0
) -> NDArray[np.complex128]:
    """
    ``v(k) = sum_m v_m exp(i m.k)`` over a finite site set, with its gradient (``order=1``, shape ``(..., d)``) or
    Hessian (``order=2``, shape ``(..., d, d)``).

    >>> complex(lattice_fourier([(0,), (1,)], [1.0, -1.0], [0.0]))
    0j

    :param sites: the sites ``m``.
    :param values: the amplitudes ``v_m``.
    :param k: torus points.
    :param order: derivative order.
    """
    m = np.asarray(sites, dtype=float)
    v = np.asarray(values, dtype=complex)
    pts = np.asarray(k, dtype=float)
    lead = pts.shape[:-1]
    ph = np.exp(1j * (pts.reshape(-1, m.shape[1]) @ m.T)) * v
    if order == 0:
        return ph.sum(axis=1).reshape(lead)
    if order == 1:
        return (ph @ (1j * m)).reshape(*lead, m.shape[1])
    if order == 2:
        outer = -np.einsum("si,sj->sij", m, m)
        return np.einsum("ns,sij->nij", ph, outer).reshape(*lead, m.shape[1], m.shape[1])
    raise DomainError(ErrorMsgFormer.errmsg_for_choices(str(order), "order", [0, 1, 2]))
