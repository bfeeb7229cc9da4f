#!/usr/bin/env python3
# coding=utf-8

"""
Small dense Hermitian linear algebra: kernel detection with a two-tier tolerance, pseudo powers of positive
semi-definite matrices on their range, and the inverse of ``A + iB`` restricted to the complement of the joint kernel
of ``A`` and ``B``.
"""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from vt.lattice.scattering.error_specs import DomainError
from vt.lattice.scattering.tolerances import DEFAULT_TOLERANCES, Tolerances
from vt.lattice.scattering.warnings import RankAmbiguity, ReportedWithWarning, vt_warn

logger = logging.getLogger(__name__)

SEPARATION = 1e-2
"Ratio of the largest zero to the smallest non-zero singular value above which a kernel dimension is ambiguous."


@dataclass(frozen=True)
class KernelInfo:
    dimension: int
    basis: NDArray[np.complex128]
    "Orthonormal kernel basis as columns."
    singular_values: NDArray[np.float64]
    "Descending."
    scale: float
    "The norm against which singular values were compared."

    @property
    def smallest(self) -> float:
        return float(self.singular_values[-1]) if len(self.singular_values) else 0.0


def kernel(
    matrix: ArrayLike,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    *,
    scale: float | None = None,
    context: str = "matrix",
) -> KernelInfo:
    """
    Kernel of a matrix by SVD. Singular values below ``kernel_zero * scale`` count as zero. A singular value inside
    ``[kernel_zero, kernel_warn] * scale`` issues :class:`RankAmbiguity`; a zero singular value that is not well
    separated from the next one issues :class:`ReportedWithWarning`.

    >>> kernel(np.diag([1.0, 0.0])).dimension
    1
    >>> kernel(np.zeros((2, 2))).dimension
    2

    :param matrix: any ``(m, n)`` matrix.
    :param tolerances: supplies ``kernel_zero`` and ``kernel_warn``.
    :param scale: reference norm, the largest singular value by default.
    :param context: names the matrix in warnings.
    """
    m = np.atleast_2d(np.asarray(matrix, dtype=complex))
    n = m.shape[1]
    if n == 0:
        return KernelInfo(0, np.zeros((0, 0), dtype=complex), np.zeros(0), 0.0)
    if m.shape[0] == 0:
        return KernelInfo(n, np.eye(n, dtype=complex), np.zeros(n), 0.0)
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    sv = np.zeros(n)
    sv[: len(s)] = s
    ref = float(sv[0]) if scale is None else float(scale)
    if ref == 0.0:
        return KernelInfo(n, np.eye(n, dtype=complex), sv, 0.0)
    zero = sv < tolerances.kernel_zero * ref
    band = (~zero) & (sv < tolerances.kernel_warn * ref)
    if np.any(band):
        vt_warn(
            f"{context}: singular value {float(sv[band][-1]):.3e} within the tolerance band of norm {ref:.3e}",
            RankAmbiguity,
        )
    dim = int(np.count_nonzero(zero))
    if 0 < dim < n:
        largest_zero = float(sv[n - dim])
        smallest_kept = float(sv[n - dim - 1])
        if largest_zero > SEPARATION * smallest_kept:
            vt_warn(
                f"{context}: kernel dimension {dim} reported with singular values {largest_zero:.3e} and "
                f"{smallest_kept:.3e} poorly separated",
                ReportedWithWarning,
            )
    basis = np.conj(vh[n - dim :]).T
    return KernelInfo(dim, basis, sv, ref)


def range_basis(
    hermitian: ArrayLike, cutoff: float = DEFAULT_TOLERANCES.svd_cutoff
) -> tuple[NDArray[np.complex128], NDArray[np.float64]]:
    """
    Eigenvectors and eigenvalues of a positive semi-definite matrix above ``cutoff`` times its norm.

    >>> q, w = range_basis(np.diag([2.0, 1e-14]))
    >>> q.shape, w.tolist()
    ((2, 1), [2.0])
    """
    h = np.asarray(hermitian, dtype=complex)
    h = 0.5 * (h + np.conj(h.T))
    w, q = np.linalg.eigh(h)
    top = float(np.max(np.abs(w))) if len(w) else 0.0
    keep = w > cutoff * top if top > 0 else np.zeros(len(w), dtype=bool)
    return q[:, keep], w[keep]


def pseudo_power(
    hermitian: ArrayLike, power: float, cutoff: float = DEFAULT_TOLERANCES.svd_cutoff
) -> NDArray[np.complex128]:
    """
    ``|M|^p`` on the range of a positive semi-definite ``M``, zero on its numerical kernel.

    >>> (pseudo_power(np.diag([4.0, 0.0]), -0.5).real + 0.0).tolist()
    [[0.5, 0.0], [0.0, 0.0]]
    """
    q, w = range_basis(hermitian, cutoff)
    return (q * w**power) @ np.conj(q.T)


def joint_kernel(a: ArrayLike, b: ArrayLike, tolerances: Tolerances = DEFAULT_TOLERANCES) -> KernelInfo:
    """
    ``Ker A`` intersected with ``Ker B``.
    """
    am, bm = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    scale = max(float(np.linalg.norm(am, 2)), float(np.linalg.norm(bm, 2)))
    return kernel(np.vstack([am, bm]), tolerances, scale=scale or None, context="joint kernel")


def restricted_inverse_matrix(
    a: ArrayLike, b: ArrayLike, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> NDArray[np.complex128]:
    """
    The inverse of ``A + iB`` (``A`` Hermitian, ``B >= 0``) on the orthogonal complement ``K^perp`` of the joint
    kernel ``K = Ker A cap Ker B``, extended by zero on ``K``. When ``K`` is trivial this is the plain inverse.

    >>> a = np.diag([1.0, 0.0]); b = np.zeros((2, 2))
    >>> (restricted_inverse_matrix(a, b).real + 0.0).tolist()
    [[1.0, 0.0], [0.0, 0.0]]
    """
    am, bm = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    k = joint_kernel(am, bm, tolerances)
    n = am.shape[0]
    if k.dimension == 0:
        return np.linalg.inv(am + 1j * bm)
    if k.dimension == n:
        return np.zeros((n, n), dtype=complex)
    logger.debug("restricting A + iB to the complement of a %d-dimensional joint kernel", k.dimension)
    full, _, _ = np.linalg.svd(k.basis, full_matrices=True)
    q = full[:, k.dimension :]
    inner = np.conj(q.T) @ (am + 1j * bm) @ q
    return q @ np.linalg.inv(inner) @ np.conj(q.T)


def restricted_solve(
    a: ArrayLike, b: ArrayLike, rhs: ArrayLike, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> NDArray[np.complex128]:
    """
    The unique ``w`` orthogonal to ``Ker A cap Ker B`` with ``(A + iB) w = v``.

    :raises DomainError: if ``v`` has a component along the joint kernel.
    """
    v = np.asarray(rhs, dtype=complex)
    k = joint_kernel(a, b, tolerances)
    if k.dimension:
        leak = float(np.linalg.norm(np.conj(k.basis.T) @ v))
        if leak > tolerances.kernel_warn * max(float(np.linalg.norm(v)), 1.0):
            raise DomainError(f"right-hand side has a component {leak:.3e} along the joint kernel of A and B")
    return restricted_inverse_matrix(a, b, tolerances) @ v


def limit_defect(a: ArrayLike, p: ArrayLike, lam: float) -> float:
    """
    ``||lam P (A + i lam P)^{-1} P + iP||`` for a Hermitian ``A`` and an orthogonal projection ``P`` onto ``Ker A``;
    it vanishes like ``O(lam)``.
    """
    am, pm = np.asarray(a, dtype=complex), np.asarray(p, dtype=complex)
    x = lam * pm @ np.linalg.inv(am + 1j * lam * pm) @ pm + 1j * pm
    return float(np.linalg.norm(x, 2))


def bounded_schur(c: ArrayLike, d: ArrayLike) -> NDArray[np.complex128]:
    """
    ``F = (C + i D D^*)^{-1} D``, bounded even where ``C`` has a first order zero on ``Ker D^*``.
    """
    cm, dm = np.asarray(c, dtype=complex), np.asarray(d, dtype=complex)
    return np.linalg.solve(cm + 1j * dm @ np.conj(dm.T), dm)


def hermitian_part(m: ArrayLike) -> NDArray[np.complex128]:
    x = np.asarray(m, dtype=complex)
    return 0.5 * (x + np.conj(np.swapaxes(x, -1, -2)))
