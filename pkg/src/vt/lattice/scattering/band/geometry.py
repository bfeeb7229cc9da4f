#!/usr/bin/env python3
# coding=utf-8

"""
Exact integer geometry of finite site sets in ``Z^d``: prime vectors, unimodular completion, S-interiors and the
contact half-planes of lattice polytopes.

All arithmetic is done with Python integers. Floating point only enters when qhull picks the vertex sets of facets;
the facet normals themselves are recomputed exactly from those vertices.
"""

import itertools
import logging
import math
from collections.abc import Collection, Iterable, Sequence
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull

from vt.lattice.scattering.error_specs import DomainError

logger = logging.getLogger(__name__)

type Site = tuple[int, ...]
type SiteSet = frozenset[Site]


# region integer linear algebra
def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """
    Extended Euclid: ``(g, x, y)`` with ``x a + y b = g = gcd(a, b) >= 0``.

    >>> xgcd(2, 3)
    (1, -1, 1)
    >>> xgcd(-4, 6)
    (2, 1, 1)
    >>> xgcd(0, -5)
    (5, 0, -1)
    """
    x, next_x = 1, 0
    y, next_y = 0, 1
    g, next_g = a, b
    while next_g:
        q = g // next_g
        x, next_x = next_x, x - q * next_x
        y, next_y = next_y, y - q * next_y
        g, next_g = next_g, g - q * next_g
    if g < 0:
        x, y, g = -x, -y, -g
    return g, x, y


def column_echelon(rows: Sequence[Sequence[int]], ncols: int) -> tuple[list[list[int]], list[list[int]], int]:
    """
    Reduce an integer matrix ``M`` by unimodular column operations, ``M U = H`` with ``H`` in column echelon form.

    Columns ``rank..ncols-1`` of ``U`` are a basis of the integer kernel of ``M``.

    >>> H, U, rank = column_echelon([[2, 3]], 2)
    >>> H, U, rank
    ([[1, 0]], [[-1, -3], [1, 2]], 1)

    :param rows: the matrix ``M`` as a list of integer rows.
    :param ncols: number of columns of ``M``.
    :return: ``(H, U, rank)``, matrices as lists of rows.
    """
    h = [[int(x) for x in row] for row in rows]
    u = [[int(i == j) for j in range(ncols)] for i in range(ncols)]

    def combine(i: int, j: int, a: int, b: int, c: int, e: int) -> None:
        # columns (i, j) <- (a col_i + b col_j, c col_i + e col_j)
        for mat in (h, u):
            for row in mat:
                ci, cj = row[i], row[j]
                row[i], row[j] = a * ci + b * cj, c * ci + e * cj

    pivot = 0
    for r in range(len(h)):
        if pivot >= ncols:
            break
        for j in range(pivot + 1, ncols):
            p, q = h[r][pivot], h[r][j]
            if q == 0:
                continue
            g, x, y = xgcd(p, q)
            combine(pivot, j, x, y, -q // g, p // g)
        if h[r][pivot] != 0:
            pivot += 1
    return h, u, pivot


def integer_kernel(rows: Sequence[Sequence[int]], ncols: int) -> list[list[int]]:
    """
    Basis of ``{x in Z^d : M x = 0}``.

    >>> integer_kernel([[1, 1, 1]], 3)
    [[-1, 1, 0], [0, -1, 1]]
    >>> integer_kernel([], 2)
    [[1, 0], [0, 1]]
    """
    _, u, rank = column_echelon(rows, ncols)
    return [[u[i][j] for i in range(ncols)] for j in range(rank, ncols)]


def integer_det(matrix: Sequence[Sequence[int]]) -> int:
    """
    Exact determinant by fraction-free Bareiss elimination.

    >>> integer_det([[2, 3], [1, 2]])
    1
    >>> integer_det([[0, 1], [1, 0]])
    -1
    >>> integer_det([])
    1
    """
    m = [[int(x) for x in row] for row in matrix]
    n = len(m)
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1] if n else 1


def integer_normal(vectors: Sequence[Sequence[int]], dimension: int) -> list[int]:
    """
    Primitive integer vector orthogonal to ``d-1`` integer vectors (generalised cross product), zero if they are
    dependent.

    >>> integer_normal([[1, 0, 0], [0, 1, 0]], 3)
    [0, 0, 1]
    >>> integer_normal([[1, -1]], 2)
    [1, 1]
    """
    normal = []
    for j in range(dimension):
        minor = [[row[c] for c in range(dimension) if c != j] for row in vectors]
        normal.append((-1) ** (dimension - 1 + j) * integer_det(minor))
    g = math.gcd(*normal)
    return [x // g for x in normal] if g else normal


# endregion


def is_prime_vector(a: Sequence[int]) -> bool:
    """
    ``True`` iff the coordinates of ``a`` have greatest common divisor 1, equivalently iff ``a.x = 1`` has an integer
    solution.

    >>> is_prime_vector((2, 3, 5)), is_prime_vector((2, 4, 6)), is_prime_vector((0, 0, 7))
    (True, False, False)
    >>> try:
    ...     is_prime_vector((0, 0))
    ... except DomainError as e:
    ...     print(e)
    the zero vector has no prime direction

    :raises DomainError: for the zero vector.
    """
    coords = [int(x) for x in a]
    if not any(coords):
        raise DomainError("the zero vector has no prime direction")
    return math.gcd(*coords) == 1


def complete_to_unimodular(a: Sequence[int]) -> np.ndarray:
    """
    Matrix ``A`` in ``SL(d, Z)`` with ``a.A[:, 0] = 1`` and ``a.A[:, j] = 0`` for ``j >= 1``; the columns
    ``1..d-1`` are then a basis of the kernel of ``x -> a.x``.

    >>> complete_to_unimodular((2, 3))
    array([[-1, -3],
           [ 1,  2]])

    Entries stay exact for coordinates of any size: the result has ``object`` dtype holding Python ints when an entry
    does not fit in ``int64``.

    :param a: a prime vector.
    :raises DomainError: if ``a`` is not prime, or ``a = (-1,)`` which has no completion in ``SL(1, Z)``.
    """
    coords = [int(x) for x in a]
    if not is_prime_vector(coords):
        raise DomainError(f"{tuple(coords)} is not a prime vector")
    d = len(coords)
    h, u, _ = column_echelon([coords], d)
    if h[0][0] == -1:
        if d == 1:
            raise DomainError("(-1,) has no completion in SL(1, Z)")
        for row in u:
            row[0], row[1] = -row[0], -row[1]
    bound = int(np.iinfo(np.int64).max)
    if all(abs(x) <= bound for row in u for x in row):
        return np.array(u, dtype=np.int64)
    # exact Python ints once an entry leaves the int64 range
    return np.array(u, dtype=object)


def s_interior(sites: Iterable[Sequence[int]], support: Iterable[Sequence[int]]) -> SiteSet:
    """
    ``{x in L : x + S is contained in L}``.

    >>> block = {(i, j) for i in range(3) for j in range(3)}
    >>> nn = {(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)}
    >>> sorted(s_interior(block, nn))
    [(1, 1)]
    >>> s_interior({(0, 0)}, nn)
    frozenset()
    """
    lam = frozenset(tuple(int(c) for c in x) for x in sites)
    sup = [tuple(int(c) for c in s) for s in support]
    return frozenset(
        x for x in lam if all(tuple(a + b for a, b in zip(x, s)) in lam for s in sup)
    )


def s_interior_chain(
    sites: Iterable[Sequence[int]], support: Iterable[Sequence[int]]
) -> list[SiteSet]:
    """
    Iterated S-interiors ``L, L^S, (L^S)^S, ...`` up to the empty set or a fixed point (the last entry).

    >>> block = {(i, j) for i in range(5) for j in range(5)}
    >>> nn = {(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)}
    >>> [len(s) for s in s_interior_chain(block, nn)]
    [25, 9, 1, 0]
    """
    sup = [tuple(int(c) for c in s) for s in support]
    current = frozenset(tuple(int(c) for c in x) for x in sites)
    chain = [current]
    while current:
        nxt = s_interior(current, sup)
        if nxt == current:
            break
        chain.append(nxt)
        current = nxt
    return chain


@dataclass(frozen=True, order=True)
class ContactHalfPlane:
    """
    Half-plane ``H+ = {x : a.x >= m}`` with prime ``a`` whose boundary touches the site set.
    """

    a: tuple[int, ...]
    m: int

    def contains(self, x: Sequence[int]) -> bool:
        return sum(ai * xi for ai, xi in zip(self.a, x)) >= self.m

    def touches(self, x: Sequence[int]) -> bool:
        return sum(ai * xi for ai, xi in zip(self.a, x)) == self.m


def _affine_frame(points: list[Site]) -> tuple[list[list[int]], int]:
    base = points[0]
    diffs = [[p - q for p, q in zip(x, base)] for x in points[1:]]
    if not diffs:
        return [], 0
    rank = int(np.linalg.matrix_rank(np.array(diffs, dtype=float)))
    return diffs, rank


def _orient(a: list[int], points: list[Site]) -> list[ContactHalfPlane]:
    values = [sum(ai * xi for ai, xi in zip(a, x)) for x in points]
    out = []
    lo, hi = min(values), max(values)
    out.append(ContactHalfPlane(tuple(a), lo))
    if lo == hi:
        out.append(ContactHalfPlane(tuple(-x for x in a), -hi))
    return out


def contact_halfplanes(sites: Iterable[Sequence[int]]) -> list[ContactHalfPlane]:
    """
    Contact half-planes of the convex hull of a finite site set, one per facet, with inward prime normals.

    For a lower dimensional hull the facets within its affine span are reported together with both orientations of
    an integer basis of the orthogonal directions. A single point thus gets the ``2d`` half-planes ``+-e_j``.

    >>> [(c.a, c.m) for c in contact_halfplanes({(0, 0), (1, 0), (0, 1)})]
    [((-1, -1), -1), ((0, 1), 0), ((1, 0), 0)]
    >>> len(contact_halfplanes({(0, 0, 0)}))
    6

    :param sites: non-empty site set.
    :raises DomainError: for an empty site set.
    """
    points = sorted({tuple(int(c) for c in x) for x in sites})
    if not points:
        raise DomainError("contact half-planes of an empty site set")
    d = len(points[0])
    diffs, rank = _affine_frame(points)
    complement = integer_kernel(diffs, d) if diffs else [
        [int(i == j) for j in range(d)] for i in range(d)
    ]
    found: set[ContactHalfPlane] = set()
    for w in complement[: d - rank]:
        g = math.gcd(*w)
        found.update(_orient([x // g for x in w], points))

    facet_vertex_sets: list[list[Site]] = []
    if rank == 1:
        direction = next(v for v in diffs if any(v))
        proj = [sum(a * b for a, b in zip(direction, x)) for x in points]
        facet_vertex_sets = [[points[int(np.argmin(proj))]], [points[int(np.argmax(proj))]]]
    elif rank >= 2:
        arr = np.array(points, dtype=float)
        centred = arr - arr.mean(axis=0)
        _, _, vt = np.linalg.svd(centred)
        coords = centred @ vt[:rank].T
        hull = ConvexHull(coords)
        facet_vertex_sets = [[points[i] for i in simplex] for simplex in hull.simplices]

    for verts in facet_vertex_sets:
        edges = [[p - q for p, q in zip(v, verts[0])] for v in verts[1:]]
        normal = integer_normal(edges + complement[: d - rank], d)
        if not any(normal):
            continue
        values = [sum(a * b for a, b in zip(normal, x)) for x in points]
        if min(values) < sum(a * b for a, b in zip(normal, verts[0])):
            normal = [-x for x in normal]
            values = [-v for v in values]
        found.add(ContactHalfPlane(tuple(normal), min(values)))
    contacts = sorted(found)
    logger.debug("%d contact half-planes for %d sites (rank %d)", len(contacts), len(points), rank)
    return contacts


def hull_lattice_points(sites: Iterable[Sequence[int]]) -> SiteSet:
    """
    Integer points of the real convex hull ``Conv(L) cap Z^d``.

    >>> sorted(hull_lattice_points({(0, 0), (2, 0), (0, 2)}))
    [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0)]
    """
    points = sorted({tuple(int(c) for c in x) for x in sites})
    if not points:
        return frozenset()
    contacts = contact_halfplanes(points)
    lows = [min(x[j] for x in points) for j in range(len(points[0]))]
    highs = [max(x[j] for x in points) for j in range(len(points[0]))]
    box = itertools.product(*(range(lo, hi + 1) for lo, hi in zip(lows, highs)))
    return frozenset(x for x in box if all(c.contains(x) for c in contacts))


def hull_interior_chain(
    sites: Iterable[Sequence[int]], support: Iterable[Sequence[int]]
) -> list[SiteSet]:
    """
    Chain ``L_0 = L``, ``L_{j+1} = L cap (Conv(L_j) cap Z^d)^S`` ending at the empty set or a fixed point.

    For convex ``L`` this is the iterated S-interior chain. Ending at the empty set certifies that a diagonal
    potential with no vanishing entry on ``L`` has no embedded eigenvalue.

    >>> block = {(i, j) for i in range(3) for j in range(3)}
    >>> nn = {(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)}
    >>> [len(s) for s in hull_interior_chain(block, nn)]
    [9, 1, 0]
    """
    lam = frozenset(tuple(int(c) for c in x) for x in sites)
    sup = [tuple(int(c) for c in s) for s in support]
    chain = [lam]
    current = lam
    while current:
        nxt = lam & s_interior(hull_lattice_points(current), sup)
        if nxt == current:
            break
        chain.append(nxt)
        current = nxt
    return chain


@dataclass(frozen=True)
class LatticeGeometry:
    """
    A site set with its contact half-planes and S-interior.

    >>> g = LatticeGeometry.of({(0, 0), (1, 0), (0, 1), (1, 1)}, {(1, 0), (-1, 0), (0, 1), (0, -1)})
    >>> len(g.contacts), len(g.s_interior)
    (4, 0)
    """

    sites: SiteSet
    support: SiteSet
    contacts: tuple[ContactHalfPlane, ...]
    s_interior: SiteSet

    @classmethod
    def of(cls, sites: Collection[Sequence[int]], support: Collection[Sequence[int]]) -> "LatticeGeometry":
        lam = frozenset(tuple(int(c) for c in x) for x in sites)
        sup = frozenset(tuple(int(c) for c in s) for s in support)
        return cls(
            sites=lam,
            support=sup,
            contacts=tuple(contact_halfplanes(lam)),
            s_interior=s_interior(lam, sup),
        )

    def hull_points(self) -> SiteSet:
        return hull_lattice_points(self.sites)
