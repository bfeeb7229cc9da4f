#!/usr/bin/env python3
# coding=utf-8

"""
Critical points of a Morse band function.
"""

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from vt.lattice.scattering.band.function import BandFunction
from vt.lattice.scattering.error_specs import AssumptionViolation, MorseViolation

logger = logging.getLogger(__name__)

TOL_GRAD = 1e-10
"Gradient norm below which a point counts as critical."

TOL_HESS = 1e-8
"Hessian determinant modulus below which a critical point is degenerate."

DEDUP_RADIUS = 1e-6
"Torus distance below which two Newton limits are the same critical point."


@dataclass(frozen=True)
class CriticalPoint:
    k: NDArray[np.float64]
    value: float
    hessian: NDArray[np.float64]
    index: int
    "Number of negative Hessian eigenvalues."

    def to_dict(self) -> dict[str, object]:
        return {
            "k": [float(x) for x in self.k],
            "value": self.value,
            "hessian": self.hessian.tolist(),
            "index": self.index,
        }


@dataclass(frozen=True)
class CriticalPointSet:
    """
    All critical points of the band, sorted by value, with the two extrema singled out.
    """

    dimension: int
    points: tuple[CriticalPoint, ...]
    minimum: CriticalPoint
    maximum: CriticalPoint
    critical_values: tuple[float, ...] = field(default=())

    @property
    def E_minus(self) -> float:
        return self.minimum.value

    @property
    def E_plus(self) -> float:
        return self.maximum.value

    @property
    def saddles(self) -> tuple[CriticalPoint, ...]:
        return tuple(p for p in self.points if 0 < p.index < self.dimension)

    @property
    def interior_values(self) -> tuple[float, ...]:
        """
        Critical values strictly inside ``(E-, E+)``, i.e. the van Hove energies of the saddles.
        """
        return tuple(v for v in self.critical_values if self.E_minus < v < self.E_plus)

    def index_counts(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for p in self.points:
            counts[p.index] = counts.get(p.index, 0) + 1
        return dict(sorted(counts.items()))

    def is_critical_value(self, energy: float, tol: float = 1e-9) -> bool:
        return any(abs(energy - v) <= tol for v in self.critical_values)

    def to_dict(self) -> dict[str, object]:
        return {
            "dimension": self.dimension,
            "E_minus": self.E_minus,
            "E_plus": self.E_plus,
            "critical_values": list(self.critical_values),
            "index_counts": {str(k): v for k, v in self.index_counts().items()},
            "points": [p.to_dict() for p in self.points],
        }


def default_seed_resolution(dimension: int) -> int:
    """
    >>> [default_seed_resolution(d) for d in (1, 3, 4, 5, 6)]
    [16, 16, 8, 8, 5]
    """
    if dimension <= 3:
        return 16
    if dimension <= 5:
        return 8
    return 5


def torus_distance(a: NDArray[np.float64], b: NDArray[np.float64]) -> NDArray[np.float64]:
    """
    Euclidean distance on ``T^d = R^d / 2 pi Z^d``, broadcasting over leading axes.

    >>> float(torus_distance(np.array([0.0]), np.array([2 * np.pi - 0.1])))  # doctest: +ELLIPSIS
    0.1000...
    """
    diff = np.mod(a - b + np.pi, 2 * np.pi) - np.pi
    return np.linalg.norm(diff, axis=-1)


def _newton(
    band: BandFunction, seeds: NDArray[np.float64], max_iter: int, max_step: float
) -> NDArray[np.float64]:
    k = seeds.copy()
    for _ in range(max_iter):
        _, grad, hess = band.jet(k)
        if np.all(np.linalg.norm(grad, axis=1) <= TOL_GRAD):
            break
        step = np.einsum("nij,nj->ni", np.linalg.pinv(hess), grad)
        norm = np.linalg.norm(step, axis=1, keepdims=True)
        step = np.where(norm > max_step, step * (max_step / np.maximum(norm, 1e-300)), step)
        k = k - step
    return np.mod(k, 2 * np.pi)


def find_critical_points(
    band: BandFunction,
    grid_resolution: int | None = None,
    *,
    max_iter: int = 60,
    max_step: float = 0.5,
) -> CriticalPointSet:
    """
    Locate all critical points by damped multi-start Newton iteration from a uniform seed grid.

    >>> cps = find_critical_points(BandFunction.laplacian(3))
    >>> len(cps.points), cps.E_minus, cps.E_plus
    (8, -6.0, 6.0)
    >>> cps.index_counts()
    {0: 1, 1: 3, 2: 3, 3: 1}

    :param band: the band.
    :param grid_resolution: seeds per axis, defaults to ``default_seed_resolution(d)``.
    :param max_iter: Newton iterations per seed.
    :param max_step: step length cap on the torus.
    :raises MorseViolation: if a critical point has a degenerate Hessian.
    :raises AssumptionViolation: unless there is exactly one minimum and one maximum.
    """
    d = band.dimension
    n = grid_resolution or default_seed_resolution(d)
    axis = 2 * np.pi * np.arange(n) / n
    seeds = np.array(list(itertools.product(axis, repeat=d)), dtype=float)
    limits = _newton(band, seeds, max_iter, max_step)
    _, grad, _ = band.jet(limits)
    converged = limits[np.linalg.norm(grad, axis=1) <= TOL_GRAD]
    logger.debug("Newton converged for %d of %d seeds", len(converged), len(seeds))

    found: list[NDArray[np.float64]] = []
    for k in converged:
        if found and np.min(torus_distance(np.array(found), k)) < DEDUP_RADIUS:
            continue
        found.append(k)
    if not found:
        raise MorseViolation("no critical point found", seeds=len(seeds))

    pts = np.array(found)
    pts[np.abs(pts - 2 * np.pi) < DEDUP_RADIUS] = 0.0
    values, _, hessians = band.jet(pts)
    points: list[CriticalPoint] = []
    for k, value, hess in zip(pts, values, hessians):
        sym = 0.5 * (hess + hess.T)
        det = float(np.linalg.det(sym))
        if abs(det) < TOL_HESS:
            raise MorseViolation(
                f"degenerate critical point at k={np.round(k, 6).tolist()}: |det E''| = {abs(det):.3e}",
                k=k.tolist(),
                det=det,
            )
        index = int(np.sum(np.linalg.eigvalsh(sym) < 0))
        points.append(CriticalPoint(k=k, value=float(value), hessian=sym, index=index))
    points.sort(key=lambda p: (p.value, p.index))

    minima = [p for p in points if p.index == 0]
    maxima = [p for p in points if p.index == d]
    if len(minima) != 1 or len(maxima) != 1:
        raise AssumptionViolation(
            f"band must have exactly one minimum and one maximum, found {len(minima)} and {len(maxima)}",
            minima=len(minima),
            maxima=len(maxima),
        )
    minimum, maximum = minima[0], maxima[0]
    if any(p.value < minimum.value for p in points) or any(
        p.value > maximum.value for p in points
    ):
        raise AssumptionViolation("extrema are not the global band edges")

    crit_values: list[float] = []
    for p in points:
        if not crit_values or p.value - crit_values[-1] > 1e-9:
            crit_values.append(p.value)
    logger.info(
        "band edges [%g, %g], %d critical points, critical values %s",
        minimum.value,
        maximum.value,
        len(points),
        crit_values,
    )
    return CriticalPointSet(
        dimension=d,
        points=tuple(points),
        minimum=minimum,
        maximum=maximum,
        critical_values=tuple(crit_values),
    )
