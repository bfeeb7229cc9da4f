#!/usr/bin/env python3
# coding=utf-8

"""
Quadrature of the reference surface ``Sigma = {E(k) = E_r}``.

In dimensions two and three the band is sampled on a shifted grid, every cube is cut into Kuhn simplices and the
piecewise linear level set inside each simplex is triangulated. Quadrature nodes on the flat facets are pushed onto
the true surface by Newton steps along the gradient, and the area element of that projection is measured by central
differences, so the weights are those of the curved surface. In higher dimensions the surface measure is obtained by
stratified sampling of a thin energy shell, flowing every shell point onto ``Sigma``.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from functools import cache

import numpy as np
from numpy.typing import ArrayLike, NDArray

from vt.lattice.scattering.band import BandFunction, RescaledEnergyMap
from vt.lattice.scattering.error_specs import DomainError, SamplingFailure
from vt.lattice.scattering.flow.field import FlowField

logger = logging.getLogger(__name__)

_GOLDEN = 0.6180339887498949

# Degree 4 rule on the triangle, barycentric orbits (a, a, 1 - 2a).
_TRIANGLE_ORBITS = (
    (0.445948490915965, 0.223381589678011),
    (0.091576213509771, 0.109951743655322),
)


@dataclass(frozen=True)
class SurfaceSample:
    """
    Quadrature nodes ``sigma`` on a level set with weights for the Riemannian volume ``nu``.

    Pruned nodes keep their place (``valid`` is ``False``) and carry zero weight; the weights of the remaining nodes
    are rescaled so that the density of states ``sum w / |grad E|`` is unchanged.
    """

    energy: float
    points: NDArray[np.float64]
    weights: NDArray[np.float64]
    gradient_norm: NDArray[np.float64]
    speed: NDArray[np.float64]
    "``|X(sigma)|``."
    valid: NDArray[np.bool_]
    method: str
    raw_weights: NDArray[np.float64] = field(repr=False, default_factory=lambda: np.empty(0))

    def __len__(self) -> int:
        return len(self.points)

    @property
    def n_valid(self) -> int:
        return int(np.count_nonzero(self.valid))

    @property
    def dos_weights(self) -> NDArray[np.float64]:
        """
        Weights of ``nu / |grad E|``, the measure the coarea formula attaches to the level set.
        """
        return self.weights / self.gradient_norm

    def surface_area(self) -> float:
        return float(self.weights.sum())

    def density_of_states(self) -> float:
        """
        ``(2 pi)^{-d} int nu / |grad E|``, the density of states per site at the sample energy.
        """
        d = self.points.shape[1]
        return float(self.dos_weights.sum() / (2 * np.pi) ** d)

    def only_valid(self) -> "SurfaceSample":
        keep = self.valid
        return replace(
            self,
            points=self.points[keep],
            weights=self.weights[keep],
            gradient_norm=self.gradient_norm[keep],
            speed=self.speed[keep],
            valid=self.valid[keep],
            raw_weights=self.raw_weights[keep] if len(self.raw_weights) else self.raw_weights,
        )


def transport_dos_weights(
    dos_weights: ArrayLike,
    divergence_integral: ArrayLike,
    b: ArrayLike,
    rescale: RescaledEnergyMap,
    b_from: float = 0.0,
) -> NDArray[np.float64]:
    """
    Carry ``nu / |grad E|`` weights from the level set at ``f^{-1}(b_from)`` to the level set at ``f^{-1}(b)``:
    ``mu_b = mu exp(int div X) F(E_from) / F(E_b)``.

    >>> rescale = RescaledEnergyMap(-6.0, 6.0)
    >>> float(transport_dos_weights([1.0], [0.0], 0.0, rescale)[0])
    1.0

    :param dos_weights: weights on the starting level set, shape ``(N,)``.
    :param divergence_integral: ``int_0^{b - b_from} div X`` along each trajectory, shape ``(..., N)``.
    :param b: target rescaled energies, broadcasting against the leading axes of ``divergence_integral``.
    :param rescale: the rescaled energy map.
    :param b_from: rescaled energy of the starting level set.
    """
    mu = np.asarray(dos_weights, dtype=float)
    integral = np.asarray(divergence_integral, dtype=float)
    target = np.asarray(rescale.F_of_b(b), dtype=float)
    if target.ndim:
        target = target.reshape(target.shape + (1,) * (integral.ndim - target.ndim))
    return mu * np.exp(integral) * rescale.F_of_b(b_from) / target


def project_to_level(
    band: BandFunction,
    points: ArrayLike,
    energy: float | NDArray[np.float64],
    *,
    max_iter: int = 16,
    tol: float = 1e-15,
) -> NDArray[np.float64]:
    """
    Newton steps ``k <- k - (E(k) - energy) grad E / |grad E|^2`` until the level set is reached.

    >>> band = BandFunction.laplacian(3)
    >>> k = project_to_level(band, [[0.4, 1.7, 1.3]], 0.0)
    >>> abs(float(band.evaluate(k)[0])) < 1e-12
    True
    """
    k = np.array(points, dtype=float, copy=True)
    scale = np.maximum(1.0, np.abs(energy))
    for _ in range(max_iter):
        residual = band.evaluate(k) - energy
        if np.all(np.abs(residual) <= tol * scale):
            break
        grad = band.gradient(k)
        g2 = np.einsum("...i,...i->...", grad, grad)
        k = k - (residual / np.where(g2 > 0.0, g2, 1.0))[..., None] * grad
    return k


# region triangulated level sets
@cache
def kuhn_simplices(d: int) -> tuple[NDArray[np.int64], ...]:
    out = []
    for perm in itertools.permutations(range(d)):
        vertex = np.zeros(d, dtype=np.int64)
        verts = [vertex.copy()]
        for axis in perm:
            vertex[axis] += 1
            verts.append(vertex.copy())
        out.append(np.array(verts))
    return tuple(out)


@cache
def _staircase(k: int, d: int) -> tuple[tuple[tuple[int, int], ...], ...]:
    """
    Triangulation of the product of a ``(k-1)``- and a ``(d-k)``-simplex by monotone lattice paths.

    The level set of a linear function inside a ``d``-simplex with ``k`` vertices below the level is such a
    product; vertex ``(a, b)`` is the crossing on the edge from the ``a``-th low to the ``b``-th high vertex.

    >>> _staircase(2, 3)
    (((0, 0), (1, 0), (1, 1)), ((0, 0), (0, 1), (1, 1)))
    """
    paths = []
    for ups in itertools.combinations(range(d - 1), k - 1):
        a = b = 0
        path = [(0, 0)]
        for step in range(d - 1):
            if step in ups:
                a += 1
            else:
                b += 1
            path.append((a, b))
        paths.append(tuple(path))
    return tuple(paths)


def _facet_rule(d: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """
    Barycentric nodes and weights (summing to one) on a ``(d-1)``-simplex.
    """
    if d == 2:
        t, w = np.polynomial.legendre.leggauss(3)
        bary = np.stack([0.5 * (1 - t), 0.5 * (1 + t)], axis=1)
        return bary, 0.5 * w
    if d == 3:
        nodes, weights = [], []
        for a, w in _TRIANGLE_ORBITS:
            for j in range(3):
                node = [a, a, a]
                node[j] = 1.0 - 2.0 * a
                nodes.append(node)
                weights.append(w)
        return np.array(nodes), np.array(weights)
    raise DomainError(f"triangulated level sets are built for d = 2 and 3, not d = {d}")


def grid_shift(d: int) -> NDArray[np.float64]:
    """
    Fractional grid offsets, irrational so that no grid line meets a symmetry plane ``k_j in {0, pi}``.
    """
    return np.array([(0.1 + _GOLDEN * (j + 1)) % 1.0 for j in range(d)])


def level_set_facets(band: BandFunction, energy: float, n: int) -> NDArray[np.float64]:
    """
    Flat ``(d-1)``-simplices of the piecewise linear level set on an ``n^d`` grid, shape ``(T, d, d)``.
    """
    d = band.dimension
    h = 2 * np.pi / n
    shift = grid_shift(d)
    axes = [h * (np.arange(n) + shift[j]) for j in range(d)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    values = band.evaluate(grid) - energy
    base = np.stack(
        np.meshgrid(*[np.arange(n)] * d, indexing="ij"), axis=-1
    ).reshape(-1, d)
    facets: list[NDArray[np.float64]] = []
    for simplex in kuhn_simplices(d):
        idx = (base[:, None, :] + simplex[None]) % n
        s = values[tuple(idx[..., j] for j in range(d))]
        coords = (base[:, None, :] + simplex[None] + shift) * h
        low = s < 0.0
        cut = np.any(low, axis=1) & ~np.all(low, axis=1)
        if not np.any(cut):
            continue
        s, coords, low = s[cut], coords[cut], low[cut]
        codes = low @ (1 << np.arange(d + 1))
        for code in np.unique(codes):
            sel = codes == code
            lows = [i for i in range(d + 1) if (code >> i) & 1]
            highs = [i for i in range(d + 1) if not (code >> i) & 1]
            sv, cv = s[sel], coords[sel]
            cross = {}
            for a, i in enumerate(lows):
                for b, j in enumerate(highs):
                    t = sv[:, i] / (sv[:, i] - sv[:, j])
                    cross[(a, b)] = cv[:, i] + t[:, None] * (cv[:, j] - cv[:, i])
            for path in _staircase(len(lows), d):
                facets.append(np.stack([cross[p] for p in path], axis=1))
    if not facets:
        return np.empty((0, d, d))
    return np.concatenate(facets)


def _triangulated_nodes(
    band: BandFunction, energy: float, n: int, fd_step: float
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    d = band.dimension
    facets = level_set_facets(band, energy, n)
    if not len(facets):
        return np.empty((0, d)), np.empty(0)
    bary, rule = _facet_rule(d)
    flat = np.einsum("qv,tvj->tqj", bary, facets).reshape(-1, d)
    edges = facets[:, 1:] - facets[:, :1]
    lengths = np.linalg.norm(edges, axis=2)
    keep_facet = np.all(lengths > 0.0, axis=1)
    units = edges / np.where(lengths > 0.0, lengths, 1.0)[..., None]
    units = np.repeat(units, len(rule), axis=0)
    lengths = np.repeat(lengths, len(rule), axis=0)

    nodes = project_to_level(band, flat, energy)
    columns = []
    for m in range(d - 1):
        plus = project_to_level(band, flat + fd_step * units[:, m], energy)
        minus = project_to_level(band, flat - fd_step * units[:, m], energy)
        columns.append((plus - minus) / (2 * fd_step) * lengths[:, m : m + 1])
    jac = np.stack(columns, axis=2)
    gram = np.einsum("nim,nil->nml", jac, jac)
    area = np.sqrt(np.maximum(np.linalg.det(gram), 0.0)) / math.factorial(d - 1)
    weights = np.tile(rule, len(facets)) * area
    weights[~np.repeat(keep_facet, len(rule))] = 0.0
    return nodes, weights


# endregion


def _shell_nodes(
    flow: FlowField, energy: float, n_target: int, seed: int
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    band, rescale = flow.band, flow.rescale
    d = band.dimension
    rng = np.random.default_rng(seed)
    gaps = [energy - rescale.E_minus, rescale.E_plus - energy]
    gaps += [abs(energy - c) for c in flow.critical.interior_values]
    eta = min(0.05 * rescale.Delta, 0.5 * min(gaps))

    pilot = rng.uniform(0.0, 2 * np.pi, size=(4096, d))
    hit = np.count_nonzero(np.abs(band.evaluate(pilot) - energy) < eta) / len(pilot)
    n_axis = math.ceil((1.5 * n_target / max(hit, 1e-4)) ** (1.0 / d))
    h = 2 * np.pi / n_axis
    logger.debug("shell sampler: eta=%g, %d cells per axis", eta, n_axis)

    kept: list[NDArray[np.float64]] = []
    inner = np.stack(
        np.meshgrid(*[np.arange(n_axis)] * (d - 1), indexing="ij"), axis=-1
    ).reshape(-1, d - 1)
    for i0 in range(n_axis):
        cells = np.column_stack([np.full(len(inner), i0), inner])
        pts = (cells + rng.uniform(size=cells.shape)) * h
        in_shell = np.abs(band.evaluate(pts) - energy) < eta
        kept.append(pts[in_shell])
    shell = np.concatenate(kept)

    ends, integral, valid = flow.flow_to_energy(shell, energy)
    ends, integral = ends[valid], integral[valid]
    ends = project_to_level(band, ends, energy)
    width_b = float(rescale.f(energy + eta) - rescale.f(energy - eta))
    speed = np.linalg.norm(flow.vector(ends), axis=1)
    weights = h**d * np.exp(integral) / (width_b * speed)
    return ends, weights


def sample_reference_surface(
    flow: FlowField,
    n_target: int,
    *,
    energy: float | None = None,
    method: str = "auto",
    seed: int = 0,
    prune: bool = True,
    fd_step: float = 1e-6,
    max_refinements: int = 4,
) -> SurfaceSample:
    """
    Quadrature of a level set, by default the reference surface ``E = E_r``.

    >>> from vt.lattice.scattering.band import find_critical_points, rescale_maps
    >>> band = BandFunction.laplacian(2, hopping=0.5)
    >>> cps = find_critical_points(band)
    >>> sample = sample_reference_surface(FlowField(band, rescale_maps(cps), cps), 200)
    >>> sample.n_valid >= 100, float(np.abs(band.evaluate(sample.points) - sample.energy).max()) < 1e-10
    (True, True)

    :param flow: the flow field of the band.
    :param n_target: least number of nodes wanted.
    :param energy: level, the reference energy of ``flow.rescale`` if ``None``.
    :param method: ``"triangulation"`` (``d`` = 2, 3), ``"shell"`` (any ``d`` >= 2) or ``"auto"``.
    :param seed: seed of the shell sampler.
    :param prune: drop nodes whose trajectory meets a saddle point within ``flow.exclusion_radius``.
    :param fd_step: step of the central differences measuring the area element.
    :param max_refinements: grid refinements tried to reach ``n_target``.
    :raises DomainError: for ``d < 2`` or an energy outside the band.
    :raises SamplingFailure: if fewer than ``n_target / 2`` nodes survive.
    """
    band = flow.band
    d = band.dimension
    level = flow.rescale.E_r if energy is None else float(energy)
    if d < 2:
        raise DomainError(f"level set quadrature needs d >= 2, got d = {d}")
    if not flow.rescale.E_minus < level < flow.rescale.E_plus:
        raise DomainError(
            f"level {level} lies outside ({flow.rescale.E_minus}, {flow.rescale.E_plus})"
        )
    chosen = ("triangulation" if d <= 3 else "shell") if method == "auto" else method

    if chosen == "triangulation":
        n = 8 if d == 3 else 32
        for _ in range(max_refinements + 1):
            nodes, weights = _triangulated_nodes(band, level, n, fd_step)
            if len(nodes) >= n_target:
                break
            ratio = n_target / max(len(nodes), 1)
            n = math.ceil(n * 1.05 * ratio ** (1.0 / (d - 1)))
    elif chosen == "shell":
        nodes, weights = _shell_nodes(flow, level, n_target, seed)
    else:
        raise DomainError(f"unknown surface sampling method {method!r}")

    nodes = np.mod(nodes, 2 * np.pi)
    grad_norm = np.linalg.norm(band.gradient(nodes), axis=1)
    speed = np.linalg.norm(flow.vector(nodes), axis=1)
    valid = (weights > 0.0) & (np.abs(band.evaluate(nodes) - level) <= 1e-10 * max(1.0, abs(level)))
    if prune and flow.critical.interior_values:
        b0 = float(flow.rescale.f(level))
        stops = [float(flow.rescale.f(c)) - b0 for c in flow.critical.interior_values]
        valid &= flow.transport(nodes, stops).valid

    raw = weights.copy()
    before = float(np.sum(raw / grad_norm))
    kept = float(np.sum(raw[valid] / grad_norm[valid]))
    scaled = np.where(valid, raw * (before / kept if kept > 0 else 0.0), 0.0)
    logger.info(
        "sampled %d nodes on E=%g by %s, %d pruned", len(nodes), level, chosen, len(nodes) - int(valid.sum())
    )
    if np.count_nonzero(valid) < n_target / 2:
        raise SamplingFailure(
            f"only {int(np.count_nonzero(valid))} valid surface nodes, {n_target} wanted",
            energy=level,
            method=chosen,
        )
    return SurfaceSample(
        energy=level,
        points=nodes,
        weights=scaled,
        gradient_norm=grad_norm,
        speed=speed,
        valid=valid,
        method=chosen,
        raw_weights=raw,
    )
