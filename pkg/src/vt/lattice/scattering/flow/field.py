#!/usr/bin/env python3
# coding=utf-8

"""
The rescaled gradient field ``X(k) = F(E(k)) grad E(k) / |grad E(k)|^2`` and its flow ``theta_b``.

Along the flow the energy obeys ``d/db E(theta_b(k)) = F(E(theta_b(k)))``, so ``theta_b`` maps the level set at
``f^{-1}(c)`` onto the level set at ``f^{-1}(c + b)``. Trajectories are integrated together with the divergence
integral ``int_0^b div X(theta_u(k)) du`` as one augmented system, which keeps the error control of both consistent.
"""

import logging
from collections.abc import Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import solve_ivp

from vt.lattice.scattering.band import (
    BandFunction,
    CriticalPointSet,
    RescaledEnergyMap,
    torus_distance,
)
from vt.lattice.scattering.error_specs import DomainError, NearSingularTrajectory
from vt.lattice.scattering.tolerances import DEFAULT_TOLERANCES

logger = logging.getLogger(__name__)

DEFAULT_CHUNK = 256
"Trajectories integrated together in one call of the ODE solver."


@dataclass(frozen=True)
class FlowSolution:
    """
    Trajectories of a batch of starting points sampled at common rescaled times.
    """

    b: NDArray[np.float64]
    "Sorted rescaled times, shape ``(nb,)``."
    points: NDArray[np.float64]
    "``theta_b(k)``, shape ``(nb, N, d)``; unreduced, i.e. continuous in ``b``."
    divergence: NDArray[np.float64]
    "``int_0^b div X(theta_u(k)) du``, shape ``(nb, N)``."
    valid: NDArray[np.bool_]
    "Trajectories that stayed clear of the saddles and kept the energy on track, shape ``(N,)``."

    @property
    def n_valid(self) -> int:
        return int(np.count_nonzero(self.valid))


class FlowField:
    """
    The vector field ``X`` of a band together with the integrator of its flow.

    Points closer than ``exclusion_radius`` to a saddle point are treated as lying on the invariant set of the
    saddles: ``flow_to`` refuses them and ``transport`` prunes them.

    >>> from vt.lattice.scattering.band import find_critical_points, rescale_maps
    >>> band = BandFunction.laplacian(3)
    >>> cps = find_critical_points(band)
    >>> field = FlowField(band, rescale_maps(cps), cps)
    >>> k = np.array([0.3, 1.1, 2.0])
    >>> end, _ = field.flow_to(k, 0.0)
    >>> bool(np.all(end == k))
    True
    """

    def __init__(
        self,
        band: BandFunction,
        rescale: RescaledEnergyMap,
        critical: CriticalPointSet,
        *,
        exclusion_radius: float = DEFAULT_TOLERANCES.exclusion_radius,
        rtol: float = DEFAULT_TOLERANCES.ode_rtol,
        atol: float = DEFAULT_TOLERANCES.ode_atol,
        energy_tol: float = DEFAULT_TOLERANCES.energy_residual,
    ):
        """
        :param band: the band.
        :param rescale: rescaled energy of the band.
        :param critical: critical points of the band.
        :param exclusion_radius: guard radius around saddle points.
        :param rtol: relative tolerance of the ODE solver.
        :param atol: absolute tolerance of the ODE solver.
        :param energy_tol: largest admissible energy drift along a trajectory, in units of the half band width.
        :raises DomainError: if the band and the critical points disagree on the dimension.
        """
        if band.dimension != critical.dimension:
            raise DomainError(
                f"band has dimension {band.dimension} but critical points have dimension {critical.dimension}"
            )
        self._band = band
        self._rescale = rescale
        self._critical = critical
        self._radius = float(exclusion_radius)
        self._rtol = float(rtol)
        self._atol = float(atol)
        self._energy_tol = float(energy_tol)
        self._k_min = np.asarray(critical.minimum.k, dtype=float)
        self._k_max = np.asarray(critical.maximum.k, dtype=float)
        saddles = [p.k for p in critical.saddles]
        self._saddles = (
            np.array(saddles, dtype=float)
            if saddles
            else np.empty((0, band.dimension))
        )

    @property
    def band(self) -> BandFunction:
        return self._band

    @property
    def rescale(self) -> RescaledEnergyMap:
        return self._rescale

    @property
    def critical(self) -> CriticalPointSet:
        return self._critical

    @property
    def dimension(self) -> int:
        return self._band.dimension

    @property
    def exclusion_radius(self) -> float:
        return self._radius

    def with_exclusion_radius(self, radius: float) -> "FlowField":
        return FlowField(
            self._band,
            self._rescale,
            self._critical,
            exclusion_radius=radius,
            rtol=self._rtol,
            atol=self._atol,
            energy_tol=self._energy_tol,
        )

    # region field evaluation
    def _local_jet(
        self, k: NDArray[np.float64]
    ) -> tuple[
        NDArray[np.float64],
        NDArray[np.float64],
        NDArray[np.float64],
        NDArray[np.float64],
    ]:
        # Gradient and edge gaps relative to the nearer extremum keep full relative accuracy near the band edges.
        ex_lo, g_lo, h_lo = self._band.jet_relative(k, self._k_min)
        ex_hi, g_hi, h_hi = self._band.jet_relative(k, self._k_max)
        gap_lo = np.maximum(ex_lo, 0.0)
        gap_hi = np.maximum(-ex_hi, 0.0)
        top = gap_hi < gap_lo
        grad = np.where(top[:, None], g_hi, g_lo)
        hess = np.where(top[:, None, None], h_hi, h_lo)
        return gap_lo, gap_hi, grad, hess

    def _field(
        self, k: NDArray[np.float64]
    ) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        d = self.dimension
        width = self._rescale.E_plus - self._rescale.E_minus
        gap_lo, gap_hi, grad, hess = self._local_jet(k)
        speed = 2.0 * gap_lo * gap_hi / width
        dspeed = 2.0 * (gap_hi - gap_lo) / width
        g2 = np.einsum("ni,ni->n", grad, grad)
        ghg = np.einsum("ni,nij,nj->n", grad, hess, grad)
        trace = np.einsum("nii->n", hess)
        regular = g2 > 0.0
        safe = np.where(regular, g2, 1.0)
        ratio = np.where(regular, speed / safe, 0.0)
        vector = ratio[:, None] * grad
        div = np.where(
            regular,
            dspeed + ratio * (trace - 2.0 * ghg / safe),
            0.5 * d * dspeed,
        )
        return vector, div

    def vector(self, k: ArrayLike) -> NDArray[np.float64]:
        """
        ``X(k)``, shape ``(..., d)``.

        >>> from vt.lattice.scattering.band import find_critical_points, rescale_maps
        >>> band = BandFunction.laplacian(3)
        >>> cps = find_critical_points(band)
        >>> field = FlowField(band, rescale_maps(cps), cps)
        >>> np.round(field.vector([np.pi / 2] * 3), 12)
        array([-1., -1., -1.])
        """
        pts = np.asarray(k, dtype=float)
        vec, _ = self._field(pts.reshape(-1, self.dimension))
        return vec.reshape(pts.shape)

    def divergence(self, k: ArrayLike) -> NDArray[np.float64]:
        """
        ``div X(k)``, shape ``(...)``. Close to a non degenerate extremum it tends to ``-+(2 + g(k))`` with ``g``
        homogeneous of degree zero, ``g = d - 2`` for an isotropic extremum.
        """
        pts = np.asarray(k, dtype=float)
        _, div = self._field(pts.reshape(-1, self.dimension))
        return div.reshape(pts.shape[:-1])

    def speed(self, k: ArrayLike) -> NDArray[np.float64]:
        """
        ``|X(k)|``.
        """
        return np.linalg.norm(self.vector(k), axis=-1)

    def saddle_distance(self, k: ArrayLike) -> NDArray[np.float64]:
        """
        Torus distance to the nearest saddle point, ``inf`` for a band without saddles.
        """
        pts = np.asarray(k, dtype=float)
        if not len(self._saddles):
            return np.full(pts.shape[:-1], np.inf)
        dist = torus_distance(pts[..., None, :], self._saddles)
        return dist.min(axis=-1)

    # endregion

    def _rhs(self, _b: float, y: NDArray[np.float64]) -> NDArray[np.float64]:
        d = self.dimension
        n = y.size // (d + 1)
        vec, div = self._field(y[: n * d].reshape(n, d))
        return np.concatenate([vec.ravel(), div])

    def flow_to(
        self, start: ArrayLike, b: float
    ) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """
        ``theta_b(start)`` and ``int_0^b div X(theta_u(start)) du``.

        ``start`` is a point of shape ``(d,)`` or a batch of shape ``(N, d)``; the batch is integrated as one system.

        :param start: starting point(s).
        :param b: rescaled time, negative values flow down in energy.
        :raises NearSingularTrajectory: if a trajectory starts or passes within ``exclusion_radius`` of a saddle, or
            if the integrator fails.
        """
        pts = np.asarray(start, dtype=float)
        single = pts.ndim == 1
        batch = pts.reshape(-1, self.dimension)
        if np.any(self.saddle_distance(batch) < self._radius):
            raise NearSingularTrajectory(
                f"starting point within {self._radius:g} of a saddle point",
                start=batch.tolist(),
            )
        if b == 0.0:
            end, integral = batch.copy(), np.zeros(len(batch))
        else:
            y0 = np.concatenate([batch.ravel(), np.zeros(len(batch))])

            def near_saddle(_b: float, y: NDArray[np.float64]) -> float:
                pos = y[: batch.size].reshape(batch.shape)
                return float(self.saddle_distance(pos).min() - self._radius)

            near_saddle.terminal = True  # type: ignore[attr-defined]
            near_saddle.direction = -1  # type: ignore[attr-defined]
            sol = solve_ivp(
                self._rhs,
                (0.0, float(b)),
                y0,
                method="DOP853",
                rtol=self._rtol,
                atol=self._atol,
                events=near_saddle if len(self._saddles) else None,
            )
            if sol.status == 1:
                raise NearSingularTrajectory(
                    f"trajectory came within {self._radius:g} of a saddle point at b={sol.t_events[0][0]:.6g}",
                    start=batch.tolist(),
                    b=float(b),
                )
            if sol.status != 0:
                raise NearSingularTrajectory(
                    f"flow integration failed: {sol.message}", start=batch.tolist(), b=float(b)
                )
            y_end = sol.y[:, -1]
            end = y_end[: batch.size].reshape(batch.shape)
            integral = y_end[batch.size :]
        if single:
            return end[0], integral[0]
        return end, integral

    def flow_to_energy(
        self, points: ArrayLike, energy: float, *, chunk_size: int = DEFAULT_CHUNK
    ) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.bool_]]:
        """
        Flow every point onto the level set at ``energy``, each over its own rescaled time
        ``f(energy) - f(E(k))``.

        The individual times are absorbed into the field (``dy/ds = tau_k X(y)`` for ``s`` in ``[0, 1]``), so a
        batch is still one system.

        :return: end points, divergence integrals along each path, validity mask.
        """
        batch = np.asarray(points, dtype=float).reshape(-1, self.dimension)
        target = float(self._rescale.f(energy))
        ends = np.empty_like(batch)
        integrals = np.empty(len(batch))
        valid = np.ones(len(batch), dtype=bool)
        for i in range(0, len(batch), chunk_size):
            chunk = batch[i : i + chunk_size]
            tau = target - self._rescale.f(self._band.evaluate(chunk))
            e, j, v = self._rescaled_leg(chunk, tau)
            ends[i : i + len(chunk)], integrals[i : i + len(chunk)], valid[i : i + len(chunk)] = e, j, v
        with np.errstate(invalid="ignore"):
            drift = np.abs(self._band.evaluate(ends) - energy)
            valid &= drift <= self._energy_tol * self._rescale.Delta
            valid &= self.saddle_distance(ends) >= self._radius
        return ends, integrals, valid

    def _rescaled_leg(
        self, chunk: NDArray[np.float64], tau: NDArray[np.float64]
    ) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.bool_]]:
        n, d = chunk.shape

        def rhs(_s: float, y: NDArray[np.float64]) -> NDArray[np.float64]:
            vec, div = self._field(y[: n * d].reshape(n, d))
            return np.concatenate([(tau[:, None] * vec).ravel(), tau * div])

        sol = solve_ivp(
            rhs,
            (0.0, 1.0),
            np.concatenate([chunk.ravel(), np.zeros(n)]),
            method="DOP853",
            rtol=self._rtol,
            atol=self._atol,
        )
        if sol.status == 0:
            y = sol.y[:, -1]
            return y[: n * d].reshape(n, d), y[n * d :], np.ones(n, dtype=bool)
        if n == 1:
            return np.full((1, d), np.nan), np.full(1, np.nan), np.zeros(1, dtype=bool)
        half = n // 2
        e1, j1, v1 = self._rescaled_leg(chunk[:half], tau[:half])
        e2, j2, v2 = self._rescaled_leg(chunk[half:], tau[half:])
        return np.concatenate([e1, e2]), np.concatenate([j1, j2]), np.concatenate([v1, v2])

    # region batch transport
    def _solve_leg(
        self, batch: NDArray[np.float64], times: NDArray[np.float64]
    ) -> tuple[NDArray[np.float64], NDArray[np.float64]] | None:
        """
        Integrate one batch to the given times, all of one sign and ordered away from zero. ``None`` on failure.
        """
        n, d = batch.shape
        y0 = np.concatenate([batch.ravel(), np.zeros(n)])
        sol = solve_ivp(
            self._rhs,
            (0.0, float(times[-1])),
            y0,
            method="DOP853",
            t_eval=times,
            rtol=self._rtol,
            atol=self._atol,
        )
        if sol.status != 0 or sol.y.shape[1] != len(times):
            return None
        pos = sol.y[: n * d].T.reshape(len(times), n, d)
        return pos, sol.y[n * d :].T

    def _transport_leg(
        self, batch: NDArray[np.float64], times: NDArray[np.float64]
    ) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.bool_]]:
        n, d = batch.shape
        if not len(times):
            return np.empty((0, n, d)), np.empty((0, n)), np.ones(n, dtype=bool)
        out = self._solve_leg(batch, times)
        if out is not None:
            return out[0], out[1], np.ones(n, dtype=bool)
        if n == 1:
            logger.debug("trajectory from %s failed, marked invalid", batch[0].tolist())
            return (
                np.full((len(times), 1, d), np.nan),
                np.full((len(times), 1), np.nan),
                np.zeros(1, dtype=bool),
            )
        half = n // 2
        p1, i1, v1 = self._transport_leg(batch[:half], times)
        p2, i2, v2 = self._transport_leg(batch[half:], times)
        return (
            np.concatenate([p1, p2], axis=1),
            np.concatenate([i1, i2], axis=1),
            np.concatenate([v1, v2]),
        )

    def _transport_chunk(
        self, batch: NDArray[np.float64], b_grid: NDArray[np.float64]
    ) -> FlowSolution:
        n, d = batch.shape
        pos = np.empty((len(b_grid), n, d))
        integ = np.empty((len(b_grid), n))
        valid = np.ones(n, dtype=bool)
        up = b_grid > 0.0
        down = b_grid < 0.0
        zero = ~(up | down)
        pos[zero] = batch
        integ[zero] = 0.0
        if np.any(up):
            p, i, v = self._transport_leg(batch, b_grid[up])
            pos[up], integ[up], valid = p, i, valid & v
        if np.any(down):
            idx = np.flatnonzero(down)[::-1]
            p, i, v = self._transport_leg(batch, b_grid[idx])
            pos[idx], integ[idx], valid = p, i, valid & v

        start_energy = self._band.evaluate(batch)
        offsets = self._rescale.f(start_energy)
        expected = self._rescale.f_inv(b_grid[:, None] + offsets[None, :])
        with np.errstate(invalid="ignore"):
            drift = np.abs(self._band.evaluate(pos) - expected).max(axis=0)
            clearance = self.saddle_distance(pos).min(axis=0)
            valid &= drift <= self._energy_tol * self._rescale.Delta
            valid &= clearance >= self._radius
            valid &= np.all(np.isfinite(integ), axis=0)
        return FlowSolution(b=b_grid, points=pos, divergence=integ, valid=valid)

    def iter_transport(
        self,
        points: ArrayLike,
        b_grid: ArrayLike,
        *,
        chunk_size: int = DEFAULT_CHUNK,
        workers: int = 1,
    ) -> Iterator[tuple[slice, FlowSolution]]:
        """
        Transport a large batch chunk by chunk, yielding ``(slice of the batch, solution of the chunk)`` in order.

        A chunk whose integration fails is split in halves until the failing trajectories are isolated; those are
        marked invalid together with trajectories that pass within ``exclusion_radius`` of a saddle at a sampled time
        or whose energy drifts.

        :param points: starting points, shape ``(N, d)``.
        :param b_grid: rescaled times, any order; ``0`` is allowed.
        :param chunk_size: trajectories per solver call.
        :param workers: chunks integrated concurrently; results are yielded in input order either way.
        """
        batch = np.asarray(points, dtype=float).reshape(-1, self.dimension)
        grid = np.sort(np.asarray(b_grid, dtype=float))
        slices = [
            slice(i, min(i + chunk_size, len(batch)))
            for i in range(0, len(batch), chunk_size)
        ]
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = pool.map(lambda s: self._transport_chunk(batch[s], grid), slices)
                for sl, res in zip(slices, results):
                    yield sl, res
        else:
            for sl in slices:
                yield sl, self._transport_chunk(batch[sl], grid)

    def transport(
        self,
        points: ArrayLike,
        b_grid: ArrayLike,
        *,
        chunk_size: int = DEFAULT_CHUNK,
        workers: int = 1,
    ) -> FlowSolution:
        """
        Transport a batch of points to every time of ``b_grid`` and collect the result.

        >>> from vt.lattice.scattering.band import find_critical_points, rescale_maps
        >>> band = BandFunction.laplacian(3)
        >>> cps = find_critical_points(band)
        >>> field = FlowField(band, rescale_maps(cps), cps)
        >>> sol = field.transport([[0.4, 1.3, 2.2]], [-1.0, 0.0, 1.0])
        >>> sol.points.shape, sol.n_valid
        ((3, 1, 3), 1)
        """
        parts = list(
            self.iter_transport(points, b_grid, chunk_size=chunk_size, workers=workers)
        )
        grid = np.sort(np.asarray(b_grid, dtype=float))
        if not parts:
            return FlowSolution(
                b=grid,
                points=np.empty((len(grid), 0, self.dimension)),
                divergence=np.empty((len(grid), 0)),
                valid=np.empty(0, dtype=bool),
            )
        sol = FlowSolution(
            b=grid,
            points=np.concatenate([p.points for _, p in parts], axis=1),
            divergence=np.concatenate([p.divergence for _, p in parts], axis=1),
            valid=np.concatenate([p.valid for _, p in parts]),
        )
        pruned = len(sol.valid) - sol.n_valid
        if pruned:
            logger.info("pruned %d of %d transported trajectories", pruned, len(sol.valid))
        return sol

    # endregion
