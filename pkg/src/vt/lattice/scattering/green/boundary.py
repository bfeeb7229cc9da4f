#!/usr/bin/env python3
# coding=utf-8

"""
Boundary values ``G(E -+ i0) = Re G(E) +- i pi rho(E)`` of the free Green function on a site set, obtained from the
spectral density by a Hilbert transform, and their power laws at the band edges.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from vt.lattice.scattering.band import CriticalPointSet
from vt.lattice.scattering.error_specs import AmbiguousBoundary, DomainError, ErrorMsgFormer
from vt.lattice.scattering.green.density import SpectralDensityMatrix, edge_constant
from vt.lattice.scattering.green.grid import extended_energies
from vt.lattice.scattering.green.hilbert import (
    cauchy_derivative,
    cauchy_integral,
    inverse_hilbert,
    principal_value,
    sqrt_edge_density,
)
from vt.lattice.scattering.tolerances import DEFAULT_TOLERANCES, Tolerances
from vt.lattice.scattering.warnings import EdgeFitWarning, OneSidedDifferenceWarning, vt_warn

logger = logging.getLogger(__name__)

EDGE_WINDOW = (1e-3, 1e-1)
"Distances from a band edge, in units of ``Delta``, over which the edge power law is fitted."


@dataclass(frozen=True)
class EdgeData:
    """
    Asymptotics at the lower (``sign = -1``) or upper band edge.
    """

    sign: int
    energy: float
    extremum: tuple[float, ...]
    vector: NDArray[np.complex128]
    "``v_n = |Lambda|^{-1/2} e^{-i n.k*}``."
    D: float
    "Analytic coefficient of ``Im G ~ D eps^{d/2 - 1} M``."
    exponent: float
    "Fitted exponent of ``<v| Im G |v>``."
    constant: float
    "Fitted coefficient, to be compared with ``D``."
    residual: float
    "Relative RMS residual of the fit."
    log_coefficient: float | None = None
    "``d = 4``: coefficient ``a`` of ``Re G(E) - Re G(E+-) ~ a eps ln(1/eps) + b eps``."
    slope: NDArray[np.complex128] | None = None
    "``d >= 5``: ``N+-`` of ``Re G(E) - Re G(E+-) ~ (E - E+-) N+-``."

    @property
    def projection(self) -> NDArray[np.complex128]:
        """
        ``M+- = |v><v|``.
        """
        return np.outer(self.vector, np.conj(self.vector))

    @property
    def expected_exponent(self) -> float:
        return 0.5 * len(self.extremum) - 1.0

    def to_dict(self) -> dict[str, object]:
        out: dict[str, object] = {
            "sign": self.sign,
            "energy": self.energy,
            "extremum": list(self.extremum),
            "D": self.D,
            "exponent": self.exponent,
            "expected_exponent": self.expected_exponent,
            "constant": self.constant,
            "constant_over_D": self.constant / self.D,
            "residual": self.residual,
        }
        if self.log_coefficient is not None:
            out["log_coefficient"] = self.log_coefficient
        if self.slope is not None:
            out["slope_real"] = self.slope.real.tolist()
            out["slope_imag"] = self.slope.imag.tolist()
        return out


class GreenBoundary:
    """
    Tables of ``Re G`` and ``Im G = pi rho`` on the grid of a spectral density, together with evaluation anywhere in
    the closed upper and lower half planes.

    ``side = -1`` selects ``E - i0``, where ``Im G`` is positive semi-definite; ``side = 1`` selects ``E + i0``.

    >>> from vt.lattice.scattering.green.hilbert import semicircle_density
    >>> e = np.linspace(-1.0, 1.0, 4001)
    >>> g = GreenBoundary(SpectralDensityMatrix(e, ((0,),), np.zeros((1, 1), dtype=int), np.zeros((1, 1), dtype=int),
    ...     semicircle_density(e)[:, None].astype(complex), -1.0, 1.0))
    >>> complex(np.round(g.boundary(0.5)[0, 0], 3))
    (1+1.732j)
    """

    def __init__(self, density: SpectralDensityMatrix, *, edges: dict[int, EdgeData] | None = None):
        self._density = density
        self._sqrt = density.dimension == 3
        self._re = principal_value(density.energies, density.values, density.energies, sqrt_edges=self._sqrt)
        self._edges = dict(edges or {})

    # region properties
    @property
    def density(self) -> SpectralDensityMatrix:
        return self._density

    @property
    def energies(self) -> NDArray[np.float64]:
        return self._density.energies

    @property
    def sites(self) -> tuple[tuple[int, ...], ...]:
        return self._density.sites

    @property
    def E_minus(self) -> float:
        return self._density.E_minus

    @property
    def E_plus(self) -> float:
        return self._density.E_plus

    @property
    def dimension(self) -> int:
        return self._density.dimension

    @property
    def edges(self) -> dict[int, EdgeData]:
        return dict(self._edges)

    @property
    def re_table(self) -> NDArray[np.complex128]:
        """
        ``Re G`` (the Hermitian part of ``G(E - i0)``) on the grid, shape ``(N, |Lambda|, |Lambda|)``.
        """
        return self._re[:, self._density.index]

    @property
    def im_table(self) -> NDArray[np.complex128]:
        """
        ``Im G = pi rho`` on the grid, shape ``(N, |Lambda|, |Lambda|)``.
        """
        return np.pi * self._density.rho

    # endregion

    def with_edges(self, edges: dict[int, EdgeData]) -> "GreenBoundary":
        other = object.__new__(GreenBoundary)
        other._density, other._re, other._edges = self._density, self._re, dict(edges)
        other._sqrt = self._sqrt
        return other

    def _matrices(self, per_delta: NDArray) -> NDArray[np.complex128]:
        return np.asarray(per_delta)[..., self._density.index]

    def _pv(self, energies: ArrayLike) -> NDArray[np.complex128]:
        return principal_value(self.energies, self._density.values, energies, sqrt_edges=self._sqrt)

    def _rho(self, energies: NDArray[np.float64]) -> NDArray[np.complex128]:
        e, v = self.energies, self._density.values
        if self._sqrt:
            return sqrt_edge_density(e, v, energies).astype(complex)
        return np.stack(
            [
                np.interp(energies, e, v[:, j].real, left=0.0, right=0.0)
                + 1j * np.interp(energies, e, v[:, j].imag, left=0.0, right=0.0)
                for j in range(v.shape[1])
            ],
            axis=-1,
        )

    def real_part(self, energies: ArrayLike) -> NDArray[np.complex128]:
        """
        ``Re G(E)`` at arbitrary real energies, shape ``(M, |Lambda|, |Lambda|)``.
        """
        es = np.atleast_1d(np.asarray(energies, dtype=float))
        return self._matrices(self._pv(es))

    def boundary(self, energy: float | ArrayLike, side: int = -1) -> NDArray[np.complex128]:
        """
        ``G(E - i0)`` (``side = -1``) or ``G(E + i0)`` (``side = 1``) at real energies.

        :return: shape ``(|Lambda|, |Lambda|)`` for a scalar energy, ``(M, |Lambda|, |Lambda|)`` otherwise.
        """
        if side not in (-1, 1):
            raise DomainError(ErrorMsgFormer.errmsg_for_choices(str(side), "side", [-1, 1]))
        es = np.atleast_1d(np.asarray(energy, dtype=float))
        self._require_finite(es)
        per_delta = self._pv(es) - side * 1j * np.pi * self._rho(es)
        out = self._matrices(per_delta)
        return out[0] if np.ndim(energy) == 0 else out

    def _require_finite(self, energies: NDArray[np.float64]) -> None:
        if self.dimension <= 2 and np.any((energies == self.E_minus) | (energies == self.E_plus)):
            raise DomainError(f"G diverges at the band edges in d = {self.dimension}")

    def green_at(self, z: complex, side: int | None = None) -> NDArray[np.complex128]:
        """
        ``G(z)`` off the real axis, at real energies outside the open band, and as a boundary value inside it.

        >>> from vt.lattice.scattering.green.hilbert import semicircle_density
        >>> e = np.linspace(-1.0, 1.0, 401)
        >>> g = GreenBoundary(SpectralDensityMatrix(e, ((0,),), np.zeros((1, 1), dtype=int), np.zeros((1, 1), dtype=int),
        ...     semicircle_density(e)[:, None].astype(complex), -1.0, 1.0))
        >>> try:
        ...     g.green_at(0.5)
        ... except AmbiguousBoundary as err:
        ...     print(err)
        E=0.5 lies inside the band; choose side=-1 (E - i0) or side=1 (E + i0)

        :param z: the spectral parameter.
        :param side: required for real ``z`` inside the open band.
        :raises AmbiguousBoundary: for real ``z`` inside the band without a side.
        """
        zc = complex(z)
        if zc.imag == 0.0:
            energy = zc.real
            if self.E_minus < energy < self.E_plus:
                if side is None:
                    raise AmbiguousBoundary(
                        f"E={energy} lies inside the band; choose side=-1 (E - i0) or side=1 (E + i0)",
                        energy=energy,
                    )
                return self.boundary(energy, side)
            self._require_finite(np.array([energy]))
            return self._matrices(self._pv([energy]))[0].astype(complex)
        return self._matrices(cauchy_integral(self.energies, self._density.values, [zc], sqrt_edges=self._sqrt))[0]

    def derivative(self, z: complex) -> NDArray[np.complex128]:
        """
        ``G'(z)`` off the real axis or at real energies outside the closed band.
        """
        zc = complex(z)
        if zc.imag == 0.0:
            if self.E_minus <= zc.real <= self.E_plus:
                raise DomainError(
                    f"E={zc.real} lies in the band; use boundary_derivative for boundary values",
                )
            arg: ArrayLike = [zc.real]
        else:
            arg = [zc]
        per_delta = cauchy_derivative(self.energies, self._density.values, arg, sqrt_edges=self._sqrt)
        return self._matrices(per_delta)[0].astype(complex)

    def boundary_derivative(self, energy: float, side: int = -1, *, step: float | None = None) -> NDArray[np.complex128]:
        """
        ``d/dE G(E -+ i0)`` by a central difference whose step is half the distance to the nearer grid neighbour.

        Within one step of a band edge or an interior critical value the difference is taken one-sided, away from
        the singular energy, with a :class:`OneSidedDifferenceWarning`.
        """
        e = self.energies
        if not self.E_minus < energy < self.E_plus:
            raise DomainError(ErrorMsgFormer.out_of_range("E", energy, self.E_minus, self.E_plus, inclusive=False))
        if step is None:
            # Nodes within rounding of the energy count as the energy itself.
            tol = 1e-12 * (self.E_plus - self.E_minus)
            j = int(np.clip(np.searchsorted(e, energy), 1, len(e) - 1))
            lo = e[j - 1] if energy - e[j - 1] > tol else e[max(j - 2, 0)]
            hi = e[j] if e[j] - energy > tol else e[min(j + 1, len(e) - 1)]
            step = 0.5 * min(energy - lo, hi - energy)
        singular = [self.E_minus, self.E_plus, *self._density.critical_values]
        below = [s for s in singular if energy - step <= s < energy]
        above = [s for s in singular if energy < s <= energy + step]
        if below or above or energy in singular:
            direction = 1.0 if below or energy in singular else -1.0
            vt_warn("one-sided difference for dG/dE", OneSidedDifferenceWarning, energy=energy)
            g0, g1, g2 = (self.boundary(energy + direction * i * step, side) for i in (0, 1, 2))
            return direction * (-3.0 * g0 + 4.0 * g1 - g2) / (2.0 * step)
        return (self.boundary(energy + step, side) - self.boundary(energy - step, side)) / (2.0 * step)

    def kramers_kronig(self, decades: int = 13, per_decade: int = 40) -> NDArray[np.complex128]:
        """
        The density recovered from ``Re G`` alone on the interior grid nodes, per difference vector. Agreement with
        the tabulated density checks the Hilbert transform.
        """
        d = self._density
        ext = extended_energies(d.energies, self.E_minus, self.E_plus, decades, per_decade)
        re_ext = principal_value(d.energies, d.values, ext, sqrt_edges=self._sqrt)
        mass = d.cumulative(np.array([d.energies[-1]]))[0]
        interior = (d.energies > self.E_minus) & (d.energies < self.E_plus)
        return inverse_hilbert(ext, re_ext, d.energies[interior], total_weight=mass)


def hilbert_transform(
    density: SpectralDensityMatrix,
    critical: CriticalPointSet | None = None,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> GreenBoundary:
    """
    Green boundary values from a spectral density; with ``critical`` given, the band edge asymptotics are fitted and
    attached.
    """
    green = GreenBoundary(density)
    logger.info("Hilbert transform on %d energies, %d difference vectors", len(density.energies), len(density.differences))
    if critical is None:
        return green
    return green.with_edges(edge_asymptotics(green, critical, tolerances=tolerances))


def edge_vector(sites: Sequence[Sequence[int]], extremum: ArrayLike) -> NDArray[np.complex128]:
    """
    ``v_n = |Lambda|^{-1/2} e^{-i n.k*}``.

    >>> (edge_vector([(0,), (1,)], [np.pi]) * np.sqrt(2)).real.round(12).tolist()
    [1.0, -1.0]
    """
    arr = np.asarray(sites, dtype=float)
    return np.exp(-1j * arr @ np.asarray(extremum, dtype=float)) / np.sqrt(len(arr))


def _fit_edge(
    eps: NDArray[np.float64], values: NDArray[np.float64], scale: float
) -> tuple[float, float, float]:
    """
    Least squares ``log s = log C + p log eps + c eps/scale``; returns ``(p, C, relative RMS residual)``.
    """
    basis = np.column_stack([np.ones_like(eps), np.log(eps), eps / scale])
    coef, *_ = np.linalg.lstsq(basis, np.log(values), rcond=None)
    model = np.exp(basis @ coef)
    residual = float(np.sqrt(np.mean(((values - model) / values) ** 2)))
    return float(coef[1]), float(np.exp(coef[0])), residual


def edge_asymptotics(
    green: GreenBoundary,
    critical: CriticalPointSet,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    window: tuple[float, float] = EDGE_WINDOW,
) -> dict[int, EdgeData]:
    """
    Fit ``<v| Im G(E -+ i0) |v> ~ C eps^p`` at both band edges and compare with the analytic
    ``D = 2^{d/2 - 1} pi |Lambda| |S^{d-1}| (2 pi)^{-d} |det E''|^{-1/2}``. In four dimensions the ``eps ln(1/eps)``
    coefficient of ``Re G`` is fitted as well, in five and more the linear slope ``N+-``.

    :param green: the Green boundary values.
    :param critical: critical points of the band.
    :param tolerances: ``edge_fit_residual`` above which an :class:`EdgeFitWarning` is issued.
    :param window: fitted distances from the edge, in units of ``Delta``.
    :raises DomainError: if the grid has fewer than four nodes in the window.
    """
    d = green.dimension
    delta = 0.5 * (green.E_plus - green.E_minus)
    e = green.energies
    out: dict[int, EdgeData] = {}
    for sign, point in ((-1, critical.minimum), (1, critical.maximum)):
        edge = point.value
        eps = sign * (edge - e)
        sel = (eps >= window[0] * delta * (1 - 1e-9)) & (eps <= window[1] * delta * (1 + 1e-9))
        if np.count_nonzero(sel) < 4:
            raise DomainError(f"only {int(np.count_nonzero(sel))} grid nodes within the fit window of the edge at {edge}")
        v = edge_vector(green.sites, point.k)
        im = green.im_table[sel]
        s = np.einsum("i,nij,j->n", np.conj(v), im, v).real
        good = s > 0
        exponent, constant, residual = _fit_edge(eps[sel][good], s[good], delta)
        D = edge_constant(point.hessian, len(green.sites))
        if residual > tolerances.edge_fit_residual:
            vt_warn(
                f"edge fit left a relative residual {residual:.3f}; refine the grid near the edge",
                EdgeFitWarning,
                energy=edge,
            )
        log_coefficient = None
        slope = None
        if d >= 4:
            re = green.re_table[sel] - green.real_part([edge])[0]
            x = eps[sel]
            if d == 4:
                t = np.einsum("i,nij,j->n", np.conj(v), re, v).real
                basis = np.column_stack([x * np.log(1.0 / (x / delta)), x])
                log_coefficient = float(np.linalg.lstsq(basis, t, rcond=None)[0][0])
            else:
                dx = (e[sel] - edge)[:, None]
                flat = re.reshape(len(x), -1)
                slope = np.linalg.lstsq(dx, flat, rcond=None)[0].reshape(re.shape[1:])
        logger.info(
            "edge %+d at E=%g: exponent %.4f (expected %.4f), C/D = %.4f, residual %.3g",
            sign, edge, exponent, 0.5 * d - 1, constant / D, residual,
        )
        out[sign] = EdgeData(
            sign=sign,
            energy=float(edge),
            extremum=tuple(float(x) for x in point.k),
            vector=v,
            D=float(D),
            exponent=exponent,
            constant=constant,
            residual=residual,
            log_coefficient=log_coefficient,
            slope=slope,
        )
    return out
