#!/usr/bin/env python3
# coding=utf-8

"""
Localised states ``psi_{m,b}(sigma) = (2 pi)^{-d/2} d_b(sigma) exp(i m.theta_b(sigma))`` on the reference surface and
their normalised limits at the band edges.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from vt.lattice.scattering.band import Site
from vt.lattice.scattering.error_specs import DomainError, ErrorMsgFormer, IsotropyViolation
from vt.lattice.scattering.flow.field import FlowField
from vt.lattice.scattering.flow.surface import SurfaceSample, project_to_level
from vt.lattice.scattering.tolerances import DEFAULT_TOLERANCES

logger = logging.getLogger(__name__)

type Sign = Literal[-1, 1]


@dataclass(frozen=True)
class TransportedState:
    """
    Values of ``psi_{m,b}`` at the nodes of a surface sample. Nodes whose trajectory was pruned are invalid and
    hold zero.
    """

    site: Site
    b: float
    values: NDArray[np.complex128]
    db_factors: NDArray[np.float64]
    points: NDArray[np.float64]
    "``theta_b(sigma)``."
    valid: NDArray[np.bool_]

    def inner(self, other: "TransportedState", sample: SurfaceSample) -> complex:
        """
        ``<self|other>`` by the surface quadrature of ``sample``.
        """
        mask = self.valid & other.valid
        w = sample.weights[mask]
        return complex(np.sum(w * np.conj(self.values[mask]) * other.values[mask]))

    def norm(self, sample: SurfaceSample) -> float:
        return float(np.sqrt(self.inner(self, sample).real))


def _check_b(b: float, b_max: float) -> None:
    if abs(b) > b_max:
        raise DomainError(ErrorMsgFormer.out_of_range("b", b, -b_max, b_max))


def localized_states(
    flow: FlowField,
    sample: SurfaceSample,
    sites: Sequence[Sequence[int]],
    b: float,
    *,
    b_max: float = DEFAULT_TOLERANCES.b_max,
) -> list[TransportedState]:
    """
    ``psi_{m,b}`` for several sites from one transport of the sample.

    :raises DomainError: for ``|b| > b_max``.
    """
    _check_b(b, b_max)
    d = flow.dimension
    sol = flow.transport(sample.points, [b])
    theta = sol.points[0]
    valid = sample.valid & sol.valid
    with np.errstate(invalid="ignore", over="ignore"):
        db = np.sqrt(np.exp(sol.divergence[0]) * sample.speed)
    db = np.where(valid, db, 0.0)
    theta = np.where(valid[:, None], theta, 0.0)
    norm = (2 * np.pi) ** (-d / 2)
    states = []
    for m in sites:
        site = tuple(int(x) for x in m)
        phase = np.exp(1j * (theta @ np.asarray(site, dtype=float)))
        states.append(
            TransportedState(
                site=site,
                b=float(b),
                values=np.where(valid, norm * db * phase, 0.0),
                db_factors=db,
                points=theta,
                valid=valid,
            )
        )
    return states


def localized_state(
    flow: FlowField,
    sample: SurfaceSample,
    m: Sequence[int],
    b: float,
    *,
    b_max: float = DEFAULT_TOLERANCES.b_max,
) -> TransportedState:
    """
    ``psi_{m,b}`` on the nodes of ``sample``.

    >>> from vt.lattice.scattering.band import BandFunction, find_critical_points, rescale_maps
    >>> from vt.lattice.scattering.flow.surface import sample_reference_surface
    >>> band = BandFunction.laplacian(2, hopping=0.5)
    >>> cps = find_critical_points(band)
    >>> flow = FlowField(band, rescale_maps(cps), cps)
    >>> sample = sample_reference_surface(flow, 200)
    >>> psi = localized_state(flow, sample, (0, 0), 0.0)
    >>> bool(np.allclose(psi.values[psi.valid], np.sqrt(sample.speed[psi.valid]) / (2 * np.pi)))
    True

    :param flow: the flow field.
    :param sample: nodes and weights on the reference surface.
    :param m: lattice site.
    :param b: rescaled energy.
    :param b_max: largest admissible ``|b|``.
    :raises DomainError: for ``|b| > b_max``.
    """
    return localized_states(flow, sample, [m], b, b_max=b_max)[0]


def gram_matrix(states: Sequence[TransportedState], sample: SurfaceSample) -> NDArray[np.complex128]:
    """
    ``<psi_n|psi_m>`` for all pairs, which equals ``(F(E)/pi) Im G(E - i0)`` on the sites.
    """
    n = len(states)
    out = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            out[i, j] = states[i].inner(states[j], sample)
    return out


def patch_db_factors(
    flow: FlowField, points: ArrayLike, b: float, *, step: float = 1e-5
) -> NDArray[np.float64]:
    """
    ``d_b(sigma)`` from the Jacobian of the flow on small surface patches,
    ``d_b^2 = |det theta_b'|_{T Sigma}| |X(theta_b(sigma))|``, independent of the divergence integral.

    :param flow: the flow field.
    :param points: surface points, shape ``(N, d)``.
    :param b: rescaled time.
    :param step: half width of the patches.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, flow.dimension)
    d = flow.dimension
    energy = flow.band.evaluate(pts)
    grad = flow.band.gradient(pts)
    normal = grad / np.linalg.norm(grad, axis=1, keepdims=True)
    # Tangent frames: left singular vectors of the tangent projector with singular value one.
    frames = np.linalg.svd(np.eye(d)[None] - normal[:, :, None] * normal[:, None, :])[0][:, :, : d - 1]
    columns = []
    for j in range(d - 1):
        offset = step * frames[:, :, j]
        plus = project_to_level(flow.band, pts + offset, energy)
        minus = project_to_level(flow.band, pts - offset, energy)
        end_plus, _ = flow.flow_to(plus, b)
        end_minus, _ = flow.flow_to(minus, b)
        columns.append((end_plus - end_minus) / (2 * step))
    jac = np.stack(columns, axis=2)
    det = np.sqrt(np.linalg.det(np.einsum("nim,nil->nml", jac, jac)))
    end, _ = flow.flow_to(pts, b)
    return np.sqrt(det * np.linalg.norm(flow.vector(end), axis=1))


@dataclass(frozen=True)
class LimitState:
    """
    The normalised edge limit ``psi_+`` (``sign = 1``) or ``psi_-`` of the localised states.
    """

    sign: int
    values: NDArray[np.float64]
    valid: NDArray[np.bool_]
    extremum: NDArray[np.float64]
    "``k*_+`` or ``k*_-``."
    b_stop: float
    "Rescaled time at which the exponent integral was truncated."

    def overlap(self, state: TransportedState, sample: SurfaceSample) -> float:
        """
        ``|<e^{i m.k*} psi_+- | psi_{m,b}>| / ||psi_{m,b}||``.
        """
        mask = self.valid & state.valid
        phase = np.exp(1j * (self.extremum @ np.asarray(state.site, dtype=float)))
        w = sample.weights[mask]
        inner = np.sum(w * np.conj(phase * self.values[mask]) * state.values[mask])
        return float(abs(inner) / state.norm(sample))


def check_isotropic(hessian: NDArray[np.float64], tol: float) -> float:
    """
    The scalar ``c`` with ``E'' = c Id`` within ``tol`` (relative).

    >>> check_isotropic(-2.0 * np.eye(3), 1e-8)
    -2.0
    >>> try:
    ...     check_isotropic(np.diag([1.0, 2.0]), 1e-8)
    ... except IsotropyViolation as e:
    ...     print(e)
    extremal Hessian is not a multiple of the identity (relative deviation 3.162e-01)
    """
    d = hessian.shape[0]
    scalar = float(np.trace(hessian)) / d
    deviation = float(np.linalg.norm(hessian - scalar * np.eye(d)) / np.linalg.norm(hessian))
    if deviation > tol:
        raise IsotropyViolation(
            f"extremal Hessian is not a multiple of the identity (relative deviation {deviation:.3e})",
            hessian=hessian.tolist(),
        )
    return scalar


def limit_state(
    flow: FlowField,
    sample: SurfaceSample,
    sign: Sign,
    *,
    tol_iso: float = DEFAULT_TOLERANCES.isotropy,
    threshold: float = 1e-10,
    u_cap: float = 40.0,
) -> LimitState:
    """
    ``psi_+-(sigma) = C exp(1/2 int_0^{+-inf} (div X(theta_u(sigma)) +- d) du) |X(sigma)|^{1/2}``, normalised on
    the sample.

    The integral is truncated at the first sampled ``|u|`` where ``|div X +- d|`` falls below ``threshold`` on every
    valid node.

    :param flow: the flow field.
    :param sample: nodes and weights on the reference surface.
    :param sign: ``+1`` for the upper edge, ``-1`` for the lower edge.
    :param tol_iso: isotropy tolerance of the extremal Hessian.
    :param threshold: truncation level of the integrand.
    :param u_cap: largest ``|u|`` integrated to.
    :raises IsotropyViolation: for an anisotropic extremum, where the normalised states do not converge.
    :raises DomainError: for a sign other than ``+-1``.
    """
    if sign not in (-1, 1):
        raise DomainError(ErrorMsgFormer.errmsg_for_choices(str(sign), "sign", [-1, 1]))
    extremum = flow.critical.maximum if sign == 1 else flow.critical.minimum
    check_isotropic(extremum.hessian, tol_iso)
    d = flow.dimension
    times = sign * np.arange(1.0, u_cap + 1.0)
    sol = flow.transport(sample.points, times)
    valid = sample.valid & sol.valid
    order = np.argsort(np.abs(sol.b))
    b_stop = float(sol.b[order[-1]])
    stop_row = order[-1]
    for row in order:
        integrand = flow.divergence(sol.points[row][valid]) + sign * d
        if np.all(np.abs(integrand) < threshold):
            b_stop, stop_row = float(sol.b[row]), row
            break
    else:
        logger.debug("limit state integrand still above %g at |u| = %g", threshold, u_cap)
    exponent = sol.divergence[stop_row] + sign * d * b_stop
    with np.errstate(invalid="ignore", over="ignore"):
        raw = np.exp(0.5 * exponent) * np.sqrt(sample.speed)
    raw = np.where(valid, raw, 0.0)
    norm = np.sqrt(np.sum(sample.weights[valid] * raw[valid] ** 2))
    logger.info("limit state %+d truncated at u=%g, %d valid nodes", sign, b_stop, int(valid.sum()))
    return LimitState(
        sign=int(sign),
        values=raw / norm,
        valid=valid,
        extremum=np.asarray(extremum.k, dtype=float),
        b_stop=b_stop,
    )
