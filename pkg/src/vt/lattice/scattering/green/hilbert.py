#!/usr/bin/env python3
# coding=utf-8

"""
Cauchy integrals of tabulated densities.

A density given at sorted knots ``e_0 < ... < e_{N-1}`` is read as its piecewise linear interpolant, zero outside
``[e_0, e_{N-1}]``. On every interval the interpolant is integrated against ``1/(z - e)`` in closed form, which is
singularity subtraction done analytically: the linear part ``rho(z) + rho'(e - z)`` is split off, its logarithm is
exact and the remainder is a constant. Summed over intervals,

``int rho(e)/(z - e) de = sum_k dq_k (z - e_k) L(z - e_k) + r_0 L(z - e_0) - r_{N-1} L(z - e_{N-1}) - (r_{N-1} - r_0)``

with ``dq_k`` the jump of the slope at ``e_k`` and ``L = Log`` off the axis, ``L = ln|.|`` on it (principal value).
The terms with ``z = e_k`` vanish unless ``k`` is an end knot carrying a non-zero value, where the integral has a
genuine logarithmic singularity.
"""

import logging

import numpy as np
from numpy.typing import ArrayLike, NDArray

from vt.lattice.scattering.error_specs import DomainError

logger = logging.getLogger(__name__)

BLOCK = 512
"Evaluation points per kernel block."


type EdgeCoefficients = tuple[NDArray, NDArray]


def _check(knots: ArrayLike, values: ArrayLike) -> tuple[NDArray[np.float64], NDArray]:
    e = np.asarray(knots, dtype=float)
    r = np.asarray(values)
    if e.ndim != 1 or len(e) < 2:
        raise DomainError(f"need at least two knots, got shape {e.shape}")
    if r.shape[0] != len(e):
        raise DomainError(f"{r.shape[0]} values for {len(e)} knots")
    if np.any(np.diff(e) <= 0.0):
        raise DomainError("knots must be strictly increasing")
    return e, r.reshape(len(e), -1)


def _prepare(
    knots: ArrayLike, values: ArrayLike, sqrt_edges: bool = False
) -> tuple[NDArray[np.float64], NDArray, NDArray, EdgeCoefficients | None]:
    e, r2 = _check(knots, values)
    coefficients = None
    if sqrt_edges:
        coefficients = _edge_coefficients(e, r2)
        r2 = r2 - _edge_profile(e, *coefficients, e)
    slopes = np.diff(r2, axis=0) / np.diff(e)[:, None]
    zero = np.zeros((1, r2.shape[1]), dtype=slopes.dtype)
    jumps = np.diff(np.concatenate([zero, slopes, zero]), axis=0)
    return e, r2, jumps, coefficients


# region square root edges


def _edge_coefficients(e: NDArray[np.float64], r: NDArray) -> EdgeCoefficients:
    width = e[-1] - e[0]
    zero = np.zeros(r.shape[1], dtype=r.dtype)
    if len(e) < 3:
        return zero, zero
    s_lo, s_hi = e[1] - e[0], e[-1] - e[-2]
    shape_lo = np.sqrt(s_lo) * (width - s_lo) / width
    shape_hi = np.sqrt(s_hi) * (width - s_hi) / width
    tiny = 1e-12 * max(float(np.max(np.abs(r))), 1e-300)
    # only an end where the density vanishes follows the square root law
    c_lo = np.where(np.abs(r[0]) <= tiny, r[1] / shape_lo, zero)
    c_hi = np.where(np.abs(r[-1]) <= tiny, r[-2] / shape_hi, zero)
    return c_lo, c_hi


def _edge_profile(e: NDArray[np.float64], c_lo: NDArray, c_hi: NDArray, energies: ArrayLike) -> NDArray:
    """
    ``q(E) = c_lo sqrt(E - e_0) (e_end - E) / W + c_hi sqrt(e_end - E) (E - e_0) / W``, zero off ``[e_0, e_end]``.
    """
    x = np.asarray(energies, dtype=float)
    lo, hi = e[0], e[-1]
    width = hi - lo
    inside = (x >= lo) & (x <= hi)
    below = np.sqrt(np.clip(x - lo, 0.0, None)) * np.clip(hi - x, 0.0, None) / width
    above = np.sqrt(np.clip(hi - x, 0.0, None)) * np.clip(x - lo, 0.0, None) / width
    return np.where(inside[:, None], below[:, None] * c_lo[None, :] + above[:, None] * c_hi[None, :], 0.0)


def _sqrt_kernel(w: NDArray, width: float, on_axis: bool, *, derivative: bool = False) -> NDArray:
    """
    ``F(w) = int_0^W sqrt(s) / (w + s) ds`` (principal value for real ``w < 0``), or ``F'(w)``.

    >>> w = np.array([0.5, -0.25, 0.0])
    >>> bool(np.allclose(_sqrt_kernel(w, 1.0, True)[:2], [2 - 2 * np.sqrt(0.5) * np.arctan(np.sqrt(2.0)),
    ...     2 + 0.5 * np.log(1 / 3)]))
    True
    >>> float(_sqrt_kernel(w, 1.0, True)[2])
    2.0
    """
    root = np.sqrt(width)
    if not on_axis:
        sw = np.sqrt(np.asarray(w, dtype=complex))
        atan = np.arctan(root / sw)
        if derivative:
            return root / (w + width) - atan / sw
        return 2.0 * root - 2.0 * sw * atan
    w = np.asarray(w, dtype=float)
    out = np.full(w.shape, np.nan if derivative else 2.0 * root)
    pos, neg = w > 0.0, w < 0.0
    sw = np.sqrt(w[pos])
    a = np.sqrt(-w[neg])
    with np.errstate(divide="ignore"):
        log = np.log(np.abs((root - a) / (root + a)))
    if derivative:
        with np.errstate(divide="ignore"):
            out[pos] = root / (w[pos] + width) - np.arctan(root / sw) / sw
            out[neg] = root / (w[neg] + width) - log / (2.0 * a)
    else:
        out[pos] = 2.0 * root - 2.0 * sw * np.arctan(root / sw)
        out[neg] = 2.0 * root + a * log
    return out


def _edge_integral(
    e: NDArray[np.float64], coefficients: EdgeCoefficients, z: NDArray, on_axis: bool, *, derivative: bool = False
) -> NDArray:
    """
    ``int q(e) / (z - e) de`` of :func:`_edge_profile` in closed form, or its ``z`` derivative.
    """
    c_lo, c_hi = coefficients
    lo, hi = e[0], e[-1]
    width = hi - lo
    head = (2.0 / 3.0) * width**1.5
    f_hi = _sqrt_kernel(z - hi, width, on_axis)
    f_lo = _sqrt_kernel(lo - z, width, on_axis)
    with np.errstate(invalid="ignore"):
        if derivative:
            upper = f_hi + (z - lo) * _sqrt_kernel(z - hi, width, on_axis, derivative=True)
            lower = f_lo + (hi - z) * _sqrt_kernel(lo - z, width, on_axis, derivative=True)
        else:
            # (z - lo) F(z - hi) and (hi - z) F(lo - z) tend to zero at the opposite edge
            upper = np.where(z == lo, -head, (z - lo) * f_hi - head)
            lower = -np.where(z == hi, -head, (hi - z) * f_lo - head)
    return (upper[:, None] * c_hi[None, :] + lower[:, None] * c_lo[None, :]) / width


def sqrt_edge_density(knots: ArrayLike, values: ArrayLike, energies: ArrayLike) -> NDArray:
    """
    The density read with square root edges, as :func:`cauchy_integral` with ``sqrt_edges`` reads it: the edge model
    plus the piecewise linear interpolant of what remains.

    >>> e = np.linspace(-1.0, 1.0, 5)
    >>> rho = semicircle_density(e)
    >>> x = np.array([0.999, 0.0])
    >>> bool(np.allclose(sqrt_edge_density(e, rho, x)[:, 0], semicircle_density(x), atol=0.02))
    True
    """
    e, r = _check(knots, values)
    coefficients = _edge_coefficients(e, r)
    rest = r - _edge_profile(e, *coefficients, e)
    x = np.asarray(energies, dtype=float)
    linear = np.stack(
        [np.interp(x, e, rest[:, j].real, left=0.0, right=0.0) for j in range(rest.shape[1])], axis=-1
    ).astype(rest.dtype)
    if np.iscomplexobj(rest):
        linear = linear + 1j * np.stack(
            [np.interp(x, e, rest[:, j].imag, left=0.0, right=0.0) for j in range(rest.shape[1])], axis=-1
        )
    return linear + _edge_profile(e, *coefficients, x)


# endregion


def _log(x: NDArray, on_axis: bool) -> NDArray:
    with np.errstate(divide="ignore"):
        return np.log(np.abs(x)) if on_axis else np.log(x)


def _xlog(x: NDArray, on_axis: bool) -> NDArray:
    out = np.zeros_like(x)
    nz = x != 0
    out[nz] = x[nz] * _log(x[nz], on_axis)
    return out


def _end_term(kernel: NDArray, value: NDArray) -> NDArray:
    # A vanishing end value contributes nothing, even where the kernel is infinite.
    with np.errstate(invalid="ignore"):
        return np.where(value != 0, kernel * value, 0.0)


def cauchy_integral(knots: ArrayLike, values: ArrayLike, z: ArrayLike, *, sqrt_edges: bool = False) -> NDArray:
    """
    ``int rho(e)/(z - e) de`` of the piecewise linear density, principal value for real ``z``.

    >>> e = np.linspace(-1.0, 1.0, 3)
    >>> complex(cauchy_integral(e, [0.0, 1.0, 0.0], 2.0j)[0]).imag < 0
    True
    >>> round(float(cauchy_integral(e, [0.0, 1.0, 0.0], 0.0)[0].real), 12)
    0.0

    :param knots: sorted energies, shape ``(N,)``.
    :param values: density at the knots, shape ``(N, ...)``, real or complex.
    :param z: evaluation points, shape ``(M,)``.
    :param sqrt_edges: read the density near an end knot where it vanishes as ``c sqrt|e - e_end|`` instead of
        linearly, see :func:`sqrt_edge_density`.
    :return: shape ``(M, ...)``.
    """
    e, r, jumps, coefficients = _prepare(knots, values, sqrt_edges)
    zs = np.atleast_1d(np.asarray(z))
    trailing = np.asarray(values).shape[1:]
    on_axis = not np.iscomplexobj(zs) or bool(np.all(zs.imag == 0.0))
    if on_axis:
        zs = zs.real.astype(float)
    elif np.any(zs.imag == 0.0):
        # Mixed input: split so each part uses its own logarithm.
        real = zs.imag == 0.0
        out = np.empty((len(zs),) + trailing, dtype=complex)
        out[real] = cauchy_integral(knots, values, zs[real].real, sqrt_edges=sqrt_edges)
        out[~real] = cauchy_integral(knots, values, zs[~real], sqrt_edges=sqrt_edges)
        return out
    rows = []
    for start in range(0, len(zs), BLOCK):
        block = zs[start : start + BLOCK]
        x = block[:, None] - e[None, :]
        val = _xlog(x, on_axis) @ jumps
        val = val + _end_term(_log(x[:, :1], on_axis), r[0]) - _end_term(_log(x[:, -1:], on_axis), r[-1])
        if coefficients is not None:
            val = val + _edge_integral(e, coefficients, block, on_axis)
        rows.append(val - (r[-1] - r[0]))
    return np.concatenate(rows).reshape((len(zs),) + trailing)


def principal_value(
    knots: ArrayLike, values: ArrayLike, energies: ArrayLike, *, sqrt_edges: bool = False
) -> NDArray:
    """
    ``PV int rho(e)/(E - e) de`` at real energies.

    >>> e = np.linspace(-1.0, 1.0, 2001)
    >>> rho = semicircle_density(e)
    >>> float(abs(principal_value(e, rho, [0.5])[0] - 1.0)) < 1e-3
    True
    """
    return cauchy_integral(knots, values, np.asarray(energies, dtype=float), sqrt_edges=sqrt_edges)


def cauchy_derivative(knots: ArrayLike, values: ArrayLike, z: ArrayLike, *, sqrt_edges: bool = False) -> NDArray:
    """
    ``d/dz int rho(e)/(z - e) de = sum_k dq_k L(z - e_k) + r_0/(z - e_0) - r_{N-1}/(z - e_{N-1})``.

    >>> e = np.linspace(-1.0, 1.0, 2001)
    >>> z = np.array([0.3 + 0.5j])
    >>> h = 1e-6
    >>> rho = semicircle_density(e)
    >>> fd = (cauchy_integral(e, rho, z + h) - cauchy_integral(e, rho, z - h)) / (2 * h)
    >>> bool(np.allclose(cauchy_derivative(e, rho, z), fd, rtol=1e-6))
    True
    """
    e, r, jumps, coefficients = _prepare(knots, values, sqrt_edges)
    zs = np.atleast_1d(np.asarray(z))
    trailing = np.asarray(values).shape[1:]
    on_axis = not np.iscomplexobj(zs) or bool(np.all(zs.imag == 0.0))
    if on_axis:
        zs = zs.real.astype(float)
    x = zs[:, None] - e[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        val = _log(x, on_axis) @ jumps + _end_term(1.0 / x[:, :1], r[0]) - _end_term(1.0 / x[:, -1:], r[-1])
    if coefficients is not None:
        val = val + _edge_integral(e, coefficients, zs, on_axis, derivative=True)
    return val.reshape((len(zs),) + trailing)


def _tail(energies: NDArray[np.float64], upper: float, lower: float) -> NDArray[np.float64]:
    """
    ``int_{upper}^{inf} + int_{-inf}^{lower}`` of ``(1/e)/(E - e)``, the contribution of a ``1/e`` tail.
    """
    t_hi = energies / upper
    t_lo = energies / abs(lower)
    small_hi = np.abs(t_hi) < 1e-8
    small_lo = np.abs(t_lo) < 1e-8
    with np.errstate(divide="ignore", invalid="ignore"):
        hi = np.where(small_hi, -1.0 - 0.5 * t_hi, np.log1p(-t_hi) / np.where(small_hi, 1.0, t_hi)) / upper
        lo = -np.where(small_lo, 1.0 - 0.5 * t_lo, np.log1p(t_lo) / np.where(small_lo, 1.0, t_lo)) / abs(lower)
    return hi + lo


def inverse_hilbert(
    knots: ArrayLike,
    real_part: ArrayLike,
    energies: ArrayLike,
    *,
    total_weight: ArrayLike = 0.0,
) -> NDArray:
    """
    Recover ``rho(E) = -(1/pi^2) PV int Re G(e)/(E - e) de`` from ``Re G`` tabulated on knots that reach far past the
    band. Beyond the table ``Re G`` is continued by its ``total_weight / e`` tail.

    :param knots: sorted energies of the table, with ``knots[0] < 0 < knots[-1]``.
    :param real_part: ``Re G`` at the knots, shape ``(N, ...)``.
    :param energies: where to evaluate the density.
    :param total_weight: ``int rho``, shape broadcasting against the trailing axes of ``real_part``.
    """
    e = np.asarray(knots, dtype=float)
    if not e[0] < 0.0 < e[-1]:
        raise DomainError("the real part table must extend to both sides of zero")
    energies = np.asarray(energies, dtype=float)
    pv = principal_value(e, real_part, energies)
    tail = _tail(energies, float(e[-1]), float(e[0]))
    tail = tail.reshape(tail.shape + (1,) * (pv.ndim - 1)) * np.asarray(total_weight)
    return -(pv + tail) / np.pi**2


def semicircle_density(energies: ArrayLike) -> NDArray[np.float64]:
    """
    ``(2/pi) sqrt(1 - E^2)`` on ``[-1, 1]``, zero outside; unit mass.
    """
    e = np.asarray(energies, dtype=float)
    return (2.0 / np.pi) * np.sqrt(np.clip(1.0 - e**2, 0.0, None))


def semicircle_green(z: ArrayLike, side: int = -1) -> NDArray[np.complex128]:
    """
    ``int rho(e)/(z - e) de`` of :func:`semicircle_density`, ``2 (z - sqrt(z^2 - 1))`` with the branch decaying at
    infinity. Real ``z`` inside the band is read as ``z - i0`` for ``side = -1`` and ``z + i0`` for ``side = 1``,
    so that ``G(E -+ i0) = 2 (E +- i sqrt(1 - E^2))``.

    >>> complex(semicircle_green(0.0))
    2j
    >>> complex(semicircle_green(0.0, side=1))
    -2j
    >>> round(float(semicircle_green(2.0).real), 12)
    0.535898384862
    """
    zs = np.asarray(z, dtype=complex)
    if side not in (-1, 1):
        raise DomainError(f"side must be -1 or 1, got {side}")
    shifted = np.where(zs.imag == 0.0, zs + side * 1j * 1e-300, zs)
    root = np.sqrt(shifted - 1.0) * np.sqrt(shifted + 1.0)
    return 2.0 * (zs - root)
