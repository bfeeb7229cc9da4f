#!/usr/bin/env python3
# coding=utf-8

"""
The rescaled energy ``b = f(E)`` mapping the open band ``(E-, E+)`` onto the real line, and the speed function
``F = 1/f'`` of the energy flow.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import expit

from vt.lattice.scattering.band.critical import CriticalPointSet
from vt.lattice.scattering.error_specs import DomainError, ErrorMsgFormer

logger = logging.getLogger(__name__)

REFERENCE_SHIFT = 1e-3
"Relative shift (in units of the half band width) applied to a reference energy that hits a critical value."


@dataclass(frozen=True)
class RescaledEnergyMap:
    """
    ``F(E) = 2 (E - E-)(E+ - E) / (E+ - E-)``, ``f(E) = artanh((E - E_mid)/Delta) - b0`` and its inverse
    ``E_mid + Delta tanh(b + b0)``.

    The offset ``b0`` is zero unless the reference energy ``E_r = f^{-1}(0)`` had to be moved off the band centre.

    >>> m = RescaledEnergyMap(-6.0, 6.0)
    >>> float(m.f(0.0)), float(m.F(0.0)), float(m.f_inv(0.0))
    (0.0, 6.0, 0.0)
    >>> round(float(m.F(m.f_inv(1.0))) * math.cosh(1.0) ** 2, 12)
    6.0
    """

    E_minus: float
    E_plus: float
    offset: float = 0.0

    def __post_init__(self):
        if not self.E_minus < self.E_plus:
            raise DomainError(
                f"band edges must satisfy E- < E+, got [{self.E_minus}, {self.E_plus}]"
            )

    @classmethod
    def with_reference(
        cls, E_minus: float, E_plus: float, E_r: float
    ) -> "RescaledEnergyMap":
        """
        Map whose reference energy is ``E_r``, i.e. ``f(E_r) = 0``.

        >>> m = RescaledEnergyMap.with_reference(-2.0, 2.0, 0.004)
        >>> abs(float(m.f(0.004))) < 1e-15, round(m.E_r, 12)
        (True, 0.004)
        """
        mid = 0.5 * (E_plus + E_minus)
        delta = 0.5 * (E_plus - E_minus)
        if not abs(E_r - mid) < delta:
            raise DomainError(ErrorMsgFormer.out_of_range("E_r", E_r, E_minus, E_plus, inclusive=False))
        return cls(E_minus, E_plus, math.atanh((E_r - mid) / delta))

    @property
    def E_mid(self) -> float:
        return 0.5 * (self.E_plus + self.E_minus)

    @property
    def Delta(self) -> float:
        return 0.5 * (self.E_plus - self.E_minus)

    @property
    def E_r(self) -> float:
        return self.E_mid + self.Delta * math.tanh(self.offset)

    def F(self, energy: ArrayLike) -> NDArray[np.float64]:
        """
        Speed of the energy flow, ``2 (E - E-)(E+ - E)/(E+ - E-)``; negative outside the band.
        """
        e = np.asarray(energy, dtype=float)
        return 2.0 * (e - self.E_minus) * (self.E_plus - e) / (self.E_plus - self.E_minus)

    def dF(self, energy: ArrayLike) -> NDArray[np.float64]:
        """
        ``F'(E) = 2 (E+ + E- - 2E)/(E+ - E-)``.
        """
        e = np.asarray(energy, dtype=float)
        return 2.0 * (self.E_plus + self.E_minus - 2.0 * e) / (self.E_plus - self.E_minus)

    def f(self, energy: ArrayLike) -> NDArray[np.float64]:
        """
        Rescaled energy of ``E`` in the open band.

        >>> m = RescaledEnergyMap(-6.0, 6.0)
        >>> try:
        ...     m.f(7.0)
        ... except DomainError as e:
        ...     print(e)
        E=7.0 lies outside (-6.0, 6.0)

        :raises DomainError: for energies outside ``(E-, E+)``.
        """
        e = np.asarray(energy, dtype=float)
        x = (e - self.E_mid) / self.Delta
        if np.any(np.abs(x) >= 1.0) or np.any(np.isnan(x)):
            bad = e[np.abs(x) >= 1.0] if e.ndim else e
            raise DomainError(
                ErrorMsgFormer.out_of_range(
                    "E", float(np.ravel(bad)[0]), self.E_minus, self.E_plus, inclusive=False
                )
            )
        return np.arctanh(x) - self.offset

    def f_inv(self, b: ArrayLike) -> NDArray[np.float64]:
        """
        Energy of rescaled energy ``b``. Saturates at the band edges for large ``|b|``.
        """
        return self.E_mid + self.Delta * np.tanh(np.asarray(b, dtype=float) + self.offset)

    def F_of_b(self, b: ArrayLike) -> NDArray[np.float64]:
        """
        ``F(f^{-1}(b)) = Delta / cosh^2(b + b0)``, evaluated without cancellation for large ``|b|``.

        >>> m = RescaledEnergyMap(-6.0, 6.0)
        >>> float(m.F_of_b(40.0)) > 0.0
        True
        """
        c = np.asarray(b, dtype=float) + self.offset
        return 4.0 * self.Delta * expit(2.0 * c) * expit(-2.0 * c)

    def edge_gaps(self, b: ArrayLike) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """
        ``(E - E-, E+ - E)`` at ``E = f^{-1}(b)``, both computed to full relative accuracy.

        >>> m = RescaledEnergyMap(-6.0, 6.0)
        >>> lo, hi = m.edge_gaps(20.0)
        >>> float(hi) > 0.0, round(float(lo), 12)
        (True, 12.0)
        """
        c = np.asarray(b, dtype=float) + self.offset
        return 2.0 * self.Delta * expit(2.0 * c), 2.0 * self.Delta * expit(-2.0 * c)

    def to_dict(self) -> dict[str, float]:
        return {
            "E_minus": self.E_minus,
            "E_plus": self.E_plus,
            "E_r": self.E_r,
            "offset": self.offset,
        }


def rescale_maps(
    critical: CriticalPointSet,
    *,
    E_r: float | None = None,
    avoid_critical: bool = True,
    shift: float = REFERENCE_SHIFT,
) -> RescaledEnergyMap:
    """
    Build the rescaled energy map of a band from its critical points.

    The reference energy defaults to the band centre. When it coincides with an interior critical value (the saddle
    value 0 of the square lattice, say) and ``avoid_critical`` is set, it is moved up by ``shift * Delta``.

    >>> from vt.lattice.scattering.band.function import BandFunction
    >>> from vt.lattice.scattering.band.critical import find_critical_points
    >>> cps = find_critical_points(BandFunction.laplacian(2, hopping=0.5))
    >>> round(rescale_maps(cps).E_r, 12)
    0.002
    >>> rescale_maps(cps, avoid_critical=False).E_r
    0.0

    :param critical: critical points of the band.
    :param E_r: requested reference energy, band centre if ``None``.
    :param avoid_critical: shift a reference energy that hits a critical value.
    :param shift: relative size of the shift.
    """
    lo, hi = critical.E_minus, critical.E_plus
    delta = 0.5 * (hi - lo)
    ref = 0.5 * (hi + lo) if E_r is None else float(E_r)
    if avoid_critical:
        tol = 1e-9 * max(1.0, delta)
        while critical.is_critical_value(ref, tol=max(tol, 0.25 * shift * delta)):
            moved = ref + shift * delta
            logger.info(
                "reference energy %g is a critical value, shifted to %g", ref, moved
            )
            ref = moved
    if ref == 0.5 * (hi + lo):
        return RescaledEnergyMap(lo, hi)
    return RescaledEnergyMap.with_reference(lo, hi, ref)
