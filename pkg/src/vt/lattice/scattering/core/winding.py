#!/usr/bin/env python3
# coding=utf-8

"""
Continuous arguments of unit-modulus curves, with step control so that no full turn is lost between samples.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from vt.lattice.scattering.error_specs import NumericalFailure

logger = logging.getLogger(__name__)

MAX_DEPTH = 40


@dataclass(frozen=True)
class PhaseTrack:
    nodes: NDArray[np.float64]
    "Parameter values, including every inserted refinement node."
    phases: NDArray[np.float64]
    "Unwrapped argument at the nodes."
    refined: int
    "Number of inserted nodes."

    @property
    def total(self) -> float:
        return float(self.phases[-1] - self.phases[0])

    @property
    def winding(self) -> float:
        return self.total / (2 * np.pi)

    @property
    def largest_step(self) -> float:
        return float(np.max(np.abs(np.diff(self.phases)))) if len(self.phases) > 1 else 0.0


def wrap(angle: ArrayLike) -> NDArray[np.float64]:
    """
    Reduce to ``(-pi, pi]``.

    >>> round(float(wrap(3 * np.pi / 2)), 12)
    -1.570796326795
    """
    a = np.asarray(angle, dtype=float)
    return np.pi - np.mod(np.pi - a, 2 * np.pi)


def track_phase(
    argument: Callable[[float], float],
    nodes: ArrayLike,
    *,
    max_step: float = np.pi / 4,
    initial: ArrayLike | None = None,
    max_depth: int = MAX_DEPTH,
) -> PhaseTrack:
    """
    Unwrap ``argument`` along increasing or decreasing ``nodes``. Wherever two neighbours differ by more than
    ``max_step`` after wrapping, midpoints are inserted until they do not.

    >>> track = track_phase(lambda t: float(np.angle(np.exp(1j * t))), np.linspace(0.0, 4 * np.pi, 5))
    >>> round(track.winding, 12), track.largest_step < np.pi / 3
    (2.0, True)

    :param argument: any branch of the argument, evaluated at a node.
    :param nodes: monotone parameter values.
    :param max_step: largest accepted phase step.
    :param initial: precomputed arguments at ``nodes``.
    :param max_depth: refinement depth per interval.
    :raises NumericalFailure: if an interval still steps too far at the largest depth.
    """
    ts = [float(t) for t in np.asarray(nodes, dtype=float)]
    raw = [float(x) for x in (np.asarray(initial, dtype=float) if initial is not None else map(argument, ts))]
    out_t = [ts[0]]
    out_p = [raw[0]]
    refined = 0

    def descend(t0: float, p0: float, t1: float, a1: float, depth: int) -> None:
        nonlocal refined
        step = float(wrap(a1 - p0))
        if abs(step) <= max_step:
            out_t.append(t1)
            out_p.append(p0 + step)
            return
        if depth >= max_depth:
            raise NumericalFailure(
                f"argument jumps by {step:.3f} between {t0!r} and {t1!r} at refinement depth {depth}",
                interval=(t0, t1),
            )
        tm = 0.5 * (t0 + t1)
        am = argument(tm)
        refined += 1
        descend(t0, p0, tm, am, depth + 1)
        descend(tm, out_p[-1], t1, a1, depth + 1)

    for t1, a1 in zip(ts[1:], raw[1:]):
        descend(out_t[-1], out_p[-1], t1, a1, 0)
    if refined:
        logger.debug("phase tracking inserted %d nodes", refined)
    return PhaseTrack(np.asarray(out_t), np.asarray(out_p), refined)
