#!/usr/bin/env python3
# coding=utf-8


"""
Warning categories of the lattice scattering pipeline and helpers to emit and collect them.

Numerical results that are still usable but deserve a second look (a poor edge fit, a rank decision taken inside
the tolerance band, a one-sided derivative at a van Hove energy) are reported as warnings, not errors. The command
line collects them per run and lists them in the manifest.
"""

import warnings
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import dataclass, field


# region categories
class LatticeScatteringWarning(UserWarning):
    """
    Root of all warnings issued by this package.
    """


class EdgeFitWarning(LatticeScatteringWarning):
    """
    The band-edge power-law fit left a residual above 10%. The energy grid is likely too coarse near the edge.
    """


class RankAmbiguity(LatticeScatteringWarning):
    """
    A singular value fell inside the tolerance band, so the rank of a projection was decided on a thin margin.
    """


class ReportedWithWarning(LatticeScatteringWarning):
    """
    A kernel dimension was reported although the two smallest singular values were not well separated.
    """


class HolderOnlyWarning(LatticeScatteringWarning):
    """
    A quantity was evaluated at a critical value, where it is only Hölder continuous.
    """


class OneSidedDifferenceWarning(LatticeScatteringWarning):
    """
    A derivative near a critical value was taken by a one-sided difference.
    """


class FirstOrderZeroWarning(LatticeScatteringWarning):
    """
    The smallest singular value at an embedded eigenvalue does not vanish linearly, so the zero may not be of first
    order in the real part.
    """


# endregion


def format_warning(message: Warning | str, category: type[Warning], *_) -> str:
    """
    >>> format_warning(RankAmbiguity("rank 2 or 3"), RankAmbiguity, "linalg.py", 80)
    'RankAmbiguity: rank 2 or 3\\n'
    """
    return f"{category.__name__}: {message}\n"


@contextmanager
def suppress_warning_stacktrace() -> Iterator[None]:
    """
    Print warnings as ``Category: message`` without the source line.

    >>> with suppress_warning_stacktrace():
    ...     warnings.formatwarning(EdgeFitWarning("residual 0.2"), EdgeFitWarning, "x.py", 1)
    'EdgeFitWarning: residual 0.2\\n'
    """
    original = warnings.formatwarning
    warnings.formatwarning = format_warning  # type: ignore[assignment]
    try:
        yield
    finally:
        warnings.formatwarning = original


def vt_warn(
    message: str,
    category: type[LatticeScatteringWarning] = LatticeScatteringWarning,
    *,
    energy: float | None = None,
    stack_level: int = 2,
) -> None:
    """
    Issue a package warning, tagged with the energy it concerns when there is one.

    >>> with warnings.catch_warnings(record=True) as caught:
    ...     warnings.simplefilter("always")
    ...     vt_warn("fit residual 0.14", EdgeFitWarning, energy=-6.0)
    >>> caught[0].category.__name__, str(caught[0].message)
    ('EdgeFitWarning', 'fit residual 0.14 [E=-6]')

    :param stack_level: frames above the caller to attribute the warning to, ``2`` blames the caller's caller.
    """
    if energy is not None:
        message = f"{message} [E={energy:.12g}]"
    with suppress_warning_stacktrace():
        warnings.warn(message, category, stacklevel=stack_level + 1)


@dataclass
class WarningLog:
    """
    Package warnings seen inside :func:`collect_warnings`, in order of first appearance and without repeats.
    """

    entries: list[str] = field(default_factory=list)

    def add(self, warning: warnings.WarningMessage) -> None:
        line = format_warning(warning.message, warning.category).rstrip("\n")
        if line not in self.entries:
            self.entries.append(line)


@contextmanager
def collect_warnings() -> Iterator[WarningLog]:
    """
    Record package warnings for a run; other warnings pass through.

    >>> with collect_warnings() as log:
    ...     vt_warn("one-sided difference", OneSidedDifferenceWarning, energy=2.0)
    ...     vt_warn("one-sided difference", OneSidedDifferenceWarning, energy=2.0)
    >>> log.entries
    ['OneSidedDifferenceWarning: one-sided difference [E=2]']
    """
    log = WarningLog()
    caught: list[warnings.WarningMessage] = []
    try:
        with warnings.catch_warnings(record=True) as recorded:
            warnings.simplefilter("always", LatticeScatteringWarning)
            caught = recorded
            yield log
    finally:
        for w in caught:
            if issubclass(w.category, LatticeScatteringWarning):
                log.add(w)
            else:
                warnings.showwarning(w.message, w.category, w.filename, w.lineno)
