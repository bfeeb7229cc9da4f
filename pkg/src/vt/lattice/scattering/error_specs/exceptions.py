#!/usr/bin/env python3
# coding=utf-8

"""
Exception hierarchy of the lattice scattering pipeline.

Every failure the pipeline knows about derives from ``LatticeScatteringException``. Failures that should end a
command line run carry an ``exit_code`` following the taxonomy in ``error_codes``: configuration problems exit with
``2``, numerical trouble with ``3`` and violated physical identities with ``4``.
"""

from abc import abstractmethod
from typing import Any, Protocol, override

from vt.utils.commons.commons.core_py import fallback_on_none_strict

from vt.lattice.scattering.error_specs.error_codes import (
    ERR_CONFIG,
    ERR_GENERIC_ERR,
    ERR_NUMERICAL_FAILURE,
    ERR_PHYSICS_VIOLATION,
)


class HasExitCode(Protocol):
    """
    Interface denoting that it stores an ``exit_code`` which the command line uses when a run ends on this error.
    """

    @property
    @abstractmethod
    def exit_code(self) -> int:
        """
        :return: exit code for the process.
        """
        ...


class LatticeScatteringException(Exception):
    """
    Root of all errors raised knowingly by this package.

    Examples:

      * plain message:

        >>> str(LatticeScatteringException('grid too coarse'))
        'grid too coarse'

      * chained cause is prefixed by its type:

        >>> try:
        ...     raise LatticeScatteringException('bad band') from ValueError('non-hermitian')
        ... except LatticeScatteringException as e:
        ...     print(e)
        ...     e.cause
        ValueError: bad band
        ValueError('non-hermitian')

      * cause alone:

        >>> try:
        ...     raise LatticeScatteringException() from ZeroDivisionError('float division')
        ... except LatticeScatteringException as e:
        ...     print(e)
        ZeroDivisionError: float division

      * extra keyword args are kept for diagnostics:

        >>> LatticeScatteringException('x', energy=-2.0).kwargs
        {'energy': -2.0}

    :param args: arguments for ``Exception``.
    :param kwargs: diagnostics kept on the instance.
    """

    def __init__(self, *args, **kwargs):
        super().__init__(*args)
        self.kwargs = kwargs

    @property
    def cause(self) -> BaseException | None:
        """
        :return: the ``__cause__`` of this exception, obtained when raised using a ``from`` clause.
        """
        return self.__cause__

    def __str__(self) -> str:
        if not self.args and self.cause:
            if not self.cause.args:
                return f"{self.cause.__class__.__name__}"
            return f"{self.cause.__class__.__name__}: {self.cause}"
        if self.args and not self.cause:
            return super().__str__()
        if self.args and self.cause:
            return f"{self.cause.__class__.__name__}: {super().__str__()}"
        return ""

    def to_dict(self) -> dict[str, Any]:
        """
        Structured form for logs and for the run manifest.

        >>> LatticeScatteringException('oops', sites=3).to_dict()
        {'type': 'LatticeScatteringException', 'message': 'oops', 'cause_type': None, 'cause_message': None, 'details': {'sites': 3}}

        :return: a structured dict version of the exception.
        """
        return {
            "type": self.__class__.__name__,
            "message": str(self),
            "cause_type": type(self.cause).__name__ if self.cause else None,
            "cause_message": str(self.cause) if self.cause else None,
            "details": {k: _jsonable(v) for k, v in self.kwargs.items()},
        }


def _jsonable(value: Any) -> Any:
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    to_dict = getattr(value, "to_dict", None)
    if callable(to_dict):
        return to_dict()
    return repr(value)


class LatticeScatteringExitingException(LatticeScatteringException, HasExitCode):
    """
    A ``LatticeScatteringException`` carrying the exit code the command line should end with.

    >>> LatticeScatteringExitingException('x').exit_code
    1
    >>> LatticeScatteringExitingException('x', exit_code=7).exit_code
    7
    """

    default_exit_code: int = ERR_GENERIC_ERR

    def __init__(self, *args, exit_code: int | None = None, **kwargs):
        super().__init__(*args, **kwargs)
        self._exit_code = fallback_on_none_strict(exit_code, self.default_exit_code)

    @override
    @property
    def exit_code(self) -> int:
        return self._exit_code


# region configuration and domain
class ConfigError(LatticeScatteringExitingException):
    """
    Malformed run configuration. The message names the offending JSON path.

    >>> e = ConfigError("'grid.n_uniform' must be an int", path='grid.n_uniform')
    >>> e.exit_code, e.path
    (2, 'grid.n_uniform')
    """

    default_exit_code = ERR_CONFIG

    def __init__(self, *args, path: str | None = None, **kwargs):
        super().__init__(*args, path=path, **kwargs)
        self.path = path


class DomainError(LatticeScatteringExitingException, ValueError):
    """
    An argument lies outside the domain of a mathematical operation, e.g. ``f(E)`` for ``E`` outside the band or a
    zero integer vector given to a gcd-based routine.

    >>> isinstance(DomainError('E outside band'), ValueError)
    True
    """

    default_exit_code = ERR_CONFIG


# endregion


# region numerical failures
class NumericalFailure(LatticeScatteringExitingException):
    """
    A numerical routine could not deliver a result within its tolerances.
    """

    default_exit_code = ERR_NUMERICAL_FAILURE


class MorseViolation(NumericalFailure):
    """
    A critical point with a (numerically) degenerate Hessian was found.
    """


class SamplingFailure(NumericalFailure):
    """
    Too few valid points could be placed on the reference energy surface.
    """


class NearSingularTrajectory(NumericalFailure):
    """
    A flow trajectory entered the exclusion radius of a saddle point, i.e. it starts on or near the invariant set
    of stable and unstable manifolds.
    """


class AmbiguousBoundary(NumericalFailure):
    """
    A real energy inside the band was queried without saying which boundary value (``E-i0`` or ``E+i0``) is meant.
    """


# endregion


# region physics violations
class PhysicsViolation(LatticeScatteringExitingException):
    """
    A hypothesis of the theory fails for the input, or a physical identity does not close within tolerance.
    """

    default_exit_code = ERR_PHYSICS_VIOLATION


class AssumptionViolation(PhysicsViolation):
    """
    The band violates a standing hypothesis, e.g. it has more than one extremum of definite signature.
    """


class IsotropyViolation(PhysicsViolation):
    """
    The Hessian at a band extremum is not a multiple of the identity, so the limiting surface states do not exist.
    """


class Unsupported(PhysicsViolation):
    """
    The input lies outside the cases the construction covers, e.g. a threshold singularity of multiplicity two in
    dimension three.
    """


class LevinsonViolation(PhysicsViolation):
    """
    The Levinson sum rule did not close: ``|lhs + N - rhs|`` exceeds the tolerance. ``ledger`` holds the diagnostics.
    """

    def __init__(self, *args, ledger: Any = None, **kwargs):
        super().__init__(*args, ledger=ledger, **kwargs)
        self.ledger = ledger


# endregion
