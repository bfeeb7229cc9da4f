#!/usr/bin/env python3
# coding=utf-8

"""
Interfaces for reporting a failed stage and deciding how the process ends.
"""

import sys
from abc import abstractmethod
from typing import Protocol, override

import numpy as np

from vt.lattice.scattering.error_specs import (
    ERR_GENERIC_ERR,
    ERR_NUMERICAL_FAILURE,
    ERR_SIGINT_RECEIVED,
    LatticeScatteringExitingException,
)


def exit_code_for(error: BaseException) -> int:
    """
    Process exit code for a failure.

    >>> from vt.lattice.scattering.error_specs import ConfigError, LevinsonViolation
    >>> exit_code_for(ConfigError("bad", path="seed")), exit_code_for(LevinsonViolation("off"))
    (2, 4)
    >>> exit_code_for(np.linalg.LinAlgError("singular")), exit_code_for(KeyboardInterrupt())
    (3, 130)
    >>> exit_code_for(RuntimeError("?"))
    1
    """
    if isinstance(error, LatticeScatteringExitingException):
        return error.exit_code
    if isinstance(error, KeyboardInterrupt):
        return ERR_SIGINT_RECEIVED
    if isinstance(error, (np.linalg.LinAlgError, FloatingPointError)):
        return ERR_NUMERICAL_FAILURE
    return ERR_GENERIC_ERR


def describe(error: BaseException, context: str | None = None) -> str:
    """
    One-line report of a failure.

    >>> describe(np.linalg.LinAlgError("Singular matrix"), "spectrum")
    'spectrum: LinAlgError: Singular matrix'
    >>> describe(KeyboardInterrupt())
    'KeyboardInterrupt: interrupted'
    """
    text = f"{type(error).__name__}: {str(error) or 'interrupted'}"
    return f"{context}: {text}" if context else text


class ErrorHandler(Protocol):
    """
    Receives a failure of a pipeline stage.
    """

    @abstractmethod
    def handle(self, error: BaseException, context: str | None = None) -> None:
        """
        :param error: what the stage raised.
        :param context: where it happened, prefixed to the report.
        """
        ...


class RegisteringErrorHandler(ErrorHandler, Protocol):
    """
    Handlers that keep a record of the failure.
    """

    pass


class NoOpErrorHandler(ErrorHandler):
    def handle(self, error: BaseException, context: str | None = None) -> None:
        """
        >>> NoOpErrorHandler().handle(ValueError("ignored"))
        """
        pass


class Bombing(Protocol):
    """
    Ends the process after a failure was registered.
    """

    @abstractmethod
    def bomb(self, error: BaseException) -> None: ...


class SysExitBomb(Bombing):
    def __init__(self, *, exit_code: int | None = None):
        """
        Exit through ``sys.exit()``.

        :param exit_code: fixed code; by default the code is taken from the failure with :func:`exit_code_for`.
        """
        self.exit_code = exit_code

    @override
    def bomb(self, error: BaseException) -> None:
        """
        >>> from vt.lattice.scattering.error_specs import DomainError
        >>> try:
        ...     SysExitBomb().bomb(DomainError("d=2"))
        ... except SystemExit as e:
        ...     e.code
        2
        >>> try:
        ...     SysExitBomb(exit_code=4).bomb(DomainError("d=2"))
        ... except SystemExit as e:
        ...     e.code
        4
        """
        sys.exit(exit_code_for(error) if self.exit_code is None else self.exit_code)
