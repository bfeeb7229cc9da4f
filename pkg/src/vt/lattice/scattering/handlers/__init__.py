#!/usr/bin/env python3
# coding=utf-8

"""
Error handlers: the command line ends a failed run through ``"bomb"``, recoverable failures such as an unreadable
cache entry are reported through ``"log"``.
"""

import logging
from typing import Literal, overload

from vt.lattice.scattering.error_specs import ErrorMsgFormer

# region re-exports interfaces
from vt.lattice.scattering.handlers.base import ErrorHandler as ErrorHandler
from vt.lattice.scattering.handlers.base import RegisteringErrorHandler as RegisteringErrorHandler
from vt.lattice.scattering.handlers.base import Bombing as Bombing
from vt.lattice.scattering.handlers.base import exit_code_for as exit_code_for
from vt.lattice.scattering.handlers.base import describe as describe

# region import implementations
from vt.lattice.scattering.handlers.register import LoggingErrorHandler as _LoggingErrorHandler
from vt.lattice.scattering.handlers.base import SysExitBomb as _SysExitBomb
from vt.lattice.scattering.handlers.base import NoOpErrorHandler as _NoOpErrorHandler
# endregion
# endregion

HANDLER_TYPES = ("log", "error", "bomb", "pass")


@overload
def get_error_handler(err_handlr_type: Literal["pass"]) -> _NoOpErrorHandler: ...


@overload
def get_error_handler(
    err_handlr_type: Literal["log", "error", "bomb"],
    logger: logging.Logger,
    *,
    exit_code: int | None = None,
) -> _LoggingErrorHandler: ...


def get_error_handler(
    err_handlr_type: Literal["log", "error", "bomb", "pass"],
    logger: logging.Logger | None = None,
    *,
    exit_code: int | None = None,
) -> ErrorHandler:
    """
    Handler for the requested behaviour.

    - ``"pass"``: ignore the failure.
    - ``"log"``: log at ``WARNING`` and carry on.
    - ``"error"``: log at ``ERROR`` and carry on.
    - ``"bomb"``: log at ``CRITICAL`` then exit with the failure's code, or ``exit_code`` when given.

    >>> from vt.lattice.scattering.error_specs import LevinsonViolation
    >>> import logging
    >>> log = logging.getLogger("demo")
    >>> try:
    ...     get_error_handler("bomb", log).handle(LevinsonViolation("residual 0.3 exceeds 0.02"))
    ... except SystemExit as e:
    ...     e.code
    4

    >>> try:
    ...     get_error_handler("log")  # type: ignore[call-overload]
    ... except ValueError as e:
    ...     print(e)
    logger is required for a registering type error handler.

    >>> try:
    ...     get_error_handler("bogus")  # type: ignore[call-overload]
    ... except ValueError as e:
    ...     print(e)
    Unexpected err_handlr_type value. Choose from 'log', 'error', 'bomb' and 'pass'.

    :raises ValueError: unknown type, or a registering type without ``logger``.
    """
    if err_handlr_type == "pass":
        return _NoOpErrorHandler()
    if err_handlr_type not in HANDLER_TYPES:
        raise ValueError(ErrorMsgFormer.errmsg_for_choices(emphasis="err_handlr_type", choices=list(HANDLER_TYPES)))
    if logger is None:
        raise ValueError("logger is required for a registering type error handler.")
    if err_handlr_type == "log":
        return _LoggingErrorHandler(logger, logging.WARNING)
    if err_handlr_type == "error":
        return _LoggingErrorHandler(logger, logging.ERROR)
    return _LoggingErrorHandler(logger, logging.CRITICAL, bombing=_SysExitBomb(exit_code=exit_code))
