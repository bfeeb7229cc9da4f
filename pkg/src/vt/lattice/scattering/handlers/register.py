#!/usr/bin/env python3
# coding=utf-8

"""
Handlers that register a failure in a standard logger.
"""

import logging
from typing import override

from vt.lattice.scattering.error_specs import LatticeScatteringException
from vt.lattice.scattering.handlers.base import Bombing, RegisteringErrorHandler, describe


class LoggingErrorHandler(RegisteringErrorHandler):
    def __init__(self, logger: logging.Logger, level: int = logging.WARNING, bombing: Bombing | None = None):
        """
        Log the failure at ``level``; structured details of package exceptions go to ``DEBUG``.

        :param logger: where the failure is registered.
        :param level: log level of the one-line report.
        :param bombing: ends the process once the failure is logged.
        """
        self.logger = logger
        self.level = level
        self.bombing = bombing

    @override
    def handle(self, error: BaseException, context: str | None = None) -> None:
        """
        >>> import logging, sys
        >>> log = logging.getLogger("doctest.handlers")
        >>> log.addHandler(logging.StreamHandler(sys.stdout)); log.propagate = False
        >>> LoggingErrorHandler(log).handle(ValueError("unreadable entry"), "cache")
        cache: ValueError: unreadable entry
        """
        self.logger.log(self.level, describe(error, context), stacklevel=2)
        if isinstance(error, LatticeScatteringException):
            self.logger.debug("failure details: %s", error.to_dict())
        if self.bombing:
            self.bombing.bomb(error)
