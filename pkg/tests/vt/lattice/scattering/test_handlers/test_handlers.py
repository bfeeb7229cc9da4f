#!/usr/bin/env python3
# coding=utf-8


"""
Tests for the error handlers the command line ends a run with.
"""

import logging

import numpy as np
import pytest

from vt.lattice.scattering.error_specs import (
    ERR_CONFIG,
    ERR_GENERIC_ERR,
    ERR_NUMERICAL_FAILURE,
    ERR_PHYSICS_VIOLATION,
    ERR_SIGINT_RECEIVED,
    ConfigError,
    LevinsonViolation,
    MorseViolation,
)
from vt.lattice.scattering.handlers import exit_code_for, get_error_handler
from vt.lattice.scattering.handlers.base import SysExitBomb


@pytest.fixture
def run_logger() -> logging.Logger:
    return logging.getLogger("test.lattice.scattering.handlers")


@pytest.mark.parametrize(
    "error, code",
    [
        (ConfigError("bad", path="seed"), ERR_CONFIG),
        (MorseViolation("degenerate Hessian"), ERR_NUMERICAL_FAILURE),
        (LevinsonViolation("residual"), ERR_PHYSICS_VIOLATION),
        (np.linalg.LinAlgError("singular"), ERR_NUMERICAL_FAILURE),
        (KeyboardInterrupt(), ERR_SIGINT_RECEIVED),
        (RuntimeError("?"), ERR_GENERIC_ERR),
    ],
)
def test_exit_code_for(error, code):
    assert exit_code_for(error) == code


@pytest.mark.parametrize(
    "kind, level",
    [("log", logging.WARNING), ("error", logging.ERROR)],
)
def test_registering_handlers_log(kind, level, run_logger, caplog):
    with caplog.at_level(logging.INFO, logger=run_logger.name):
        get_error_handler(kind, run_logger).handle(ValueError("residual 0.03"), "levinson")
    assert [(r.levelno, r.getMessage()) for r in caplog.records] == [(level, "levinson: ValueError: residual 0.03")]


def test_package_exceptions_log_details_at_debug(run_logger, caplog):
    with caplog.at_level(logging.DEBUG, logger=run_logger.name):
        get_error_handler("log", run_logger).handle(ConfigError("bad seed", path="seed"))
    debug = [r.getMessage() for r in caplog.records if r.levelno == logging.DEBUG]
    assert len(debug) == 1 and "'path': 'seed'" in debug[0]


@pytest.mark.parametrize(
    "error, code",
    [(ConfigError("bad", path="seed"), ERR_CONFIG), (LevinsonViolation("residual"), ERR_PHYSICS_VIOLATION)],
)
def test_bomb_logs_then_exits_with_the_failure_code(error, code, run_logger, caplog):
    with caplog.at_level(logging.DEBUG, logger=run_logger.name):
        with pytest.raises(SystemExit) as e:
            get_error_handler("bomb", run_logger).handle(error)
    assert e.value.code == code
    assert any(r.levelno == logging.CRITICAL for r in caplog.records)


def test_bomb_fixed_exit_code(run_logger):
    with pytest.raises(SystemExit) as e:
        get_error_handler("bomb", run_logger, exit_code=ERR_PHYSICS_VIOLATION).handle(RuntimeError("stop"))
    assert e.value.code == ERR_PHYSICS_VIOLATION


def test_pass_does_nothing(caplog):
    get_error_handler("pass").handle(ValueError("ignored"))
    assert caplog.records == []


def test_sys_exit_bomb_interrupt():
    with pytest.raises(SystemExit) as e:
        SysExitBomb().bomb(KeyboardInterrupt())
    assert e.value.code == ERR_SIGINT_RECEIVED
