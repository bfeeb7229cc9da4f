#!/usr/bin/env python3
# coding=utf-8


"""
Tests for the exception hierarchy and its exit codes.
"""

import pytest

from vt.lattice.scattering.error_specs import (
    ERR_CONFIG,
    ERR_GENERIC_ERR,
    ERR_NUMERICAL_FAILURE,
    ERR_PHYSICS_VIOLATION,
    AmbiguousBoundary,
    AssumptionViolation,
    ConfigError,
    DomainError,
    IsotropyViolation,
    LatticeScatteringException,
    LatticeScatteringExitingException,
    LevinsonViolation,
    MorseViolation,
    NearSingularTrajectory,
    NumericalFailure,
    PhysicsViolation,
    SamplingFailure,
    Unsupported,
)


@pytest.mark.parametrize(
    "exc_type, code",
    [
        (LatticeScatteringExitingException, ERR_GENERIC_ERR),
        (ConfigError, ERR_CONFIG),
        (DomainError, ERR_CONFIG),
        (NumericalFailure, ERR_NUMERICAL_FAILURE),
        (MorseViolation, ERR_NUMERICAL_FAILURE),
        (SamplingFailure, ERR_NUMERICAL_FAILURE),
        (NearSingularTrajectory, ERR_NUMERICAL_FAILURE),
        (AmbiguousBoundary, ERR_NUMERICAL_FAILURE),
        (PhysicsViolation, ERR_PHYSICS_VIOLATION),
        (AssumptionViolation, ERR_PHYSICS_VIOLATION),
        (IsotropyViolation, ERR_PHYSICS_VIOLATION),
        (Unsupported, ERR_PHYSICS_VIOLATION),
        (LevinsonViolation, ERR_PHYSICS_VIOLATION),
    ],
)
def test_default_exit_codes(exc_type, code):
    assert exc_type("x").exit_code == code


def test_exit_code_override():
    assert NumericalFailure("x", exit_code=9).exit_code == 9


def test_codes_are_distinct():
    assert len({ERR_GENERIC_ERR, ERR_CONFIG, ERR_NUMERICAL_FAILURE, ERR_PHYSICS_VIOLATION}) == 4


def test_domain_error_is_value_error():
    with pytest.raises(ValueError):
        raise DomainError("E outside the band")


class TestStr:
    def test_plain(self):
        assert str(SamplingFailure("12 of 400 valid")) == "12 of 400 valid"

    def test_cause_prefix(self):
        try:
            raise ConfigError("'band' must be a JSON object", path="band") from TypeError("list")
        except ConfigError as e:
            assert str(e) == "TypeError: 'band' must be a JSON object"
            assert isinstance(e.cause, TypeError)

    def test_cause_only(self):
        try:
            raise LatticeScatteringException() from ZeroDivisionError()
        except LatticeScatteringException as e:
            assert str(e) == "ZeroDivisionError"

    def test_empty(self):
        assert str(LatticeScatteringException()) == ""


def test_to_dict_details():
    class Ledger:
        def to_dict(self):
            return {"N": 1}

    e = LevinsonViolation("residual 0.3", ledger=Ledger())
    d = e.to_dict()
    assert d["type"] == "LevinsonViolation"
    assert d["message"] == "residual 0.3"
    assert d["details"] == {"ledger": {"N": 1}}
    assert d["cause_type"] is None


def test_to_dict_falls_back_to_repr():
    d = NumericalFailure("x", energy=(1.0, object)).to_dict()
    assert d["details"]["energy"][0] == 1.0
    assert isinstance(d["details"]["energy"][1], str)


def test_config_error_path():
    e = ConfigError("bad", path="impurity.sites[2]")
    assert e.path == "impurity.sites[2]"
    assert e.to_dict()["details"] == {"path": "impurity.sites[2]"}
