#!/usr/bin/env python3
# coding=utf-8


"""
Tests for file requirements and atomic writes.
"""

import os

import pytest

from vt.lattice.scattering.error_specs import ConfigError, LatticeScatteringException
from vt.lattice.scattering.helpers.path_helpers import atomic_write_bytes, atomic_write_text, require_file


def test_atomic_write_creates_parents(tmp_path):
    target = tmp_path / "a" / "b" / "out.csv"
    assert atomic_write_text(target, "E,n\n") == target
    assert target.read_text() == "E,n\n"
    assert os.listdir(target.parent) == ["out.csv"]


def test_atomic_write_replaces(tmp_path):
    target = tmp_path / "out.json"
    atomic_write_text(target, "old")
    atomic_write_text(target, "new")
    assert target.read_text() == "new"


def test_atomic_write_bytes(tmp_path):
    target = tmp_path / "density.npz"
    atomic_write_bytes(target, b"\x00\x01")
    assert target.read_bytes() == b"\x00\x01"


def test_atomic_write_failure_is_wrapped(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("file, not a directory")
    with pytest.raises(LatticeScatteringException):
        atomic_write_text(blocker / "out.csv", "x")


def test_require_file_missing(tmp_path):
    with pytest.raises(ConfigError, match="does not exist") as e:
        require_file(tmp_path / "missing.json", "config")
    assert e.value.exit_code == 2


def test_require_file_directory(tmp_path):
    with pytest.raises(ConfigError, match="must be a file"):
        require_file(tmp_path, "config")


def test_require_file_may_be_missing(tmp_path):
    assert require_file(tmp_path / "later.json", "config", must_exist=False) == tmp_path / "later.json"
