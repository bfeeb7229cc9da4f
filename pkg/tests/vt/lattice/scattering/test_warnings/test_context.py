#!/usr/bin/env python3
# coding=utf-8


"""
Tests for warning categories, the energy-tagging warn helper and per-run warning collection.
"""

import warnings

import pytest

from vt.lattice.scattering.warnings import (
    EdgeFitWarning,
    FirstOrderZeroWarning,
    HolderOnlyWarning,
    LatticeScatteringWarning,
    OneSidedDifferenceWarning,
    RankAmbiguity,
    ReportedWithWarning,
    collect_warnings,
    suppress_warning_stacktrace,
    vt_warn,
)


def use_ctx():
    prev_fmt = warnings.formatwarning
    with pytest.warns(expected_warning=RankAmbiguity, match="thin margin"):
        with suppress_warning_stacktrace():
            warnings.warn("rank decided on a thin margin", RankAmbiguity)
            assert warnings.formatwarning != prev_fmt
    return prev_fmt


def test_changes_warning_format():
    use_ctx()


def test_restores_warning_format():
    prev_fmt = use_ctx()
    assert warnings.formatwarning == prev_fmt


def test_restores_warning_format_on_error():
    prev_fmt = warnings.formatwarning
    with pytest.raises(RuntimeError):
        with suppress_warning_stacktrace():
            raise RuntimeError("inside")
    assert warnings.formatwarning == prev_fmt


@pytest.mark.parametrize(
    "category",
    [
        EdgeFitWarning,
        RankAmbiguity,
        ReportedWithWarning,
        HolderOnlyWarning,
        OneSidedDifferenceWarning,
        FirstOrderZeroWarning,
    ],
)
def test_categories_share_root(category):
    assert issubclass(category, LatticeScatteringWarning)
    assert issubclass(category, UserWarning)
    with pytest.warns(category):
        vt_warn("something to look at", category)


@pytest.mark.parametrize(
    "energy, suffix",
    [(None, ""), (6.0, " [E=6]"), (-1.0 / 3.0, " [E=-0.333333333333]")],
)
def test_vt_warn_tags_energy(energy, suffix):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        vt_warn("evaluated at a critical value", HolderOnlyWarning, energy=energy)
    assert str(caught[0].message) == "evaluated at a critical value" + suffix


def _fit_edge():
    vt_warn("caller frame", EdgeFitWarning)


def test_vt_warn_points_at_caller_of_warning_function():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        _fit_edge()
    assert caught[0].filename == __file__


class TestCollectWarnings:
    def test_records_package_warnings_once_in_order(self):
        with collect_warnings() as log:
            vt_warn("poor fit", EdgeFitWarning, energy=-6.0)
            vt_warn("thin margin", RankAmbiguity)
            vt_warn("poor fit", EdgeFitWarning, energy=-6.0)
        assert log.entries == ["EdgeFitWarning: poor fit [E=-6]", "RankAmbiguity: thin margin"]

    def test_other_warnings_pass_through(self):
        with pytest.warns(DeprecationWarning, match="old knob"):
            with collect_warnings() as log:
                warnings.warn("old knob", DeprecationWarning)
        assert log.entries == []

    def test_collects_when_the_run_fails(self):
        with pytest.raises(RuntimeError):
            with collect_warnings() as log:
                vt_warn("one-sided", OneSidedDifferenceWarning, energy=2.0)
                raise RuntimeError("stage failed")
        assert log.entries == ["OneSidedDifferenceWarning: one-sided [E=2]"]
