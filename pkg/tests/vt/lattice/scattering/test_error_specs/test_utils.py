#!/usr/bin/env python3
# coding=utf-8


"""
Tests for config value validators.
"""

import pytest

from vt.lattice.scattering.error_specs import ConfigError, NumericalFailure
from vt.lattice.scattering.error_specs.utils import require_iterable, require_keys, require_type


class TestRequireType:
    @pytest.mark.parametrize(
        "value, value_type, lenient",
        [(3, int, False), (0.5, float, False), (3, float, True), ("x", str, False), (True, bool, False)],
    )
    def test_accepts(self, value, value_type, lenient):
        assert require_type(value, "v", value_type, lenient=lenient)

    @pytest.mark.parametrize(
        "value, value_type, lenient",
        [(3, float, False), (True, int, True), (True, float, True), ("1", int, True), (None, float, True)],
    )
    def test_rejects(self, value, value_type, lenient):
        with pytest.raises(ConfigError) as e:
            require_type(value, "grid.eta", value_type, lenient=lenient)
        assert e.value.path == "grid.eta"
        assert "'grid.eta' must be" in str(e.value)

    def test_custom_exception(self):
        with pytest.raises(NumericalFailure) as e:
            require_type("x", "n", int, exception_to_raise=NumericalFailure, exit_code=3)
        assert e.value.exit_code == 3


class TestRequireIterable:
    def test_item_path(self):
        with pytest.raises(ConfigError) as e:
            require_iterable([0, 1, "2"], "impurity.sites[4]", int)
        assert e.value.path == "impurity.sites[4][2]"

    def test_length(self):
        with pytest.raises(ConfigError, match="must have 3 items, got 2"):
            require_iterable([0, 1], "impurity.sites[0]", int, length=3)

    @pytest.mark.parametrize("empty, value", [(False, []), (True, [1])])
    def test_emptiness(self, empty, value):
        with pytest.raises(ConfigError):
            require_iterable(value, "scan.energies", empty=empty)

    def test_not_an_array(self):
        with pytest.raises(ConfigError, match="JSON array"):
            require_iterable("abc", "scan.energies")  # type: ignore[arg-type]

    def test_float_items_accept_int(self):
        assert require_iterable([1, 2.5], "scan.energies", float)


class TestRequireKeys:
    def test_missing(self):
        with pytest.raises(ConfigError) as e:
            require_keys({}, "", required=["band"])
        assert e.value.path == "band"

    def test_unknown(self):
        with pytest.raises(ConfigError) as e:
            require_keys({"band": {}, "colour": 1}, "", required=["band"], optional=["grid"])
        assert e.value.path == "colour"

    def test_not_a_mapping_at_root(self):
        with pytest.raises(ConfigError) as e:
            require_keys([1], "")
        assert e.value.path == "<root>"

    def test_optional_only(self):
        assert require_keys({"levinson": 0.1}, "tolerances", optional=["levinson", "kernel_zero"])
