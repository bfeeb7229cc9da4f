#!/usr/bin/env python3
# coding=utf-8

"""
Validators for values read from a JSON run configuration.

Each validator names the offending location as a dotted path (``impurity.sites[2]``) and raises a
``ConfigError`` chained from the underlying ``TypeError``/``ValueError``.
"""

from collections.abc import Iterable, Mapping
from typing import Any, NoReturn, TypeGuard

from vt.lattice.scattering.error_specs.__constants__ import ERR_CONFIG, type_name_map
from vt.lattice.scattering.error_specs.errmsg import ErrorMsgFormer
from vt.lattice.scattering.error_specs.exceptions import (
    ConfigError,
    LatticeScatteringExitingException,
)

type ExcType = type[LatticeScatteringExitingException]


def _fail(
    cause: type[Exception],
    path: str,
    requirement: str,
    exception_to_raise: ExcType,
    exit_code: int,
) -> NoReturn:
    errmsg = ErrorMsgFormer.at_path(path, requirement)
    if issubclass(exception_to_raise, ConfigError):
        raise exception_to_raise(errmsg, exit_code=exit_code, path=path) from cause(errmsg)
    raise exception_to_raise(errmsg, exit_code=exit_code) from cause(errmsg)


def require_type[T](
    val_to_check: T,
    var_name: str,
    val_type: type[T],
    exception_to_raise: ExcType = ConfigError,
    exit_code: int = ERR_CONFIG,
    *,
    lenient: bool = False,
) -> TypeGuard[T]:
    """
    Validate that a configuration value has the expected type.

    ``lenient`` accepts JSON integers where a ``float`` is expected, so that ``1`` is a valid energy. A ``bool`` is
    never a number, not even leniently.

    >>> require_type(12, "seed", int)
    True
    >>> require_type(1, "impurity.coupling", float, lenient=True)
    True

    >>> try:
    ...     require_type(True, "seed", int, lenient=True)
    ... except ConfigError as e:
    ...     print(e)
    ...     print(e.path, e.exit_code)
    TypeError: 'seed' must be an int
    seed 2

    >>> try:
    ...     require_type("1.5", "grid.eta", float)  # type: ignore[arg-type]
    ... except ConfigError as e:
    ...     print(e)
    TypeError: 'grid.eta' must be a number

    :param var_name: dotted path of the value, used in the message and as ``ConfigError.path``.
    :raises exception_to_raise: if the value is not of ``val_type``.
    """
    if lenient:
        accepted = (int, float) if val_type is float else (val_type,)
        ok = isinstance(val_to_check, accepted) and (val_type is bool or not isinstance(val_to_check, bool))
    else:
        ok = type(val_to_check) is val_type
    if not ok:
        typename = type_name_map.get(val_type, f"an instance of {getattr(val_type, '__name__', val_type)}")
        _fail(TypeError, var_name, f"must be {typename}", exception_to_raise, exit_code)
    return True


def require_iterable[T](
    val_to_check: Iterable[T],
    var_name: str,
    item_type: type[T] | None = None,
    exception_to_raise: ExcType = ConfigError,
    exit_code: int = ERR_CONFIG,
    *,
    empty: bool | None = None,
    length: int | None = None,
) -> TypeGuard[list[T]]:
    """
    Validate that a configuration value is a JSON array, optionally with typed items and a fixed length.

    The path of the first offending item is reported, e.g. ``band.terms[1].offset[0]``.

    >>> require_iterable([0, 1, 0], "impurity.sites[0]", int, length=3)
    True

    >>> try:
    ...     require_iterable([0, "1"], "impurity.sites[2]", int)
    ... except ConfigError as e:
    ...     print(e)
    TypeError: 'impurity.sites[2][1]' must be an int

    >>> try:
    ...     require_iterable({"a": 1}, "band.terms")  # type: ignore[arg-type]
    ... except ConfigError as e:
    ...     print(e)
    TypeError: 'band.terms' must be a JSON array

    >>> try:
    ...     require_iterable([], "impurity.sites", empty=False)
    ... except ConfigError as e:
    ...     print(e)
    ValueError: 'impurity.sites' must not be empty

    >>> try:
    ...     require_iterable([1, 2], "impurity.sites[0]", int, length=3)
    ... except ConfigError as e:
    ...     print(e)
    ValueError: 'impurity.sites[0]' must have 3 items, got 2

    :param item_type: type of every item; ints are accepted for ``float``.
    :param empty: ``True`` requires an empty array, ``False`` a non-empty one.
    :param length: required number of items.
    """
    if not isinstance(val_to_check, (list, tuple)):
        _fail(TypeError, var_name, "must be a JSON array", exception_to_raise, exit_code)
    n = len(val_to_check)
    if empty is True and n:
        _fail(ValueError, var_name, "must be empty", exception_to_raise, exit_code)
    if empty is False and not n:
        _fail(ValueError, var_name, "must not be empty", exception_to_raise, exit_code)
    if length is not None and n != length:
        _fail(ValueError, var_name, f"must have {length} items, got {n}", exception_to_raise, exit_code)
    if item_type is not None:
        for i, v in enumerate(val_to_check):
            item_path = ErrorMsgFormer.join_path(var_name, i)
            require_type(v, item_path, item_type, exception_to_raise, exit_code, lenient=item_type is float)
    return True


def require_keys(
    mapping: Any,
    var_name: str,
    required: Iterable[str] = (),
    optional: Iterable[str] = (),
    exception_to_raise: ExcType = ConfigError,
    exit_code: int = ERR_CONFIG,
) -> TypeGuard[Mapping[str, Any]]:
    """
    Validate that a configuration value is a JSON object holding the required keys and no unknown keys.

    >>> require_keys({"dimension": 3, "terms": []}, "band", required=["dimension", "terms"])
    True

    >>> try:
    ...     require_keys({"terms": []}, "band", required=["dimension", "terms"])
    ... except ConfigError as e:
    ...     print(e)
    ...     print(e.path)
    ValueError: 'band.dimension' is required
    band.dimension

    >>> try:
    ...     require_keys({"dimension": 3, "colour": 1}, "band", required=["dimension"], optional=["terms"])
    ... except ConfigError as e:
    ...     print(e)
    ValueError: 'band.colour' is not a recognised key

    >>> try:
    ...     require_keys([1, 2], "grid")
    ... except ConfigError as e:
    ...     print(e)
    TypeError: 'grid' must be a JSON object

    :param var_name: dotted path of the value, empty for the document root.
    """
    if not isinstance(mapping, Mapping):
        _fail(TypeError, var_name or "<root>", "must be a JSON object", exception_to_raise, exit_code)
    required = list(required)
    for key in required:
        if key not in mapping:
            _fail(ValueError, ErrorMsgFormer.join_path(var_name, key), "is required", exception_to_raise, exit_code)
    allowed = set(required) | set(optional)
    for key in mapping:
        if key not in allowed:
            path = ErrorMsgFormer.join_path(var_name, str(key))
            _fail(ValueError, path, "is not a recognised key", exception_to_raise, exit_code)
    return True
