#!/usr/bin/env python3
# coding=utf-8

"""
Helpers related to argparse.
"""

import json
import pathlib
from argparse import ArgumentTypeError
from typing import Any, override

import vt.lattice.scattering.helpers.path_helpers


class Directory(vt.lattice.scattering.helpers.path_helpers.Directory):
    @override
    def validate_conditions(self, dir_path: str):
        try:
            return super().validate_conditions(dir_path)
        except NotADirectoryError as e:
            raise ArgumentTypeError(
                str(e) + " A directory is required as the value for this option."
            )
        except vt.lattice.scattering.helpers.path_helpers.DirectoryNotFoundError as e:
            raise ArgumentTypeError(
                str(e) + " Provide a valid existing directory path."
            )
        except vt.lattice.scattering.helpers.path_helpers.DirectoryAlreadyExistsError as e:
            raise ArgumentTypeError(
                str(e) + " Provide a new (non-existing) path to create directory."
            )
        except PermissionError as e:
            raise ArgumentTypeError(e)

    def __call__(self, dir_path: str) -> pathlib.Path:
        return self.validate_conditions(dir_path)


class FilePath:
    def __init__(self, encoding: str = "utf-8"):
        """
        Check that the path names a readable file. ``-`` (stdin) is refused since the config path is echoed into
        the run manifest.
        """
        self.encoding = encoding

    def __call__(self, file_path: str) -> pathlib.Path:
        if file_path == "-":
            raise ArgumentTypeError("file must not be '-'")
        absolute_path = pathlib.Path(file_path).resolve()
        try:
            with open(absolute_path, encoding=self.encoding):
                pass
        except OSError as e:
            raise ArgumentTypeError(f"{e}: Provide a valid file.")
        return absolute_path


class JsonMapping:
    """
    argparse type for an inline JSON object, e.g. ``--tol-overrides '{"kernel_zero": 1e-9}'``.

    >>> JsonMapping()('{"kernel_zero": 1e-9}')
    {'kernel_zero': 1e-09}

    >>> try:
    ...     JsonMapping()('[1, 2]')
    ... except ArgumentTypeError as e:
    ...     print(e)
    a JSON object is required, got list.

    >>> try:
    ...     JsonMapping()('{oops')
    ... except ArgumentTypeError as e:
    ...     print(str(e).split(':')[0])
    invalid JSON
    """

    def __call__(self, val: str) -> dict[str, Any]:
        try:
            parsed = json.loads(val)
        except json.JSONDecodeError as e:
            raise ArgumentTypeError(f"invalid JSON: {e}")
        if not isinstance(parsed, dict):
            raise ArgumentTypeError(
                f"a JSON object is required, got {type(parsed).__name__}."
            )
        return parsed


class PositiveInt:
    """
    argparse type for strictly positive integers, optionally bounded above.

    >>> PositiveInt()("4")
    4

    >>> try:
    ...     PositiveInt()("0")
    ... except ArgumentTypeError as e:
    ...     print(e)
    value must be a positive int, got '0'.

    >>> try:
    ...     PositiveInt(upper=2**64 - 1)(str(2**64))
    ... except ArgumentTypeError as e:
    ...     print(e)
    value must not exceed 18446744073709551615.
    """

    def __init__(self, upper: int | None = None, allow_zero: bool = False):
        self.upper = upper
        self.allow_zero = allow_zero

    def __call__(self, val: str) -> int:
        try:
            number = int(val)
        except ValueError:
            number = -1
        if number < 0 or (number == 0 and not self.allow_zero):
            kind = "non-negative" if self.allow_zero else "positive"
            raise ArgumentTypeError(f"value must be a {kind} int, got '{val}'.")
        if self.upper is not None and number > self.upper:
            raise ArgumentTypeError(f"value must not exceed {self.upper}.")
        return number
