#!/usr/bin/env python3
# coding=utf-8

"""
Path validation and atomic artifact writing.
"""

import os
import tempfile
from pathlib import Path

from vt.lattice.scattering.error_specs import ConfigError, LatticeScatteringException


class DirectoryAlreadyExistsError(FileExistsError):
    pass


class DirectoryNotFoundError(FileNotFoundError):
    pass


class Directory:
    """
    Validate and convert a string path to a directory.
    """

    def __init__(
        self,
        allow_already_exists: bool = True,
        allow_missing: bool = False,
        readable: bool = True,
        writable: bool = True,
    ):
        """
        :param allow_already_exists: allow existing directories.
        :param allow_missing: allow a path that does not exist yet, it is created later by the writer.
        :param readable: check permission to read.
        :param writable: check permission to write.
        """
        self.allow_already_exists = allow_already_exists
        self.allow_missing = allow_missing
        self.readable = readable
        self.writable = writable

    def validate_conditions(self, dir_path: str) -> Path:
        """
        >>> import tempfile
        >>> with tempfile.TemporaryDirectory() as tmp:
        ...     Directory().validate_conditions(tmp) == Path(tmp)
        True

        >>> try:
        ...     Directory().validate_conditions("/surely/not/here")
        ... except DirectoryNotFoundError as e:
        ...     print(e)
        Path '/surely/not/here' does not exist.

        >>> Directory(allow_missing=True).validate_conditions("/surely/not/here")
        PosixPath('/surely/not/here')
        """
        if os.path.exists(dir_path):
            self.validate_dir_props(dir_path)
            if not self.allow_already_exists:
                raise DirectoryAlreadyExistsError(f"Path '{dir_path}' already exists.")
        elif not self.allow_missing:
            raise DirectoryNotFoundError(f"Path '{dir_path}' does not exist.")
        return Path(dir_path)

    def validate_dir_props(self, dir_path: str):
        if not os.path.isdir(dir_path):
            raise NotADirectoryError(f"'{dir_path}' is not a directory.")
        if self.readable and not os.access(dir_path, os.R_OK):
            raise PermissionError(f"No read permission for: '{dir_path}'.")
        if self.writable and not os.access(dir_path, os.W_OK):
            raise PermissionError(f"No write permission for: '{dir_path}'.")


def require_file(file: Path, emphasis_str: str, must_exist: bool = True) -> Path:
    """
    Require that ``file`` is a file (not a directory) and that it exists if ``must_exist`` is ``True``.

    >>> try:
    ...     require_file(Path("/surely/missing.json"), "config")
    ... except ConfigError as e:
    ...     print(e)
    FileNotFoundError: config at path: '/surely/missing.json' does not exist.

    :param file: file to check.
    :param emphasis_str: what the file is, for the message.
    :param must_exist: Do we require file to exist?
    :raises ConfigError: if ``file`` is a directory, or it does not exist when ``must_exist`` is ``True``.
    :returns: path to file.
    """
    if file.is_dir():
        errmsg = f"Supplied {emphasis_str} path: '{file}' must be a file."
        raise ConfigError(errmsg, path=str(file)) from IsADirectoryError(errmsg)
    if must_exist and not file.exists():
        errmsg = f"{emphasis_str} at path: '{file}' does not exist."
        raise ConfigError(errmsg, path=str(file)) from FileNotFoundError(errmsg)
    return file


def atomic_write_text(target: Path, text: str, encoding: str = "utf-8") -> Path:
    """
    Write ``text`` to ``target`` through a temporary file in the same directory followed by a rename, so readers
    never observe a partially written artifact.

    >>> import tempfile
    >>> with tempfile.TemporaryDirectory() as tmp:
    ...     p = atomic_write_text(Path(tmp, "sub", "ledger.json"), '{"N": 1}')
    ...     p.read_text()
    '{"N": 1}'

    :param target: final path. Missing parent directories are created.
    :param text: content.
    :param encoding: text encoding.
    :raises LatticeScatteringException: when the underlying OS write fails.
    :return: ``target``.
    """
    return atomic_write_bytes(target, text.encode(encoding))


def atomic_write_bytes(target: Path, data: bytes) -> Path:
    """
    Binary counterpart of :func:`atomic_write_text`, used for cached arrays.

    :raises LatticeScatteringException: when the underlying OS write fails.
    """
    tmp_name: str | None = None
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(
            dir=target.parent, prefix=f".{target.name}.", suffix=".tmp"
        )
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp_name, target)
    except OSError as oe:
        if tmp_name is not None and os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise LatticeScatteringException(
            f"Could not write artifact '{target}'.", path=str(target)
        ) from oe
    return target
