#!/usr/bin/env python3
# coding=utf-8


"""
Tests related to argparse helpers.
"""

import argparse

import pytest

from vt.lattice.scattering.helpers.argparse_helpers import Directory, FilePath, JsonMapping, PositiveInt


@pytest.fixture(scope="session")
def run_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser("test-parser")
    parser.add_argument("--seed", type=PositiveInt(upper=2**64 - 1, allow_zero=True))
    parser.add_argument("--threads", type=PositiveInt(), default=1)
    parser.add_argument("--tol-overrides", type=JsonMapping())
    parser.add_argument("--config", type=FilePath())
    parser.add_argument("--out", type=Directory(allow_missing=True))
    return parser


@pytest.mark.parametrize(
    "args, message",
    [
        (["--seed", "-1"], "non-negative int"),
        (["--seed", "abc"], "non-negative int"),
        (["--seed", str(2**64)], "must not exceed"),
        (["--threads", "0"], "positive int"),
        (["--tol-overrides", "[1]"], "a JSON object is required"),
        (["--tol-overrides", "{x"], "invalid JSON"),
        (["--config", "-"], "must not be '-'"),
        (["--config", "/surely/not/a/config.json"], "Provide a valid file"),
    ],
)
def test_rejected(args: list[str], message: str, run_parser, capsys):
    with pytest.raises(SystemExit) as e:
        run_parser.parse_args(args)
    assert e.value.code == 2
    assert message in capsys.readouterr().err


def test_accepted(run_parser, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text("{}")
    args = run_parser.parse_args(
        [
            "--seed",
            "0",
            "--threads",
            "3",
            "--tol-overrides",
            '{"levinson": 0.05}',
            "--config",
            str(cfg),
            "--out",
            str(tmp_path / "new"),
        ]
    )
    assert args.seed == 0
    assert args.threads == 3
    assert args.tol_overrides == {"levinson": 0.05}
    assert args.config == cfg.resolve()
    assert args.out == tmp_path / "new"


def test_seed_upper_bound_inclusive(run_parser):
    assert run_parser.parse_args(["--seed", str(2**64 - 1)]).seed == 2**64 - 1


def test_out_must_be_directory(run_parser, tmp_path, capsys):
    f = tmp_path / "file"
    f.write_text("x")
    with pytest.raises(SystemExit):
        run_parser.parse_args(["--out", str(f)])
    assert "A directory is required" in capsys.readouterr().err


def test_existing_directory_refused_when_fresh_required(tmp_path):
    with pytest.raises(argparse.ArgumentTypeError, match="non-existing"):
        Directory(allow_already_exists=False)(str(tmp_path))
