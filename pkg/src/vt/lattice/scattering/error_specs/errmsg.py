#!/usr/bin/env python3
# coding=utf-8

"""
Message building for configuration and numerical-input validation.
"""

from collections.abc import Sequence
from typing import Any


class ErrorMessageFormer:
    """
    Use the ``ErrorMsgFormer`` module singleton instead of instantiating this class directly.

    Forms validation messages that name the offending config location precisely, e.g.
    ``'impurity.sites[2]' must be an int``.

    >>> ErrorMsgFormer.at_path("grid.n_uniform", "must be a positive int")
    "'grid.n_uniform' must be a positive int"
    """

    @staticmethod
    def _quoted_list(items: Sequence[Any]) -> str:
        quoted = [f"'{item}'" for item in items]
        if len(quoted) < 2:
            return "".join(quoted)
        return f"{', '.join(quoted[:-1])} and {quoted[-1]}"

    @staticmethod
    def join_path(path: str, key: str | int) -> str:
        """
        Extend a dotted config path by a key or an array index.

        >>> ErrorMsgFormer.join_path("", "band")
        'band'
        >>> ErrorMsgFormer.join_path("band", "coefficients")
        'band.coefficients'
        >>> ErrorMsgFormer.join_path("band.coefficients", 3)
        'band.coefficients[3]'
        """
        if isinstance(key, int):
            return f"{path}[{key}]"
        return f"{path}.{key}" if path else key

    def at_path(self, path: str, requirement: str, *, prefix: str = "") -> str:
        """
        >>> ErrorMsgFormer.at_path("seed", "must be a non-negative int", prefix="config: ")
        "config: 'seed' must be a non-negative int"
        """
        return f"{prefix}'{path}' {requirement}"

    def out_of_range(
        self,
        name: str,
        value: Any,
        low: Any = None,
        high: Any = None,
        *,
        inclusive: bool = True,
    ) -> str:
        """
        Message for a value outside an admissible interval. A missing end is unbounded and always open.

        >>> ErrorMsgFormer.out_of_range("E", 7.0, -6.0, 6.0)
        'E=7.0 lies outside [-6.0, 6.0]'
        >>> ErrorMsgFormer.out_of_range("epsilon", 0.0, low=0.0, inclusive=False)
        'epsilon=0.0 lies outside (0.0, inf)'
        """
        left = "[" if inclusive and low is not None else "("
        right = "]" if inclusive and high is not None else ")"
        lo = "-inf" if low is None else low
        hi = "inf" if high is None else high
        return f"{name}={value} lies outside {left}{lo}, {hi}{right}"

    def errmsg_for_choices(
        self,
        value: str = "value",
        emphasis: str | None = None,
        choices: Sequence[Any] | None = None,
        prefix: str = "",
        suffix: str = "",
    ) -> str:
        """
        Message for a value that is not among the accepted choices.

        >>> ErrorMsgFormer.errmsg_for_choices(emphasis='impurity kind', choices=['diagonal', 'barrier', 'general'])
        "Unexpected impurity kind value. Choose from 'diagonal', 'barrier' and 'general'."

        >>> ErrorMsgFormer.errmsg_for_choices(value="'tails'", emphasis='side', choices=['-', '+'])
        "Unexpected side 'tails'. Choose from '-' and '+'."

        :param value: the offending value as it should be shown.
        :param emphasis: what the value is, e.g. ``'density method'``.
        :param choices: accepted options.
        """
        msg = f"{prefix}Unexpected {emphasis + ' ' if emphasis else ''}{value}"
        if choices:
            msg += f". Choose from {self._quoted_list(choices)}"
        return f"{msg}.{suffix}"


ErrorMsgFormer = ErrorMessageFormer()
"""
A stateless singleton for reusable validation error messages.
"""
