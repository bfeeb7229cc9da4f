#!/usr/bin/env python3
# coding=utf-8

"""
Numerical tolerances shared by every stage of the pipeline, with their defaults.
"""

import dataclasses
import math
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Any

from vt.lattice.scattering.error_specs import ConfigError, ErrorMsgFormer
from vt.lattice.scattering.error_specs.utils import require_keys, require_type


@dataclass(frozen=True)
class Tolerances:
    """
    All tolerances of a run. Every field has a default; a run configuration overrides any subset of them.

    >>> Tolerances().merged({"levinson": 0.05}).levinson
    0.05
    >>> try:
    ...     Tolerances().merged({"levinson": -1.0})
    ... except ConfigError as e:
    ...     print(e)
    ValueError: 'tolerances.levinson' must be positive
    """

    exclusion_radius: float = 1e-3
    "Radius around saddle points inside which a single flow trajectory is refused."
    transport_exclusion_radius: float = 1e-6
    "Radius around saddle points inside which a transported surface sample is pruned."
    ode_rtol: float = 1e-10
    ode_atol: float = 1e-10
    surface: float = 1e-10
    "Largest admissible ``|E(sigma) - E_r|`` of a reference surface point."
    energy_residual: float = 1e-7
    "Largest admissible drift of the energy along a transported trajectory, relative to the half band width."
    svd_cutoff: float = 1e-10
    "Relative cutoff of the pseudo powers ``|Im G|^{+-1/2}``."
    kernel_zero: float = 1e-8
    "Singular values below ``kernel_zero * ||M||`` count as zero."
    kernel_warn: float = 1e-6
    "Singular values in ``[kernel_zero, kernel_warn] * ||M||`` are counted with a warning."
    invertibility: float = 1e-12
    "Smallest admissible singular value of the impurity matrix relative to its norm."
    isotropy: float = 1e-8
    "Largest admissible deviation of an extremal Hessian from a multiple of the identity."
    threshold_zero: float = 1e-10
    "Taylor coefficients of ``v(k)`` at a band extremum below this count as zero."
    bisection: float = 1e-10
    "Energy resolution of bound state bisection."
    phase_step: float = math.pi / 4
    "Largest phase step accepted while unwrapping an argument."
    levinson: float = 0.02
    "Largest admissible Levinson residual."
    edge_fit_residual: float = 0.1
    "Relative residual of the band edge fit above which a warning is issued."
    b_max: float = 12.0
    "Largest rescaled energy a localised state is transported to."

    def __post_init__(self):
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if not value > 0.0:
                path = ErrorMsgFormer.join_path("tolerances", f.name)
                errmsg = ErrorMsgFormer.at_path(path, "must be positive")
                raise ConfigError(errmsg, path=path) from ValueError(errmsg)

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in dataclasses.fields(cls))

    def merged(self, overrides: Mapping[str, Any], var_name: str = "tolerances") -> "Tolerances":
        """
        Copy with the given fields replaced, validated like the rest of a run configuration.

        :param overrides: JSON object of tolerance names to numbers.
        :param var_name: config path used in error messages.
        :raises ConfigError: for an unknown name or a non-numeric or non-positive value.
        """
        require_keys(overrides, var_name, optional=self.field_names())
        for key, value in overrides.items():
            require_type(value, ErrorMsgFormer.join_path(var_name, key), float, lenient=True)
        return dataclasses.replace(self, **{k: float(v) for k, v in overrides.items()})

    def to_dict(self) -> dict[str, float]:
        return dataclasses.asdict(self)


DEFAULT_TOLERANCES = Tolerances()
