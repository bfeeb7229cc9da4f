#!/usr/bin/env python3
# coding=utf-8

"""
Constants related to errors.
"""

# region explicit re-export of error codes
from vt.lattice.scattering.error_specs.error_codes import EXIT_OK as EXIT_OK
from vt.lattice.scattering.error_specs.error_codes import (
    ERR_GENERIC_ERR as ERR_GENERIC_ERR,
)
from vt.lattice.scattering.error_specs.error_codes import ERR_CONFIG as ERR_CONFIG
from vt.lattice.scattering.error_specs.error_codes import (
    ERR_INVALID_USAGE as ERR_INVALID_USAGE,
)
from vt.lattice.scattering.error_specs.error_codes import (
    ERR_NUMERICAL_FAILURE as ERR_NUMERICAL_FAILURE,
)
from vt.lattice.scattering.error_specs.error_codes import (
    ERR_PHYSICS_VIOLATION as ERR_PHYSICS_VIOLATION,
)
from vt.lattice.scattering.error_specs.error_codes import (
    ERR_SIGINT_RECEIVED as ERR_SIGINT_RECEIVED,
)
# endregion


type_name_map: dict[type, str] = {
    str: "a string",
    int: "an int",
    float: "a number",
    bool: "a boolean",
    list: "a JSON array",
    dict: "a JSON object",
}
"Human readable names of JSON-ish value types, used in config validation messages."
