#!/usr/bin/env python3
# coding=utf-8

"""
Error codes, messages and the exception hierarchy of the lattice scattering pipeline.
"""

# region re-export constants
from vt.lattice.scattering.error_specs.__constants__ import EXIT_OK as EXIT_OK
from vt.lattice.scattering.error_specs.__constants__ import (
    ERR_GENERIC_ERR as ERR_GENERIC_ERR,
)
from vt.lattice.scattering.error_specs.__constants__ import ERR_CONFIG as ERR_CONFIG
from vt.lattice.scattering.error_specs.__constants__ import (
    ERR_INVALID_USAGE as ERR_INVALID_USAGE,
)
from vt.lattice.scattering.error_specs.__constants__ import (
    ERR_NUMERICAL_FAILURE as ERR_NUMERICAL_FAILURE,
)
from vt.lattice.scattering.error_specs.__constants__ import (
    ERR_PHYSICS_VIOLATION as ERR_PHYSICS_VIOLATION,
)
from vt.lattice.scattering.error_specs.__constants__ import (
    ERR_SIGINT_RECEIVED as ERR_SIGINT_RECEIVED,
)
from vt.lattice.scattering.error_specs.__constants__ import (
    type_name_map as type_name_map,
)
# endregion


# region re-export error message helpers/classes
from vt.lattice.scattering.error_specs.errmsg import ErrorMsgFormer as ErrorMsgFormer
from vt.lattice.scattering.error_specs.errmsg import (
    ErrorMessageFormer as ErrorMessageFormer,
)
# endregion


# region re-export exceptions
from vt.lattice.scattering.error_specs.exceptions import HasExitCode as HasExitCode
from vt.lattice.scattering.error_specs.exceptions import (
    LatticeScatteringException as LatticeScatteringException,
)
from vt.lattice.scattering.error_specs.exceptions import (
    LatticeScatteringExitingException as LatticeScatteringExitingException,
)
from vt.lattice.scattering.error_specs.exceptions import ConfigError as ConfigError
from vt.lattice.scattering.error_specs.exceptions import DomainError as DomainError
from vt.lattice.scattering.error_specs.exceptions import (
    NumericalFailure as NumericalFailure,
)
from vt.lattice.scattering.error_specs.exceptions import (
    MorseViolation as MorseViolation,
)
from vt.lattice.scattering.error_specs.exceptions import (
    SamplingFailure as SamplingFailure,
)
from vt.lattice.scattering.error_specs.exceptions import (
    NearSingularTrajectory as NearSingularTrajectory,
)
from vt.lattice.scattering.error_specs.exceptions import (
    AmbiguousBoundary as AmbiguousBoundary,
)
from vt.lattice.scattering.error_specs.exceptions import (
    PhysicsViolation as PhysicsViolation,
)
from vt.lattice.scattering.error_specs.exceptions import (
    AssumptionViolation as AssumptionViolation,
)
from vt.lattice.scattering.error_specs.exceptions import (
    IsotropyViolation as IsotropyViolation,
)
from vt.lattice.scattering.error_specs.exceptions import Unsupported as Unsupported
from vt.lattice.scattering.error_specs.exceptions import (
    LevinsonViolation as LevinsonViolation,
)
# endregion
