#!/usr/bin/env python3
# coding=utf-8

"""
The energy flow of a band: its vector field, quadrature of the reference surface and the localised states carried
by the flow.
"""

# region re-export flow field
from vt.lattice.scattering.flow.field import FlowField as FlowField
from vt.lattice.scattering.flow.field import FlowSolution as FlowSolution
# endregion

# region re-export surface sampling
from vt.lattice.scattering.flow.surface import SurfaceSample as SurfaceSample
from vt.lattice.scattering.flow.surface import project_to_level as project_to_level
from vt.lattice.scattering.flow.surface import (
    sample_reference_surface as sample_reference_surface,
)
from vt.lattice.scattering.flow.surface import (
    transport_dos_weights as transport_dos_weights,
)
# endregion

# region re-export states
from vt.lattice.scattering.flow.states import LimitState as LimitState
from vt.lattice.scattering.flow.states import TransportedState as TransportedState
from vt.lattice.scattering.flow.states import check_isotropic as check_isotropic
from vt.lattice.scattering.flow.states import gram_matrix as gram_matrix
from vt.lattice.scattering.flow.states import limit_state as limit_state
from vt.lattice.scattering.flow.states import localized_state as localized_state
from vt.lattice.scattering.flow.states import localized_states as localized_states
from vt.lattice.scattering.flow.states import patch_db_factors as patch_db_factors
# endregion
