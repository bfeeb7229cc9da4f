#!/usr/bin/env python3
# coding=utf-8

"""
Scattering data of an impurity: on-shell fibers, the wave operator kernel, time delay, the corner operators at the
band edges and Levinson's sum rule.
"""

# region re-export phase tracking
from vt.lattice.scattering.core.winding import PhaseTrack as PhaseTrack
from vt.lattice.scattering.core.winding import track_phase as track_phase
from vt.lattice.scattering.core.winding import wrap as wrap
# endregion

# region re-export fibers
from vt.lattice.scattering.core.fiber import ScatteringFiber as ScatteringFiber
from vt.lattice.scattering.core.fiber import fiber_at as fiber_at
from vt.lattice.scattering.core.fiber import fiber_from_matrices as fiber_from_matrices
from vt.lattice.scattering.core.fiber import fiber_scan as fiber_scan
# endregion

# region re-export wave operator kernel
from vt.lattice.scattering.core.kernel import (
    wave_operator_kernel as wave_operator_kernel,
)
# endregion

# region re-export time delay
from vt.lattice.scattering.core.time_delay import (
    SpectralPropertyCheck as SpectralPropertyCheck,
)
from vt.lattice.scattering.core.time_delay import (
    resolvent_trace_difference as resolvent_trace_difference,
)
from vt.lattice.scattering.core.time_delay import richardson as richardson
from vt.lattice.scattering.core.time_delay import spectral_property as spectral_property
from vt.lattice.scattering.core.time_delay import time_delay_trace as time_delay_trace
# endregion

# region re-export corners
from vt.lattice.scattering.core.corners import CornerData as CornerData
from vt.lattice.scattering.core.corners import EdgeLimit as EdgeLimit
from vt.lattice.scattering.core.corners import corner_factor as corner_factor
from vt.lattice.scattering.core.corners import corner_operators as corner_operators
from vt.lattice.scattering.core.corners import edge_limit as edge_limit
from vt.lattice.scattering.core.corners import rotation_number as rotation_number
# endregion

# region re-export Levinson
from vt.lattice.scattering.core.levinson import ContourData as ContourData
from vt.lattice.scattering.core.levinson import LevinsonLedger as LevinsonLedger
from vt.lattice.scattering.core.levinson import (
    argument_principle_winding as argument_principle_winding,
)
from vt.lattice.scattering.core.levinson import levinson_check as levinson_check
from vt.lattice.scattering.core.levinson import levinson_rhs as levinson_rhs
from vt.lattice.scattering.core.levinson import (
    point_impurity_contour as point_impurity_contour,
)
from vt.lattice.scattering.core.levinson import (
    scattering_phase_change as scattering_phase_change,
)
# endregion
