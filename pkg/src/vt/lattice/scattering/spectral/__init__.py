#!/usr/bin/env python3
# coding=utf-8

"""
Impurity models, their T-matrix and perturbed Green matrix, and the bound states of ``H0 + V``.
"""

# region re-export models
from vt.lattice.scattering.spectral.model import Channels as Channels
from vt.lattice.scattering.spectral.model import ImpurityModel as ImpurityModel
# endregion

# region re-export T-matrix
from vt.lattice.scattering.spectral.tmatrix import ImpuritySolution as ImpuritySolution
from vt.lattice.scattering.spectral.tmatrix import perturbed_green as perturbed_green
from vt.lattice.scattering.spectral.tmatrix import solve_from_green as solve_from_green
from vt.lattice.scattering.spectral.tmatrix import solve_impurity as solve_impurity
from vt.lattice.scattering.spectral.tmatrix import t_matrix as t_matrix
# endregion

# region re-export embedded states
from vt.lattice.scattering.spectral.embedded import EmbeddedSearch as EmbeddedSearch
from vt.lattice.scattering.spectral.embedded import EmbeddedState as EmbeddedState
from vt.lattice.scattering.spectral.embedded import (
    NoEmbeddedCertificate as NoEmbeddedCertificate,
)
from vt.lattice.scattering.spectral.embedded import (
    embedded_eigenvector_search as embedded_eigenvector_search,
)
from vt.lattice.scattering.spectral.embedded import (
    exact_embedded_states as exact_embedded_states,
)
from vt.lattice.scattering.spectral.embedded import (
    no_embedded_check as no_embedded_check,
)
from vt.lattice.scattering.spectral.embedded import shell_candidates as shell_candidates
# endregion

# region re-export bound states
from vt.lattice.scattering.spectral.bound import BoundState as BoundState
from vt.lattice.scattering.spectral.bound import BoundStateReport as BoundStateReport
from vt.lattice.scattering.spectral.bound import ThresholdState as ThresholdState
from vt.lattice.scattering.spectral.bound import GreenScan as GreenScan
from vt.lattice.scattering.spectral.bound import ScanLevel as ScanLevel
from vt.lattice.scattering.spectral.bound import find_bound_states as find_bound_states
from vt.lattice.scattering.spectral.bound import green_scan as green_scan
from vt.lattice.scattering.spectral.bound import isolated_states as isolated_states
from vt.lattice.scattering.spectral.bound import threshold_state as threshold_state
from vt.lattice.scattering.spectral.bound import edge_resolution as edge_resolution
# endregion
