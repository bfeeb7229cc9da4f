#!/usr/bin/env python3
# coding=utf-8

"""
Spectral densities on finite site sets and the boundary values of the free Green function built from them.
"""

# region re-export grids
from vt.lattice.scattering.green.grid import EnergyGrid as EnergyGrid
from vt.lattice.scattering.green.grid import GridSpec as GridSpec
from vt.lattice.scattering.green.grid import energy_grid as energy_grid
from vt.lattice.scattering.green.grid import extended_energies as extended_energies
# endregion

# region re-export Cauchy integrals
from vt.lattice.scattering.green.hilbert import cauchy_derivative as cauchy_derivative
from vt.lattice.scattering.green.hilbert import cauchy_integral as cauchy_integral
from vt.lattice.scattering.green.hilbert import inverse_hilbert as inverse_hilbert
from vt.lattice.scattering.green.hilbert import principal_value as principal_value
# endregion

# region re-export densities
from vt.lattice.scattering.green.density import (
    SpectralDensityMatrix as SpectralDensityMatrix,
)
from vt.lattice.scattering.green.density import compute_density as compute_density
from vt.lattice.scattering.green.density import (
    difference_vectors as difference_vectors,
)
from vt.lattice.scattering.green.density import edge_constant as edge_constant
from vt.lattice.scattering.green.density import (
    histogram_density as histogram_density,
)
# endregion

# region re-export boundary values
from vt.lattice.scattering.green.boundary import EdgeData as EdgeData
from vt.lattice.scattering.green.boundary import GreenBoundary as GreenBoundary
from vt.lattice.scattering.green.boundary import (
    edge_asymptotics as edge_asymptotics,
)
from vt.lattice.scattering.green.boundary import edge_vector as edge_vector
from vt.lattice.scattering.green.boundary import (
    hilbert_transform as hilbert_transform,
)
# endregion
