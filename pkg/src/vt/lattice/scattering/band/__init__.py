#!/usr/bin/env python3
# coding=utf-8

"""
The band function, its critical points, the rescaled energy and the integer lattice geometry of impurity supports.
"""

# region re-export band function
from vt.lattice.scattering.band.function import BandFunction as BandFunction
from vt.lattice.scattering.band.function import Site as Site
from vt.lattice.scattering.band.function import evaluate_band as evaluate_band
from vt.lattice.scattering.band.function import lattice_fourier as lattice_fourier
# endregion

# region re-export critical points
from vt.lattice.scattering.band.critical import CriticalPoint as CriticalPoint
from vt.lattice.scattering.band.critical import CriticalPointSet as CriticalPointSet
from vt.lattice.scattering.band.critical import (
    find_critical_points as find_critical_points,
)
from vt.lattice.scattering.band.critical import torus_distance as torus_distance
# endregion

# region re-export rescaled energy
from vt.lattice.scattering.band.rescale import RescaledEnergyMap as RescaledEnergyMap
from vt.lattice.scattering.band.rescale import rescale_maps as rescale_maps
# endregion

# region re-export lattice geometry
from vt.lattice.scattering.band.geometry import ContactHalfPlane as ContactHalfPlane
from vt.lattice.scattering.band.geometry import LatticeGeometry as LatticeGeometry
from vt.lattice.scattering.band.geometry import SiteSet as SiteSet
from vt.lattice.scattering.band.geometry import (
    complete_to_unimodular as complete_to_unimodular,
)
from vt.lattice.scattering.band.geometry import (
    contact_halfplanes as contact_halfplanes,
)
from vt.lattice.scattering.band.geometry import (
    hull_interior_chain as hull_interior_chain,
)
from vt.lattice.scattering.band.geometry import (
    hull_lattice_points as hull_lattice_points,
)
from vt.lattice.scattering.band.geometry import is_prime_vector as is_prime_vector
from vt.lattice.scattering.band.geometry import s_interior as s_interior
from vt.lattice.scattering.band.geometry import s_interior_chain as s_interior_chain
# endregion
