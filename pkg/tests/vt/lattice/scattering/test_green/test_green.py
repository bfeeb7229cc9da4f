#!/usr/bin/env python3
# coding=utf-8


"""
Tests for the energy grid, Cauchy transforms, spectral densities and Green boundary values.
"""

import math

import numpy as np
import pytest

from vt.lattice.scattering.band import BandFunction, find_critical_points
from vt.lattice.scattering.error_specs import AmbiguousBoundary, ConfigError, DomainError
from vt.lattice.scattering.green import (
    GreenBoundary,
    GridSpec,
    compute_density,
    edge_constant,
    energy_grid,
    hilbert_transform,
)
from vt.lattice.scattering.green.density import SpectralDensityMatrix, difference_vectors
from vt.lattice.scattering.green.hilbert import (
    cauchy_derivative,
    cauchy_integral,
    principal_value,
    semicircle_density,
    semicircle_green,
    sqrt_edge_density,
)
from vt.lattice.scattering.green.oracles import cubic_edge_green, laplacian_green
from vt.lattice.scattering.warnings import HolderOnlyWarning

SMALL_GRID = GridSpec(uniform_points=300, edge_points_per_decade=8, dyadic_levels=6, surface_points=1500)


@pytest.fixture(scope="session")
def semicircle() -> GreenBoundary:
    e = np.linspace(-1.0, 1.0, 4001)
    density = SpectralDensityMatrix(
        e,
        ((0,),),
        np.zeros((1, 1), dtype=np.int64),
        np.zeros((1, 1), dtype=np.int64),
        semicircle_density(e)[:, None].astype(complex),
        -1.0,
        1.0,
    )
    return GreenBoundary(density)


@pytest.fixture(scope="session")
def cubic_critical():
    return find_critical_points(BandFunction.laplacian(3))


@pytest.fixture(scope="session")
def cubic_flow_green(cubic_critical):
    band = BandFunction.laplacian(3)
    density = compute_density(band, [(0, 0, 0), (1, 0, 0)], grid_spec=SMALL_GRID, critical=cubic_critical, workers=2)
    return hilbert_transform(density, cubic_critical)


class TestGrid:
    def test_contains_edges_and_critical_values(self, cubic_critical):
        grid = energy_grid(cubic_critical, SMALL_GRID)
        assert grid.energies[0] == -6.0
        assert grid.energies[-1] == 6.0
        assert {-2.0, 2.0} <= set(grid.energies.tolist())
        assert np.all(np.diff(grid.energies) > 0)
        assert sorted(grid.energies[grid.critical_nodes()].tolist()) == [-2.0, 2.0]

    def test_edge_refinement_reaches_decades(self, cubic_critical):
        grid = energy_grid(cubic_critical, SMALL_GRID)
        gap = 6.0 - grid.energies[-2]
        assert gap == pytest.approx(6.0e-9, rel=1e-6)

    @pytest.mark.parametrize(
        "kwargs, path",
        [({"uniform_points": 1}, "grid.uniform_points"), ({"edge_decades": (3.0, 1.0)}, "grid.edge_decades")],
    )
    def test_spec_validation(self, kwargs, path):
        with pytest.raises(ConfigError) as e:
            GridSpec(**kwargs)
        assert e.value.path == path


class TestCauchy:
    @pytest.mark.parametrize("z", [0.3 + 0.5j, -0.8 + 0.01j, 2.0 + 1.0j])
    def test_semicircle_off_axis(self, z):
        e = np.linspace(-1.0, 1.0, 4001)
        g = cauchy_integral(e, semicircle_density(e), [z])[0]
        assert complex(g) == pytest.approx(complex(semicircle_green(z)), abs=2e-3)

    def test_lower_half_plane_conjugates(self):
        e = np.linspace(-1.0, 1.0, 801)
        rho = semicircle_density(e)
        up = cauchy_integral(e, rho, [0.2 + 0.3j])[0]
        down = cauchy_integral(e, rho, [0.2 - 0.3j])[0]
        assert complex(down) == pytest.approx(complex(np.conj(up)), abs=1e-12)

    def test_principal_value_inside(self):
        e = np.linspace(-1.0, 1.0, 4001)
        pv = principal_value(e, semicircle_density(e), [-0.6, 0.0, 0.9])
        assert np.allclose(pv, [-1.2, 0.0, 1.8], atol=2e-3)

    def test_derivative(self):
        e = np.linspace(-1.0, 1.0, 2001)
        rho = semicircle_density(e)
        z = 1.5
        h = 1e-5
        fd = (cauchy_integral(e, rho, [z + h]) - cauchy_integral(e, rho, [z - h])) / (2 * h)
        assert np.allclose(cauchy_derivative(e, rho, [z]), fd, rtol=1e-6)

    def test_matrix_valued(self):
        e = np.linspace(-1.0, 1.0, 401)
        rho = semicircle_density(e)
        values = np.stack([rho, 2.0 * rho], axis=1)
        g = cauchy_integral(e, values, [0.1 + 0.2j, 3.0])
        assert g.shape == (2, 2)
        assert np.allclose(g[:, 1], 2.0 * g[:, 0])


def edge_refined_knots() -> np.ndarray:
    gaps = 10.0 ** -np.linspace(1.0, 9.0, 65)
    return np.unique(np.concatenate([np.linspace(-1.0, 1.0, 2001), -1.0 + gaps, 1.0 - gaps]))


class TestSquareRootEdges:
    KNOTS = edge_refined_knots()
    RHO = semicircle_density(KNOTS)

    def test_edge_value(self):
        corrected = principal_value(self.KNOTS, self.RHO, [-1.0, 1.0], sqrt_edges=True)
        linear = principal_value(self.KNOTS, self.RHO, [1.0])
        assert np.allclose(corrected, [-2.0, 2.0], atol=1e-4)
        assert abs(float(linear[0]) - 2.0) > 10.0 * abs(float(corrected[1]) - 2.0)

    @pytest.mark.parametrize("energy", [0.999, 1.0 - 3e-6, 0.3, -0.9999])
    def test_principal_value_near_edges(self, energy):
        pv = principal_value(self.KNOTS, self.RHO, [energy], sqrt_edges=True)
        assert float(pv[0]) == pytest.approx(2.0 * energy, abs=1e-4)

    def test_edge_approach_is_monotone(self):
        # Re G(1 - t) = 2 - 2t for the semicircle
        t = np.array([3e-3, 3e-4, 3e-5, 3e-6, 3e-7, 3e-8])
        at_edge = principal_value(self.KNOTS, self.RHO, [1.0], sqrt_edges=True)[0]
        gap = at_edge - principal_value(self.KNOTS, self.RHO, 1.0 - t, sqrt_edges=True)
        assert np.all(gap > 0.0)
        assert np.all(np.diff(gap) < 0.0)
        assert np.allclose(gap / (2.0 * t), 1.0, rtol=5e-2)

    @pytest.mark.parametrize("z", [1.0 + 1e-6j, 0.999 + 1e-3j, -1.2 + 0.0j])
    def test_off_axis(self, z):
        g = cauchy_integral(self.KNOTS, self.RHO, [z], sqrt_edges=True)[0]
        assert complex(g) == pytest.approx(complex(semicircle_green(z)), abs=1e-4)

    @pytest.mark.parametrize("z", [1.5, -1.5, 0.3 + 0.2j])
    def test_derivative(self, z):
        h = 1e-6
        fd = (
            cauchy_integral(self.KNOTS, self.RHO, [z + h], sqrt_edges=True)
            - cauchy_integral(self.KNOTS, self.RHO, [z - h], sqrt_edges=True)
        ) / (2 * h)
        assert np.allclose(cauchy_derivative(self.KNOTS, self.RHO, [z], sqrt_edges=True), fd, rtol=1e-5)

    def test_density_follows_square_root_law(self):
        t = np.array([1e-10, 1e-11, 1e-12])
        rho = sqrt_edge_density(self.KNOTS, self.RHO, 1.0 - t)[:, 0]
        assert np.allclose(rho / np.sqrt(t), 2.0 * math.sqrt(2.0) / math.pi, rtol=1e-4)

    def test_ends_with_a_value_stay_linear(self):
        e = np.linspace(0.0, 1.0, 11)
        values = 0.7 + 0.3 * e
        z = [0.25, 2.0]
        assert np.allclose(principal_value(e, values, z, sqrt_edges=True), principal_value(e, values, z))


class TestOneSidedDensity:
    """
    A density ``rho(e) = 1_{e >= 0} phi(e)`` with ``phi(0) = 0.7``.
    """

    KNOTS = np.linspace(0.0, 1.0, 101)
    PHI = 0.7 + 0.3 * KNOTS

    @pytest.mark.parametrize("side", [-1, 1])
    def test_half_jump(self, side):
        g = cauchy_integral(self.KNOTS, self.PHI, [side * 1e-7j])[0]
        assert complex(g).imag == pytest.approx(-side * 0.5 * math.pi * 0.7, abs=1e-3)

    @pytest.mark.parametrize("sign", [-1, 1])
    def test_log_coefficient(self, sign):
        energies = sign * np.array([1e-4, 1e-6])
        pv = principal_value(self.KNOTS, self.PHI, energies)
        slope = (pv[1] - pv[0]) / (math.log(1e-6) - math.log(1e-4))
        assert float(slope) == pytest.approx(0.7, abs=1e-3)


class TestPlemelj:
    def test_boundary_values_jump(self, semicircle):
        e = semicircle.energies[1:-1]
        jump = semicircle.boundary(e, -1) - semicircle.boundary(e, 1)
        assert np.allclose(jump[:, 0, 0], 2j * math.pi * semicircle_density(e), atol=1e-6)

    @pytest.mark.parametrize("energy", [-0.6, 0.0, 0.45])
    def test_off_axis_limit_jump(self, energy):
        e = np.linspace(-1.0, 1.0, 4001)
        rho = semicircle_density(e)
        eta = 1e-9
        jump = cauchy_integral(e, rho, [energy - 1j * eta])[0] - cauchy_integral(e, rho, [energy + 1j * eta])[0]
        assert complex(jump) == pytest.approx(2j * math.pi * float(semicircle_density(energy)), abs=1e-6)


class TestGreenBoundary:
    @pytest.mark.parametrize("energy", [-0.7, 0.0, 0.5])
    @pytest.mark.parametrize("side", [-1, 1])
    def test_boundary_values(self, semicircle, energy, side):
        g = semicircle.boundary(energy, side)[0, 0]
        assert complex(g) == pytest.approx(complex(semicircle_green(energy, side)), abs=2e-3)

    def test_lower_boundary_has_positive_imaginary_part(self, semicircle):
        assert np.all(semicircle.boundary(np.linspace(-0.9, 0.9, 7), -1)[:, 0, 0].imag > 0)

    def test_outside_band(self, semicircle):
        assert complex(semicircle.green_at(2.0)[0, 0]) == pytest.approx(complex(semicircle_green(2.0)), abs=1e-4)

    @pytest.mark.parametrize("y", [1e2, 1e3, 1e4])
    def test_large_imaginary_argument(self, semicircle, y):
        # unit mass: G(z) ~ 1/z
        g = complex(semicircle.green_at(1j * y)[0, 0])
        assert abs(g * 1j * y - 1.0) < 1e-3

    def test_herglotz_sign(self, semicircle):
        for x in (-3.0, -0.99, 0.0, 0.4, 1.0, 2.5):
            for y in (1e-6, 1e-2, 1.0, 50.0):
                assert complex(semicircle.green_at(complex(x, y))[0, 0]).imag < 0.0
                assert complex(semicircle.green_at(complex(x, -y))[0, 0]).imag > 0.0

    def test_herglotz_sign_of_a_matrix(self):
        e = np.linspace(-1.0, 1.0, 2001)
        wide = semicircle_density(e)
        narrow = semicircle_density(e / 0.5) / 0.5
        values = np.stack([(wide - narrow) / 2, (wide + narrow) / 2, (wide - narrow) / 2], axis=1).astype(complex)
        diffs, index = difference_vectors([(0,), (1,)])
        green = GreenBoundary(SpectralDensityMatrix(e, ((0,), (1,)), diffs, index, values, -1.0, 1.0))
        for z in (0.7 + 1e-3j, -0.2 + 0.5j, 3.0 + 2.0j):
            g = green.green_at(z)
            assert np.linalg.eigvalsh((g - np.conj(g.T)) / 2j).max() < 0.0

    def test_ambiguous_inside(self, semicircle):
        with pytest.raises(AmbiguousBoundary):
            semicircle.green_at(0.5)

    def test_side_must_be_sign(self, semicircle):
        with pytest.raises(DomainError):
            semicircle.boundary(0.5, side=0)

    def test_derivative_outside(self, semicircle):
        h = 1e-5
        fd = (semicircle.green_at(1.5 + h) - semicircle.green_at(1.5 - h)) / (2 * h)
        assert np.allclose(semicircle.derivative(1.5), fd, rtol=1e-6)
        with pytest.raises(DomainError):
            semicircle.derivative(0.5)

    def test_boundary_derivative(self, semicircle):
        # d/dE G(E - i0) = 2 (1 - i E / sqrt(1 - E^2))
        energy = 0.3
        expected = 2.0 * (1.0 - 1j * energy / math.sqrt(1.0 - energy**2))
        assert complex(semicircle.boundary_derivative(energy)[0, 0]) == pytest.approx(expected, abs=1e-2)

    def test_kramers_kronig(self, semicircle):
        recovered = semicircle.kramers_kronig()[:, 0].real
        interior = semicircle.energies[1:-1]
        away = np.abs(interior) < 0.95
        assert np.max(np.abs(recovered[away] - semicircle_density(interior[away]))) < 1e-2


def quadratic_table(dimension: int) -> GreenBoundary:
    """
    One site with ``rho = (3/4)(1 - E^2)`` on ``[-1, 1]``, whose edges vanish linearly as in four dimensions.
    """
    e = np.linspace(-1.0, 1.0, 2001)
    density = SpectralDensityMatrix(
        e,
        ((0,) * dimension,),
        np.zeros((1, dimension), dtype=np.int64),
        np.zeros((1, 1), dtype=np.int64),
        (0.75 * (1.0 - e**2))[:, None].astype(complex),
        -1.0,
        1.0,
    )
    return GreenBoundary(density)


def semicircle_table3() -> GreenBoundary:
    e = edge_refined_knots()
    density = SpectralDensityMatrix(
        e,
        ((0, 0, 0),),
        np.zeros((1, 3), dtype=np.int64),
        np.zeros((1, 1), dtype=np.int64),
        semicircle_density(e)[:, None].astype(complex),
        -1.0,
        1.0,
    )
    return GreenBoundary(density)


class TestEdgeAsymptotics:
    def test_four_dimensional_edges(self):
        band = BandFunction.laplacian(4, hopping=0.125)
        edges = hilbert_transform(quadratic_table(4).density, find_critical_points(band)).edges
        for sign, edge in edges.items():
            assert edge.expected_exponent == 1.0
            assert edge.exponent == pytest.approx(1.0, abs=1e-2)
            assert edge.constant == pytest.approx(1.5 * math.pi, rel=1e-2)
            # Re G(E+- -+ eps) - G(E+-) ~ +-(3/2) eps ln(1/eps)
            assert edge.log_coefficient == pytest.approx(1.5 * sign, rel=0.1)
            assert edge.slope is None
            assert edge.to_dict()["expected_exponent"] == 1.0

    def test_three_dimensional_expected_exponent(self):
        band = BandFunction.laplacian(3, hopping=1.0 / 6.0)
        edges = hilbert_transform(semicircle_table3().density, find_critical_points(band)).edges
        for edge in edges.values():
            assert edge.expected_exponent == 0.5
            assert edge.exponent == pytest.approx(0.5, abs=1e-2)
            assert edge.log_coefficient is None


class TestDensity:
    def test_difference_vectors(self):
        diffs, index = difference_vectors([(0, 0, 0), (1, 0, 0), (0, 1, 0)])
        assert len(diffs) == 7
        for n, a in enumerate([(0, 0, 0), (1, 0, 0), (0, 1, 0)]):
            for m, b in enumerate([(0, 0, 0), (1, 0, 0), (0, 1, 0)]):
                assert tuple(diffs[index[n, m]]) == tuple(y - x for x, y in zip(a, b))

    def test_edge_constant_cubic(self):
        assert edge_constant(2.0 * np.eye(3)) == pytest.approx(1 / (4 * np.pi))
        assert edge_constant(2.0 * np.eye(3), n_sites=3) == pytest.approx(3 / (4 * np.pi))

    def test_unknown_method(self):
        with pytest.raises(DomainError):
            compute_density(BandFunction.laplacian(3), [(0, 0, 0)], method="magic")

    def test_site_dimension_checked(self):
        with pytest.raises(DomainError):
            compute_density(BandFunction.laplacian(3), [(0, 0)], method="oracle")

    def test_oracle_normalised_and_symmetric(self, cubic_critical):
        density = compute_density(
            BandFunction.laplacian(3),
            [(0, 0, 0), (1, 0, 0)],
            method="oracle",
            grid_spec=GridSpec(uniform_points=400, oracle_resolution=48),
            critical=cubic_critical,
        )
        total = density.total_weight()
        assert np.allclose(total, np.eye(2), atol=2e-3)
        rho = density.rho
        assert np.allclose(rho, np.conj(np.swapaxes(rho, 1, 2)))

    @pytest.mark.parametrize("energy", [-8.0, 7.0])
    def test_oracle_outside_band(self, cubic_critical, energy):
        density = compute_density(
            BandFunction.laplacian(3),
            [(0, 0, 0)],
            method="oracle",
            grid_spec=GridSpec(uniform_points=800, oracle_resolution=64),
            critical=cubic_critical,
        )
        g = GreenBoundary(density).green_at(energy)[0, 0].real
        assert g == pytest.approx(laplacian_green(3, energy), rel=1e-2)

    def test_holder_warning_at_critical_value(self):
        e = np.linspace(-1.0, 1.0, 11)
        density = SpectralDensityMatrix(
            e,
            ((0,),),
            np.zeros((1, 1), dtype=np.int64),
            np.zeros((1, 1), dtype=np.int64),
            semicircle_density(e)[:, None].astype(complex),
            -1.0,
            1.0,
            critical_values=(0.2,),
        )
        with pytest.warns(HolderOnlyWarning):
            density.at(0.2)


class TestLaplacianOracles:
    def test_one_dimension(self):
        assert laplacian_green(1, 3.0) == pytest.approx(1 / math.sqrt(5.0))
        assert laplacian_green(1, 3.0, [1]) == pytest.approx((3.0 - math.sqrt(5.0)) / 2 / math.sqrt(5.0))

    def test_parity_below_band(self):
        assert laplacian_green(3, -7.0, [1, 0, 0]) == pytest.approx(laplacian_green(3, 7.0, [1, 0, 0]))
        assert laplacian_green(3, -7.0, [1, 1, 0]) == pytest.approx(-laplacian_green(3, 7.0, [1, 1, 0]))

    def test_hopping_scales(self):
        assert laplacian_green(3, 3.5, hopping=0.5) == pytest.approx(2.0 * laplacian_green(3, 7.0))

    @pytest.mark.parametrize("dimension, energy", [(3, 5.0), (2, 4.0), (1, 2.0)])
    def test_domain(self, dimension, energy):
        with pytest.raises(DomainError):
            laplacian_green(dimension, energy)

    def test_watson_edge_value(self):
        pytest.importorskip("mpmath")
        assert cubic_edge_green() == pytest.approx(laplacian_green(3, 6.0), rel=1e-6)


@pytest.mark.slow
class TestFlowDensity:
    def test_total_weight(self, cubic_flow_green):
        assert np.allclose(cubic_flow_green.density.total_weight(), np.eye(2), atol=1e-2)

    def test_edge_value_matches_watson(self, cubic_flow_green):
        pytest.importorskip("mpmath")
        g = cubic_flow_green.green_at(6.0)[0, 0].real
        assert g == pytest.approx(cubic_edge_green(), rel=1e-2)

    @pytest.mark.parametrize("energy", [-8.0, 7.0, 10.0])
    def test_outside_band_matches_bessel_integral(self, cubic_flow_green, energy):
        g = cubic_flow_green.green_at(energy)
        assert g[0, 0].real == pytest.approx(laplacian_green(3, energy), rel=5e-3)
        assert g[0, 1].real == pytest.approx(laplacian_green(3, energy, [1, 0, 0]), rel=2e-2)

    def test_edge_exponent_and_constant(self, cubic_flow_green):
        for sign, edge in cubic_flow_green.edges.items():
            assert edge.exponent == pytest.approx(0.5, abs=0.05)
            assert edge.constant / edge.D == pytest.approx(1.0, rel=0.1)

    def test_kramers_kronig_consistency(self, cubic_flow_green):
        recovered = cubic_flow_green.kramers_kronig()
        d = cubic_flow_green.density
        interior = (d.energies > d.E_minus) & (d.energies < d.E_plus)
        assert np.max(np.abs(recovered - d.values[interior])) < 1e-2

    def test_imaginary_part_positive_semidefinite(self, cubic_flow_green):
        im = cubic_flow_green.im_table
        assert np.linalg.eigvalsh(im).min() > -1e-8
