#!/usr/bin/env python3
# coding=utf-8


"""
Tests for the energy flow, surface quadrature and localised states.
"""

import numpy as np
import pytest
from scipy import special

from vt.lattice.scattering.band import BandFunction, find_critical_points, rescale_maps
from vt.lattice.scattering.error_specs import DomainError, IsotropyViolation, NearSingularTrajectory
from vt.lattice.scattering.flow import (
    FlowField,
    check_isotropic,
    gram_matrix,
    limit_state,
    localized_state,
    localized_states,
    patch_db_factors,
)
from vt.lattice.scattering.flow.surface import sample_reference_surface, transport_dos_weights


@pytest.fixture(scope="session")
def cubic_flow() -> FlowField:
    band = BandFunction.laplacian(3)
    cps = find_critical_points(band)
    return FlowField(band, rescale_maps(cps), cps, exclusion_radius=1e-6)


@pytest.fixture(scope="session")
def cubic_sample(cubic_flow):
    return sample_reference_surface(cubic_flow, 800)


@pytest.fixture(scope="session")
def square_flow() -> FlowField:
    band = BandFunction.laplacian(2)
    cps = find_critical_points(band)
    return FlowField(band, rescale_maps(cps), cps, exclusion_radius=1e-6)


def square_dos(energy: float) -> float:
    return float(special.ellipk(1.0 - energy**2 / 16.0) / (2 * np.pi**2))


class TestFlowField:
    def test_moves_energy_by_rescaled_time(self, cubic_flow):
        rescale = cubic_flow.rescale
        k = np.array([[0.4, 1.3, 2.2], [2.9, 0.2, 1.0], [1.7, 1.7, 0.3]])
        for b in (-1.5, 0.7, 2.0):
            end, _ = cubic_flow.flow_to(k, b)
            before = rescale.f(cubic_flow.band.evaluate(k))
            after = rescale.f(cubic_flow.band.evaluate(end))
            assert np.allclose(after - before, b, atol=1e-7)

    def test_group_law(self, cubic_flow):
        k = np.array([0.4, 1.3, 2.2])
        mid, j1 = cubic_flow.flow_to(k, 0.3)
        end, j2 = cubic_flow.flow_to(mid, 0.5)
        direct, j = cubic_flow.flow_to(k, 0.8)
        assert np.allclose(end, direct, atol=1e-8)
        assert j1 + j2 == pytest.approx(j, abs=1e-8)

    def test_divergence_near_maximum(self, cubic_flow):
        k = np.array([1e-4, -2e-4, 1.5e-4])
        assert float(cubic_flow.divergence(k)) == pytest.approx(-3.0, abs=1e-4)

    def test_vector_is_rescaled_gradient(self, cubic_flow):
        k = np.array([0.4, 1.3, 2.2])
        grad = cubic_flow.band.gradient(k)
        energy = float(cubic_flow.band.evaluate(k))
        expected = float(cubic_flow.rescale.F(energy)) * grad / float(grad @ grad)
        assert np.allclose(cubic_flow.vector(k), expected)

    def test_refuses_start_at_saddle(self, cubic_flow):
        saddle = cubic_flow.critical.saddles[0].k
        with pytest.raises(NearSingularTrajectory):
            cubic_flow.flow_to(saddle, 0.5)

    def test_transport_grid_sorted(self, cubic_flow):
        sol = cubic_flow.transport([[0.4, 1.3, 2.2], [2.9, 0.2, 1.0]], [1.0, -1.0, 0.0])
        assert sol.b.tolist() == [-1.0, 0.0, 1.0]
        assert np.allclose(sol.points[1], [[0.4, 1.3, 2.2], [2.9, 0.2, 1.0]])
        assert sol.n_valid == 2

    def test_threads_give_same_result(self, cubic_flow, cubic_sample):
        pts = cubic_sample.points[:64]
        one = cubic_flow.transport(pts, [0.5], chunk_size=16)
        four = cubic_flow.transport(pts, [0.5], chunk_size=16, workers=4)
        assert np.array_equal(one.points, four.points)
        assert np.array_equal(one.valid, four.valid)


class TestSurface:
    def test_nodes_on_level(self, cubic_sample, cubic_flow):
        assert cubic_sample.energy == pytest.approx(cubic_flow.rescale.E_r)
        residual = np.abs(cubic_flow.band.evaluate(cubic_sample.points) - cubic_sample.energy)
        assert residual[cubic_sample.valid].max() < 1e-10

    @pytest.mark.parametrize("energy", [-3.0, 1.0, 2.5])
    def test_square_lattice_density_of_states(self, square_flow, energy):
        sample = sample_reference_surface(square_flow, 2000, energy=energy, prune=False)
        assert sample.density_of_states() == pytest.approx(square_dos(energy), rel=1e-2)

    def test_transported_weights_match_direct_sample(self, cubic_flow, cubic_sample):
        target = 1.5
        b = float(cubic_flow.rescale.f(target))
        sol = cubic_flow.transport(cubic_sample.points, [b])
        valid = cubic_sample.valid & sol.valid
        mu = transport_dos_weights(cubic_sample.dos_weights[valid], sol.divergence[0][valid], b, cubic_flow.rescale)
        transported = float(mu.sum() / (2 * np.pi) ** 3)
        direct = sample_reference_surface(cubic_flow, 800, energy=target, prune=False).density_of_states()
        assert transported == pytest.approx(direct, rel=2e-2)

    def test_shell_sampler_in_three_dimensions(self, cubic_flow, cubic_sample):
        shell = sample_reference_surface(cubic_flow, 1500, method="shell", seed=3, prune=False)
        assert shell.method == "shell"
        assert shell.density_of_states() == pytest.approx(cubic_sample.density_of_states(), rel=0.1)

    def test_shell_sampler_is_seeded(self, cubic_flow):
        a = sample_reference_surface(cubic_flow, 200, method="shell", seed=11, prune=False)
        b = sample_reference_surface(cubic_flow, 200, method="shell", seed=11, prune=False)
        assert np.array_equal(a.points, b.points)

    @pytest.mark.parametrize("energy", [-6.5, 6.0])
    def test_level_outside_band(self, cubic_flow, energy):
        with pytest.raises(DomainError):
            sample_reference_surface(cubic_flow, 100, energy=energy)

    def test_one_dimension_refused(self):
        band = BandFunction.laplacian(1)
        cps = find_critical_points(band)
        with pytest.raises(DomainError):
            sample_reference_surface(FlowField(band, rescale_maps(cps), cps), 10)


class TestLocalizedStates:
    @pytest.mark.parametrize("b", [-1.0, 0.0, 0.8])
    def test_norm_is_flow_speed_times_density(self, cubic_flow, cubic_sample, b):
        energy = float(cubic_flow.rescale.f_inv(b))
        psi = localized_state(cubic_flow, cubic_sample, (0, 0, 0), b)
        direct = sample_reference_surface(cubic_flow, 800, energy=energy, prune=False).density_of_states()
        assert psi.norm(cubic_sample) ** 2 == pytest.approx(float(cubic_flow.rescale.F(energy)) * direct, rel=2e-2)

    def test_norm_independent_of_site(self, cubic_flow, cubic_sample):
        a, b = localized_states(cubic_flow, cubic_sample, [(0, 0, 0), (3, -1, 2)], 0.5)
        assert a.norm(cubic_sample) == pytest.approx(b.norm(cubic_sample), rel=1e-12)

    def test_gram_matrix_hermitian_psd(self, cubic_flow, cubic_sample):
        states = localized_states(cubic_flow, cubic_sample, [(0, 0, 0), (1, 0, 0), (1, 1, 0)], 0.3)
        g = gram_matrix(states, cubic_sample)
        assert np.allclose(g, g.conj().T)
        assert np.linalg.eigvalsh(g).min() > -1e-12

    def test_nearest_neighbour_overlaps(self, cubic_flow, cubic_sample):
        # 2 (cos k1 + cos k2 + cos k3) = E on the level set, so the three overlaps add up to E/2 times the norm
        b = float(cubic_flow.rescale.f(1.5))
        energy = float(cubic_flow.rescale.f_inv(b))
        sites = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]
        g = gram_matrix(localized_states(cubic_flow, cubic_sample, sites, b), cubic_sample)
        nearest = g[0, 1] + g[0, 2] + g[0, 3]
        assert nearest.real == pytest.approx(0.5 * energy * g[0, 0].real, rel=1e-5)
        assert abs(nearest.imag) < 2e-2 * g[0, 0].real
        assert np.allclose(np.diag(g).real, g[0, 0].real, rtol=1e-12)
        for j in (1, 2, 3):
            assert g[0, j].real == pytest.approx(energy / 6.0 * g[0, 0].real, abs=2e-2 * g[0, 0].real)

    def test_b_bound(self, cubic_flow, cubic_sample):
        with pytest.raises(DomainError):
            localized_state(cubic_flow, cubic_sample, (0, 0, 0), 13.0)

    def test_patch_factors_agree_with_divergence(self, cubic_flow, cubic_sample):
        idx = np.flatnonzero(cubic_sample.valid)[:5]
        psi = localized_state(cubic_flow, cubic_sample, (0, 0, 0), 0.6)
        patched = patch_db_factors(cubic_flow, cubic_sample.points[idx], 0.6)
        assert np.allclose(patched, psi.db_factors[idx], rtol=1e-3)


class TestLimitStates:
    def test_isotropy_check(self):
        assert check_isotropic(2.0 * np.eye(3), 1e-8) == pytest.approx(2.0)
        with pytest.raises(IsotropyViolation):
            check_isotropic(np.diag([2.0, 2.0, 1.0]), 1e-8)

    @pytest.mark.slow
    @pytest.mark.parametrize("sign", [1, -1])
    def test_edge_overlap_tends_to_one(self, cubic_flow, cubic_sample, sign):
        limit = limit_state(cubic_flow, cubic_sample, sign)
        overlaps = [
            limit.overlap(localized_state(cubic_flow, cubic_sample, (1, 0, 0), sign * b), cubic_sample)
            for b in (2.0, 5.0, 8.0)
        ]
        assert overlaps[-1] == pytest.approx(1.0, abs=1e-3)
        assert overlaps[0] < overlaps[-1] + 1e-9
