#!/usr/bin/env python3
# coding=utf-8


"""
Tests for band functions, critical points, rescaled energy and lattice geometry.
"""

import math

import numpy as np
import pytest

from vt.lattice.scattering.band import (
    BandFunction,
    LatticeGeometry,
    RescaledEnergyMap,
    find_critical_points,
    is_prime_vector,
    lattice_fourier,
    rescale_maps,
    s_interior,
    s_interior_chain,
)
from vt.lattice.scattering.band.geometry import (
    complete_to_unimodular,
    contact_halfplanes,
    hull_lattice_points,
    integer_det,
)
from vt.lattice.scattering.error_specs import AssumptionViolation, DomainError, MorseViolation


@pytest.fixture(scope="session")
def cubic() -> BandFunction:
    return BandFunction.laplacian(3)


@pytest.fixture(scope="session")
def rng() -> np.random.Generator:
    return np.random.default_rng(20240101)


class TestBandFunction:
    def test_values_at_corners(self, cubic):
        assert float(cubic.evaluate([0.0, 0.0, 0.0])) == pytest.approx(6.0)
        assert float(cubic.evaluate([np.pi, 0.0, np.pi])) == pytest.approx(-2.0)

    def test_gradient_matches_difference(self, cubic, rng):
        k = rng.uniform(0, 2 * np.pi, size=(5, 3))
        h = 1e-6
        for j in range(3):
            step = np.zeros(3)
            step[j] = h
            fd = (cubic.evaluate(k + step) - cubic.evaluate(k - step)) / (2 * h)
            assert np.allclose(cubic.gradient(k)[:, j], fd, atol=1e-8)

    def test_jet_matches_parts(self, cubic, rng):
        k = rng.uniform(0, 2 * np.pi, size=(4, 3))
        value, grad, hess = cubic.jet(k)
        assert np.allclose(value, cubic.evaluate(k))
        assert np.allclose(grad, cubic.gradient(k))
        assert np.allclose(hess, cubic.hessian(k))

    def test_jet_relative_near_minimum(self, cubic):
        ex, grad, _ = cubic.jet_relative([[np.pi + 1e-7, np.pi, np.pi]], [np.pi, np.pi, np.pi])
        assert float(ex[0]) == pytest.approx(1e-14, rel=1e-6)
        assert float(grad[0, 0]) == pytest.approx(2e-7, rel=1e-6)

    def test_from_terms_adds_partners(self):
        band = BandFunction.from_terms(2, [((1, 0), 1.0), ((0, 1), 0.5), ((1, 1), 0.25j)])
        assert band.coefficient((-1, -1)) == pytest.approx(-0.25j)
        k = np.array([0.3, -1.1])
        assert float(band.evaluate(k)) == pytest.approx(
            2 * math.cos(0.3) + math.cos(-1.1) - 0.5 * math.sin(0.3 - 1.1)
        )

    def test_hamiltonian_block_is_hermitian(self):
        band = BandFunction.from_terms(2, [((1, 0), 1.0), ((1, 1), 0.3 + 0.2j)])
        sites = [(0, 0), (1, 0), (1, 1), (0, 1)]
        h = band.hamiltonian_block(sites)
        assert np.allclose(h, h.conj().T)

    def test_fingerprint_is_stable(self):
        assert BandFunction.laplacian(2).fingerprint() == BandFunction.laplacian(2).fingerprint()
        assert BandFunction.laplacian(2).fingerprint() != BandFunction.laplacian(2, 0.5).fingerprint()

    @pytest.mark.parametrize(
        "table",
        [{}, {(1,): 1.0, (1, 0): 1.0}, {(1,): 1.0, (-1,): 2.0}],
    )
    def test_rejects(self, table):
        with pytest.raises(DomainError):
            BandFunction(table)

    def test_rejects_wrong_point_shape(self, cubic):
        with pytest.raises(DomainError):
            cubic.evaluate([0.0, 0.0])

    def test_lattice_fourier_gradient(self):
        sites = [(0, 0), (1, 0), (0, 2)]
        values = [1.0, 2.0 - 1j, 0.5]
        k = np.array([0.4, -0.7])
        g = lattice_fourier(sites, values, k, order=1)
        h = 1e-6
        fd = [
            (lattice_fourier(sites, values, k + h * e) - lattice_fourier(sites, values, k - h * e)) / (2 * h)
            for e in np.eye(2)
        ]
        assert np.allclose(g, fd, atol=1e-8)


class TestCriticalPoints:
    @pytest.mark.parametrize("d", [1, 2, 3, 4])
    def test_laplacian_counts(self, d):
        cps = find_critical_points(BandFunction.laplacian(d))
        assert len(cps.points) == 2**d
        assert cps.index_counts() == {i: math.comb(d, i) for i in range(d + 1)}
        assert (cps.E_minus, cps.E_plus) == (-2.0 * d, 2.0 * d)

    def test_square_lattice_saddles(self):
        cps = find_critical_points(BandFunction.laplacian(2, hopping=0.5))
        assert [p.value for p in cps.saddles] == pytest.approx([0.0, 0.0], abs=1e-12)
        assert cps.interior_values == pytest.approx((0.0,), abs=1e-12)
        assert cps.is_critical_value(1e-12)

    def test_isotropic_extrema(self, cubic):
        cps = find_critical_points(cubic)
        assert np.allclose(cps.maximum.hessian, -2.0 * np.eye(3))
        assert np.allclose(cps.minimum.hessian, 2.0 * np.eye(3))
        assert np.allclose(cps.minimum.k, [np.pi] * 3)

    def test_two_minima_refused(self):
        with pytest.raises(AssumptionViolation):
            find_critical_points(BandFunction.from_terms(1, [((2,), 1.0)]))

    def test_degenerate_critical_point_refused(self):
        # cos k - cos(2k)/4 has E'' = 0 at k = 0
        band = BandFunction.from_terms(1, [((1,), 0.5), ((2,), -0.125)])
        with pytest.raises(MorseViolation):
            find_critical_points(band)

    def test_to_dict(self, cubic):
        d = find_critical_points(cubic).to_dict()
        assert d["E_minus"] == -6.0
        assert d["E_plus"] == 6.0


class TestRescaledEnergy:
    def test_round_trip(self):
        m = RescaledEnergyMap(-6.0, 6.0)
        b = np.linspace(-5, 5, 11)
        assert np.allclose(m.f(m.f_inv(b)), b)

    def test_flow_speed_is_derivative_of_inverse(self):
        m = RescaledEnergyMap.with_reference(-4.0, 2.0, 0.5)
        b = np.linspace(-3, 3, 7)
        h = 1e-6
        fd = (m.f_inv(b + h) - m.f_inv(b - h)) / (2 * h)
        assert np.allclose(fd, m.F(m.f_inv(b)), rtol=1e-7)
        assert np.allclose(m.F_of_b(b), m.F(m.f_inv(b)))

    def test_edge_gaps_keep_accuracy(self):
        m = RescaledEnergyMap(-6.0, 6.0)
        lo, hi = m.edge_gaps(30.0)
        assert float(hi) == pytest.approx(12.0 * math.exp(-60.0), rel=1e-9)
        assert float(lo) == pytest.approx(12.0)

    @pytest.mark.parametrize("energy", [-6.0, 6.0, 7.5])
    def test_outside_band(self, energy):
        with pytest.raises(DomainError):
            RescaledEnergyMap(-6.0, 6.0).f(energy)

    def test_edges_ordered(self):
        with pytest.raises(DomainError):
            RescaledEnergyMap(1.0, 1.0)

    def test_reference_shifted_off_saddle_value(self):
        cps = find_critical_points(BandFunction.laplacian(2, hopping=0.5))
        m = rescale_maps(cps)
        assert not cps.is_critical_value(m.E_r)
        assert float(m.f(m.E_r)) == pytest.approx(0.0, abs=1e-14)


class TestGeometry:
    NN2 = frozenset({(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)})

    def test_s_interior_of_block(self):
        block = {(i, j) for i in range(4) for j in range(3)}
        assert s_interior(block, self.NN2) == {(1, 1), (2, 1)}

    def test_chain_ends_empty(self):
        block = {(i, j) for i in range(7) for j in range(7)}
        chain = s_interior_chain(block, self.NN2)
        assert [len(s) for s in chain] == [49, 25, 9, 1, 0]

    def test_chain_fixed_point_without_hopping(self):
        sites = {(0, 0), (1, 0)}
        assert s_interior_chain(sites, {(0, 0)}) == [frozenset(sites)]

    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    def test_s_interior_is_monotone(self, seed):
        rng = np.random.default_rng(seed)
        box = [(i, j) for i in range(7) for j in range(7)]
        for _ in range(50):
            small = {box[i] for i in np.flatnonzero(rng.random(len(box)) < 0.7)}
            large = small | {box[i] for i in np.flatnonzero(rng.random(len(box)) < 0.5)}
            assert s_interior(small, self.NN2) <= s_interior(large, self.NN2)
            chain = s_interior_chain(large, self.NN2)
            assert all(b < a for a, b in zip(chain, chain[1:]))
            assert not chain[-1] or s_interior(chain[-1], self.NN2) == chain[-1]

    @pytest.mark.parametrize("d", [2, 3])
    def test_contacts_of_a_single_site(self, d):
        origin = (0,) * d
        contacts = contact_halfplanes({origin})
        units = {tuple(s * int(i == j) for j in range(d)) for i in range(d) for s in (1, -1)}
        assert {c.a for c in contacts} == units
        assert all(c.m == 0 and c.touches(origin) for c in contacts)

    @pytest.mark.parametrize(
        "triangle, expected",
        [
            ({(0, 0), (1, 0), (0, 1)}, {((1, 0), 0), ((0, 1), 0), ((-1, -1), -1)}),
            ({(0, 0), (2, 0), (0, 3)}, {((1, 0), 0), ((0, 1), 0), ((-3, -2), -6)}),
        ],
    )
    def test_contacts_of_a_triangle(self, triangle, expected):
        contacts = contact_halfplanes(triangle)
        assert {(c.a, c.m) for c in contacts} == expected
        assert all(c.contains(x) for c in contacts for x in triangle)
        assert all(sum(c.touches(x) for x in triangle) == 2 for c in contacts)
        inside = {(i, j) for i in range(-1, 4) for j in range(-1, 4) if all(c.contains((i, j)) for c in contacts)}
        assert inside == hull_lattice_points(triangle)

    @pytest.mark.parametrize(
        "a",
        [
            (2, 3),
            (1, 0, 0),
            (-3, 5, 7),
            (4, 9),
            (2**61 - 1, 3**40, 5**27),
            (2**89 - 1, -(2**64 + 13), 7**31, 1),
        ],
    )
    def test_unimodular_completion(self, a):
        m = complete_to_unimodular(a).tolist()
        assert integer_det(m) == 1
        pairing = [sum(int(x) * int(row[j]) for x, row in zip(a, m)) for j in range(len(a))]
        assert pairing == [1] + [0] * (len(a) - 1)

    def test_small_completion_stays_int64(self):
        assert complete_to_unimodular((-3, 5, 7)).dtype == np.int64

    def test_large_completion_is_exact(self):
        m = complete_to_unimodular((2**89 - 1, 3**60))
        assert m.dtype == object
        assert all(type(x) is int for x in m.ravel())

    def test_not_prime(self):
        assert not is_prime_vector((4, 6))
        with pytest.raises(DomainError):
            complete_to_unimodular((4, 6))

    def test_contacts_of_square(self):
        square = {(0, 0), (2, 0), (0, 2), (2, 2)}
        contacts = contact_halfplanes(square)
        assert {c.a for c in contacts} == {(1, 0), (-1, 0), (0, 1), (0, -1)}
        assert all(c.contains(x) for c in contacts for x in square)
        assert all(any(c.touches(x) for x in square) for c in contacts)

    def test_contacts_of_segment_in_3d(self):
        contacts = contact_halfplanes({(0, 0, 0), (1, 1, 0)})
        assert all(is_prime_vector(c.a) for c in contacts)
        assert all(c.contains((0, 0, 0)) and c.contains((1, 1, 0)) for c in contacts)
        assert not any(all(c.contains(x) for c in contacts) for x in [(2, 2, 0), (1, 0, 0), (0, 0, 1)])

    def test_hull_points(self):
        assert len(hull_lattice_points({(0, 0, 0), (2, 0, 0), (0, 2, 0), (0, 0, 2)})) == 10

    def test_lattice_geometry(self):
        cube = {(i, j, k) for i in range(3) for j in range(3) for k in range(3)}
        nn = {(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)}
        g = LatticeGeometry.of(cube, nn)
        assert len(g.contacts) == 6
        assert g.s_interior == {(1, 1, 1)}
        assert g.hull_points() == frozenset(cube)
