#!/usr/bin/env python3
# coding=utf-8


"""
Tests for impurity models, the T-matrix, bound, threshold and embedded states, and the periodic box checks.
"""

import logging

import numpy as np
import pytest
from scipy import optimize

from vt.lattice.scattering.band import BandFunction, find_critical_points
from vt.lattice.scattering.error_specs import AmbiguousBoundary, DomainError
from vt.lattice.scattering.green import GreenBoundary, GridSpec, compute_density, hilbert_transform
from vt.lattice.scattering.green.density import SpectralDensityMatrix
from vt.lattice.scattering.green.hilbert import semicircle_density, semicircle_green
from vt.lattice.scattering.green.oracles import laplacian_green
from vt.lattice.scattering.spectral import (
    EmbeddedState,
    ImpurityModel,
    embedded_eigenvector_search,
    exact_embedded_states,
    find_bound_states,
    green_scan,
    isolated_states,
    no_embedded_check,
    perturbed_green,
    shell_candidates,
    solve_from_green,
    solve_impurity,
    t_matrix,
    threshold_state,
)
from vt.lattice.scattering.spectral.oracles import (
    box_green,
    box_resolvent_block,
    intertwining_defect,
    lattice_residual,
    resolvent_identity_defect,
)

SQUARE = BandFunction.laplacian(2, hopping=0.5)
BLOCK = [(i, j) for i in range(3) for j in range(3)]


def shaped_green(dimension: int, half_width: float = 1.0) -> GreenBoundary:
    """
    One-site Green boundary values of a semicircle density on ``[-w, w]``, tagged with the given lattice dimension.
    """
    e = np.linspace(-half_width, half_width, 4001)
    density = SpectralDensityMatrix(
        e,
        ((0,) * dimension,),
        np.zeros((1, dimension), dtype=np.int64),
        np.zeros((1, 1), dtype=np.int64),
        (semicircle_density(e / half_width) / half_width)[:, None].astype(complex),
        -half_width,
        half_width,
    )
    return GreenBoundary(density)


@pytest.fixture(scope="session")
def semicircle() -> GreenBoundary:
    return shaped_green(1)


@pytest.fixture(scope="session")
def barrier() -> ImpurityModel:
    return ImpurityModel.barrier(SQUARE, BLOCK)


class TestImpurityModel:
    def test_diagonal(self):
        model = ImpurityModel.diagonal([(0, 0), (1, 0)], [1.0, -2.0])
        assert model.kind == "diagonal"
        assert model.is_invertible()
        assert model.norm == pytest.approx(2.0)
        assert model.site_index() == {(0, 0): 0, (1, 0): 1}

    @pytest.mark.parametrize(
        "sites, matrix",
        [
            ([], np.zeros((0, 0))),
            ([(0,), (0,)], np.eye(2)),
            ([(0,), (1, 0)], np.eye(2)),
            ([(0,), (1,)], np.eye(3)),
        ],
    )
    def test_rejects(self, sites, matrix):
        with pytest.raises(DomainError):
            ImpurityModel.general(sites, matrix)

    def test_potential_count(self):
        with pytest.raises(DomainError, match="2 potentials for 1 sites"):
            ImpurityModel.diagonal([(0,)], [1.0, 2.0])

    def test_unknown_kind(self):
        with pytest.raises(DomainError):
            ImpurityModel(((0,),), np.eye(1, dtype=complex), "magnetic")  # type: ignore[arg-type]

    def test_barrier_cuts_boundary_hoppings(self, barrier):
        assert len(barrier.sites) == 9 + 12
        assert barrier.core_sites == tuple(BLOCK)
        idx = barrier.site_index()
        v = barrier.v_matrix
        assert v[idx[(0, 0)], idx[(-1, 0)]] == pytest.approx(-0.5)
        assert v[idx[(0, 0)], idx[(1, 0)]] == 0.0
        assert not barrier.is_invertible()
        assert barrier.channels().rank < barrier.n_sites

    def test_to_dict(self):
        d = ImpurityModel.point(3, 2.0).to_dict()
        assert d["kind"] == "diagonal"
        assert d["v_real"] == [[2.0]]


class TestTMatrix:
    Z = 0.3 + 0.2j

    def test_point_impurity(self, semicircle):
        model = ImpurityModel.point(1, 0.8)
        g0 = complex(semicircle_green(self.Z))
        assert complex(t_matrix(model, semicircle, self.Z)[0, 0]) == pytest.approx(0.8 / (1 - 0.8 * g0), abs=1e-3)
        assert complex(perturbed_green(model, semicircle, self.Z)[0, 0]) == pytest.approx(
            g0 / (1 - 0.8 * g0), abs=1e-3
        )

    def test_boundary_value_needs_side(self, semicircle):
        model = ImpurityModel.point(1, 0.8)
        with pytest.raises(AmbiguousBoundary):
            solve_impurity(model, semicircle, 0.4)
        sol = solve_impurity(model, semicircle, 0.4, side=-1)
        assert sol.green[0, 0].imag > 0
        assert not sol.candidate

    def test_site_sets_must_agree(self, semicircle):
        with pytest.raises(DomainError):
            solve_impurity(ImpurityModel.point(2, 1.0), semicircle, 2.0)

    def test_zero_coupling(self):
        sol = solve_from_green(ImpurityModel.point(1, 0.0), np.array([[0.5 + 0.1j]]), 0.5j)
        assert np.all(sol.t_matrix == 0)
        assert sol.green[0, 0] == 0.5 + 0.1j

    def test_candidate_on_the_axis(self):
        sol = solve_from_green(ImpurityModel.point(1, 1.0), np.array([[1.0]]), 1.25, real_axis=True)
        assert sol.candidate
        assert np.allclose(sol.t_matrix, 0.0)

    def test_shape_checked(self):
        with pytest.raises(DomainError):
            solve_from_green(ImpurityModel.point(1, 1.0), np.eye(2), 1j)

    def test_matches_box_resolvent(self):
        band = BandFunction.laplacian(3)
        model = ImpurityModel.diagonal([(0, 0, 0), (1, 0, 0)], [2.0, -1.5])
        assert resolvent_identity_defect(model, band, 6, 0.5 + 0.4j) < 1e-10

    def test_box_green_is_free_resolvent(self):
        band = BandFunction.laplacian(2)
        sites = [(0, 0), (1, 2)]
        assert np.allclose(box_green(band, 5, 1.0 + 0.5j, sites), box_resolvent_block(band, 5, 1.0 + 0.5j, None, sites))

    @pytest.mark.parametrize("sign", [1, -1])
    def test_intertwining_on_a_box(self, sign):
        shadow = intertwining_defect(ImpurityModel.point(2, 1.0), BandFunction.laplacian(2), 4, 0.1, sign)
        assert shadow.residual < 1e-8
        assert shadow.defect == pytest.approx(shadow.expected, rel=1e-8)

    def test_box_side_checked(self):
        with pytest.raises(DomainError):
            box_green(SQUARE, 1, 1j, [(0, 0)])
        with pytest.raises(DomainError):
            resolvent_identity_defect(ImpurityModel.diagonal([(0,), (3,)], [1.0, 1.0]), BandFunction.laplacian(1), 3, 1j)


class TestIsolatedStates:
    @pytest.mark.parametrize("coupling", [1.0, -1.0, 2.5])
    def test_semicircle_point_impurity(self, semicircle, coupling):
        states = isolated_states(ImpurityModel.point(1, coupling), semicircle)
        assert len(states) == 1
        assert states[0].multiplicity == 1
        assert states[0].energy == pytest.approx(coupling + 1 / (4 * coupling), abs=1e-4)
        assert abs(states[0].vectors[0, 0]) == pytest.approx(1.0)

    @pytest.mark.parametrize("coupling", [0.4, -0.4, 0.0])
    def test_weak_coupling_binds_nothing(self, semicircle, coupling):
        assert isolated_states(ImpurityModel.point(1, coupling), semicircle) == []


class TestThresholdStates:
    @pytest.mark.parametrize("dimension, eigen", [(3, 0), (4, 0), (5, 1)])
    def test_critical_coupling(self, dimension, eigen):
        green = shaped_green(dimension, 6.0)
        coupling = 1.0 / float(green.green_at(6.0)[0, 0].real)
        state = threshold_state(ImpurityModel.point(dimension, coupling), green, 1, np.zeros(dimension))
        assert state.dimension == 1
        assert (state.eigenvalue_mult, state.resonance_mult) == (eigen, 1 - eigen)

    def test_generic_coupling(self):
        green = shaped_green(3, 6.0)
        state = threshold_state(ImpurityModel.point(3, 1.0), green, 1, np.zeros(3))
        assert state.dimension == 0

    def test_unsupported_in_low_dimension(self, semicircle):
        state = threshold_state(ImpurityModel.point(1, 1.0), semicircle, -1, np.array([np.pi]))
        assert not state.supported
        assert state.to_dict()["supported"] is False


class TestEmbeddedStates:
    def test_barrier_block_states(self, barrier):
        states = exact_embedded_states(barrier, SQUARE, -2.0, 2.0)
        assert [s.multiplicity for s in states] == [1, 2, 3, 2, 1]
        r = np.sqrt(2.0)
        assert [s.energy for s in states] == pytest.approx([-r, -r / 2, 0.0, r / 2, r], abs=1e-10)
        assert max(s.residual for s in states) < 1e-10
        assert all(set(s.support()) <= set(BLOCK) for s in states)

    def test_barrier_states_solve_the_lattice_problem(self, barrier):
        state = exact_embedded_states(barrier, SQUARE, -2.0, 2.0)[0]
        assert lattice_residual(SQUARE, barrier, state.energy, state.sites, state.vectors[:, 0], 8) < 1e-10

    def test_diagonal_block_has_none(self):
        model = ImpurityModel.diagonal(BLOCK, [1.0] * 9)
        assert exact_embedded_states(model, SQUARE, -2.0, 2.0) == []
        assert no_embedded_check(model, SQUARE).holds

    def test_certificate_preconditions(self, barrier):
        with pytest.raises(DomainError):
            no_embedded_check(barrier, SQUARE)
        with pytest.raises(DomainError):
            no_embedded_check(ImpurityModel.diagonal([(0, 0), (1, 0)], [1.0, 0.0]), SQUARE)

    def test_search_kernel_over_block(self):
        search = embedded_eigenvector_search(SQUARE, BLOCK, np.linspace(-1.5, 1.5, 7))
        assert search.box == ((1, 1),)
        assert search.kernel_dims.tolist() == [1] * 7
        assert search.generic_dim == 1
        assert search.exceptional == ()
        assert len(search.to_rows()) == 7

    def test_search_without_interior(self):
        search = embedded_eigenvector_search(SQUARE, [(0, 0), (1, 0)], [0.0, 1.0])
        assert search.box == ()
        assert search.kernel_dims.tolist() == [0, 0]

    def test_shell_candidate_vector(self):
        v = shell_candidates(SQUARE, BLOCK, 0.3)[:, 0]
        index = {s: i for i, s in enumerate(BLOCK)}
        expected = np.zeros(9, dtype=complex)
        expected[index[(1, 1)]] = 0.3
        for s in [(0, 1), (2, 1), (1, 0), (1, 2)]:
            expected[index[s]] = -0.5
        scale = expected[index[(1, 1)]] / v[index[(1, 1)]]
        assert np.allclose(v * scale, expected)


class TestBoundStateReport:
    def test_report_for_point_impurity(self, semicircle):
        band = BandFunction.laplacian(1)
        critical = find_critical_points(band)
        report = find_bound_states(ImpurityModel.point(1, 1.0), semicircle, band, critical)
        assert report.N_total == 1
        assert (report.m_minus, report.m_plus) == (0, 0)
        d = report.to_dict()
        assert d["N_total"] == 1
        assert d["embedded"] == []
        assert d["green_scan"] == {"levels": [], "unresolved": [], "missed": [], "spurious": [], "agrees": True}
        assert find_bound_states(ImpurityModel.point(1, 1.0), semicircle, band, critical, scan=False).scan is None


def split_band_green() -> GreenBoundary:
    """
    Two sites whose symmetric channel sees a semicircle on ``[-1, 1]`` and whose antisymmetric channel sees one on
    ``[-0.5, 0.5]``. Between 0.5 and 1 the antisymmetric channel has ``Im G = 0``, so the channel matrix can vanish
    inside the band.
    """
    e = np.linspace(-1.0, 1.0, 4001)
    wide = semicircle_density(e)
    narrow = semicircle_density(e / 0.5) / 0.5
    diffs = np.array([[-1], [0], [1]], dtype=np.int64)
    index = np.array([[1, 2], [0, 1]], dtype=np.int64)
    values = np.stack([(wide - narrow) / 2, (wide + narrow) / 2, (wide - narrow) / 2], axis=1).astype(complex)
    return GreenBoundary(SpectralDensityMatrix(e, ((0,), (1,)), diffs, index, values, -1.0, 1.0))


def split_band_model(level: float) -> ImpurityModel:
    """
    Symmetric coupling -1 and an antisymmetric coupling tuned so that ``1 / v = G_narrow(level)``.
    """
    x = level / 0.5
    g_narrow = semicircle_green(x) / 0.5
    sym = np.array([[0.5, 0.5], [0.5, 0.5]])
    anti = np.array([[0.5, -0.5], [-0.5, 0.5]])
    return ImpurityModel.general([(0,), (1,)], -1.0 * sym + (1.0 / g_narrow.real) * anti)


def embedded_level(energy: float, multiplicity: int = 1) -> EmbeddedState:
    return EmbeddedState(energy, multiplicity, ((0,),), np.zeros((1, multiplicity), dtype=complex), 0.0)


class TestGreenScan:
    def test_finds_the_channel_zero(self):
        scan = green_scan(split_band_model(0.75), split_band_green(), [embedded_level(0.75)])
        assert len(scan.levels) == 1
        level = scan.levels[0]
        assert level.energy == pytest.approx(0.75, abs=5e-3)
        assert level.multiplicity == 1
        assert level.defect < 1e-3
        assert scan.agrees
        assert scan.to_dict()["agrees"] is True

    def test_reports_level_without_exact_counterpart(self, caplog):
        with caplog.at_level(logging.WARNING, logger="vt.lattice.scattering.spectral.bound"):
            scan = green_scan(split_band_model(0.75), split_band_green())
        assert scan.spurious == pytest.approx((0.75,), abs=5e-3)
        assert not scan.agrees
        assert "disagrees" in caplog.text

    def test_reports_missed_level(self):
        scan = green_scan(split_band_model(0.75), split_band_green(), [embedded_level(0.75), embedded_level(-0.3)])
        assert scan.missed == (-0.3,)
        assert scan.spurious == ()

    def test_multiplicity_must_match(self):
        scan = green_scan(split_band_model(0.75), split_band_green(), [embedded_level(0.75, 2)])
        assert scan.missed == (0.75,)

    def test_edge_levels_are_unresolved(self):
        scan = green_scan(split_band_model(0.75), split_band_green(), [embedded_level(0.75), embedded_level(0.9995)])
        assert scan.unresolved == (0.9995,)
        assert scan.agrees

    def test_no_zero_for_point_impurity(self, semicircle):
        scan = green_scan(ImpurityModel.point(1, 1.0), semicircle)
        assert scan.levels == ()
        assert scan.agrees

    def test_no_channels(self, semicircle):
        assert green_scan(ImpurityModel.point(1, 0.0), semicircle).levels == ()


@pytest.mark.slow
def test_green_scan_confirms_barrier_block(barrier):
    critical = find_critical_points(SQUARE)
    spec = GridSpec(uniform_points=400, edge_points_per_decade=8, dyadic_levels=6, surface_points=1500)
    green = hilbert_transform(compute_density(SQUARE, barrier.sites, grid_spec=spec, critical=critical), critical)
    report = find_bound_states(barrier, green, SQUARE, critical, check_order=False)
    scan = report.scan
    assert scan is not None
    # the threefold level sits on the van Hove energy of the square lattice
    assert scan.unresolved == pytest.approx((0.0,), abs=1e-10)
    assert scan.missed == ()
    r = np.sqrt(2.0)
    for energy, multiplicity in [(-r, 1), (-r / 2, 2), (r / 2, 2), (r, 1)]:
        near = [lv for lv in scan.levels if abs(lv.energy - energy) < 2e-2]
        assert sum(lv.multiplicity for lv in near) == multiplicity
    assert report.to_dict()["green_scan"]["missed"] == []


@pytest.mark.slow
def test_cubic_point_impurity_bound_state():
    band = BandFunction.laplacian(3)
    critical = find_critical_points(band)
    spec = GridSpec(uniform_points=300, edge_points_per_decade=8, dyadic_levels=6, surface_points=1500)
    green = hilbert_transform(compute_density(band, [(0, 0, 0)], grid_spec=spec, critical=critical), critical)
    states = isolated_states(ImpurityModel.point(3, 6.0), green)
    assert len(states) == 1
    exact = optimize.brentq(lambda e: laplacian_green(3, e) - 1.0 / 6.0, 6.0, 12.0)
    assert states[0].energy == pytest.approx(exact, abs=5e-2)
    assert laplacian_green(3, states[0].energy) == pytest.approx(1.0 / 6.0, rel=1e-2)
    assert isolated_states(ImpurityModel.point(3, 3.0), green) == []
