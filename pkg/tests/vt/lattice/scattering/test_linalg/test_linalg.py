#!/usr/bin/env python3
# coding=utf-8


"""
Tests for kernel detection, pseudo powers, restricted inverses and the tolerance table.
"""

import numpy as np
import pytest

from vt.lattice.scattering.error_specs import ConfigError, DomainError
from vt.lattice.scattering.linalg import (
    bounded_schur,
    hermitian_part,
    joint_kernel,
    kernel,
    limit_defect,
    pseudo_power,
    range_basis,
    restricted_inverse_matrix,
    restricted_solve,
)
from vt.lattice.scattering.tolerances import DEFAULT_TOLERANCES, Tolerances
from vt.lattice.scattering.warnings import LatticeScatteringWarning, RankAmbiguity, ReportedWithWarning


@pytest.fixture(scope="session")
def unitary() -> np.ndarray:
    rng = np.random.default_rng(7)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    return q


class TestKernel:
    def test_clean_kernel(self, unitary):
        m = unitary @ np.diag([3.0, 1.0, 1e-12]) @ np.conj(unitary.T)
        info = kernel(m)
        assert info.dimension == 1
        assert np.allclose(m @ info.basis, 0.0, atol=1e-10)
        assert info.smallest == pytest.approx(1e-12, abs=1e-13)
        assert info.scale == pytest.approx(3.0)

    def test_tolerance_band_warns_and_keeps(self):
        with pytest.warns(RankAmbiguity):
            info = kernel(np.diag([1.0, 1e-7]), context="impurity block")
        assert info.dimension == 0

    def test_poor_separation_reported(self):
        with pytest.warns(LatticeScatteringWarning) as record:
            info = kernel(np.diag([1.0, 5e-7, 9e-9]))
        assert info.dimension == 1
        assert {w.category for w in record} == {RankAmbiguity, ReportedWithWarning}

    def test_explicit_scale(self):
        assert kernel(np.diag([1e-3, 1e-3]), scale=1e6).dimension == 2

    def test_empty_and_zero(self):
        assert kernel(np.zeros((2, 0))).dimension == 0
        assert kernel(np.zeros((3, 3))).dimension == 3

    def test_rectangular(self):
        info = kernel(np.array([[1.0, 1.0, 0.0]]))
        assert info.dimension == 2
        assert np.allclose(np.array([[1.0, 1.0, 0.0]]) @ info.basis, 0.0)

    def test_joint_kernel(self):
        a = np.diag([1.0, 0.0, 0.0])
        b = np.diag([0.0, 1.0, 0.0])
        info = joint_kernel(a, b)
        assert info.dimension == 1
        assert abs(info.basis[2, 0]) == pytest.approx(1.0)


class TestPowers:
    def test_range_basis_cutoff(self):
        q, w = range_basis(np.diag([2.0, 1e-14, 0.5]))
        assert sorted(w.tolist()) == [0.5, 2.0]
        assert q.shape == (3, 2)

    def test_square_root_squares_back(self, unitary):
        m = unitary @ np.diag([4.0, 1.0, 0.0]) @ np.conj(unitary.T)
        root = pseudo_power(m, 0.5)
        assert np.allclose(root @ root, m)

    def test_inverse_root_gives_range_projector(self, unitary):
        m = unitary @ np.diag([4.0, 1.0, 0.0]) @ np.conj(unitary.T)
        inv = pseudo_power(m, -0.5)
        p = inv @ m @ inv
        assert np.allclose(p @ p, p)
        assert np.trace(p).real == pytest.approx(2.0)

    def test_hermitian_part_batched(self):
        m = np.array([[[1.0, 2.0j], [0.0, 3.0]], [[0.0, 1.0], [1.0, 0.0]]])
        h = hermitian_part(m)
        assert np.allclose(h, np.conj(np.swapaxes(h, 1, 2)))
        assert h[0, 0, 1] == pytest.approx(1.0j)


class TestRestrictedInverse:
    A = np.diag([1.0, 0.0, 2.0])
    B = np.diag([0.0, 0.0, 1.0])

    def test_plain_inverse_without_joint_kernel(self):
        a = np.array([[1.0, 0.5], [0.5, -1.0]])
        b = np.diag([0.2, 0.0])
        assert np.allclose(restricted_inverse_matrix(a, b), np.linalg.inv(a + 1j * b))

    def test_inverse_on_complement(self):
        inv = restricted_inverse_matrix(self.A, self.B)
        assert np.allclose(inv, np.diag([1.0, 0.0, 1.0 / (2.0 + 1.0j)]))

    def test_full_kernel(self):
        assert np.allclose(restricted_inverse_matrix(np.zeros((2, 2)), np.zeros((2, 2))), 0.0)

    def test_solve(self):
        w = restricted_solve(self.A, self.B, [1.0, 0.0, 1.0])
        assert np.allclose((self.A + 1j * self.B) @ w, [1.0, 0.0, 1.0])
        assert abs(w[1]) < 1e-12

    def test_solve_refuses_kernel_component(self):
        with pytest.raises(DomainError, match="joint kernel"):
            restricted_solve(self.A, self.B, [1.0, 1.0, 0.0])

    @pytest.mark.parametrize("lam", [1e-1, 1e-4])
    def test_limit_defect_vanishes(self, lam):
        a = np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 2.0]])
        v = np.array([1.0, -1.0, 0.0]) / np.sqrt(2.0)
        p = np.outer(v, v)
        assert limit_defect(a, p, lam) < 1e-10

    def test_bounded_schur_at_first_order_zero(self):
        f = bounded_schur(np.diag([0.0, 1.0]), np.array([[1.0], [0.0]]))
        assert np.allclose(f, [[-1.0j], [0.0]])


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def spread(rng: np.random.Generator, size: int) -> np.ndarray:
    """
    Magnitudes in ``[0.5, 2]`` with random signs.
    """
    return rng.uniform(0.5, 2.0, size) * rng.choice([-1.0, 1.0], size)


def joint_kernel_instance(rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Hermitian ``A``, ``B >= 0`` and an orthonormal basis of ``Ker A cap Ker B``. ``A`` has further zeros off the
    joint kernel, where ``B`` is positive.
    """
    n = int(rng.integers(2, 7))
    k = int(rng.integers(0, n))
    u = random_unitary(rng, n)
    joint, rest = u[:, :k], u[:, k:]
    c = n - k
    j = int(rng.integers(0, c + 1))
    w = random_unitary(rng, c)
    a_eigs = spread(rng, c)
    a_eigs[:j] = 0.0
    a = w @ np.diag(a_eigs) @ np.conj(w.T)
    extra = int(rng.integers(0, c - j + 1))
    g = np.column_stack(
        [w[:, :j] * rng.uniform(0.5, 2.0, j), 0.5 * (rng.normal(size=(c, extra)) + 1j * rng.normal(size=(c, extra)))]
    )
    b = g @ np.conj(g.T)
    return rest @ a @ np.conj(rest.T), rest @ b @ np.conj(rest.T), joint


class TestJointKernelProperties:
    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    def test_kernel_of_a_plus_ib_is_the_joint_kernel(self, seed):
        rng = np.random.default_rng(seed)
        for _ in range(250):
            a, b, joint = joint_kernel_instance(rng)
            n, k = a.shape[0], joint.shape[1]
            expected = joint @ np.conj(joint.T)
            scale = max(float(np.linalg.norm(a, 2)), float(np.linalg.norm(b, 2)))
            for info in (joint_kernel(a, b), kernel(a + 1j * b, scale=scale)):
                assert info.dimension == k
                assert np.allclose(info.basis @ np.conj(info.basis.T), expected, atol=1e-8)

            complement = np.eye(n) - expected
            inv = restricted_inverse_matrix(a, b)
            assert np.allclose((a + 1j * b) @ inv, complement, atol=1e-8)
            assert np.allclose(inv @ joint, 0.0, atol=1e-10)
            assert np.allclose(np.conj(joint.T) @ inv, 0.0, atol=1e-10)

            v = complement @ (rng.normal(size=n) + 1j * rng.normal(size=n))
            w = restricted_solve(a, b, v)
            assert np.linalg.norm((a + 1j * b) @ w - v) < 1e-8 * np.linalg.norm(v)
            assert np.linalg.norm(np.conj(joint.T) @ w) < 1e-10 * max(np.linalg.norm(w), 1.0)
            if k:
                with pytest.raises(DomainError):
                    restricted_solve(a, b, v + joint[:, 0])


def schur_instance(rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """
    ``H`` Hermitian and ``D`` of full column rank, with ``H`` invertible on ``Ker D^*``.
    """
    n = int(rng.integers(2, 7))
    m = int(rng.integers(1, n))
    u = random_unitary(rng, n)
    d = u[:, :m] @ np.diag(rng.uniform(0.5, 2.0, m)) @ random_unitary(rng, m)
    w = random_unitary(rng, n - m)
    blocks = np.zeros((n, n), dtype=complex)
    blocks[m:, m:] = w @ np.diag(spread(rng, n - m)) @ np.conj(w.T)
    x = 0.5 * (rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m)))
    blocks[:m, :m] = x + np.conj(x.T)
    y = 0.5 * (rng.normal(size=(m, n - m)) + 1j * rng.normal(size=(m, n - m)))
    blocks[:m, m:] = y
    blocks[m:, :m] = np.conj(y.T)
    return u @ blocks @ np.conj(u.T), d


class TestBoundedSchurProperties:
    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    def test_bounded_through_a_first_order_zero(self, seed):
        rng = np.random.default_rng(seed)
        for _ in range(250):
            h, d = schur_instance(rng)
            values = []
            for lam in (1e-2, 1e-4, 1e-6, 1e-8):
                c = lam * h
                f = bounded_schur(c, d)
                assert np.allclose((c + 1j * d @ np.conj(d.T)) @ f, d, atol=1e-8)
                values.append(f)
            norms = [float(np.linalg.norm(f, 2)) for f in values]
            assert max(norms) < 10.0 * max(norms[0], 1.0)
            assert np.linalg.norm(values[-1] - values[-2], 2) < 1e-3 * max(norms[-1], 1.0)
            # the limit solves i D D^* F = D with F in Ran D, since C vanishes to first order
            limit = -1j * np.linalg.pinv(d @ np.conj(d.T)) @ d
            assert np.allclose(np.conj(d.T) @ values[-1], np.conj(d.T) @ limit, atol=1e-4)


class TestTolerances:
    def test_defaults(self):
        t = DEFAULT_TOLERANCES
        assert (t.exclusion_radius, t.transport_exclusion_radius, t.b_max) == (1e-3, 1e-6, 12.0)
        assert (t.kernel_zero, t.kernel_warn, t.levinson) == (1e-8, 1e-6, 0.02)

    def test_merge_accepts_int(self):
        assert Tolerances().merged({"b_max": 10}).b_max == 10.0

    @pytest.mark.parametrize(
        "overrides, path",
        [({"colour": 1.0}, "tolerances.colour"), ({"levinson": "tight"}, "tolerances.levinson")],
    )
    def test_merge_rejects(self, overrides, path):
        with pytest.raises(ConfigError) as e:
            Tolerances().merged(overrides)
        assert e.value.path == path

    @pytest.mark.parametrize("name", ["levinson", "kernel_zero", "b_max"])
    def test_non_positive(self, name):
        with pytest.raises(ConfigError) as e:
            Tolerances(**{name: 0.0})
        assert e.value.path == f"tolerances.{name}"

    def test_to_dict_covers_fields(self):
        assert set(Tolerances().to_dict()) == set(Tolerances.field_names())
