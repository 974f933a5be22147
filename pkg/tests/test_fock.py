"""Truncated Fock-space operators and states."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qndsim.fock import (
    DensityMatrix,
    FockOperator,
    diagonal_state,
    dissipator_action,
    fock_state,
    hamiltonian_split,
    identity,
    ladder,
    product_state,
    suggest_dim,
    tensor,
    thermal_state,
)

from conftest import make_ref


def random_hermitian(dim: int, rng) -> np.ndarray:
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return m + m.conj().T


class TestLadder:
    def test_matrix_elements(self):
        b, bdag, n_op = ladder(5)
        # <n-1| b |n> = sqrt(n)
        for n in range(1, 5):
            assert b.entries[n - 1, n] == pytest.approx(math.sqrt(n))
        assert np.count_nonzero(b.entries) == 4
        assert np.array_equal(bdag.entries, b.entries.conj().T)
        assert np.allclose(n_op.entries, np.diag(np.arange(5.0)))

    def test_commutator_on_interior(self):
        # [b, b†] = 1 away from the truncation edge
        b, bdag, _ = ladder(8)
        comm = (b @ bdag - bdag @ b).entries
        assert np.allclose(comm[:7, :7], np.eye(7))
        # the edge row absorbs the truncation: 1 - dim
        assert comm[7, 7] == pytest.approx(1.0 - 8.0)

    def test_minimum_dimension(self):
        with pytest.raises(ValueError):
            ladder(1)

    def test_operator_algebra(self):
        b, bdag, n_op = ladder(4)
        assert np.allclose((2.0 * b).entries, 2.0 * b.entries)
        assert np.allclose((-b).entries, -b.entries)
        assert np.allclose((b + bdag).entries, b.entries + bdag.entries)
        assert np.allclose((b - b).entries, 0.0)
        assert np.array_equal(b.dagger().entries, bdag.entries)
        assert b.dim == 4

    def test_tensor_convention_cavity_first(self):
        a = identity(2)
        _, _, n_b = ladder(3)
        full = tensor(a, n_b)
        assert full.dim == 6
        # block-diagonal repetition of the mechanical operator
        assert np.allclose(full.entries[:3, :3], n_b.entries)
        assert np.allclose(full.entries[3:, 3:], n_b.entries)


class TestStates:
    def test_fock_state(self):
        rho = fock_state(4, 2)
        assert rho.populations()[2] == 1.0
        assert np.trace(rho.entries) == pytest.approx(1.0)
        with pytest.raises(ValueError):
            fock_state(4, 4)
        with pytest.raises(ValueError):
            fock_state(4, -1)

    def test_thermal_state_geometric_populations(self):
        nbar = 0.25
        rho = thermal_state(30, nbar)
        p = rho.populations()
        # renormalized geometric distribution on the truncated space
        r = nbar / (nbar + 1.0)
        expect = (1 - r) * r ** np.arange(30)
        expect /= expect.sum()
        assert np.allclose(p, expect, rtol=1e-12)
        assert p @ np.arange(30) == pytest.approx(nbar, rel=1e-9)

    def test_thermal_state_zero_occupancy_is_ground(self):
        assert thermal_state(5, 0.0).populations()[0] == 1.0

    def test_diagonal_state(self):
        rho = diagonal_state([0.5, 0.25, 0.25])
        assert np.allclose(rho.populations(), [0.5, 0.25, 0.25])
        # unnormalized weights are renormalized, negative ones rejected
        assert np.allclose(diagonal_state([3.0, 1.0]).populations(), [0.75, 0.25])
        with pytest.raises(ValueError):
            diagonal_state([1.1, -0.1])
        with pytest.raises(ValueError):
            diagonal_state([0.0, 0.0])

    def test_product_state(self):
        rho = product_state(fock_state(2, 0), fock_state(3, 1))
        assert rho.dim == 6
        assert rho.populations()[1] == pytest.approx(1.0)

    def test_density_matrix_validation(self):
        with pytest.raises(ValueError):
            DensityMatrix(np.array([[0.5, 0.5], [0.0, 0.5]]))  # not Hermitian
        with pytest.raises(ValueError):
            DensityMatrix(np.eye(2))  # trace 2


class TestDissipator:
    def test_decay_channel_on_fock_state(self):
        # D[b] |n><n| = 2n |n-1><n-1| - 2n |n><n|
        b, _, _ = ladder(5)
        for n in range(5):
            out = dissipator_action(b, fock_state(5, n))
            expect = np.zeros((5, 5))
            if n > 0:
                expect[n - 1, n - 1] = 2.0 * n
            expect[n, n] = -2.0 * n
            assert np.allclose(out, expect)

    def test_traceless_and_hermitian(self):
        rng = np.random.default_rng(7)
        b, bdag, n_op = ladder(6)
        for o in (b, bdag, n_op, b @ b):
            rho = random_hermitian(6, rng)
            out = dissipator_action(o, rho)
            assert abs(np.trace(out)) < 1e-12 * np.linalg.norm(rho)
            assert np.allclose(out, out.conj().T)

    def test_number_channel_kills_coherences_only(self):
        # D[b†b] leaves populations alone and damps |n><m| as -(n-m)^2
        _, _, n_op = ladder(4)
        rho = np.zeros((4, 4), dtype=complex)
        rho[1, 3] = 1.0
        out = dissipator_action(n_op, rho)
        assert out[1, 3] == pytest.approx(-((1 - 3) ** 2))
        for n in range(4):
            assert dissipator_action(n_op, fock_state(4, n))[n, n] == 0.0

    def test_shape_mismatch(self):
        b, _, _ = ladder(3)
        with pytest.raises(ValueError):
            dissipator_action(b, fock_state(4, 0))


class TestHamiltonianSplit:
    def test_conserving_part_commutes_with_number(self, ref_params):
        h0, hp = hamiltonian_split(ref_params, 3, 5)
        n_full = tensor(identity(3), ladder(5)[2]).entries
        assert np.linalg.norm(h0.entries @ n_full - n_full @ h0.entries) < 1e-6
        # the breaking part does not commute
        assert np.linalg.norm(hp.entries @ n_full - n_full @ hp.entries) > 1.0

    def test_both_parts_hermitian(self, ref_params):
        h0, hp = hamiltonian_split(ref_params, 3, 4)
        assert np.allclose(h0.entries, h0.entries.conj().T)
        assert np.allclose(hp.entries, hp.entries.conj().T)

    def test_vacuum_cavity_block_is_mechanical_only(self, ref_params):
        # zero photons: only omega_m b†b survives in H0
        h0, hp = hamiltonian_split(ref_params, 2, 4)
        block = h0.entries[:4, :4]
        assert np.allclose(
            block, ref_params.omega_m * np.diag(np.arange(4.0)), rtol=1e-12
        )
        assert np.allclose(hp.entries[:4, :4], 0.0)

    def test_dispersive_shift_per_photon(self, ref_params):
        # the photon block at phonon n carries g2 (n + 1/2) per photon
        h0, _ = hamiltonian_split(ref_params, 3, 4)
        p = ref_params
        for n in range(4):
            e0 = h0.entries[n, n].real
            e1 = h0.entries[4 + n, 4 + n].real
            assert e1 - e0 == pytest.approx(p.g2 * (n + 0.5), rel=1e-12)

    def test_minimum_dimensions(self, ref_params):
        with pytest.raises(ValueError):
            hamiltonian_split(ref_params, 1, 4)


class TestSuggestDim:
    def test_reference_value(self):
        # 0.25 occupancy, 1e-9 tail: (1/5)^d < 1e-9 first at d = 13
        assert suggest_dim(0.25, tail_mass=1e-9) == 13

    def test_tail_mass_bound_holds(self):
        for nbar in (0.1, 0.5, 2.0, 20.0):
            d = suggest_dim(nbar, tail_mass=1e-6)
            r = nbar / (nbar + 1.0)
            assert r**d < 1e-6 <= r ** (d - 1)

    def test_zero_occupancy(self):
        assert suggest_dim(0.0) == 2
        assert suggest_dim(0.0, minimum=9) == 9

    def test_validation(self):
        with pytest.raises(ValueError):
            suggest_dim(-0.1)
        with pytest.raises(ValueError):
            suggest_dim(1.0, tail_mass=0.0)

    @given(nbar=st.floats(0.01, 100.0), minimum=st.integers(2, 30))
    @settings(max_examples=60, deadline=None)
    def test_respects_minimum(self, nbar, minimum):
        assert suggest_dim(nbar, minimum=minimum) >= minimum
