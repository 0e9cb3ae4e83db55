import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entarrow.dynamics import (
    NOT_REACHED,
    Hamiltonian,
    analytic_overlap,
    bath_initial_state,
    build_spin_bath,
    conditional_overlap,
    decoherence_time,
    entanglement_trajectory,
    environment_overlap,
    evolve,
    qubit_entropy_from_overlap,
    random_hamiltonian,
    reduced_system_state,
    spin_bath_hamiltonian,
)
from entarrow.entropy import von_neumann
from entarrow.errors import UsageError
from entarrow.factorizations import Factorization
from entarrow.hilbert import DensityMatrix, HilbertSpace, PureState

from conftest import random_vector

TIMES = np.linspace(0.0, 3.0, 61)


def _ham(dim, seed, dims=None):
    return Hamiltonian(random_hamiltonian(dim, seed), HilbertSpace(dims or (dim,)))


class TestSpinBath:
    def test_single_spin_diagonal(self):
        H = spin_bath_hamiltonian([1.0])
        # sz (x) sz in row-major order
        np.testing.assert_array_equal(np.diag(H.matrix).real, [1, -1, -1, 1])
        assert H.is_diagonal

    def test_two_env_spins(self):
        H = spin_bath_hamiltonian([0.3, 0.7])
        sz = np.diag([1.0, -1.0])
        env = 0.3 * np.kron(sz, np.eye(2)) + 0.7 * np.kron(np.eye(2), sz)
        np.testing.assert_allclose(H.matrix, np.kron(sz, env), atol=1e-15)

    def test_seeded_and_sized(self):
        m1, H1 = build_spin_bath(8, seed=3)
        m2, H2 = build_spin_bath(8, seed=3)
        assert m1.couplings == m2.couplings
        np.testing.assert_array_equal(H1.matrix, H2.matrix)
        assert H1.space.total_dim == 512
        assert all(0.5 <= g <= 1.5 for g in m1.couplings)

    def test_smaller_bath_is_prefix(self):
        small, _ = build_spin_bath(4, seed=11)
        big, _ = build_spin_bath(9, seed=11)
        assert big.couplings[:4] == small.couplings

    def test_bad_size(self):
        with pytest.raises(UsageError):
            build_spin_bath(0)

    def test_overlap_starts_at_one(self):
        psi = bath_initial_state(5)
        assert conditional_overlap(psi.amplitudes) == pytest.approx(1.0, abs=1e-14)

    def test_single_spin_cosine(self):
        model, H = build_spin_bath(1, seed=0)
        g = model.couplings[0]
        r = environment_overlap(model, H, TIMES)
        np.testing.assert_allclose(np.abs(r), np.abs(np.cos(2 * g * TIMES)), atol=1e-12)

    @pytest.mark.parametrize("n_env", [2, 5, 10])
    def test_overlap_matches_product_formula(self, n_env):
        model, H = build_spin_bath(n_env, seed=n_env)
        r = np.array(environment_overlap(model, H, TIMES))
        np.testing.assert_allclose(np.abs(r), np.abs(analytic_overlap(model.couplings, TIMES)), atol=1e-8)

    def test_overlap_matches_matrix_exponential(self):
        # independent route: dense expm of the Hamiltonian
        from scipy.linalg import expm

        model, H = build_spin_bath(4, seed=1)
        psi0 = bath_initial_state(4).amplitudes
        for t in (0.4, 1.7):
            vec = expm(-1j * H.matrix * t) @ psi0
            half = vec.reshape(2, -1)
            ours = environment_overlap(model, H, [t])[0]
            assert abs(ours - 2 * np.vdot(half[0], half[1])) < 1e-12


class TestDecoherenceTime:
    def test_exponential(self):
        t = np.linspace(0, 3, 3001)
        series = list(zip(t, np.exp(-t)))
        assert decoherence_time(series, math.exp(-1)) == pytest.approx(1.0, abs=1e-6)

    def test_not_reached(self):
        series = [(0.0, 1.0), (1.0, 0.9)]
        assert decoherence_time(series, 0.5) is NOT_REACHED
        assert not NOT_REACHED

    def test_crossing_at_zero(self):
        assert decoherence_time([(0.0, 0.01), (1.0, 0.0)], 0.05) == 0.0

    def test_bad_threshold(self):
        with pytest.raises(UsageError):
            decoherence_time([(0.0, 1.0)], 1.5)

    def test_decreases_with_bath_size(self):
        t = np.linspace(0, 3, 3001)
        crossings = []
        for n in (2, 4, 6, 8, 10):
            model, H = build_spin_bath(n, seed=0)
            r = environment_overlap(model, H, t)
            crossings.append(decoherence_time(list(zip(t, r)), 0.05))
        assert all(a > b for a, b in zip(crossings, crossings[1:]))

    def test_log_overlap_linear_in_bath_size(self):
        sizes = np.arange(2, 11)
        means = []
        for n in sizes:
            vals = []
            for seed in range(20):
                model, _ = build_spin_bath(n, seed=seed)
                vals.append(math.log(abs(analytic_overlap(model.couplings, [0.3])[0])))
            means.append(np.mean(vals))
        slope, intercept = np.polyfit(sizes, means, 1)
        pred = slope * sizes + intercept
        r2 = 1 - np.sum((means - pred) ** 2) / np.sum((means - np.mean(means)) ** 2)
        assert slope < 0 and r2 > 0.9


class TestEvolution:
    def test_zero_time_identity(self, rng):
        psi = PureState.from_vector(random_vector(rng, 8), (2, 2, 2))
        out = evolve(psi, _ham(8, 1, (2, 2, 2)), 0.0)
        np.testing.assert_allclose(out.amplitudes, psi.amplitudes, atol=1e-14)

    def test_diagonal_phase(self):
        H = Hamiltonian(np.diag([0.0, 2.0]), HilbertSpace((2,)))
        out = evolve(PureState.basis(1, (2,)), H, 0.7)
        assert out.amplitudes[1] == pytest.approx(np.exp(-1.4j), abs=1e-15)

    def test_round_trip(self, rng):
        psi = PureState.from_vector(random_vector(rng, 64), (2,) * 6)
        H = _ham(64, 5, (2,) * 6)
        back = evolve(evolve(psi, H, 2.3), H, -2.3)
        assert np.abs(back.amplitudes - psi.amplitudes).max() < 1e-9

    def test_non_hermitian_rejected(self):
        with pytest.raises(UsageError):
            Hamiltonian(np.array([[0, 1], [0, 0]]), HilbertSpace((2,)))

    def test_dimension_mismatch(self):
        with pytest.raises(UsageError):
            evolve(PureState.basis(0, (2,)), _ham(4, 0), 1.0)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 10**6), t=st.floats(-5, 5))
    def test_norm_and_energy_conserved(self, seed, t):
        rng = np.random.default_rng(seed)
        psi = PureState.from_vector(random_vector(rng, 16), (2,) * 4)
        H = _ham(16, seed, (2,) * 4)
        out = evolve(psi, H, t)
        assert abs(np.linalg.norm(out.amplitudes) - 1) < 1e-12
        assert abs(H.expectation(out) - H.expectation(psi)) < 1e-9

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 10**6), t=st.floats(0, 10))
    def test_von_neumann_stationary(self, seed, t):
        rng = np.random.default_rng(seed)
        a = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
        m = a @ a.conj().T
        rho = m / np.trace(m).real
        w, v = np.linalg.eigh(random_hamiltonian(16, seed + 1))
        u = v @ np.diag(np.exp(-1j * w * t)) @ v.conj().T
        later = u @ rho @ u.conj().T
        s0 = von_neumann(DensityMatrix(0.5 * (rho + rho.conj().T), HilbertSpace((2,) * 4)))
        s1 = von_neumann(DensityMatrix(0.5 * (later + later.conj().T), HilbertSpace((2,) * 4)))
        assert abs(s1 - s0) < 1e-9

    def test_energy_populations_constant(self, rng):
        H = _ham(8, 3)
        psi = PureState.from_vector(random_vector(rng, 8))
        w, v = H.eigh
        p0 = np.abs(v.conj().T @ psi.amplitudes) ** 2
        p1 = np.abs(v.conj().T @ evolve(psi, H, 4.2).amplitudes) ** 2
        np.testing.assert_allclose(p0, p1, atol=1e-12)


class TestEntanglementTrajectory:
    def test_starts_at_zero_and_matches_overlap(self):
        model, H = build_spin_bath(8, seed=2)
        psi0 = bath_initial_state(8)
        F = Factorization.identity((2,) * 9)
        s = entanglement_trajectory(psi0, H, F, TIMES)
        assert abs(s[0]) < 1e-12
        # across the system/environment cut both sides carry the system-qubit entropy
        split = Factorization.identity((2, 256))
        s_split = entanglement_trajectory(psi0, H, split, TIMES)
        r = analytic_overlap(model.couplings, TIMES)
        expected = [2 * qubit_entropy_from_overlap(x) for x in r]
        np.testing.assert_allclose(s_split, expected, atol=1e-8)

    def test_entropy_anticorrelates_with_overlap(self):
        model, H = build_spin_bath(6, seed=4)
        psi0 = bath_initial_state(6)
        split = Factorization.identity((2, 64))
        s = np.array(entanglement_trajectory(psi0, H, split, TIMES))
        r = np.abs(analytic_overlap(model.couplings, TIMES))
        assert np.corrcoef(s, r)[0, 1] < -0.9

    def test_reduced_state_coherence(self):
        model, H = build_spin_bath(3, seed=0)
        psi = evolve(bath_initial_state(3), H, 0.8)
        rho = reduced_system_state(psi.amplitudes)
        r = analytic_overlap(model.couplings, [0.8])[0]
        assert abs(abs(rho[0, 1]) - abs(r) / 2) < 1e-12

    def test_recoherence_round_trip(self):
        _, H = build_spin_bath(8, seed=0)
        psi0 = bath_initial_state(8)
        F = Factorization.identity((2, 256))
        forward = evolve(psi0, H, 3.0)
        assert entanglement_trajectory(forward, H, F, [0.0])[0] > 1.0
        back = evolve(forward, H, -3.0)
        assert abs(entanglement_trajectory(back, H, F, [0.0])[0]) < 1e-8
