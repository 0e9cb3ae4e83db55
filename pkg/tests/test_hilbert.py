import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entarrow.errors import UsageError
from entarrow.hilbert import (
    DensityMatrix,
    HilbertSpace,
    PureState,
    haar_sample,
    ket,
    partial_trace,
    purity,
    tensor,
)

from conftest import random_vector
from oracles.brute import partial_trace_loops

dims_strategy = st.lists(st.integers(1, 3), min_size=1, max_size=4)


class TestSpaces:
    def test_total_dim(self):
        assert HilbertSpace((2, 3, 4)).total_dim == 24
        assert HilbertSpace.qubits(5).dims == (2,) * 5

    @pytest.mark.parametrize("dims", [(), (2, 0), (-1,)])
    def test_rejects_bad_dims(self, dims):
        with pytest.raises(UsageError):
            HilbertSpace(dims)

    def test_unnormalized_state_rejected(self):
        with pytest.raises(UsageError):
            PureState(np.array([1.0, 1.0]), HilbertSpace((2,)))

    def test_wrong_length_rejected(self):
        with pytest.raises(UsageError):
            PureState(np.array([1.0, 0.0, 0.0]), HilbertSpace((2,)))


class TestTensor:
    def test_product_of_basis_kets(self):
        psi = tensor([ket(0), ket(1)])
        np.testing.assert_array_equal(psi.amplitudes, [0, 1, 0, 0])
        assert psi.space.dims == (2, 2)

    def test_plus_states(self):
        plus = PureState.from_vector([1, 1])
        psi = tensor([plus, plus])
        np.testing.assert_allclose(psi.amplitudes, np.full(4, 0.5))

    def test_row_major_order(self):
        # |1> on the first factor of (2, 3) lands at index 3
        psi = tensor([ket(1), PureState.basis(0, (3,))])
        assert np.argmax(np.abs(psi.amplitudes)) == 3

    def test_empty_rejected(self):
        with pytest.raises(UsageError):
            tensor([])


class TestPartialTrace:
    def test_bell_gives_maximally_mixed(self):
        bell = PureState.from_vector([1, 0, 0, 1], (2, 2))
        rho = partial_trace(bell, bell.space, [0])
        np.testing.assert_allclose(rho.matrix, np.eye(2) / 2, atol=1e-15)

    def test_keep_everything_is_projector(self, rng):
        psi = PureState.from_vector(random_vector(rng, 8), (2, 2, 2))
        rho = partial_trace(psi, psi.space, [0, 1, 2])
        np.testing.assert_allclose(rho.matrix, np.outer(psi.amplitudes, psi.amplitudes.conj()), atol=1e-15)

    def test_example_third_factor_pure(self, example_state):
        rho = partial_trace(example_state, example_state.space, [2])
        np.testing.assert_allclose(rho.matrix, [[1, 0], [0, 0]], atol=1e-15)

    def test_kept_order_ascending(self, rng):
        psi = PureState.from_vector(random_vector(rng, 12), (2, 3, 2))
        a = partial_trace(psi, psi.space, [2, 0])
        b = partial_trace(psi, psi.space, [0, 2])
        np.testing.assert_array_equal(a.matrix, b.matrix)

    def test_mixed_input(self, rng):
        psi = PureState.from_vector(random_vector(rng, 12), (3, 4))
        rho = psi.density_matrix()
        np.testing.assert_allclose(
            partial_trace(rho, rho.space, [1]).matrix,
            partial_trace(psi, psi.space, [1]).matrix,
            atol=1e-14,
        )

    @pytest.mark.parametrize("keep", [[], [3], [-1]])
    def test_bad_keep(self, keep, example_state):
        with pytest.raises(UsageError):
            partial_trace(example_state, example_state.space, keep)

    @settings(max_examples=40, deadline=None)
    @given(dims=dims_strategy, seed=st.integers(0, 10**6), data=st.data())
    def test_matches_loop_oracle(self, dims, seed, data):
        n = len(dims)
        keep = data.draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=n, unique=True))
        vec = random_vector(np.random.default_rng(seed), math.prod(dims))
        psi = PureState(vec, HilbertSpace(tuple(dims)))
        expected = partial_trace_loops(np.outer(vec, vec.conj()), dims, keep)
        np.testing.assert_allclose(partial_trace(psi, psi.space, keep).matrix, expected, atol=1e-13)

    @settings(max_examples=30, deadline=None)
    @given(da=st.integers(1, 4), db=st.integers(1, 4), seed=st.integers(0, 10**6))
    def test_schmidt_symmetry(self, da, db, seed):
        psi = PureState(random_vector(np.random.default_rng(seed), da * db), HilbertSpace((da, db)))
        ea = np.linalg.eigvalsh(partial_trace(psi, psi.space, [0]).matrix)
        eb = np.linalg.eigvalsh(partial_trace(psi, psi.space, [1]).matrix)
        k = min(da, db)
        np.testing.assert_allclose(np.sort(ea)[-k:], np.sort(eb)[-k:], atol=1e-13)

    @settings(max_examples=30, deadline=None)
    @given(dims=dims_strategy, seed=st.integers(0, 10**6))
    def test_trace_preserved(self, dims, seed):
        psi = PureState(random_vector(np.random.default_rng(seed), math.prod(dims)), HilbertSpace(tuple(dims)))
        rho = partial_trace(psi, psi.space, [0])
        assert abs(np.trace(rho.matrix) - 1) < 1e-12


class TestPurity:
    def test_pure(self):
        assert purity(ket(0, 1).density_matrix()) == pytest.approx(1.0, abs=1e-15)

    def test_maximally_mixed(self):
        rho = DensityMatrix(np.eye(4) / 4, HilbertSpace((2, 2)))
        assert purity(rho) == pytest.approx(0.25, abs=1e-15)

    def test_non_hermitian_rejected(self):
        with pytest.raises(UsageError):
            DensityMatrix(np.array([[0.5, 0.1], [0.0, 0.5]]), HilbertSpace((2,)))


class TestHaar:
    def test_dim_one(self):
        np.testing.assert_array_equal(haar_sample(1, 7).amplitudes, [1.0])

    def test_seeded(self):
        a = haar_sample(16, 3)
        b = haar_sample(16, 3)
        c = haar_sample(16, 4)
        np.testing.assert_array_equal(a.amplitudes, b.amplitudes)
        assert not np.allclose(a.amplitudes, c.amplitudes)

    def test_bad_dims(self):
        with pytest.raises(UsageError):
            haar_sample(8, 0, dims=(2, 2))

    def test_second_moment(self):
        # E|c_i|^2 = 1/d; check every component within 4 standard errors
        d, n = 32, 10000
        w = np.array([np.abs(haar_sample(d, s).amplitudes) ** 2 for s in range(n)])
        mean = w.mean(axis=0)
        se = w.std(axis=0, ddof=1) / math.sqrt(n)
        assert np.all(np.abs(mean - 1 / d) < 4 * se)

    def test_unitary_invariance_of_moments(self):
        # a fixed rotation leaves the mean |c_0|^2 and E|c_0|^4 = 2/(d(d+1)) unchanged
        d, n = 8, 20000
        q, _ = np.linalg.qr(random_vector(np.random.default_rng(9), d * d).reshape(d, d))
        raw = np.array([haar_sample(d, s).amplitudes for s in range(n)])
        for vecs in (raw, raw @ q.T):
            p = np.abs(vecs[:, 0]) ** 2
            assert abs(p.mean() - 1 / d) < 4 * p.std() / math.sqrt(n)
            m4 = p**2
            assert abs(m4.mean() - 2 / (d * (d + 1))) < 4 * m4.std() / math.sqrt(n)
