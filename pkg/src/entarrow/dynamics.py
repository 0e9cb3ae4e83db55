"""Closed-system evolution and the pure-dephasing spin bath.

The bath model couples one system qubit (factor 0) to ``n_env`` environment
qubits through ``H = sz_S (x) sum_k g_k sz_k``. With the system prepared in
``(|0> + |1>)/sqrt(2)`` and every environment qubit in ``|+>``, the two
conditional environment states have overlap ``prod_k cos(2 g_k t)``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .entropy import factor_entropies
from .errors import UsageError
from .hilbert import NATURAL_UNITS, HilbertSpace, PhysicalConstants, PureState

HERMITIAN_TOL = 1e-12
MAX_DIM = 2**12
DEFAULT_COUPLINGS = (0.5, 1.5)

SIGMA_Z = np.array([1.0, -1.0])


class _NotReached:
    """Marker returned by :func:`decoherence_time` when the threshold is never crossed."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NOT_REACHED"

    def __bool__(self):
        return False


NOT_REACHED = _NotReached()


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    matrix: np.ndarray
    space: HilbertSpace

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        n = self.space.total_dim
        if m.shape != (n, n):
            raise UsageError(f"Hamiltonian shape {m.shape} does not match dimension {n}")
        if np.abs(m - m.conj().T).max(initial=0.0) > HERMITIAN_TOL:
            raise UsageError("Hamiltonian is not Hermitian")
        if n > MAX_DIM:
            raise UsageError(f"dimension {n} exceeds the dense cap {MAX_DIM}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @functools.cached_property
    def is_diagonal(self) -> bool:
        return not np.any(self.matrix - np.diag(np.diag(self.matrix)))

    @functools.cached_property
    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        if self.is_diagonal:
            return np.diag(self.matrix).real.copy(), None
        return np.linalg.eigh(self.matrix)

    def propagate(self, amplitudes: np.ndarray, t: float, hbar: float = 1.0) -> np.ndarray:
        """``exp(-i H t / hbar) @ amplitudes``."""
        w, v = self.eigh
        phase = np.exp(-1j * w * (t / hbar))
        if v is None:
            return phase * amplitudes
        return v @ (phase * (v.conj().T @ amplitudes))

    def expectation(self, psi: PureState) -> float:
        return float(np.vdot(psi.amplitudes, self.matrix @ psi.amplitudes).real)


@dataclass(frozen=True)
class SpinBathModel:
    n_env: int
    couplings: tuple[float, ...]
    seed: int

    def __post_init__(self):
        if self.n_env < 1:
            raise UsageError("n_env must be at least 1")
        if len(self.couplings) != self.n_env:
            raise UsageError("need one coupling per environment qubit")

    @property
    def space(self) -> HilbertSpace:
        return HilbertSpace.qubits(1 + self.n_env)


def draw_couplings(n_env: int, coupling_range=DEFAULT_COUPLINGS, seed: int = 0) -> tuple[float, ...]:
    """Uniform couplings; for a fixed seed, smaller baths get a prefix of larger ones."""
    lo, hi = coupling_range
    if not 0 < lo <= hi:
        raise UsageError("coupling range must satisfy 0 < lo <= hi")
    return tuple(float(g) for g in np.random.default_rng(seed).uniform(lo, hi, n_env))


def spin_bath_hamiltonian(couplings: Sequence[float]) -> Hamiltonian:
    """Diagonal ``sz_S (x) sum_k g_k sz_k`` on ``1 + len(couplings)`` qubits."""
    n_env = len(couplings)
    env = np.zeros(2**n_env)
    for k, g in enumerate(couplings):
        # sz on qubit k of the environment register, row-major
        env += g * np.repeat(np.tile(SIGMA_Z, 2**k), 2 ** (n_env - k - 1))
    diag = np.concatenate([env, -env])
    return Hamiltonian(np.diag(diag), HilbertSpace.qubits(1 + n_env))


def build_spin_bath(
    n_env: int, coupling_range=DEFAULT_COUPLINGS, seed: int = 0
) -> tuple[SpinBathModel, Hamiltonian]:
    if n_env < 1:
        raise UsageError("n_env must be at least 1")
    couplings = draw_couplings(n_env, coupling_range, seed)
    return SpinBathModel(n_env, couplings, seed), spin_bath_hamiltonian(couplings)


def bath_initial_state(n_env: int) -> PureState:
    """``(|0> + |1>)/sqrt(2)`` on the system, ``|+>`` on every environment qubit."""
    dim = 2 ** (1 + n_env)
    return PureState(np.full(dim, 1 / math.sqrt(dim), dtype=complex), HilbertSpace.qubits(1 + n_env))


def evolve(
    psi: PureState, H: Hamiltonian, t: float, constants: PhysicalConstants = NATURAL_UNITS
) -> PureState:
    """Schrodinger evolution ``exp(-i H t / hbar) psi``; negative ``t`` runs backwards."""
    if psi.dim != H.space.total_dim:
        raise UsageError("state and Hamiltonian dimensions differ")
    vec = H.propagate(psi.amplitudes, t, constants.hbar)
    return PureState(vec / np.linalg.norm(vec), psi.space)


def conditional_overlap(amplitudes: np.ndarray) -> complex:
    """``<E1|E2>`` for ``|psi> = (|0>|E1> + |1>|E2>)/sqrt(2)`` with the system first."""
    half = amplitudes.reshape(2, -1)
    return complex(2 * np.vdot(half[0], half[1]))


def environment_overlap(
    model: SpinBathModel,
    H: Hamiltonian,
    times: Sequence[float],
    constants: PhysicalConstants = NATURAL_UNITS,
) -> list[complex]:
    """Overlap ``r(t)`` of the conditional environment states at each time."""
    psi0 = bath_initial_state(model.n_env)
    return [conditional_overlap(H.propagate(psi0.amplitudes, t, constants.hbar)) for t in times]


def analytic_overlap(couplings: Sequence[float], times, hbar: float = 1.0) -> np.ndarray:
    g = np.asarray(couplings)[None, :]
    t = np.asarray(times, dtype=float)[:, None]
    return np.prod(np.cos(2 * g * t / hbar), axis=1)


def decoherence_time(r_series, threshold: float):
    """First time at which ``|r|`` falls to ``threshold``.

    Parameters
    ----------
    r_series : sequence of (t, r)
        Samples ordered in time; ``r`` may be complex.
    threshold : float
        Crossing level in ``(0, 1)``.

    Returns
    -------
    float or NOT_REACHED
        Crossing time, linearly interpolated between the bracketing samples.
    """
    if len(r_series) == 0:
        raise UsageError("empty overlap series")
    if not 0 < threshold < 1:
        raise UsageError("threshold must lie in (0, 1)")
    prev_t, prev_a = None, None
    for t, r in r_series:
        a = abs(r)
        if a <= threshold:
            if prev_t is None:
                return float(t)
            frac = (prev_a - threshold) / (prev_a - a)
            return float(prev_t + frac * (t - prev_t))
        prev_t, prev_a = t, a
    return NOT_REACHED


def entanglement_trajectory(
    psi0: PureState,
    H: Hamiltonian,
    F,
    times: Sequence[float],
    constants: PhysicalConstants = NATURAL_UNITS,
) -> list[float]:
    """Entanglement entropy relative to factorization ``F`` along the evolution of ``psi0``."""
    if psi0.dim != H.space.total_dim or psi0.dim != F.total_dim:
        raise UsageError("state, Hamiltonian and factorization dimensions differ")
    out = []
    for t in times:
        vec = F.rotation @ H.propagate(psi0.amplitudes, t, constants.hbar)
        out.append(float(factor_entropies(vec, F.dims).sum()))
    return out


def qubit_entropy_from_overlap(r) -> float:
    """Entropy of the reduced system qubit when its coherence is ``|r|/2``."""
    lam = np.array([(1 + abs(r)) / 2, (1 - abs(r)) / 2])
    lam = lam[lam > 0]
    return float(-(lam * np.log(lam)).sum())


def reduced_system_state(amplitudes: np.ndarray) -> np.ndarray:
    half = amplitudes.reshape(2, -1)
    return half @ half.conj().T


def random_hamiltonian(dim: int, seed: int) -> np.ndarray:
    """GUE-like Hermitian matrix with unit-variance entries."""
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (a + a.conj().T) / 2
