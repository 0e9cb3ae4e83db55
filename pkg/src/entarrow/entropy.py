"""Entropy measures: von Neumann, factorization-relative entanglement, quantum Boltzmann.

All logarithms are natural; results are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np
from scipy.special import xlogy

from .errors import NoMacrostateError, PositivityError, UsageError
from .hilbert import (
    NATURAL_UNITS,
    POSITIVITY_TOL,
    DensityMatrix,
    PhysicalConstants,
    PureState,
)

if TYPE_CHECKING:
    from .factorizations import Factorization

PROJECTOR_TOL = 1e-10


def entropy_from_spectrum(eigenvalues, tol: float = POSITIVITY_TOL) -> float:
    """Shannon entropy of a spectrum, clipping tiny negative noise to zero.

    Raises
    ------
    PositivityError
        If any eigenvalue lies below ``-tol``.
    """
    p = np.asarray(eigenvalues, dtype=float)
    if p.size and p.min() < -tol:
        raise PositivityError(f"eigenvalue {p.min()!r} below -{tol}")
    p = np.clip(p, 0.0, None)
    return float(-xlogy(p, p).sum())


def von_neumann(rho: DensityMatrix) -> float:
    """``-Tr(rho log rho)`` with ``0 log 0 = 0``."""
    return entropy_from_spectrum(np.linalg.eigvalsh(rho.matrix))


def factor_entropies(amplitudes: np.ndarray, dims: Sequence[int]) -> np.ndarray:
    """Von Neumann entropy of every single-factor reduction of a pure vector.

    ``amplitudes`` may carry leading batch axes; the last axis is the state.
    Returns an array of shape ``batch + (len(dims),)``.
    """
    dims = tuple(dims)
    amps = np.asarray(amplitudes)
    batch = amps.shape[:-1]
    tensor = amps.reshape(batch + dims)
    nb = len(batch)
    out = np.empty(batch + (len(dims),))
    for i, d in enumerate(dims):
        if d == 1 or d == amps.shape[-1]:
            out[..., i] = 0.0
            continue
        m = np.moveaxis(tensor, nb + i, nb).reshape(batch + (d, -1))
        s = np.linalg.svd(m, compute_uv=False)
        p = s * s
        # rounding can push the top weight past 1 and the entropy below 0
        p /= p.sum(axis=-1, keepdims=True)
        out[..., i] = -xlogy(p, p).sum(axis=-1)
    return out


def entanglement_entropy(psi: PureState, F: "Factorization") -> float:
    """Sum of the factor entropies of ``psi`` read through factorization ``F``."""
    if psi.dim != F.total_dim:
        raise UsageError(
            f"state dimension {psi.dim} does not match factorization dimension {F.total_dim}"
        )
    rotated = F.rotation @ psi.amplitudes
    return float(factor_entropies(rotated, F.dims).sum())


@dataclass(frozen=True, eq=False)
class MacrostateDecomposition:
    """Orthogonal projectors resolving the identity, one per macrostate."""

    projectors: tuple[np.ndarray, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        projs = tuple(np.array(p, dtype=complex) for p in self.projectors)
        labels = tuple(str(s) for s in self.labels)
        if not projs:
            raise UsageError("a decomposition needs at least one projector")
        if len(labels) != len(projs):
            raise UsageError("one label per projector is required")
        n = projs[0].shape[0]
        total = np.zeros((n, n), dtype=complex)
        for i, p in enumerate(projs):
            if p.shape != (n, n):
                raise UsageError("projectors must share one square shape")
            if np.abs(p - p.conj().T).max() > PROJECTOR_TOL:
                raise UsageError(f"projector {i} is not Hermitian")
            if np.abs(p @ p - p).max() > PROJECTOR_TOL:
                raise UsageError(f"projector {i} is not idempotent")
            for j in range(i):
                if np.abs(p @ projs[j]).max() > PROJECTOR_TOL:
                    raise UsageError(f"projectors {j} and {i} are not orthogonal")
            total += p
            p.setflags(write=False)
        if np.abs(total - np.eye(n)).max() > PROJECTOR_TOL:
            raise UsageError("projectors do not sum to the identity")
        object.__setattr__(self, "projectors", projs)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    def rank(self, index: int) -> int:
        return int(round(np.trace(self.projectors[index]).real))

    def basis(self, index: int) -> np.ndarray:
        """Orthonormal basis (columns) of macrostate ``index``."""
        w, v = np.linalg.eigh(self.projectors[index])
        return v[:, w > 0.5]

    @classmethod
    def from_blocks(cls, dim: int, blocks: Sequence[Sequence[int]], labels=None):
        """Decomposition whose subspaces are spanned by computational-basis index blocks."""
        projs = []
        for block in blocks:
            p = np.zeros((dim, dim), dtype=complex)
            idx = list(block)
            p[idx, idx] = 1.0
            projs.append(p)
        if labels is None:
            labels = [f"M{i}" for i in range(len(projs))]
        return cls(tuple(projs), tuple(labels))

    @classmethod
    def from_subspace(cls, basis: np.ndarray, labels=("inside", "outside")):
        """Two-element decomposition: span of ``basis`` columns and its complement."""
        q, _ = np.linalg.qr(np.asarray(basis, dtype=complex))
        p = q @ q.conj().T
        p = 0.5 * (p + p.conj().T)
        return cls((p, np.eye(p.shape[0]) - p), tuple(labels))


def macrostate_weights(psi: PureState, D: MacrostateDecomposition) -> np.ndarray:
    a = psi.amplitudes
    return np.array([np.vdot(a, p @ a).real for p in D.projectors])


def macrostate_of(psi: PureState, D: MacrostateDecomposition, epsilon: float = 0.01) -> int:
    """Index of the macrostate holding at least ``1 - epsilon`` of the state's weight."""
    if not 0 < epsilon < 0.5:
        raise UsageError("epsilon must lie in (0, 0.5)")
    if psi.dim != D.dim:
        raise UsageError("state and decomposition dimensions differ")
    weights = macrostate_weights(psi, D)
    hits = np.flatnonzero(weights >= 1.0 - epsilon)
    if hits.size == 0:
        raise NoMacrostateError(
            f"largest macrostate weight {weights.max():.6g} is below {1 - epsilon}"
        )
    return int(hits[0])


def quantum_boltzmann(
    psi: PureState,
    D: MacrostateDecomposition,
    epsilon: float = 0.01,
    constants: PhysicalConstants = NATURAL_UNITS,
) -> float:
    """``k_B log dim(H_M)`` for the macrostate ``H_M`` containing ``psi``."""
    index = macrostate_of(psi, D, epsilon)
    return constants.k_B * math.log(D.rank(index))


def max_entanglement_entropy(dims: Sequence[int]) -> float:
    """Upper bound of the factor-entropy sum for a pure state on ``dims``."""
    total = math.prod(dims)
    return float(sum(math.log(min(d, total // d)) for d in dims))

