"""Finite-dimensional Hilbert-space algebra.

States are stored as flat complex vectors in row-major order over the factor
dimensions: for ``dims = (d0, d1, ..., dN-1)`` the basis index of
``|i0, i1, ..., iN-1>`` is ``np.ravel_multi_index((i0, ..., iN-1), dims)``.
Every module relies on this convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import UsageError

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = 1e-10


def _frozen(array, dtype=complex):
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class HilbertSpace:
    """Ordered tensor product of factor spaces with dimensions ``dims``."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise UsageError("a Hilbert space needs at least one factor")
        if any(d < 1 for d in dims):
            raise UsageError(f"factor dimensions must be positive, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    @property
    def n_factors(self) -> int:
        return len(self.dims)

    @classmethod
    def qubits(cls, n: int) -> "HilbertSpace":
        return cls((2,) * n)


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.0
    k_B: float = 1.0

    def __post_init__(self):
        if not (self.hbar > 0 and self.k_B > 0):
            raise UsageError("hbar and k_B must be strictly positive")


NATURAL_UNITS = PhysicalConstants()


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized state vector on a :class:`HilbertSpace`."""

    amplitudes: np.ndarray
    space: HilbertSpace

    def __post_init__(self):
        amps = _frozen(self.amplitudes).reshape(-1)
        if amps.size != self.space.total_dim:
            raise UsageError(
                f"{amps.size} amplitudes do not fit a space of dimension {self.space.total_dim}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise UsageError(f"state is not normalized (norm = {norm!r})")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_vector(cls, vector, dims: Sequence[int] | None = None) -> "PureState":
        """Normalize ``vector`` and wrap it; ``dims`` defaults to a single factor."""
        vec = np.asarray(vector, dtype=complex).reshape(-1)
        norm = np.linalg.norm(vec)
        if norm == 0:
            raise UsageError("cannot normalize the zero vector")
        space = HilbertSpace(tuple(dims) if dims is not None else (vec.size,))
        return cls(vec / norm, space)

    @classmethod
    def basis(cls, index: int, dims: Sequence[int]) -> "PureState":
        space = HilbertSpace(tuple(dims))
        vec = np.zeros(space.total_dim, dtype=complex)
        vec[index] = 1.0
        return cls(vec, space)

    @property
    def dim(self) -> int:
        return self.space.total_dim

    def with_dims(self, dims: Sequence[int]) -> "PureState":
        """Same amplitudes read under another factor signature."""
        return PureState(self.amplitudes, HilbertSpace(tuple(dims)))

    def density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), self.space)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix on a :class:`HilbertSpace`.

    Positivity is checked only up to ``POSITIVITY_TOL``; pass ``check=False`` to
    skip all validation (used for deliberately non-physical grid states).
    """

    matrix: np.ndarray
    space: HilbertSpace
    check: bool = True

    def __post_init__(self):
        mat = _frozen(self.matrix)
        n = self.space.total_dim
        if mat.shape != (n, n):
            raise UsageError(f"matrix shape {mat.shape} does not match dimension {n}")
        if self.check:
            if np.max(np.abs(mat - mat.conj().T), initial=0.0) > HERMITIAN_TOL:
                raise UsageError("density matrix is not Hermitian")
            tr = np.trace(mat)
            if abs(tr - 1.0) > TRACE_TOL:
                raise UsageError(f"density matrix trace is {tr!r}, expected 1")
            if np.linalg.eigvalsh(mat).min() < -POSITIVITY_TOL:
                raise UsageError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.space.total_dim

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


State = Union[PureState, DensityMatrix]


def ket(*bits: int) -> PureState:
    """Computational-basis qubit product state, e.g. ``ket(0, 1)`` is ``|01>``."""
    dims = (2,) * len(bits)
    return PureState.basis(int(np.ravel_multi_index(bits, dims)), dims)


def tensor(parts: Sequence[PureState]) -> PureState:
    """Kronecker product of ``parts`` in the given order."""
    if len(parts) == 0:
        raise UsageError("tensor needs at least one state")
    vec = parts[0].amplitudes
    dims = list(parts[0].space.dims)
    for part in parts[1:]:
        vec = np.kron(vec, part.amplitudes)
        dims.extend(part.space.dims)
    # norms of the factors multiply; repair the last-bit drift so the product validates
    vec = vec / np.linalg.norm(vec)
    return PureState(vec, HilbertSpace(tuple(dims)))


def _check_keep(keep, n_factors) -> tuple[int, ...]:
    keep = tuple(sorted(set(int(k) for k in keep)))
    if not keep:
        raise UsageError("keep must name at least one factor")
    if keep[0] < 0 or keep[-1] >= n_factors:
        raise UsageError(f"keep {keep} out of range for {n_factors} factors")
    return keep


def reduced_matrix(amplitudes: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix of a pure vector, kept factors in ascending order."""
    dims = tuple(dims)
    keep = _check_keep(keep, len(dims))
    rest = [i for i in range(len(dims)) if i not in keep]
    dk = math.prod(dims[i] for i in keep)
    m = np.asarray(amplitudes).reshape(dims).transpose(keep + tuple(rest)).reshape(dk, -1)
    rho = m @ m.conj().T
    return 0.5 * (rho + rho.conj().T)


def partial_trace(state: State, space: HilbertSpace, keep: Sequence[int]) -> DensityMatrix:
    """Trace out every factor of ``space`` not listed in ``keep``.

    Pure input is treated as ``|psi><psi|``. The kept factors appear in ascending
    index order in the returned matrix.
    """
    keep = _check_keep(keep, space.n_factors)
    dims = space.dims
    kept_space = HilbertSpace(tuple(dims[i] for i in keep))
    if isinstance(state, PureState):
        if state.dim != space.total_dim:
            raise UsageError("state dimension does not match the given space")
        rho = reduced_matrix(state.amplitudes, dims, keep)
        return DensityMatrix(rho / np.trace(rho).real, kept_space)

    if state.dim != space.total_dim:
        raise UsageError("state dimension does not match the given space")
    n = len(dims)
    rest = tuple(i for i in range(n) if i not in keep)
    dk = kept_space.total_dim
    dr = space.total_dim // dk
    perm = keep + rest
    t = state.matrix.reshape(dims + dims).transpose(perm + tuple(n + p for p in perm))
    rho = np.einsum("ajbj->ab", t.reshape(dk, dr, dk, dr))
    return DensityMatrix(rho, kept_space, check=state.check)


def purity(rho: DensityMatrix) -> float:
    """``Tr(rho^2)``."""
    m = rho.matrix
    return float(np.real(np.vdot(m.conj().T, m)))


def haar_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Normalized vector of i.i.d. standard complex Gaussians."""
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)


def haar_sample(dim: int, seed: int, dims: Sequence[int] | None = None) -> PureState:
    """Draw a state from the unitarily invariant measure on ``C^dim``.

    Parameters
    ----------
    dim : int
        Total Hilbert-space dimension.
    seed : int
        Seed for ``numpy.random.default_rng``; equal seeds give equal states.
    dims : sequence of int, optional
        Factor signature attached to the result (defaults to ``(dim,)``).
    """
    if dim < 1:
        raise UsageError("dim must be at least 1")
    if dims is not None and math.prod(dims) != dim:
        raise UsageError(f"dims {tuple(dims)} do not multiply to {dim}")
    if dim == 1:
        vec = np.ones(1, dtype=complex)
    else:
        vec = haar_vector(dim, np.random.default_rng(seed))
    return PureState(vec, HilbertSpace(tuple(dims) if dims is not None else (dim,)))
