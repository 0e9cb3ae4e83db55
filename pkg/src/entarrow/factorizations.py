"""Hilbert-space factorizations, classes of them, and past-hypothesis verdicts.

A :class:`Factorization` is a global unitary ``rotation`` followed by reading the
rotated vector under the factor signature ``dims`` (row-major). Entanglement
entropy relative to it is the sum of the single-factor von Neumann entropies.

Three families are provided:

* :class:`QubitPermutations` -- regroup the qubits of a register into factors,
  one representative per unordered grouping;
* :class:`SpatialBlocks` -- contiguous blocks of a one-dimensional qubit chain;
* :class:`FullUnitary` -- every unitary rotation for a fixed signature, searched
  by descent on the unitary group.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Iterator, Sequence, Union

import numpy as np
from scipy.stats import unitary_group

from .entropy import entanglement_entropy, factor_entropies, max_entanglement_entropy
from .errors import UsageError
from .hilbert import HilbertSpace, PureState

UNITARY_TOL = 1e-10
SCHEMA_VERSION = 1
# sufficient-decrease constant; small values let the search 2-cycle near maxima
ARMIJO = 0.25


@dataclass(frozen=True, eq=False)
class Factorization:
    """Unitary ``rotation`` plus target factor signature ``dims``.

    ``meta`` carries descriptive parameters (qubit groups, generator
    coefficients, ...) used when serializing a witness; it has no effect on
    any computation.
    """

    dims: tuple[int, ...]
    rotation: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        dims = HilbertSpace(tuple(self.dims)).dims
        rot = np.array(self.rotation, dtype=complex)
        n = math.prod(dims)
        if rot.shape != (n, n):
            raise UsageError(f"rotation shape {rot.shape} does not match dims {dims}")
        if np.abs(rot.conj().T @ rot - np.eye(n)).max() > UNITARY_TOL:
            raise UsageError("rotation is not unitary")
        rot.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "rotation", rot)

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    @classmethod
    def identity(cls, dims: Sequence[int], **meta) -> "Factorization":
        n = math.prod(dims)
        return cls(tuple(dims), np.eye(n, dtype=complex), dict(meta))

    @classmethod
    def from_qubit_groups(cls, groups: Sequence[Sequence[int]]) -> "Factorization":
        """Regroup ``n`` qubits: factor ``i`` holds the qubits listed in ``groups[i]``."""
        order = [q for g in groups for q in g]
        n = len(order)
        if sorted(order) != list(range(n)):
            raise UsageError(f"groups {groups} do not partition {n} qubits")
        idx = np.arange(2**n).reshape((2,) * n).transpose(order).reshape(-1)
        rotation = np.eye(2**n, dtype=complex)[idx]
        dims = tuple(2 ** len(g) for g in groups)
        return cls(dims, rotation, {"groups": [list(g) for g in groups]})


def apply(F: Factorization, psi: PureState) -> PureState:
    """Rotate ``psi`` by ``F`` and relabel it with ``F.dims``."""
    if psi.dim != F.total_dim:
        raise UsageError(f"state dimension {psi.dim} does not match {F.total_dim}")
    vec = F.rotation @ psi.amplitudes
    return PureState(vec / np.linalg.norm(vec), HilbertSpace(F.dims))


def schmidt_aligning_rotation(psi: PureState, dims: Sequence[int]) -> Factorization:
    """Bipartite factorization under which ``psi`` becomes a product state.

    The local singular-vector rotations bring ``psi`` to Schmidt form
    ``sum_k s_k |k>|k>``; a basis permutation then sends ``|k, k>`` to ``|0, k>``.
    Ties among singular values keep LAPACK's descending order.
    """
    da, db = dims
    if da * db != psi.dim:
        raise UsageError("dims do not match the state")
    m = psi.amplitudes.reshape(da, db)
    u, _, vh = np.linalg.svd(m)
    local = np.kron(u.conj().T, vh.conj())
    perm = np.arange(da * db)
    for k in range(1, min(da, db)):
        a, b = k * db + k, k
        perm[a], perm[b] = perm[b], perm[a]
    rotation = np.eye(da * db, dtype=complex)[perm] @ local
    return Factorization((da, db), rotation, {"construction": "schmidt"})


def antihermitian_basis(d: int) -> np.ndarray:
    """Orthonormal (Frobenius) real basis of the ``d**2``-dimensional anti-Hermitian matrices."""
    basis = []
    for j in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[j, j] = 1j
        basis.append(e)
    s = 1 / math.sqrt(2)
    for j, k in itertools.combinations(range(d), 2):
        e = np.zeros((d, d), dtype=complex)
        e[j, k], e[k, j] = s, -s
        basis.append(e)
        e = np.zeros((d, d), dtype=complex)
        e[j, k] = e[k, j] = 1j * s
        basis.append(e)
    return np.array(basis)


def expm_antihermitian(a: np.ndarray) -> np.ndarray:
    """Matrix exponential of (a stack of) anti-Hermitian matrices via ``eigh``."""
    w, v = np.linalg.eigh(1j * a)
    return (v * np.exp(-1j * w)[..., None, :]) @ np.swapaxes(v.conj(), -1, -2)


def unitary_from_generator(coefficients: Sequence[float], d: int) -> np.ndarray:
    basis = antihermitian_basis(d)
    return expm_antihermitian(np.tensordot(np.asarray(coefficients, float), basis, axes=1))


def generator_coefficients(rotation: np.ndarray) -> np.ndarray:
    """Coefficients ``c`` with ``rotation = exp(sum_k c_k E_k)`` (principal logarithm)."""
    # a unitary is normal, so its complex Schur form is diagonal
    from scipy.linalg import schur

    t, z = schur(np.asarray(rotation, dtype=complex), output="complex")
    gen = (z * (1j * np.angle(np.diag(t)))) @ z.conj().T
    basis = antihermitian_basis(rotation.shape[0])
    return np.real(np.einsum("kij,ij->k", basis.conj(), gen))


def polar_unitary(m: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(m)
    return u @ vh


# --- factorization classes -------------------------------------------------


@dataclass(frozen=True)
class SingleFactorization:
    factorization: Factorization


@dataclass(frozen=True)
class QubitPermutations:
    """All regroupings of ``log2(prod(dims))`` qubits into factors of sizes ``dims``."""

    dims: tuple[int, ...]

    def __post_init__(self):
        for d in self.dims:
            if d < 2 or d & (d - 1):
                raise UsageError(f"qubit groups need power-of-two dims, got {self.dims}")
        object.__setattr__(self, "dims", tuple(self.dims))

    @property
    def n_qubits(self) -> int:
        return sum(int(d).bit_length() - 1 for d in self.dims)


@dataclass(frozen=True)
class SpatialBlocks:
    """Contiguous blocks of ``block_size`` qubits on a chain of ``length`` qubits.

    With ``offsets=True`` every shift ``0 .. block_size - 1`` of the tiling is
    included; the first block is then truncated to the shift.
    """

    block_size: int
    length: int
    offsets: bool = False

    def __post_init__(self):
        if not 1 <= self.block_size <= self.length:
            raise UsageError("need 1 <= block_size <= length")


@dataclass(frozen=True)
class FullUnitary:
    """Every rotation of the space read under signature ``dims`` (searched, not enumerated)."""

    dims: tuple[int, ...]
    restarts: int = 8
    tol: float = 1e-8
    max_iter: int = 2000
    seed: int = 0
    fd_step: float = 1e-7

    def __post_init__(self):
        object.__setattr__(self, "dims", HilbertSpace(tuple(self.dims)).dims)
        if self.restarts < 1:
            raise UsageError("restarts must be at least 1")
        if not self.tol > 0:
            raise UsageError("tol must be positive")


FactorizationClass = Union[SingleFactorization, QubitPermutations, SpatialBlocks, FullUnitary]


def class_dim(cls: FactorizationClass) -> int:
    if isinstance(cls, SingleFactorization):
        return cls.factorization.total_dim
    if isinstance(cls, SpatialBlocks):
        return 2**cls.length
    return math.prod(cls.dims)


def is_finite(cls: FactorizationClass) -> bool:
    return not isinstance(cls, FullUnitary)


def _qubit_groupings(n: int, sizes: Sequence[int]) -> Iterator[list[tuple[int, ...]]]:
    seen = set()

    def rec(remaining, i, acc):
        if i == len(sizes):
            key = frozenset(frozenset(g) for g in acc)
            if key not in seen:
                seen.add(key)
                yield list(acc)
            return
        for combo in itertools.combinations(remaining, sizes[i]):
            rest = tuple(q for q in remaining if q not in combo)
            yield from rec(rest, i + 1, acc + [combo])

    yield from rec(tuple(range(n)), 0, [])


def _block_tilings(cls: SpatialBlocks) -> Iterator[list[list[int]]]:
    shifts = range(cls.block_size) if cls.offsets else [0]
    for shift in shifts:
        cuts = [0] + ([shift] if shift else [])
        cuts += list(range(shift + cls.block_size, cls.length, cls.block_size))
        cuts.append(cls.length)
        yield [list(range(a, b)) for a, b in zip(cuts, cuts[1:])]


def enumerate_factorizations(cls: FactorizationClass) -> Iterator[Factorization]:
    """Yield each member of a finite class exactly once, in a fixed order."""
    if isinstance(cls, SingleFactorization):
        yield cls.factorization
    elif isinstance(cls, QubitPermutations):
        sizes = [int(d).bit_length() - 1 for d in cls.dims]
        for groups in _qubit_groupings(cls.n_qubits, sizes):
            yield Factorization.from_qubit_groups(groups)
    elif isinstance(cls, SpatialBlocks):
        for blocks in _block_tilings(cls):
            dims = tuple(2 ** len(b) for b in blocks)
            yield Factorization.identity(dims, blocks=blocks)
    else:
        raise UsageError(f"{type(cls).__name__} is not enumerable")


# --- extremization ----------------------------------------------------------


@dataclass
class SearchReport:
    rotation: np.ndarray
    value: float
    restarts_used: int
    stalled_restarts: int
    restart_values: list[float]


def _descend(psi, dims, sign, start, basis, g_plus, g_minus, opts, floor):
    """Finite-difference steepest descent of ``sign * S`` on the unitary group.

    The search works in a moving chart: every step multiplies the current
    rotation on the left by ``exp(t A)``, with ``A`` the negative gradient taken
    at the identity of the chart.
    """
    h = opts.fd_step
    rot = start
    phi = rot @ psi
    cur = sign * factor_entropies(phi, dims).sum()
    step = 1.0
    for _ in range(opts.max_iter):
        if cur <= floor:
            break
        trial = np.concatenate([g_plus @ phi, g_minus @ phi])
        vals = sign * factor_entropies(trial, dims).sum(axis=-1)
        p = len(basis)
        grad = (vals[:p] - vals[p:]) / (2 * h)
        gnorm = math.sqrt(grad @ grad)
        if gnorm < 1e-14:
            break
        direction = -np.tensordot(grad, basis, axes=1)
        while True:
            u = expm_antihermitian(step * direction)
            new_phi = u @ phi
            new = sign * factor_entropies(new_phi, dims).sum()
            if new <= cur - ARMIJO * step * gnorm**2:
                break
            step *= 0.5
            if step * gnorm < opts.tol:
                return rot, cur
        rot = u @ rot
        phi = new_phi
        cur = new
        step *= 2.0
    return rot, cur


def search_unitary(psi: PureState, cls: FullUnitary, direction: str) -> SearchReport:
    """Multi-restart descent for the extremal entanglement entropy over ``cls``.

    Restart 0 starts at the identity rotation, later restarts at Haar-random
    unitaries seeded by ``(cls.seed, restart)``. Restarts stop early once the
    trivial bound (0 for ``min``, the dimension bound for ``max``) is reached.
    """
    sign = _direction_sign(direction)
    d = psi.dim
    dims = cls.dims
    basis = antihermitian_basis(d)
    g_plus = expm_antihermitian(cls.fd_step * basis)
    g_minus = np.swapaxes(g_plus.conj(), -1, -2)
    bound = 0.0 if sign > 0 else max_entanglement_entropy(dims)
    floor = 1e-14 if sign > 0 else -(bound - 1e-12)

    best_rot, best_val = None, math.inf
    values = []
    stalled = 0
    used = 0
    for k in range(cls.restarts):
        used += 1
        if k == 0:
            start = np.eye(d, dtype=complex)
        else:
            start = unitary_group.rvs(d, random_state=np.random.default_rng([cls.seed, k]))
        initial = sign * factor_entropies(start @ psi.amplitudes, dims).sum()
        rot, _ = _descend(
            psi.amplitudes, dims, sign, start, basis, g_plus, g_minus, cls, floor
        )
        rot = polar_unitary(rot)
        val = sign * factor_entropies(rot @ psi.amplitudes, dims).sum()
        values.append(float(sign * val))
        if not val < initial - 1e-12 and initial > floor:
            stalled += 1
        if val < best_val:
            best_rot, best_val = rot, val
        if best_val <= floor:
            break
    return SearchReport(best_rot, float(sign * best_val), used, stalled, values)


def _direction_sign(direction: str) -> int:
    if direction == "min":
        return 1
    if direction == "max":
        return -1
    raise UsageError(f"direction must be 'min' or 'max', got {direction!r}")


def extremize_entropy(
    psi: PureState, cls: FactorizationClass, direction: str = "min"
) -> tuple[Factorization, float]:
    """Minimum or maximum of the entanglement entropy of ``psi`` over ``cls``.

    Finite classes are enumerated exactly (ties go to the first member). For
    :class:`FullUnitary` the result is the best value found by
    :func:`search_unitary`: an upper bound on the true minimum, or a lower
    bound on the true maximum. The witness's ``meta`` records the generator
    coefficients and search statistics.
    """
    sign = _direction_sign(direction)
    if class_dim(cls) != psi.dim:
        raise UsageError("factorization class does not match the state dimension")
    if isinstance(cls, FullUnitary):
        rep = search_unitary(psi, cls, direction)
        meta = {
            "generator": generator_coefficients(rep.rotation).tolist(),
            "restarts_used": rep.restarts_used,
            "stalled_restarts": rep.stalled_restarts,
            "restart_values": rep.restart_values,
        }
        return Factorization(cls.dims, rep.rotation, meta), rep.value

    best, best_val = None, math.inf
    for F in enumerate_factorizations(cls):
        val = sign * entanglement_entropy(psi, F)
        if val < best_val:
            best, best_val = F, val
    return best, float(sign * best_val)


# --- past-hypothesis verdicts ---------------------------------------------------


class EphVariant(str, enum.Enum):
    EPH_M = "EPH_m"
    EPH_0 = "EPH_0"
    EPH_0R = "EPH_0R"
    EPH_LEQ_M = "EPH_leq_m"
    EPH_LEQ_MR = "EPH_leq_mR"


class EphStatus(str, enum.Enum):
    SATISFIED = "Satisfied"
    REFUTED = "Refuted"
    NUMERICALLY_SUPPORTED = "NumericallySupported"


@dataclass(frozen=True)
class EphSpec:
    """One of the five entanglement past-hypothesis variants.

    Use the classmethod constructors; ``EPH_0`` and ``EPH_leq_m`` quantify over
    every factorization and therefore take a :class:`FullUnitary` class.
    """

    variant: EphVariant
    m: float = 0.0
    tol: float = 1e-9
    factorization: Factorization | None = None
    cls: Any = None

    def __post_init__(self):
        object.__setattr__(self, "variant", EphVariant(self.variant))
        if self.m < 0:
            raise UsageError("m must be non-negative")
        if not self.tol > 0:
            raise UsageError("tol must be positive")
        if self.variant is EphVariant.EPH_M:
            if self.factorization is None:
                raise UsageError("EPH_m needs a factorization")
        elif self.cls is None:
            raise UsageError(f"{self.variant.value} needs a factorization class")
        if self.variant in (EphVariant.EPH_0, EphVariant.EPH_LEQ_M) and not isinstance(
            self.cls, FullUnitary
        ):
            raise UsageError(f"{self.variant.value} quantifies over all rotations; use FullUnitary")

    @classmethod
    def eph_m(cls, F: Factorization, m: float, tol: float = 1e-9):
        return cls(EphVariant.EPH_M, m=m, tol=tol, factorization=F)

    @classmethod
    def eph_0(cls, fclass: FullUnitary, tol: float = 1e-9):
        return cls(EphVariant.EPH_0, tol=tol, cls=fclass)

    @classmethod
    def eph_0R(cls, fclass, tol: float = 1e-9):
        return cls(EphVariant.EPH_0R, tol=tol, cls=fclass)

    @classmethod
    def eph_leq_m(cls, fclass: FullUnitary, m: float, tol: float = 1e-9):
        return cls(EphVariant.EPH_LEQ_M, m=m, tol=tol, cls=fclass)

    @classmethod
    def eph_leq_mR(cls, fclass, m: float, tol: float = 1e-9):
        return cls(EphVariant.EPH_LEQ_MR, m=m, tol=tol, cls=fclass)

    @property
    def bound(self) -> float:
        if self.variant in (EphVariant.EPH_0, EphVariant.EPH_0R):
            return 0.0
        return self.m


@dataclass(frozen=True)
class EphVerdict:
    variant: EphVariant
    status: EphStatus
    extremal_value: float
    tolerance: float
    bound: float
    witness: Factorization | None = None
    restarts_used: int = 0

    def witness_parameters(self) -> dict:
        if self.witness is None:
            return {}
        meta = self.witness.meta
        out: dict[str, Any] = {"dims": list(self.witness.dims)}
        for key in ("groups", "blocks", "generator", "construction"):
            if key in meta:
                out[key] = meta[key]
        return out

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "variant": self.variant.value,
            "status": self.status.value,
            "extremal_value": self.extremal_value,
            "bound": self.bound,
            "tolerance": self.tolerance,
            "witness_parameters": self.witness_parameters(),
            "restarts_used": self.restarts_used,
        }


def check_eph(psi: PureState, spec: EphSpec) -> EphVerdict:
    """Decide a past-hypothesis variant for ``psi``.

    Class variants maximize the entanglement entropy over the class: above
    ``bound + tol`` the hypothesis is refuted with the maximizing witness.
    Otherwise finite classes are satisfied outright, while a search over
    :class:`FullUnitary` only supports the hypothesis numerically.
    """
    if spec.variant is EphVariant.EPH_M:
        F = spec.factorization
        value = entanglement_entropy(psi, F)
        ok = abs(value - spec.m) <= spec.tol
        return EphVerdict(
            spec.variant,
            EphStatus.SATISFIED if ok else EphStatus.REFUTED,
            value,
            spec.tol,
            spec.m,
            F,
        )

    witness, value = extremize_entropy(psi, spec.cls, "max")
    restarts = witness.meta.get("restarts_used", 0)
    if value > spec.bound + spec.tol:
        status = EphStatus.REFUTED
    elif is_finite(spec.cls):
        status = EphStatus.SATISFIED
    else:
        status = EphStatus.NUMERICALLY_SUPPORTED
    return EphVerdict(spec.variant, status, value, spec.tol, spec.bound, witness, restarts)
