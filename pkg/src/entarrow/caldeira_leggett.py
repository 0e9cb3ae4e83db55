"""Caldeira-Leggett master equation on a position grid.

The density matrix is sampled as ``rho[i, j] = rho(x_i, y_j)`` with
normalization ``sum_i rho[i, i] * dx = 1``. The right-hand side has three
independently switchable pieces::

    unitary      -(i/hbar) [H, rho],   H = p^2/2M + M w^2 x^2 / 2
    dissipation  -gamma (x - y) (d/dx - d/dy) rho
    decoherence  -(2 M gamma k_B T / hbar^2) (x - y)^2 rho

Derivatives are second-order central differences with Dirichlet edges.
Positivity is not enforced; :func:`positivity_min_eig` reports it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import FitError, IntegrationError, UsageError
from .hilbert import NATURAL_UNITS, PhysicalConstants

UNITARY = "unitary"
DISSIPATION = "dissipation"
DECOHERENCE = "decoherence"
ALL_TERMS = frozenset({UNITARY, DISSIPATION, DECOHERENCE})

STABILITY_FACTOR = 0.2
TRACE_DRIFT_TOL = 1e-6


@dataclass(frozen=True)
class PositionGrid:
    n_points: int = 128
    spacing: float = 10.0 / 127

    def __post_init__(self):
        if self.n_points < 16:
            raise UsageError("a grid needs at least 16 points")
        if not self.spacing > 0:
            raise UsageError("grid spacing must be positive")

    @classmethod
    def spanning(cls, half_width: float, n_points: int = 128) -> "PositionGrid":
        """Grid of ``n_points`` covering ``[-half_width, half_width]``."""
        return cls(n_points, 2 * half_width / (n_points - 1))

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.n_points) - (self.n_points - 1) / 2) * self.spacing

    @property
    def span(self) -> float:
        return (self.n_points - 1) * self.spacing

    def first_derivative(self) -> np.ndarray:
        n, dx = self.n_points, self.spacing
        return (np.eye(n, k=1) - np.eye(n, k=-1)) / (2 * dx)

    def second_derivative(self) -> np.ndarray:
        n, dx = self.n_points, self.spacing
        return (np.eye(n, k=1) - 2 * np.eye(n) + np.eye(n, k=-1)) / dx**2

    def offset(self, separation: float) -> int:
        """Number of grid steps closest to ``separation``."""
        k = int(round(separation / self.spacing))
        if not 0 <= k < self.n_points:
            raise UsageError("separation exceeds the grid extent")
        return k


@dataclass(frozen=True)
class CLParameters:
    M: float = 1.0
    gamma: float = 0.0
    T: float = 1.0
    omega: float = 1.0
    constants: PhysicalConstants = NATURAL_UNITS

    def __post_init__(self):
        if not (self.M > 0 and self.T > 0 and self.omega > 0):
            raise UsageError("M, T and omega must be positive")
        if self.gamma < 0:
            raise UsageError("gamma must be non-negative")

    @property
    def decoherence_rate(self) -> float:
        """``Lambda = 2 M gamma k_B T / hbar^2`` (per unit time per length squared)."""
        c = self.constants
        return 2 * self.M * self.gamma * c.k_B * self.T / c.hbar**2

    def timescale_ratio(self, separation: float) -> float:
        """Predicted ``tau_R / tau_D = 2 M k_B T s^2 / hbar^2``."""
        c = self.constants
        return 2 * self.M * c.k_B * self.T * separation**2 / c.hbar**2


@dataclass(frozen=True, eq=False)
class CLState:
    rho: np.ndarray
    grid: PositionGrid
    t: float = 0.0

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        n = self.grid.n_points
        if rho.shape != (n, n):
            raise UsageError(f"rho shape {rho.shape} does not match a {n}-point grid")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def trace(self) -> float:
        return float(np.trace(self.rho).real * self.grid.spacing)

    @property
    def purity(self) -> float:
        dx = self.grid.spacing
        return float(np.vdot(self.rho.conj().T, self.rho).real * dx * dx)

    def populations(self) -> np.ndarray:
        return np.diag(self.rho).real * self.grid.spacing


def _normalized_wavefunction(grid, psi):
    psi = np.asarray(psi, dtype=complex)
    return psi / math.sqrt(np.sum(np.abs(psi) ** 2) * grid.spacing)


def gaussian_wavefunction(grid: PositionGrid, center=0.0, width=1.0, momentum=0.0, hbar=1.0):
    """Gaussian packet with position spread ``width`` and mean momentum ``momentum``."""
    x = grid.x
    psi = np.exp(-((x - center) ** 2) / (4 * width**2) + 1j * momentum * x / hbar)
    return _normalized_wavefunction(grid, psi)


def pure_state(grid: PositionGrid, psi) -> CLState:
    psi = _normalized_wavefunction(grid, psi)
    return CLState(np.outer(psi, psi.conj()), grid)


def gaussian_state(grid, center=0.0, width=1.0, momentum=0.0, hbar=1.0) -> CLState:
    return pure_state(grid, gaussian_wavefunction(grid, center, width, momentum, hbar))


def cat_state(grid, centers=(-1.5, 1.5), width=0.5, momentum=0.0, hbar=1.0) -> CLState:
    """Equal superposition of Gaussian packets at ``centers``."""
    psi = sum(gaussian_wavefunction(grid, c, width, momentum, hbar) for c in centers)
    return pure_state(grid, psi)


def hamiltonian_matrix(grid: PositionGrid, params: CLParameters) -> np.ndarray:
    hbar = params.constants.hbar
    kinetic = -(hbar**2) / (2 * params.M) * grid.second_derivative()
    potential = np.diag(0.5 * params.M * params.omega**2 * grid.x**2)
    return kinetic + potential


def ground_state(grid: PositionGrid, params: CLParameters) -> CLState:
    """Lowest eigenvector of the discretized oscillator (stationary under the unitary term)."""
    _, v = np.linalg.eigh(hamiltonian_matrix(grid, params))
    psi = v[:, 0]
    return pure_state(grid, psi * np.sign(psi[np.argmax(np.abs(psi))]))


class _Operators:
    """Right-hand side of the master equation on preallocated buffers.

    Stencils are applied by slicing; the ``-2 rho`` diagonal parts of
    ``d^2/dx^2 - d^2/dy^2`` cancel and are never formed.
    """

    def __init__(self, grid: PositionGrid, params: CLParameters, terms):
        x = grid.x
        n = grid.n_points
        dx = grid.spacing
        hbar = params.constants.hbar
        sep = x[:, None] - x[None, :]
        v = 0.5 * params.M * params.omega**2 * x**2
        self.terms = terms
        self.elementwise = np.zeros((n, n), dtype=complex)
        if UNITARY in terms:
            self.elementwise += (-1j / hbar) * (v[:, None] - v[None, :])
        if DECOHERENCE in terms:
            self.elementwise += -params.decoherence_rate * sep**2
        self.kinetic = (-1j / hbar) * (-(hbar**2) / (2 * params.M)) / dx**2
        self.dissipation = -params.gamma * sep / (2 * dx)
        self.tmp = np.empty((n, n), dtype=complex)

    def rhs(self, rho, out):
        """Write the time derivative of ``rho`` into ``out`` and return it."""
        tmp = self.tmp
        np.multiply(self.elementwise, rho, out=out)
        if UNITARY in self.terms:
            tmp[0] = 0
            tmp[1:] = rho[:-1]
            tmp[:-1] += rho[1:]
            tmp[:, 1:] -= rho[:, :-1]
            tmp[:, :-1] -= rho[:, 1:]
            tmp *= self.kinetic
            out += tmp
        if DISSIPATION in self.terms:
            np.subtract(rho[2:], rho[:-2], out=tmp[1:-1])
            tmp[0] = rho[1]
            tmp[-1] = -rho[-2]
            tmp[:, 1:-1] -= rho[:, 2:]
            tmp[:, 1:-1] += rho[:, :-2]
            tmp[:, 0] -= rho[:, 1]
            tmp[:, -1] += rho[:, -2]
            tmp *= self.dissipation
            out += tmp
        return out


def _check_terms(terms) -> frozenset:
    terms = frozenset(terms)
    if not terms:
        raise UsageError("at least one term must be enabled")
    unknown = terms - ALL_TERMS
    if unknown:
        raise UsageError(f"unknown terms {sorted(unknown)}")
    return terms


def cl_rhs(state: CLState, params: CLParameters, terms: Iterable[str] = ALL_TERMS) -> np.ndarray:
    """Time derivative of ``state.rho`` from the enabled terms."""
    ops = _Operators(state.grid, params, _check_terms(terms))
    return ops.rhs(np.array(state.rho), np.empty_like(state.rho))


def stable_dt(grid: PositionGrid, params: CLParameters, terms: Iterable[str] = ALL_TERMS) -> float:
    """Largest step accepted by :func:`integrate` for this grid, parameters and terms.

    Each enabled term contributes its fastest rate; the step is
    ``STABILITY_FACTOR`` over the largest of them.
    """
    terms = _check_terms(terms)
    hbar = params.constants.hbar
    dx, span = grid.spacing, grid.span
    rates = []
    if UNITARY in terms:
        rates.append(hbar / (params.M * dx**2))
        rates.append(0.5 * params.M * params.omega**2 * (span / 2) ** 2 / hbar)
    if DISSIPATION in terms and params.gamma > 0:
        rates.append(params.gamma)
        rates.append(params.gamma * span / dx)
    if DECOHERENCE in terms and params.decoherence_rate > 0:
        rates.append(params.decoherence_rate * span**2)
    if not rates:
        return math.inf
    return STABILITY_FACTOR / max(rates)


def integrate(
    rho0: CLState,
    params: CLParameters,
    t_final: float,
    dt: float,
    terms: Iterable[str] = ALL_TERMS,
    save_every: int = 1,
    save_times: Sequence[float] | None = None,
) -> list[CLState]:
    """Fixed-step RK4 integration from ``rho0.t`` to ``rho0.t + t_final``.

    The step count is ``ceil(t_final / dt)`` and the step is shrunk to land on
    ``t_final`` exactly. Snapshots are taken every ``save_every`` steps (the
    initial and final states are always included) or, when ``save_times`` is
    given, at the steps nearest those times.

    Raises
    ------
    UsageError
        If ``dt`` exceeds :func:`stable_dt`.
    IntegrationError
        If the trace drifts by more than ``TRACE_DRIFT_TOL``.
    """
    terms = _check_terms(terms)
    if not dt > 0 or t_final < 0:
        raise UsageError("need dt > 0 and t_final >= 0")
    limit = stable_dt(rho0.grid, params, terms)
    if dt > limit:
        raise UsageError(f"dt = {dt:g} exceeds the stability bound {limit:g}")
    n_steps = max(1, math.ceil(t_final / dt - 1e-9)) if t_final > 0 else 0
    h = t_final / n_steps if n_steps else 0.0
    if save_times is not None:
        wanted = {min(n_steps, max(0, int(round((s - rho0.t) / h)))) if h else 0 for s in save_times}
        wanted |= {0, n_steps}
    else:
        wanted = set(range(0, n_steps + 1, save_every)) | {n_steps}

    ops = _Operators(rho0.grid, params, terms)
    rho = np.array(rho0.rho)
    k1, k2, k3, k4, stage = (np.empty_like(rho) for _ in range(5))
    tr0 = np.trace(rho).real
    snaps = [rho0] if 0 in wanted else []
    for step in range(1, n_steps + 1):
        ops.rhs(rho, k1)
        np.multiply(k1, 0.5 * h, out=stage)
        stage += rho
        ops.rhs(stage, k2)
        np.multiply(k2, 0.5 * h, out=stage)
        stage += rho
        ops.rhs(stage, k3)
        np.multiply(k3, h, out=stage)
        stage += rho
        ops.rhs(stage, k4)
        k2 += k3
        k2 *= 2
        k1 += k2
        k1 += k4
        k1 *= h / 6
        rho += k1
        # re-symmetrize: rho <- (rho + rho^H) / 2
        np.conjugate(rho.T, out=stage)
        rho += stage
        rho *= 0.5
        drift = abs(np.trace(rho).real - tr0) * rho0.grid.spacing
        if drift > TRACE_DRIFT_TOL:
            raise IntegrationError(f"trace drifted by {drift:.3g} at step {step}")
        if step in wanted:
            snaps.append(CLState(rho, rho0.grid, rho0.t + step * h))
    return snaps


def offdiag_coherence(state: CLState, separation: float) -> float:
    """Mean ``|rho(x, x + s)|`` along the band at grid offset nearest ``separation``."""
    k = state.grid.offset(separation)
    return float(np.mean(np.abs(np.diagonal(state.rho, offset=k))))


def coherence_series(trajectory: Sequence[CLState], separation: float) -> np.ndarray:
    """Band coherence normalized to the first snapshot."""
    values = np.array([offdiag_coherence(s, separation) for s in trajectory])
    if values[0] == 0:
        raise FitError("no initial coherence at this separation")
    return values / values[0]


class Timescales(NamedTuple):
    tau_d: float
    tau_r: float
    ratio: float

    @property
    def dissipation_first(self) -> bool:
        """True when relaxation outpaces decoherence (``ratio < 1``)."""
        return self.ratio < 1


def timescales(
    trajectory: Sequence[CLState],
    params: CLParameters,
    separation: float,
    min_coherence: float = math.exp(-1),
) -> Timescales:
    """Decoherence time from the coherence decay, relaxation time ``1/gamma``.

    ``tau_d`` is minus the inverse slope of a least-squares line through
    ``log`` of the normalized coherence at ``separation``. Only the leading
    samples with coherence at or above ``min_coherence`` enter the fit (by
    default the first e-fold): once decoherence has carved the off-diagonals,
    the dissipation term starts refilling them and the late-time slope no
    longer measures the decoherence rate alone.
    """
    if params.gamma == 0:
        raise FitError("gamma = 0: no relaxation timescale")
    if len(trajectory) < 3:
        raise FitError("need at least three snapshots to fit")
    t = np.array([s.t for s in trajectory])
    c = coherence_series(trajectory, separation)
    below = np.flatnonzero(c < min_coherence)
    stop = below[0] + 1 if below.size else len(c)
    keep = slice(0, stop)
    if stop < 3:
        raise FitError("fewer than three snapshots inside the fit window")
    slope = np.polyfit(t[keep], np.log(c[keep]), 1)[0]
    if not slope < 0:
        raise FitError("coherence does not decay")
    tau_d = -1.0 / slope
    tau_r = 1.0 / params.gamma
    return Timescales(float(tau_d), float(tau_r), float(tau_r / tau_d))


def positivity_min_eig(state: CLState) -> float:
    """Smallest eigenvalue of the normalized grid density matrix ``rho * dx``."""
    rho = 0.5 * (state.rho + state.rho.conj().T)
    return float(np.linalg.eigvalsh(rho).min() * state.grid.spacing)


def mean_momentum(state: CLState, hbar: float = 1.0) -> float:
    """``<p> = Tr(p rho)`` with ``p = -i hbar d/dx`` in central differences."""
    p = -1j * hbar * state.grid.first_derivative()
    return float(np.trace(p @ state.rho).real * state.grid.spacing)


def mean_energy(state: CLState, params: CLParameters) -> float:
    return float(np.trace(hamiltonian_matrix(state.grid, params) @ state.rho).real * state.grid.spacing)


def dephasing_solution(rho0: CLState, params: CLParameters, t: float) -> np.ndarray:
    """Closed form of the decoherence-only equation: ``rho0 * exp(-Lambda (x - y)^2 t)``."""
    x = rho0.grid.x
    sep2 = (x[:, None] - x[None, :]) ** 2
    return rho0.rho * np.exp(-params.decoherence_rate * sep2 * t)
