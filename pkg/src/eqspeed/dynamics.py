"""Exact unitary dynamics in the energy eigenbasis and instantaneous subsystem quantities.

Time evolution is a phase rotation of the energy amplitudes, so any t is
reached to eigensolver precision. Finite-difference quantities are built by
applying the extra phase exp(-i E delta) to the amplitudes at t rather than
evaluating at t + delta, which keeps them accurate at very large t where
t + delta would lose most of delta's digits.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from .hamiltonian import HamiltonianDecomposition, SpectralData, spectral_decomposition
from .qcore import (
    TOL_NORM,
    TOL_ORTH,
    DimensionError,
    InvariantError,
    OperatorBasis,
    as_pure,
    kron,
    reduced_from_vectors,
    trace_distance,
    trace_norm,
)

FD_STEP = 1e-5  # divided by ||H||
CHUNK = 256


class NumericalError(RuntimeError):
    """A quantity that must vanish or be real by construction did not."""


@dataclass(frozen=True)
class EvolutionContext:
    h: HamiltonianDecomposition
    spec: SpectralData = field(repr=False)
    psi0: np.ndarray = field(repr=False)
    psi0_energy_coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        n2 = float(np.sum(np.abs(self.psi0_energy_coeffs) ** 2))
        if abs(n2 - 1) > TOL_NORM:
            raise InvariantError(f"energy populations sum to {n2:.12g}")
        back = self.spec.eigenvectors @ self.psi0_energy_coeffs
        if np.abs(back - self.psi0).max() > 1e3 * TOL_NORM:
            raise InvariantError("energy coefficients inconsistent with psi0")

    @property
    def dims(self):
        return self.h.dims

    @property
    def hamiltonian_norm(self) -> float:
        return float(np.abs(self.spec.eigenvalues).max())

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.psi0_energy_coeffs) ** 2


def evolution_context(h: HamiltonianDecomposition, psi0, spec: SpectralData | None = None) -> EvolutionContext:
    psi0 = as_pure(psi0, h.dims.D)
    spec = spectral_decomposition(h) if spec is None else spec
    coeffs = spec.eigenvectors.conj().T @ psi0
    return EvolutionContext(h, spec, psi0, coeffs)


def default_fd_step(ctx: EvolutionContext) -> float:
    nrm = ctx.hamiltonian_norm
    return FD_STEP / nrm if nrm > 0 else FD_STEP


def _amplitudes(ctx: EvolutionContext, times, offset: float = 0.0) -> np.ndarray:
    """Energy-basis amplitudes c_j exp(-i E_j (t + offset)), shape (n, D)."""
    E = ctx.spec.energies
    t = np.atleast_1d(np.asarray(times, dtype=float))
    amp = ctx.psi0_energy_coeffs * np.exp(-1j * np.outer(t, E))
    if offset:
        amp = amp * np.exp(-1j * offset * E)
    return amp


def _to_site(ctx: EvolutionContext, amp) -> np.ndarray:
    return amp @ ctx.spec.eigenvectors.T


def states(ctx: EvolutionContext, times, offset: float = 0.0) -> np.ndarray:
    """Global states psi(t) as rows, shape (n, D)."""
    return _to_site(ctx, _amplitudes(ctx, times, offset))


def evolve(ctx: EvolutionContext, t: float) -> np.ndarray:
    return states(ctx, [t])[0]


def subsystem_states(ctx: EvolutionContext, times, offset: float = 0.0) -> np.ndarray:
    psi = states(ctx, times, offset)
    return reduced_from_vectors(psi, psi, ctx.dims)


def subsystem_state(ctx: EvolutionContext, t: float) -> np.ndarray:
    return subsystem_states(ctx, [t])[0]


def _derivatives_from_amplitudes(ctx: EvolutionContext, amp, n: int) -> np.ndarray:
    # Energies are centred first: commutators ignore H0 and this avoids
    # cancellation between large binomial terms when H carries an offset.
    E = ctx.spec.energies - ctx.spec.energies.mean()
    powers = [_to_site(ctx, amp * E ** a) for a in range(n + 1)]
    out = 0
    for a in range(n + 1):
        coef = comb(n, a) * (-1j) ** a * (1j) ** (n - a)
        out = out + coef * reduced_from_vectors(powers[a], powers[n - a], ctx.dims)
    out = 0.5 * (out + np.swapaxes(out.conj(), -1, -2))
    return out


def subsystem_derivatives(ctx: EvolutionContext, times, n: int = 1) -> np.ndarray:
    """n-th time derivatives of rho_S at each time, shape (len(times), d_S, d_S)."""
    if int(n) != n or n < 1:
        raise ValueError(f"derivative order must be a positive integer, got {n}")
    out = _derivatives_from_amplitudes(ctx, _amplitudes(ctx, times), int(n))
    tr = np.abs(np.trace(out, axis1=-2, axis2=-1))
    limit = TOL_NORM * max(1.0, ctx.hamiltonian_norm) ** n
    if tr.size and tr.max() > limit:
        raise NumericalError(f"subsystem derivative has trace {tr.max():.3g}; expected 0")
    return out


def subsystem_derivative(ctx: EvolutionContext, t: float) -> np.ndarray:
    """d rho_S / dt = tr_B(i [rho(t), H])."""
    return subsystem_derivatives(ctx, [t], 1)[0]


def nth_derivative(ctx: EvolutionContext, t: float, n: int) -> np.ndarray:
    return subsystem_derivatives(ctx, [t], n)[0]


def commutator_observables(h: HamiltonianDecomposition, basis: OperatorBasis) -> np.ndarray:
    """A_k = i [h_S (x) I + h_int, e_k (x) I], shape (d_S^2, D, D)."""
    if basis.d != h.dims.d_S:
        raise DimensionError(f"basis is for d={basis.d}, subsystem has d_S={h.dims.d_S}")
    C = h.coupling_operator()
    eye_B = np.eye(h.dims.d_B)
    out = []
    for e in basis:
        ek = kron(e, eye_B)
        out.append(1j * (C @ ek - ek @ C))
    return np.array(out)


def _check_real(c, scale):
    if np.abs(c.imag).max(initial=0.0) > TOL_ORTH * max(1.0, scale):
        raise NumericalError(f"basis coefficients have imaginary part {np.abs(c.imag).max():.3g}")
    return c.real


def basis_coefficients(ctx: EvolutionContext, t: float, basis: OperatorBasis,
                       route: str = "reduced") -> np.ndarray:
    """c_k(t) with d rho_S/dt = sum_k c_k e_k.

    ``route="reduced"`` takes tr(d rho_S/dt e_k) on the subsystem;
    ``route="global"`` takes <psi(t)| i[h_S (x) I + h_int, e_k (x) I] |psi(t)> on
    the full space. The two agree identically; both exist so each can check
    the other.
    """
    if basis.d != ctx.dims.d_S:
        raise DimensionError(f"basis is for d={basis.d}, subsystem has d_S={ctx.dims.d_S}")
    if route == "reduced":
        c = basis.expand(subsystem_derivative(ctx, t))
    elif route == "global":
        psi = evolve(ctx, t)
        ops = commutator_observables(ctx.h, basis)
        c = np.einsum("i,kij,j->k", psi.conj(), ops, psi)
    else:
        raise ValueError(f"unknown route {route!r}")
    return _check_real(c, ctx.hamiltonian_norm)


def subsystem_speeds(ctx: EvolutionContext, times) -> np.ndarray:
    return 0.5 * trace_norm(subsystem_derivatives(ctx, times))


def subsystem_speed(ctx: EvolutionContext, t: float) -> float:
    """v_S(t) = (1/2) || d rho_S / dt ||_1."""
    return float(subsystem_speeds(ctx, [t])[0])


def fd_speeds(ctx: EvolutionContext, times, delta: float | None = None) -> np.ndarray:
    """Speed from a central difference of rho_S."""
    delta = default_fd_step(ctx) if delta is None else delta
    plus = subsystem_states(ctx, times, delta)
    minus = subsystem_states(ctx, times, -delta)
    return 0.5 * trace_norm((plus - minus) / (2 * delta))


def difference_quotient_speed(ctx: EvolutionContext, t: float, delta: float | None = None) -> float:
    """D(rho_S(t), rho_S(t + delta)) / delta, the limit definition of the speed at finite delta."""
    delta = default_fd_step(ctx) if delta is None else delta
    a = subsystem_states(ctx, [t])[0]
    b = subsystem_states(ctx, [t], delta)[0]
    return float(trace_distance(a, b) / delta)


@dataclass
class Trajectory:
    times: np.ndarray
    rho_S: np.ndarray = field(repr=False)
    speeds_analytic: np.ndarray
    speeds_fd: np.ndarray
    distances: np.ndarray
    random_grid: bool = True

    def __post_init__(self):
        n = len(self.times)
        for name in ("rho_S", "speeds_analytic", "speeds_fd", "distances"):
            if len(getattr(self, name)) != n:
                raise InvariantError(f"trajectory field {name} has wrong length")

    def __len__(self):
        return len(self.times)


def sample_trajectory(ctx: EvolutionContext, grid, omega_S, random_grid: bool = True) -> Trajectory:
    """Evaluate rho_S, both speeds and the distance to ``omega_S`` on a time grid.

    Grid order is preserved; ``random_grid`` only records how the grid was
    drawn (equispaced grids can alias against the spectrum).
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or np.any(np.diff(grid) < 0):
        raise ValueError("time grid must be a 1-d ascending array")
    d = ctx.dims.d_S
    rho = np.empty((len(grid), d, d), dtype=complex)
    v = np.empty(len(grid))
    vfd = np.empty(len(grid))
    for lo in range(0, len(grid), CHUNK):
        ts = grid[lo:lo + CHUNK]
        rho[lo:lo + CHUNK] = subsystem_states(ctx, ts)
        v[lo:lo + CHUNK] = subsystem_speeds(ctx, ts)
        vfd[lo:lo + CHUNK] = fd_speeds(ctx, ts)
    dist = trace_distance(rho, np.asarray(omega_S)[None]) if len(grid) else np.empty(0)
    return Trajectory(grid, rho, v, vfd, np.asarray(dist, dtype=float), random_grid)
