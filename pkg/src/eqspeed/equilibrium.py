"""The infinite-time average state and finite-time estimates of it."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import CHUNK, EvolutionContext, states
from .qcore import as_hermitian, partial_trace_bath, partial_trace_sys


@dataclass(frozen=True)
class EquilibriumData:
    omega: np.ndarray = field(repr=False)
    omega_S: np.ndarray = field(repr=False)
    omega_B: np.ndarray = field(repr=False)
    d_eff_omega: float
    d_eff_omega_B: float


def effective_dimension(rho) -> float:
    """1 / tr(rho^2) for a density matrix."""
    rho = np.asarray(rho)
    return float(1.0 / np.sum(np.abs(rho) ** 2))


def inverse_participation_ratio(populations) -> float:
    p = np.asarray(populations, dtype=float)
    return float(1.0 / np.sum(p ** 2))


def dephased_energy_matrix(ctx: EvolutionContext) -> np.ndarray:
    """rho(0) in the energy basis with all inter-level coherences removed."""
    c = ctx.psi0_energy_coeffs
    labels = ctx.spec.labels
    return np.outer(c, c.conj()) * (labels[:, None] == labels[None, :])


def dephased_average(ctx: EvolutionContext) -> EquilibriumData:
    """omega = sum_levels P rho(0) P, the exact infinite-time average."""
    w_E = dephased_energy_matrix(ctx)
    V = ctx.spec.eigenvectors
    omega = V @ w_E @ V.conj().T
    omega = 0.5 * (omega + omega.conj().T)
    omega_S = partial_trace_bath(omega, ctx.dims)
    omega_B = partial_trace_sys(omega, ctx.dims)
    # purity is unitarily invariant, so read it off the energy-basis matrix
    d_eff = float(1.0 / np.sum(np.abs(w_E) ** 2))
    return EquilibriumData(omega, omega_S, omega_B, d_eff, effective_dimension(omega_B))


def sample_times(horizon: float, num_samples: int, seed) -> np.ndarray:
    """Sorted uniform random times in [0, horizon]."""
    if not horizon > 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    rng = np.random.default_rng(seed)
    return np.sort(rng.uniform(0.0, horizon, int(num_samples)))


def empirical_time_average(ctx: EvolutionContext, horizon: float, num_samples: int, seed,
                           times=None) -> np.ndarray:
    """Monte Carlo estimate of the time-averaged global state over [0, horizon]."""
    times = sample_times(horizon, num_samples, seed) if times is None else np.asarray(times)
    acc = np.zeros((ctx.dims.D, ctx.dims.D), dtype=complex)
    for lo in range(0, len(times), CHUNK):
        psi = states(ctx, times[lo:lo + CHUNK])
        acc += psi.T @ psi.conj()
    acc /= len(times)
    return 0.5 * (acc + acc.conj().T)


def expectations(ctx: EvolutionContext, a, times) -> np.ndarray:
    """<psi(t)| a |psi(t)> for every t."""
    a = np.asarray(a)
    times = np.atleast_1d(times)
    out = np.empty(len(times))
    for lo in range(0, len(times), CHUNK):
        psi = states(ctx, times[lo:lo + CHUNK])
        out[lo:lo + CHUNK] = np.einsum("ni,ni->n", psi.conj(), psi @ a.T).real
    return out


def observable_expectation(ctx: EvolutionContext, a, t: float) -> float:
    a = as_hermitian(a, ctx.dims.D)
    return float(expectations(ctx, a, [t])[0])


def squared_deviations(ctx: EvolutionContext, a, times, omega=None) -> np.ndarray:
    """(tr(rho(t) a) - tr(omega a))^2 at each sampled time.

    The infinite-time mean is taken exactly from omega so that all sampling
    error sits in the variance estimate itself.
    """
    if omega is None:
        omega = dephased_average(ctx).omega
    mean = float(np.einsum("ij,ji->", omega, a).real)
    return (expectations(ctx, a, times) - mean) ** 2


def observable_variance_empirical(ctx: EvolutionContext, a, horizon: float, num_samples: int,
                                  seed, times=None, omega=None) -> float:
    a = as_hermitian(a, ctx.dims.D)
    times = sample_times(horizon, num_samples, seed) if times is None else np.asarray(times)
    return float(squared_deviations(ctx, a, times, omega).mean())
