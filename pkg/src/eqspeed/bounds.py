"""Right-hand sides of the equilibration bounds and their empirical certification.

A verdict compares a Monte Carlo time average against its bound with a
slack of three standard errors; the bounds themselves hold for exact
infinite-time averages.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .dynamics import EvolutionContext, Trajectory, commutator_observables
from .equilibrium import EquilibriumData, sample_times, squared_deviations
from .qcore import BipartiteDims, OperatorBasis, operator_norm

N_STDERR = 3.0
# Quantities that vanish exactly in theory come out at ~1e-16 in floating point.
ROUNDOFF_FLOOR = 1e-12
EQUISPACED_WARNING = "equispaced time grid: averages may alias against the spectrum"


@dataclass
class BoundVerdict:
    name: str
    lhs_empirical: float
    lhs_stderr: float
    rhs_bound: float
    satisfied: bool
    slack_ratio: float
    aux: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def verdict(name, lhs, stderr, rhs, aux=None, warnings=None) -> BoundVerdict:
    lhs, stderr, rhs = float(lhs), float(stderr), float(rhs)
    ok = lhs <= rhs + N_STDERR * stderr + ROUNDOFF_FLOOR
    slack = float("inf") if lhs <= ROUNDOFF_FLOOR else rhs / lhs
    return BoundVerdict(name, lhs, stderr, rhs, bool(ok), slack, dict(aux or {}), list(warnings or []))


def mean_and_stderr(samples) -> tuple[float, float]:
    x = np.asarray(samples, dtype=float)
    if len(x) == 0:
        return 0.0, 0.0
    se = x.std(ddof=1) / np.sqrt(len(x)) if len(x) > 1 else 0.0
    return float(x.mean()), float(se)


def _grid_warnings(traj: Trajectory):
    return [] if traj.random_grid else [EQUISPACED_WARNING]


def distance_bound_rhs(dims: BipartiteDims, eq: EquilibriumData) -> tuple[float, float]:
    """(bath-based, omega-based) bounds on the mean distance to omega_S."""
    tight = 0.5 * np.sqrt(dims.d_S / eq.d_eff_omega_B)
    loose = 0.5 * np.sqrt(dims.d_S ** 2 / eq.d_eff_omega)
    return float(tight), float(loose)


def speed_bound_rhs(dims: BipartiteDims, coupling_norm: float, d_eff_omega: float) -> float:
    return float(coupling_norm * np.sqrt(dims.d_S ** 3 / d_eff_omega))


def natural_units_speed(avg_speed: float, coupling_norm: float) -> float:
    if coupling_norm <= 0:
        raise ValueError("natural units are undefined when ||H_S + H_int|| = 0")
    return float(avg_speed / coupling_norm)


def reimann_bound_rhs(a, d_eff_omega: float) -> float:
    return float(operator_norm(a) ** 2 / d_eff_omega)


def commutator_variance_rhs(coupling_norm: float, d_eff_omega: float) -> float:
    """Bound on the time variance of any single expansion coefficient c_k."""
    return float(4 * coupling_norm ** 2 / d_eff_omega)


def derivative_hs_rhs(dims: BipartiteDims, coupling_norm: float, d_eff_omega: float) -> float:
    """Bound on the time average of ||d rho_S/dt||_2^2."""
    return float(4 * coupling_norm ** 2 * dims.d_S ** 2 / d_eff_omega)


def certify_distance(traj: Trajectory, eq: EquilibriumData, dims: BipartiteDims) -> BoundVerdict:
    tight, loose = distance_bound_rhs(dims, eq)
    lhs, se = mean_and_stderr(traj.distances)
    return verdict("distance", lhs, se, loose, aux={"rhs_bath": tight},
                   warnings=_grid_warnings(traj))


def certify_speed(traj: Trajectory, eq: EquilibriumData, coupling_norm: float,
                  dims: BipartiteDims) -> BoundVerdict:
    rhs = speed_bound_rhs(dims, coupling_norm, eq.d_eff_omega)
    lhs, se = mean_and_stderr(traj.speeds_analytic)
    aux = {"max_speed": float(traj.speeds_analytic.max(initial=0.0))}
    if coupling_norm > 0:
        aux["natural_units_speed"] = natural_units_speed(lhs, coupling_norm)
        aux["natural_units_rhs"] = float(np.sqrt(dims.d_S ** 3 / eq.d_eff_omega))
    return verdict("speed", lhs, se, rhs, aux=aux, warnings=_grid_warnings(traj))


def certify_fraction(traj: Trajectory, rhs_bound: float, k_values) -> list[BoundVerdict]:
    """Fraction of sampled times with speed above K times the speed bound, against 1/K."""
    out = []
    n = len(traj)
    for K in k_values:
        if not K > 1:
            raise ValueError(f"K must exceed 1, got {K}")
        above = traj.speeds_analytic > K * rhs_bound + ROUNDOFF_FLOOR
        p = float(above.mean()) if n else 0.0
        se = float(np.sqrt(p * (1 - p) / n)) if n else 0.0
        out.append(verdict(f"fraction_K{K:g}", p, se, 1.0 / K, aux={"K": float(K)},
                           warnings=_grid_warnings(traj)))
    return out


def certify_variance(ctx: EvolutionContext, a, eq: EquilibriumData, horizon: float | None = None,
                     num_samples: int | None = None, seed=None, times=None,
                     name: str = "variance", rhs: float | None = None) -> BoundVerdict:
    """Time variance of <A>(t) against ||A||^2 / d_eff(omega).

    Pass ``times`` to reuse an existing random grid; otherwise fresh uniform
    times are drawn from (horizon, num_samples, seed). ``rhs`` overrides the
    bound, which is how the coefficient-level constants are checked.
    """
    if times is None:
        times = sample_times(horizon, num_samples, seed)
    sq = squared_deviations(ctx, a, times, eq.omega)
    lhs, se = mean_and_stderr(sq)
    reimann = reimann_bound_rhs(a, eq.d_eff_omega)
    return verdict(name, lhs, se, reimann if rhs is None else rhs,
                   aux={"reimann_rhs": reimann})


def certify_coefficient_variances(ctx: EvolutionContext, eq: EquilibriumData, basis: OperatorBasis,
                                  coupling_norm: float, times) -> list[BoundVerdict]:
    """Per-coefficient variance checks plus their sum against the Hilbert-Schmidt bound.

    Each c_k(t) is the expectation of A_k = i[h_S (x) I + h_int, e_k (x) I]; the
    verdict uses 4||H_S+H_int||^2/d_eff and keeps ||A_k||^2/d_eff in ``aux``.
    """
    rhs_k = commutator_variance_rhs(coupling_norm, eq.d_eff_omega)
    out = []
    total, total_var = 0.0, 0.0
    for k, a in enumerate(commutator_observables(ctx.h, basis)):
        v = certify_variance(ctx, a, eq, times=times, name=f"coefficient_{k}", rhs=rhs_k)
        out.append(v)
        total += v.lhs_empirical
        total_var += v.lhs_stderr ** 2
    out.append(verdict("coefficient_sum", total, np.sqrt(total_var),
                       derivative_hs_rhs(ctx.dims, coupling_norm, eq.d_eff_omega)))
    return out
