"""Ensemble execution: one trial per derived seed, then order-independent aggregation."""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .. import bounds as B
from ..dynamics import Trajectory, evolution_context, sample_trajectory
from ..equilibrium import dephased_average, sample_times
from ..hamiltonian import (
    GapReport,
    HamiltonianDecomposition,
    SpectralData,
    check_nondegenerate_gaps,
    compose,
    coupling_norm,
    decompose,
    random_gue,
    spectral_decomposition,
)
from ..qcore import BipartiteDims, haar_state, hermitian_basis, kron
from .config import ExperimentConfig
from .io import ensure_writable, save_experiment
from .report import ExperimentReport, TrialRecord, aggregate_trials

HORIZON_FACTOR = 50.0
SWEEP_SEED_STRIDE = 1_000_003
SWEEP_AXES = {"bath_dim": "d_B", "lambda": "coupling"}


def build_hamiltonian(cfg: ExperimentConfig, rng: np.random.Generator) -> HamiltonianDecomposition:
    dims = BipartiteDims(cfg.d_S, cfg.d_B)
    if cfg.hamiltonian_kind == "gue_global":
        return decompose(random_gue(dims.D, rng), dims)
    h_S = random_gue(dims.d_S, rng)
    if cfg.parts_kind == "gue_no_system":
        h_S = np.zeros_like(h_S)
    h_B = random_gue(dims.d_B, rng)
    h_int = random_gue(dims.D, rng)
    return compose(h_S, h_B, h_int, cfg.coupling, dims)


def _local_state(spec: str, d: int, rng) -> np.ndarray:
    if spec == "haar":
        return haar_state(d, rng)
    psi = np.zeros(d, dtype=complex)
    psi[int(spec.split(":", 1)[1])] = 1
    return psi


def build_initial_state(cfg: ExperimentConfig, spec: SpectralData, rng) -> np.ndarray:
    if cfg.state_kind == "haar_global":
        return haar_state(cfg.D, rng)
    if cfg.state_kind == "product":
        return kron(_local_state(cfg.state_system, cfg.d_S, rng)[:, None],
                    _local_state(cfg.state_bath, cfg.d_B, rng)[:, None])[:, 0]
    return spec.eigenvectors[:, cfg.state_index].copy()


def auto_horizon(gap: GapReport) -> float:
    if np.isfinite(gap.min_gap_separation) and gap.min_gap_separation > 0:
        return HORIZON_FACTOR / gap.min_gap_separation
    return HORIZON_FACTOR


def draw_system(cfg: ExperimentConfig, rng):
    """Draw Hamiltonians until the gap test passes or redraws run out.

    Returns (h, spec, gap, redraws, eigensolve_seconds).
    """
    redraws, t_eig = 0, 0.0
    while True:
        h = build_hamiltonian(cfg, rng)
        t0 = time.perf_counter()
        spec = spectral_decomposition(h)
        t_eig += time.perf_counter() - t0
        gap = check_nondegenerate_gaps(spec)
        if gap.passed or not cfg.redraw_on_gap_failure or redraws >= cfg.max_redraws:
            return h, spec, gap, redraws, t_eig
        redraws += 1


def run_trial(cfg: ExperimentConfig, index: int) -> tuple[TrialRecord, Trajectory | None]:
    t_start = time.perf_counter()
    seed = cfg.seed + index
    rng = np.random.default_rng(seed)
    dims = BipartiteDims(cfg.d_S, cfg.d_B)
    h, spec, gap, redraws, t_eig = draw_system(cfg, rng)
    rec = TrialRecord(index, seed, "ok", redraws=redraws, gap=gap.summary())
    if not gap.passed:
        rec.status = "skipped"
        rec.reason = (f"non-degenerate gap test failed: {len(gap.colliding_pairs)} colliding gap pairs, "
                      f"min separation {gap.min_gap_separation:.3g}")
        rec.timings = {"eigensolve_s": t_eig, "trial_s": time.perf_counter() - t_start}
        return rec, None

    ctx = evolution_context(h, build_initial_state(cfg, spec, rng), spec)
    eq = dephased_average(ctx)
    cn = coupling_norm(h)
    horizon = cfg.horizon if cfg.horizon is not None else auto_horizon(gap)
    if cfg.grid_kind == "random":
        grid = sample_times(horizon, cfg.n, rng)
    else:
        grid = np.linspace(0.0, horizon, cfg.n)
    traj = sample_trajectory(ctx, grid, eq.omega_S, random_grid=cfg.grid_kind == "random")

    rec.d_eff_omega, rec.d_eff_omega_B = eq.d_eff_omega, eq.d_eff_omega_B
    rec.coupling_norm, rec.hamiltonian_norm, rec.horizon = cn, ctx.hamiltonian_norm, float(horizon)
    rec.mean_distance, rec.distance_stderr = B.mean_and_stderr(traj.distances)
    rec.mean_speed, rec.speed_stderr = B.mean_and_stderr(traj.speeds_analytic)
    rec.natural_units_speed = rec.mean_speed / cn if cn > 0 else float("nan")
    rec.max_speed = float(traj.speeds_analytic.max())
    scale = np.maximum(traj.speeds_analytic, B.ROUNDOFF_FLOOR)
    rec.speed_fd_max_rel_dev = float(np.max(np.abs(traj.speeds_fd - traj.speeds_analytic) / scale))

    verdicts = []
    if "distance" in cfg.bounds:
        verdicts.append(B.certify_distance(traj, eq, dims))
    if "speed" in cfg.bounds:
        verdicts.append(B.certify_speed(traj, eq, cn, dims))
    if "fraction" in cfg.bounds:
        rhs = B.speed_bound_rhs(dims, cn, eq.d_eff_omega)
        verdicts.extend(B.certify_fraction(traj, rhs, cfg.fraction_k))
    if "variance" in cfg.bounds:
        warn = [] if traj.random_grid else [B.EQUISPACED_WARNING]
        for j in range(cfg.variance_observables):
            a = random_gue(dims.D, rng)
            v = B.certify_variance(ctx, a, eq, times=grid, name=f"variance_{j}")
            v.warnings.extend(warn)
            verdicts.append(v)
        for v in B.certify_coefficient_variances(ctx, eq, hermitian_basis(dims.d_S), cn, grid):
            v.warnings.extend(warn)
            verdicts.append(v)
    rec.verdicts = verdicts
    rec.timings = {"eigensolve_s": t_eig, "trial_s": time.perf_counter() - t_start}
    return rec, traj


def run_experiment(cfg: ExperimentConfig, threads: int = 1, keep_trajectories: bool = False) -> ExperimentReport:
    """Run every trial of ``cfg``; numeric output is identical for any ``threads``.

    When ``cfg.output_dir`` is set, the report and per-trial CSVs are written
    there; the directory is checked before any computation starts.
    """
    if cfg.output_dir:
        ensure_writable(Path(cfg.output_dir))
        keep_trajectories = True
    t0 = time.perf_counter()
    indices = range(cfg.num_trials)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda i: run_trial(cfg, i), indices))
    else:
        results = [run_trial(cfg, i) for i in indices]
    trials = [r for r, _ in results]
    trajs = {r.index: tr for r, tr in results if tr is not None} if keep_trajectories else {}
    timings = {"wall_s": time.perf_counter() - t0,
               "eigensolve_s": sum(t.timings["eigensolve_s"] for t in trials)}
    report = ExperimentReport(cfg.to_dict(), trials, aggregate_trials(trials), timings, trajs)
    if cfg.output_dir:
        save_experiment(report, cfg.output_dir)
    return report


def sweep_configs(base: ExperimentConfig, axis: str, values) -> list[ExperimentConfig]:
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; choose from {sorted(SWEEP_AXES)}")
    attr = SWEEP_AXES[axis]
    out = []
    for i, val in enumerate(values):
        val = int(val) if attr == "d_B" else float(val)
        kw = {attr: val, "seed": base.seed + i * SWEEP_SEED_STRIDE}
        if base.output_dir:
            kw["output_dir"] = f"{base.output_dir}/{axis}_{val:g}"
        out.append(replace(base, **kw))
    return out


def run_sweep(base: ExperimentConfig, axis: str, values, threads: int = 1,
              keep_trajectories: bool = False) -> list[ExperimentReport]:
    return [run_experiment(c, threads, keep_trajectories) for c in sweep_configs(base, axis, values)]
