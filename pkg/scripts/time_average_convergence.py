#!/usr/bin/env python3
"""Distribution of sqrt(n) * D(empirical time average, omega) at a given size.

Compares the simulator against a random-matrix model of the sampling error:
the dephased fluctuation matrix with entry variances p_j p_k / n, where p are
the energy populations of a Haar-random state.
"""
import argparse

import numpy as np

from eqspeed.dynamics import evolution_context
from eqspeed.equilibrium import dephased_average, empirical_time_average
from eqspeed.harness import ExperimentConfig
from eqspeed.harness.runner import auto_horizon, build_initial_state, draw_system
from eqspeed.qcore import trace_distance


def simulated(d_B, n, seeds):
    cfg = ExperimentConfig(d_S=2, d_B=d_B, redraw_on_gap_failure=True)
    out = []
    for seed in seeds:
        rng = np.random.default_rng(seed)
        h, spec, gap, _, _ = draw_system(cfg, rng)
        ctx = evolution_context(h, build_initial_state(cfg, spec, rng), spec)
        avg = empirical_time_average(ctx, auto_horizon(gap), n, rng)
        out.append(trace_distance(avg, dephased_average(ctx).omega) * np.sqrt(n))
    return np.array(out)


def model(D, n, draws, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(draws):
        p = rng.exponential(size=D)
        p /= p.sum()
        g = (rng.standard_normal((D, D)) + 1j * rng.standard_normal((D, D))) / np.sqrt(2)
        g = np.triu(g, 1)
        g = g + g.conj().T
        x = np.sqrt(p)[:, None] * g * np.sqrt(p)[None, :] / np.sqrt(n)
        out.append(0.5 * np.abs(np.linalg.eigvalsh(x)).sum() * np.sqrt(n))
    return np.array(out)


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--d-B", type=int, default=100)
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--draws", type=int, default=200)
    args = p.parse_args()

    sim = simulated(args.d_B, args.n, range(args.seeds))
    ref = model(2 * args.d_B, args.n, args.draws)
    for name, x in (("simulator", sim), ("model", ref)):
        print(f"{name:9s} mean {x.mean():.3f}  std {x.std(ddof=1):.3f}  P(< 5) {np.mean(x < 5):.2f}")


if __name__ == "__main__":
    main()
