#!/usr/bin/env python3
"""Median natural-units speed against bath size, with d_eff(omega) alongside."""
import argparse

from eqspeed.harness import ExperimentConfig, run_sweep


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--sizes", default="10,20,40,80")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    args = p.parse_args()

    sizes = [int(s) for s in args.sizes.split(",")]
    base = ExperimentConfig(d_S=2, d_B=sizes[0], num_trials=args.trials, seed=args.seed,
                            redraw_on_gap_failure=True, bounds=("speed",), variance_observables=0)
    reports = run_sweep(base, "bath_dim", sizes, threads=args.threads)
    print(f"{'d_B':>5} {'median d_eff':>13} {'median <v>/||C||':>17} {'q1':>9} {'q3':>9}")
    for d_B, rep in zip(sizes, reports):
        a = rep.aggregate
        q = a["natural_units_speed"]
        print(f"{d_B:>5} {a['d_eff_omega']['median']:>13.1f} {q['median']:>17.4g} {q['q1']:>9.4g} {q['q3']:>9.4g}")


if __name__ == "__main__":
    main()
