#!/usr/bin/env python3
"""Run the certification ensemble and print one line per trial and bound."""
import argparse
from dataclasses import replace

from eqspeed.harness import load_config, run_experiment


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("config", nargs="?", default="configs/certify_d2_b100.cfg")
    p.add_argument("--out", help="write report.json and trial CSVs here")
    p.add_argument("--threads", type=int, default=1)
    args = p.parse_args()

    cfg = load_config(args.config)
    if args.out:
        cfg = replace(cfg, output_dir=args.out)
    rep = run_experiment(cfg, threads=args.threads)
    for t in rep.trials:
        if not t.ok:
            print(f"trial {t.index}: skipped ({t.reason})")
            continue
        for v in t.verdicts:
            if v.name.startswith("coefficient_") and v.name != "coefficient_sum":
                continue
            print(f"trial {t.index} seed {t.seed} {v.name:16s} lhs={v.lhs_empirical:.4g} "
                  f"+- {v.lhs_stderr:.2g}  rhs={v.rhs_bound:.4g}  {'ok' if v.satisfied else 'VIOLATED'}")
    s = rep.aggregate["speed_slack_ratio"]
    print(f"median speed slack ratio {s['median']:.3g}; all satisfied: {rep.all_satisfied}")
    return 0 if rep.all_satisfied else 2


if __name__ == "__main__":
    raise SystemExit(main())
