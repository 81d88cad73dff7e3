"""Command-line entry point.

Exit codes: 0 every certified bound satisfied, 2 some verdict unsatisfied
(or a failed gap check / self-test), 3 configuration error, 4 runtime or
numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

import numpy as np

from .harness.config import ConfigError, load_config
from .harness.io import HarnessIOError
from .harness.runner import SWEEP_AXES, build_hamiltonian, run_experiment, run_sweep
from .hamiltonian import check_nondegenerate_gaps, spectral_decomposition
from .qcore import InvariantError

EXIT_OK, EXIT_UNSATISFIED, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3, 4

log = logging.getLogger("eqspeed")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors are configuration errors, not failed verdicts
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--out", help="output directory (overrides output.dir)")
    common.add_argument("--threads", type=int, default=1, help="trials run in parallel")
    common.add_argument("--quiet", action="store_true")

    p = _Parser(prog="eqspeed", description="Equilibration speed and distance certification.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    run = sub.add_parser("run", parents=[common], help="run one experiment")
    run.add_argument("config")
    sw = sub.add_parser("sweep", parents=[common], help="run an experiment per axis value")
    sw.add_argument("config")
    sw.add_argument("--axis", required=True, help="bath_dim=10,20,40,80 or lambda=0.1,0.5,1.0")
    gaps = sub.add_parser("check-gaps", parents=[common], help="spectral analysis only")
    gaps.add_argument("config")
    sub.add_parser("selftest", parents=[common], help="run the structural invariant checks")
    return p


def _config(args):
    cfg = load_config(args.config)
    kw = {}
    if args.seed is not None:
        kw["seed"] = args.seed
    if args.out is not None:
        kw["output_dir"] = args.out
    return replace(cfg, **kw) if kw else cfg


def _parse_axis(text: str):
    name, _, values = text.partition("=")
    if name not in SWEEP_AXES or not values:
        raise ConfigError(f"--axis must look like bath_dim=10,20 or lambda=0.1,0.5; got {text!r}")
    try:
        vals = [float(v) for v in values.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"non-numeric value in --axis {text!r}") from None
    if name == "bath_dim":
        if any(v != int(v) for v in vals):
            raise ConfigError("bath_dim values must be integers")
        vals = [int(v) for v in vals]
    return name, vals


def _print_report(report, label=""):
    agg = report.aggregate
    head = f"[{label}] " if label else ""
    print(f"{head}trials ok={agg['num_ok']} skipped={agg['num_skipped']} "
          f"unsatisfied verdicts={agg['num_unsatisfied']}")
    for t in report.trials:
        if not t.ok:
            print(f"  trial {t.index}: skipped ({t.reason})")
            continue
        verd = " ".join(f"{v.name}={'ok' if v.satisfied else 'FAIL'}" for v in t.verdicts
                        if not v.name.startswith("coefficient_") or not v.satisfied)
        print(f"  trial {t.index}: d_eff={t.d_eff_omega:.1f} <D>={t.mean_distance:.4g} "
              f"<v>={t.mean_speed:.4g} <v>/||H_S+H_int||={t.natural_units_speed:.4g}  {verd}")
    q = agg["natural_units_speed"]
    print(f"{head}median natural-units speed {q['median']:.4g} "
          f"(quartiles {q['q1']:.4g}, {q['q3']:.4g})")


def _cmd_run(args) -> int:
    report = run_experiment(_config(args), threads=args.threads)
    if not args.quiet:
        _print_report(report)
    return EXIT_OK if report.all_satisfied else EXIT_UNSATISFIED


def _cmd_sweep(args) -> int:
    axis, values = _parse_axis(args.axis)
    reports = run_sweep(_config(args), axis, values, threads=args.threads)
    for val, rep in zip(values, reports):
        if not args.quiet:
            _print_report(rep, f"{axis}={val}")
    return EXIT_OK if all(r.all_satisfied for r in reports) else EXIT_UNSATISFIED


def _cmd_check_gaps(args) -> int:
    cfg = _config(args)
    all_ok = True
    for i in range(cfg.num_trials):
        rng = np.random.default_rng(cfg.seed + i)
        gap = check_nondegenerate_gaps(spectral_decomposition(build_hamiltonian(cfg, rng)))
        all_ok &= gap.passed
        if not args.quiet:
            print(f"trial {i}: {'pass' if gap.passed else 'FAIL'} levels={gap.num_distinct_levels} "
                  f"min_gap_separation={gap.min_gap_separation:.3g} collisions={len(gap.colliding_pairs)}")
    return EXIT_OK if all_ok else EXIT_UNSATISFIED


def _cmd_selftest(args) -> int:
    from .selftest import run_selftest

    results = run_selftest(seed=args.seed or 0, verbose=not args.quiet)
    failed = [r for r in results if not r[1]]
    if not args.quiet:
        print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_OK if not failed else EXIT_UNSATISFIED


COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "check-gaps": _cmd_check_gaps, "selftest": _cmd_selftest}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except (HarnessIOError, InvariantError, ArithmeticError, RuntimeError, np.linalg.LinAlgError) as exc:
        log.error("runtime failure: %s", exc)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
