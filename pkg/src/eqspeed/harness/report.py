"""Per-trial records, the experiment report, and aggregation over trials."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class TrialRecord:
    index: int
    seed: int
    status: str  # "ok" or "skipped"
    reason: str = ""
    redraws: int = 0
    gap: dict = field(default_factory=dict)
    d_eff_omega: float = float("nan")
    d_eff_omega_B: float = float("nan")
    coupling_norm: float = float("nan")
    hamiltonian_norm: float = float("nan")
    horizon: float = float("nan")
    mean_distance: float = float("nan")
    distance_stderr: float = float("nan")
    mean_speed: float = float("nan")
    speed_stderr: float = float("nan")
    natural_units_speed: float = float("nan")
    max_speed: float = float("nan")
    speed_fd_max_rel_dev: float = float("nan")
    verdicts: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    @property
    def all_satisfied(self) -> bool:
        return all(v.satisfied for v in self.verdicts)


@dataclass
class ExperimentReport:
    config: dict
    trials: list
    aggregate: dict
    timings: dict = field(default_factory=dict)
    trajectories: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def all_satisfied(self) -> bool:
        return all(t.all_satisfied for t in self.trials if t.ok)

    def unsatisfied(self) -> list:
        return [(t.index, v) for t in self.trials if t.ok for v in t.verdicts if not v.satisfied]

    def check_aggregates(self) -> None:
        again = aggregate_trials(self.trials)
        if not _same(again, self.aggregate):
            raise AssertionError("report aggregates disagree with per-trial entries")


def _same(a, b) -> bool:
    if isinstance(a, dict):
        return isinstance(b, dict) and a.keys() == b.keys() and all(_same(a[k], b[k]) for k in a)
    if isinstance(a, float) and isinstance(b, float) and np.isnan(a) and np.isnan(b):
        return True
    return a == b


def _quantiles(values) -> dict:
    x = np.asarray([v for v in values if np.isfinite(v)], dtype=float)
    if len(x) == 0:
        return {"median": float("nan"), "q1": float("nan"), "q3": float("nan")}
    q1, med, q3 = np.percentile(x, [25, 50, 75])
    return {"median": float(med), "q1": float(q1), "q3": float(q3)}


def aggregate_trials(trials) -> dict:
    """Summary statistics over the trials that ran; skipped trials never count."""
    ok = sorted((t for t in trials if t.ok), key=lambda t: t.index)
    speed_slack = [v.slack_ratio for t in ok for v in t.verdicts if v.name == "speed"]
    return {
        "num_trials": len(trials),
        "num_ok": len(ok),
        "num_skipped": len(trials) - len(ok),
        "num_unsatisfied": sum(not v.satisfied for t in ok for v in t.verdicts),
        "all_satisfied": all(t.all_satisfied for t in ok),
        "mean_distance": _quantiles([t.mean_distance for t in ok]),
        "mean_speed": _quantiles([t.mean_speed for t in ok]),
        "natural_units_speed": _quantiles([t.natural_units_speed for t in ok]),
        "d_eff_omega": _quantiles([t.d_eff_omega for t in ok]),
        "coupling_norm": _quantiles([t.coupling_norm for t in ok]),
        "speed_slack_ratio": _quantiles(speed_slack),
    }


