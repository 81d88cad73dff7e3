"""On-disk formats: per-trial trajectory CSVs and the JSON experiment report.

Non-finite floats are written as the strings "inf", "-inf" and "nan" so the
report stays strict JSON.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from ..bounds import BoundVerdict
from .report import ExperimentReport, TrialRecord

CSV_HEADER = ("t", "distance", "speed_analytic", "speed_fd")
_NONFINITE = {"inf": math.inf, "-inf": -math.inf, "nan": math.nan}


class HarnessIOError(OSError):
    pass


def ensure_writable(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".write_test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise HarnessIOError(f"output directory {path} is not writable: {exc.strerror}") from None
    return path


def write_trajectory_csv(traj, path) -> None:
    path = Path(path)
    rows = zip(traj.times, traj.distances, traj.speeds_analytic, traj.speeds_fd)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for row in rows:
                w.writerow([f"{x:.17g}" for x in row])
    except OSError as exc:
        raise HarnessIOError(f"cannot write trajectory {path}: {exc.strerror}") from None


def read_trajectory_csv(path) -> dict[str, np.ndarray]:
    with Path(path).open(newline="") as fh:
        r = csv.reader(fh)
        header = tuple(next(r))
        if header != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        rows = [[float(x) for x in row] for row in r]
    data = np.array(rows, dtype=float).reshape(-1, len(CSV_HEADER))
    return {name: data[:, i] for i, name in enumerate(CSV_HEADER)}


def _encode(x):
    if isinstance(x, float) and not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, dict):
        return {k: _encode(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_encode(v) for v in x]
    if isinstance(x, np.generic):
        return _encode(x.item())
    return x


def _decode(x):
    if isinstance(x, str) and x in _NONFINITE:
        return _NONFINITE[x]
    if isinstance(x, dict):
        return {k: _decode(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_decode(v) for v in x]
    return x


def report_to_dict(report: ExperimentReport) -> dict:
    trials = []
    for t in report.trials:
        d = {k: getattr(t, k) for k in TrialRecord.__dataclass_fields__}
        d["verdicts"] = [v.to_dict() for v in t.verdicts]
        trials.append(d)
    return _encode({"config": report.config, "trials": trials,
                    "aggregate": report.aggregate, "timings": report.timings})


def report_from_dict(data: dict) -> ExperimentReport:
    data = _decode(data)
    trials = []
    for d in data["trials"]:
        d = dict(d)
        d["verdicts"] = [BoundVerdict(**v) for v in d["verdicts"]]
        trials.append(TrialRecord(**d))
    return ExperimentReport(data["config"], trials, data["aggregate"], data.get("timings", {}))


def write_report(report: ExperimentReport, path) -> None:
    path = Path(path)
    try:
        path.write_text(json.dumps(report_to_dict(report), indent=2, sort_keys=False) + "\n")
    except OSError as exc:
        raise HarnessIOError(f"cannot write report {path}: {exc.strerror}") from None


def read_report(path) -> ExperimentReport:
    return report_from_dict(json.loads(Path(path).read_text()))


def save_experiment(report: ExperimentReport, out_dir) -> Path:
    """Write report.json and one trial_NNN.csv per trajectory kept in the report."""
    out = ensure_writable(Path(out_dir))
    for idx, traj in sorted(report.trajectories.items()):
        write_trajectory_csv(traj, out / f"trial_{idx:03d}.csv")
    write_report(report, out / "report.json")
    return out
