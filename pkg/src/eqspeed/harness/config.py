"""Experiment configuration and its flat ``dotted.key = value`` text format.

Grammar, one entry per line::

    # comment (also allowed after a value)
    section.key = value

Values are integers, floats, ``true``/``false``, bare words, or
comma-separated lists of those. Unknown keys are an error.
"""
from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

HAMILTONIAN_KINDS = ("gue_global", "composed")
PARTS_KINDS = ("gue", "gue_no_system")
STATE_KINDS = ("haar_global", "product", "eigenstate")
GRID_KINDS = ("random", "equispaced")
BOUND_NAMES = ("distance", "speed", "fraction", "variance")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    d_S: int = 2
    d_B: int = 100
    max_dimension: int = 2048
    hamiltonian_kind: str = "gue_global"
    coupling: float = 1.0
    parts_kind: str = "gue"
    state_kind: str = "haar_global"
    state_system: str = "haar"
    state_bath: str = "haar"
    state_index: int = 0
    seed: int = 0
    grid_kind: str = "random"
    horizon: float | None = None  # None: 50 / min_gap_separation
    n: int = 2000
    num_trials: int = 10
    redraw_on_gap_failure: bool = False
    max_redraws: int = 20
    bounds: tuple = BOUND_NAMES
    fraction_k: tuple = (2.0, 5.0, 10.0)
    variance_observables: int = 5
    output_dir: str | None = None

    def __post_init__(self):
        validate(self)

    @property
    def D(self) -> int:
        return self.d_S * self.d_B

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out

    def to_text(self) -> str:
        lines = []
        for key, (attr, _) in KEYS.items():
            v = getattr(self, attr)
            if v is None:
                v = "auto" if attr == "horizon" else None
            if v is None:
                continue
            if isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, tuple):
                v = ",".join(_fmt(x) for x in v)
            else:
                v = _fmt(v)
            lines.append(f"{key} = {v}")
        return "\n".join(lines) + "\n"


def _fmt(x):
    return repr(x) if isinstance(x, float) else str(x)


def _int(s):
    return int(s)


def _float(s):
    return float(s)


def _bool(s):
    low = s.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _horizon(s):
    return None if s.lower() == "auto" else float(s)


def _words(s):
    return tuple(w.strip() for w in s.split(",") if w.strip())


def _floats(s):
    return tuple(float(w) for w in _words(s))


def _path(s):
    return s or None


# config key -> (dataclass attribute, parser)
KEYS = {
    "system.d_S": ("d_S", _int),
    "system.d_B": ("d_B", _int),
    "system.max_dimension": ("max_dimension", _int),
    "hamiltonian.kind": ("hamiltonian_kind", str),
    "hamiltonian.lambda": ("coupling", _float),
    "hamiltonian.parts": ("parts_kind", str),
    "state.kind": ("state_kind", str),
    "state.system": ("state_system", str),
    "state.bath": ("state_bath", str),
    "state.index": ("state_index", _int),
    "seed": ("seed", _int),
    "grid.kind": ("grid_kind", str),
    "grid.horizon": ("horizon", _horizon),
    "grid.n": ("n", _int),
    "trials.num": ("num_trials", _int),
    "trials.redraw_on_gap_failure": ("redraw_on_gap_failure", _bool),
    "trials.max_redraws": ("max_redraws", _int),
    "bounds.check": ("bounds", _words),
    "bounds.fraction_k": ("fraction_k", _floats),
    "bounds.variance_observables": ("variance_observables", _int),
    "output.dir": ("output_dir", _path),
}


def _local_state_ok(spec: str, dim: int) -> bool:
    if spec == "haar":
        return True
    if spec.startswith("basis:"):
        try:
            i = int(spec.split(":", 1)[1])
        except ValueError:
            return False
        return 0 <= i < dim
    return False


def validate(cfg: ExperimentConfig) -> None:
    def need(cond, msg):
        if not cond:
            raise ConfigError(msg)

    need(cfg.d_S >= 2 and cfg.d_B >= 1, f"need d_S >= 2 and d_B >= 1, got {cfg.d_S}, {cfg.d_B}")
    need(cfg.D <= cfg.max_dimension,
         f"d_S * d_B = {cfg.D} exceeds max_dimension = {cfg.max_dimension}")
    need(cfg.hamiltonian_kind in HAMILTONIAN_KINDS, f"hamiltonian.kind must be one of {HAMILTONIAN_KINDS}")
    need(cfg.parts_kind in PARTS_KINDS, f"hamiltonian.parts must be one of {PARTS_KINDS}")
    need(cfg.state_kind in STATE_KINDS, f"state.kind must be one of {STATE_KINDS}")
    if cfg.state_kind == "product":
        need(_local_state_ok(cfg.state_system, cfg.d_S), f"bad state.system {cfg.state_system!r}")
        need(_local_state_ok(cfg.state_bath, cfg.d_B), f"bad state.bath {cfg.state_bath!r}")
    if cfg.state_kind == "eigenstate":
        need(0 <= cfg.state_index < cfg.D, f"state.index must lie in [0, {cfg.D})")
    need(cfg.grid_kind in GRID_KINDS, f"grid.kind must be one of {GRID_KINDS}")
    need(cfg.horizon is None or cfg.horizon > 0, "grid.horizon must be positive or auto")
    need(cfg.n >= 2, "grid.n must be at least 2")
    need(cfg.num_trials >= 1, "trials.num must be positive")
    need(cfg.max_redraws >= 0, "trials.max_redraws must be non-negative")
    need(0 <= cfg.seed < 2 ** 63, "seed must be a non-negative 64-bit integer")
    unknown = set(cfg.bounds) - set(BOUND_NAMES)
    need(not unknown, f"unknown bounds {sorted(unknown)}; choose from {BOUND_NAMES}")
    need(all(k > 1 for k in cfg.fraction_k), "every bounds.fraction_k must exceed 1")
    need(cfg.variance_observables >= 0, "bounds.variance_observables must be non-negative")


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        attr, conv = KEYS[key]
        try:
            values[attr] = conv(value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}") from None
    return ExperimentConfig(**values)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, str(path))
