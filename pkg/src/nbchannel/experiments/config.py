"""Scenario configuration: JSON sections merged over per-scenario defaults."""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

SCENARIOS = ("decay", "absorb", "tail", "regularity", "convergence", "inequalities")


class ConfigError(ValueError):
    pass


@dataclass
class GridCfg:
    L: float = math.pi
    Y: float = math.pi / 2
    nx: int = 127
    ny: int = 127


@dataclass
class PhysCfg:
    Pr: float = 1.0
    Ra: float = 10.0


@dataclass
class ICCfg:
    kind: str = "random"  # eigenmode | gaussian-bump | compact-bump | random | zero
    R: float = 1.0
    seed: int = 0
    radii: list = field(default_factory=list)
    seeds: list = field(default_factory=list)
    m: int = 1
    n: int = 1
    width: float = 0.5
    center: list = field(default_factory=lambda: [0.5, 0.0])


@dataclass
class ForcingCfg:
    kind: str = "none"  # none | bump
    amp: float = 0.0
    amp_g: Optional[float] = None
    mode_f: int = 1
    mode_g: int = 1
    width: float = 1.0


@dataclass
class TimeCfg:
    dt: float = 0.01
    t_end: float = 10.0
    adaptive: bool = False
    cfl: float = 0.4
    t_end_theta: Optional[float] = None


@dataclass
class SampleCfg:
    every: int = 1


@dataclass
class TailCfg:
    ks: list = field(default_factory=list)
    eps: float = 1e-4
    k_step: float = 0.25


@dataclass
class OutCfg:
    csv: Optional[str] = None
    json: Optional[str] = None
    checkpoint: Optional[str] = None


@dataclass
class ConvergenceCfg:
    levels: list = field(default_factory=lambda: [31, 63, 127, 255])
    dt_space: float = 1e-3
    t_end: float = 0.5
    dt_levels: list = field(default_factory=lambda: [0.04, 0.02, 0.01, 0.005])
    n_time: int = 63
    t_end_time: float = 1.0
    min_slope: float = 1.8


@dataclass
class IneqCfg:
    samples: int = 1000
    resolutions: list = field(default_factory=lambda: [63, 127])
    modes: int = 6
    decay: float = 1.0
    k: Optional[float] = None
    stability: float = 0.10


SECTIONS = {
    "grid": GridCfg,
    "phys": PhysCfg,
    "ic": ICCfg,
    "forcing": ForcingCfg,
    "time": TimeCfg,
    "sample": SampleCfg,
    "tail": TailCfg,
    "out": OutCfg,
    "convergence": ConvergenceCfg,
    "inequalities": IneqCfg,
}

# Defaults chosen so each scenario passes its checks at desk scale.
DEFAULTS: dict[str, dict] = {
    "decay": {
        "grid": {"L": math.pi, "Y": math.pi / 2, "nx": 127, "ny": 127},
        "ic": {"kind": "eigenmode", "R": 1.0, "seed": 3},
        "time": {"dt": 0.01, "t_end": 10.0, "t_end_theta": 10.0},
        "sample": {"every": 10},
    },
    "absorb": {
        "grid": {"L": 2 * math.pi, "Y": math.pi, "nx": 127, "ny": 127},
        "ic": {"kind": "random", "seed": 7, "radii": [1, 4, 16, 64], "seeds": [7, 21]},
        "forcing": {"kind": "bump", "amp": 0.05, "mode_f": 6, "mode_g": 5, "width": 0.75},
        "time": {"dt": 0.05, "t_end": 50.0, "adaptive": True},
        "sample": {"every": 2},
    },
    "regularity": {
        "grid": {"L": 2 * math.pi, "Y": math.pi, "nx": 127, "ny": 127},
        "ic": {"kind": "random", "seed": 7, "radii": [1, 4, 16, 64]},
        "forcing": {"kind": "bump", "amp": 0.05, "mode_f": 6, "mode_g": 5, "width": 0.75},
        "time": {"dt": 0.05, "t_end": 50.0, "adaptive": True},
        "sample": {"every": 2},
    },
    "tail": {
        "grid": {"L": math.pi, "Y": 8.0, "nx": 63, "ny": 255},
        "ic": {"kind": "compact-bump", "R": 4.0, "width": 1.0, "m": 1},
        "forcing": {"kind": "bump", "amp": 0.5, "mode_f": 2, "mode_g": 1, "width": 1.0},
        "time": {"dt": 0.05, "t_end": 20.0, "adaptive": True},
        "sample": {"every": 2},
        "tail": {"eps": 1e-4, "k_step": 0.25},
    },
    "convergence": {
        "grid": {"L": math.pi, "Y": math.pi / 2, "nx": 63, "ny": 63},
    },
    "inequalities": {
        "grid": {"L": math.pi, "Y": math.pi / 2, "nx": 63, "ny": 63},
    },
}


@dataclass
class ScenarioConfig:
    scenario: str
    grid: GridCfg = field(default_factory=GridCfg)
    phys: PhysCfg = field(default_factory=PhysCfg)
    ic: ICCfg = field(default_factory=ICCfg)
    forcing: ForcingCfg = field(default_factory=ForcingCfg)
    time: TimeCfg = field(default_factory=TimeCfg)
    sample: SampleCfg = field(default_factory=SampleCfg)
    tail: TailCfg = field(default_factory=TailCfg)
    out: OutCfg = field(default_factory=OutCfg)
    convergence: ConvergenceCfg = field(default_factory=ConvergenceCfg)
    inequalities: IneqCfg = field(default_factory=IneqCfg)

    def to_dict(self) -> dict:
        return asdict(self)

    def hash(self) -> str:
        """Digest of everything except output paths."""
        body = {k: v for k, v in self.to_dict().items() if k != "out"}
        blob = json.dumps(body, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _coerce(section: str, cls, raw: dict):
    known = {f.name: f for f in fields(cls)}
    unknown = set(raw) - set(known)
    if unknown:
        raise ConfigError(f"unknown key(s) in '{section}': {sorted(unknown)}")
    kw = {}
    for name, val in raw.items():
        default = getattr(cls(), name)
        if isinstance(default, bool):
            if not isinstance(val, bool):
                raise ConfigError(f"{section}.{name} must be true/false, got {val!r}")
        elif isinstance(default, int) and not isinstance(default, bool):
            if not isinstance(val, int) or isinstance(val, bool):
                raise ConfigError(f"{section}.{name} must be an integer, got {val!r}")
        elif isinstance(default, float):
            if not isinstance(val, (int, float)) or isinstance(val, bool):
                raise ConfigError(f"{section}.{name} must be a number, got {val!r}")
            val = float(val)
        elif isinstance(default, list) and not isinstance(val, list):
            raise ConfigError(f"{section}.{name} must be a list, got {val!r}")
        kw[name] = val
    return cls(**kw)


def build_config(scenario: str, raw: Optional[dict] = None) -> ScenarioConfig:
    """Merge ``raw`` (nested JSON sections) over the scenario defaults."""
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}; choose from {SCENARIOS}")
    raw = dict(raw or {})
    named = raw.pop("scenario", scenario)
    if named != scenario:
        raise ConfigError(f"config is for scenario {named!r}, not {scenario!r}")
    for key, val in raw.items():
        if key not in SECTIONS:
            raise ConfigError(f"unknown config section {key!r}")
        if not isinstance(val, dict):
            raise ConfigError(f"config section {key!r} must be an object")
    merged = _merge(DEFAULTS.get(scenario, {}), raw)
    cfg = ScenarioConfig(scenario=scenario,
                         **{k: _coerce(k, SECTIONS[k], v) for k, v in merged.items()})
    validate(cfg)
    return cfg


def load_config(scenario: str, path) -> ScenarioConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    return build_config(scenario, raw)


def validate(cfg: ScenarioConfig) -> None:
    g = cfg.grid
    if not (g.L > 0 and g.Y > 0) or g.nx < 3 or g.ny < 3:
        raise ConfigError(f"invalid grid {g}")
    if not (cfg.phys.Pr > 0 and cfg.phys.Ra > 0):
        raise ConfigError("Pr and Ra must be positive")
    if cfg.ic.kind not in ("eigenmode", "gaussian-bump", "compact-bump", "random", "zero"):
        raise ConfigError(f"unknown initial condition kind {cfg.ic.kind!r}")
    if cfg.ic.kind != "zero" and not cfg.ic.R >= 0:
        raise ConfigError("ic.R must be non-negative")
    if any(not (isinstance(r, (int, float)) and r >= 0) for r in cfg.ic.radii):
        raise ConfigError("ic.radii must be non-negative numbers")
    if cfg.forcing.kind not in ("none", "bump"):
        raise ConfigError(f"unknown forcing kind {cfg.forcing.kind!r}")
    if not cfg.time.dt > 0 or cfg.time.t_end < 0:
        raise ConfigError("time.dt must be positive and time.t_end non-negative")
    if not 0 < cfg.time.cfl < 1:
        raise ConfigError("time.cfl must lie in (0, 1)")
    if cfg.sample.every < 1:
        raise ConfigError("sample.every must be >= 1")
    if any(not (isinstance(k, (int, float)) and k > 0) for k in cfg.tail.ks):
        raise ConfigError("tail.ks must be positive numbers")
    if not cfg.tail.eps > 0:
        raise ConfigError("tail.eps must be positive")
    if cfg.inequalities.samples < 1:
        raise ConfigError("inequalities.samples must be >= 1")
    if len(cfg.convergence.levels) < 2 or len(cfg.convergence.dt_levels) < 2:
        raise ConfigError("convergence needs at least two refinement levels")


def resolve_out(cfg: ScenarioConfig, out_dir: Optional[str]) -> ScenarioConfig:
    """Place relative output paths under ``out_dir`` and fill in defaults."""
    cfg = copy.deepcopy(cfg)
    base = Path(out_dir) if out_dir else None

    def place(p: Optional[str], default: str) -> Optional[str]:
        if p is None:
            return str(base / default) if base else None
        p = Path(p)
        return str(base / p) if base and not p.is_absolute() else str(p)

    cfg.out.csv = place(cfg.out.csv, f"{cfg.scenario}.csv")
    cfg.out.json = place(cfg.out.json, f"{cfg.scenario}.json")
    if cfg.out.checkpoint is not None:
        cfg.out.checkpoint = place(cfg.out.checkpoint, f"{cfg.scenario}.nbch")
    return cfg


def jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "item") and callable(obj.item):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj
