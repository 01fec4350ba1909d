"""Run configuration: dataclasses, JSON loading, canonical hashing.

One JSON document with sections ``data``, ``structure``, ``lasso``,
``selection``, ``rolling``, ``compare``, ``output`` plus a top-level
``seed``. Unknown keys are rejected so typos fail loudly.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

_STRUCTURES = ("timezone", "classic")
_ALIGNMENTS = ("intersect", "zerofill", "forwardfill")


@dataclass(frozen=True)
class LassoConfig:
    standardize: bool = True
    tol: float = 1e-7
    max_iter: int = 10_000


@dataclass(frozen=True)
class SelectionConfig:
    replications: int = 100  # fold-plan regenerations per equation
    top_m: int = 5           # most frequent penalties kept per equation
    grid_points: int = 100
    grid_min_ratio: float = 1e-3


@dataclass(frozen=True)
class RollingConfig:
    window: int = 150  # trading rows per window
    step: int = 5


@dataclass(frozen=True)
class CompareConfig:
    out_of_sample: bool = False
    holdout_fraction: float = 0.2


@dataclass(frozen=True)
class DataConfig:
    markets: str = ""
    returns: str = ""
    alignment: str = "intersect"
    start: str | None = None
    end: str | None = None


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"


@dataclass(frozen=True)
class RunConfig:
    data: DataConfig = field(default_factory=DataConfig)
    structure: str = "timezone"
    lasso: LassoConfig = field(default_factory=LassoConfig)
    selection: SelectionConfig = field(default_factory=SelectionConfig)
    rolling: RollingConfig = field(default_factory=RollingConfig)
    compare: CompareConfig = field(default_factory=CompareConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    seed: int = 0


_SECTION_TYPES = {
    "data": DataConfig,
    "lasso": LassoConfig,
    "selection": SelectionConfig,
    "rolling": RollingConfig,
    "compare": CompareConfig,
    "output": OutputConfig,
}


def _build_section(cls, payload: dict, section: str, source: str):
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in payload.items():
        if key not in fields:
            raise ConfigError(f"{source}: unknown key {section}.{key}")
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{source}: bad section {section!r}: {exc}") from None


def _validate(cfg: RunConfig, source: str) -> RunConfig:
    if cfg.structure not in _STRUCTURES:
        raise ConfigError(
            f"{source}: structure must be one of {_STRUCTURES}, got {cfg.structure!r}"
        )
    if cfg.data.alignment not in _ALIGNMENTS:
        raise ConfigError(
            f"{source}: data.alignment must be one of {_ALIGNMENTS}, got {cfg.data.alignment!r}"
        )
    if not isinstance(cfg.seed, int) or isinstance(cfg.seed, bool) or cfg.seed < 0:
        raise ConfigError(f"{source}: seed must be a non-negative integer")
    if cfg.selection.replications < 1:
        raise ConfigError(f"{source}: selection.replications must be >= 1")
    if cfg.selection.top_m < 1:
        raise ConfigError(f"{source}: selection.top_m must be >= 1")
    if cfg.selection.grid_points < 2:
        raise ConfigError(f"{source}: selection.grid_points must be >= 2")
    if not 0 < cfg.selection.grid_min_ratio < 1:
        raise ConfigError(f"{source}: selection.grid_min_ratio must lie in (0, 1)")
    if cfg.rolling.window < 60 or cfg.rolling.step < 1:
        raise ConfigError(f"{source}: rolling needs window >= 60 and step >= 1")
    if not 0 < cfg.compare.holdout_fraction < 1:
        raise ConfigError(f"{source}: compare.holdout_fraction must lie in (0, 1)")
    if cfg.lasso.tol <= 0 or cfg.lasso.max_iter < 1:
        raise ConfigError(f"{source}: lasso needs tol > 0 and max_iter >= 1")
    return cfg


def config_from_dict(payload: dict, source: str = "<config>") -> RunConfig:
    if not isinstance(payload, dict):
        raise ConfigError(f"{source}: config must be a JSON object")
    kwargs = {}
    for key, value in payload.items():
        if key in _SECTION_TYPES:
            if not isinstance(value, dict):
                raise ConfigError(f"{source}: section {key!r} must be an object")
            kwargs[key] = _build_section(_SECTION_TYPES[key], value, key, source)
        elif key == "structure":
            kwargs["structure"] = value
        elif key == "seed":
            kwargs["seed"] = value
        else:
            raise ConfigError(f"{source}: unknown key {key!r}")
    return _validate(RunConfig(**kwargs), source)


def load_config(path: str) -> RunConfig:
    p = Path(path)
    try:
        payload = json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    cfg = config_from_dict(payload, source=str(path))
    # Data paths are resolved against the config file's directory.
    base = p.resolve().parent
    data = cfg.data
    resolved = dataclasses.replace(
        data,
        markets=str((base / data.markets)) if data.markets else "",
        returns=str((base / data.returns)) if data.returns else "",
    )
    return dataclasses.replace(cfg, data=resolved)


def canonical_dict(cfg: RunConfig) -> dict:
    """The estimation-relevant configuration (excludes output location)."""
    d = dataclasses.asdict(cfg)
    d.pop("output", None)
    # Artifact bytes must not depend on where inputs live on disk.
    d["data"]["markets"] = Path(d["data"]["markets"]).name if d["data"]["markets"] else ""
    d["data"]["returns"] = Path(d["data"]["returns"]).name if d["data"]["returns"] else ""
    return d


def config_hash(cfg: RunConfig) -> str:
    blob = json.dumps(canonical_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()
