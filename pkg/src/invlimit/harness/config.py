"""Experiment configuration in flat ``section.key=value`` text.

Example::

    experiment.name=attractor
    family.kind=tent
    family.params=1.8
    fatten.delta=0.01
    rng.seed=7

Blank lines and ``#`` comments are ignored. Every key maps to one field of
:class:`ExperimentConfig`; unknown keys and out-of-range values raise
:class:`ConfigError` naming the offending key.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields

import numpy as np

from ..families import B_STAR, FamilyParam

COMMANDS = ("attractor", "tongues", "rotation", "continuity", "periodic", "entropy")
MAX_SEED = 2**64 - 1


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending key."""


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _fmt(v) -> str:
    if isinstance(v, tuple):
        return ",".join(_fmt(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass
class ExperimentConfig:
    """All knobs of one experiment; see module docstring for the text form."""

    name: str = field(default="attractor", metadata={"key": "experiment.name"})
    kind: str = field(default="tent", metadata={"key": "family.kind"})
    params: tuple = field(default=(1.8,), metadata={"key": "family.params", "parse": _floats})
    delta: float = field(default=0.01, metadata={"key": "fatten.delta"})
    eps: float = field(default=0.01, metadata={"key": "fatten.eps"})
    theta0: float = field(default=0.17, metadata={"key": "fatten.theta0"})
    grid_start: float = field(default=1.2, metadata={"key": "grid.start"})
    grid_stop: float = field(default=1.9, metadata={"key": "grid.stop"})
    grid_step: float = field(default=0.01, metadata={"key": "grid.step"})
    grid_index: int = field(default=0, metadata={"key": "grid.param_index"})
    seeds: int = field(default=200, metadata={"key": "budget.seeds"})
    transient: int = field(default=1000, metadata={"key": "budget.transient"})
    keep: int = field(default=100, metadata={"key": "budget.keep"})
    n: int = field(default=100_000, metadata={"key": "budget.n"})
    grid_res: int = field(default=4096, metadata={"key": "budget.grid_res"})
    max_period: int = field(default=6, metadata={"key": "budget.max_period"})
    entropy_n: int = field(default=14, metadata={"key": "budget.entropy_n"})
    cover_resolution: int = field(default=0, metadata={"key": "cover.resolution"})
    cover_steps: int = field(default=30, metadata={"key": "cover.steps"})
    r: float = field(default=0.0, metadata={"key": "tongue.r"})
    b_min: float = field(default=0.01, metadata={"key": "tongue.b_min"})
    b_max: float = field(default=1.0, metadata={"key": "tongue.b_max"})
    omega_min: float = field(default=0.0, metadata={"key": "tongue.omega_min"})
    omega_max: float = field(default=0.25, metadata={"key": "tongue.omega_max"})
    res_b: int = field(default=100, metadata={"key": "tongue.res_b"})
    res_omega: int = field(default=100, metadata={"key": "tongue.res_omega"})
    seed: int | None = field(default=None, metadata={"key": "rng.seed"})
    out_dir: str = field(default="out", metadata={"key": "output.dir"})

    def param(self, t: float | None = None) -> FamilyParam:
        """Family member, with entry ``grid_index`` replaced by ``t`` if given."""
        values = list(self.params)
        if t is not None:
            values[self.grid_index] = t
        return FamilyParam(self.kind, tuple(values))

    def grid(self) -> np.ndarray:
        count = int(round((self.grid_stop - self.grid_start) / self.grid_step)) + 1
        return np.round(self.grid_start + self.grid_step * np.arange(count), 12)

    def validate(self) -> "ExperimentConfig":
        def bad(attr, msg):
            raise ConfigError(f"{_meta_key(attr)}: {msg} (got {getattr(self, attr)!r})")

        if self.name not in COMMANDS:
            bad("name", f"must be one of {', '.join(COMMANDS)}")
        if self.seed is None:
            bad("seed", "is mandatory")
        if not 0 <= self.seed <= MAX_SEED:
            bad("seed", "must be an unsigned 64-bit integer")
        try:
            self.param()
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"family.params: {exc}") from None
        for attr in ("delta", "eps"):
            if not 0.0 <= getattr(self, attr) < 0.25:
                bad(attr, "must lie in [0, 1/4)")
        for attr in ("seeds", "keep", "n", "grid_res", "max_period", "res_b", "res_omega",
                     "cover_steps"):
            if getattr(self, attr) < 1:
                bad(attr, "must be positive")
        if self.transient < 100:
            bad("transient", "must be at least 100")
        if not 4 <= self.entropy_n <= 20:
            bad("entropy_n", "must lie in [4, 20]")
        if self.max_period > 8:
            bad("max_period", "is capped at 8")
        if self.cover_resolution < 0 or self.cover_resolution > 4096:
            bad("cover_resolution", "must lie in [0, 4096] (0 disables the cover)")
        if self.grid_step <= 0.0 or self.grid_stop < self.grid_start:
            bad("grid_step", "grid needs step > 0 and stop >= start")
        if not 0 <= self.grid_index < len(self.params):
            bad("grid_index", "must index family.params")
        if not 0.0 <= self.b_min <= self.b_max <= B_STAR:
            bad("b_max", f"need 0 <= tongue.b_min <= tongue.b_max <= {B_STAR}")
        if not 0.0 <= self.omega_min <= self.omega_max <= 1.0:
            bad("omega_max", "need 0 <= tongue.omega_min <= tongue.omega_max <= 1")
        return self


def _meta_key(attr: str) -> str:
    return next(f.metadata["key"] for f in fields(ExperimentConfig) if f.name == attr)


_BY_KEY = {f.metadata["key"]: f for f in fields(ExperimentConfig)}


def _convert(f: dataclasses.Field, text: str):
    if "parse" in f.metadata:
        return f.metadata["parse"](text)
    kind = f.type if isinstance(f.type, str) else f.type.__name__
    if kind.startswith("int"):
        return int(text)
    if kind == "float":
        return float(text)
    return text


def apply_overrides(cfg: ExperimentConfig, items) -> ExperimentConfig:
    """Return a copy with ``key=value`` strings (or ``(key, value)`` pairs) applied."""
    changes = {}
    for item in items:
        key, value = item.split("=", 1) if isinstance(item, str) else item
        key, value = key.strip(), str(value).strip()
        if key not in _BY_KEY:
            raise ConfigError(f"{key}: unknown key")
        f = _BY_KEY[key]
        try:
            changes[f.name] = _convert(f, value)
        except ValueError:
            raise ConfigError(f"{key}: cannot parse {value!r}") from None
    return dataclasses.replace(cfg, **changes)


def parse_config(text: str, validate: bool = True, **defaults) -> ExperimentConfig:
    """Parse flat config text. ``defaults`` are field values applied first."""
    items = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        items.append(line)
    cfg = apply_overrides(ExperimentConfig(**defaults), items)
    return cfg.validate() if validate else cfg


def serialize_config(cfg: ExperimentConfig) -> str:
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if v is None:
            continue
        lines.append(f"{f.metadata['key']}={_fmt(v)}")
    return "\n".join(lines) + "\n"


def load_config(path, **defaults) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), validate=False, **defaults)
