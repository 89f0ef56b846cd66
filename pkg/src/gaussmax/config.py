"""Experiment configuration: a YAML document with one key per field.

A file written by ``save_config`` is in canonical form: loading and saving
it again reproduces the same bytes. Run manifests embed the same mapping
under ``config``, so a manifest can be loaded as a config to replay a run.

Example::

    command: concentration
    model:
      kind: powerlaw
      gamma: 1.0
      c: 1.0
    p_grid:
    - 4096
    - 65536
    delta_schedule:
      name: capstone_auto
      c: 5.0
    reps: 1000
    seed: 7
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

import yaml

from .errors import ConfigError

__all__ = [
    "COMMANDS",
    "OUTPUT_ENV",
    "ExperimentConfig",
    "load_config",
    "save_config",
    "config_to_text",
    "config_from_text",
    "default_output_dir",
]

COMMANDS = (
    "constants",
    "packing",
    "rate-bound",
    "concentration",
    "phase-diagram",
    "gumbel-check",
    "conjecture-probe",
)
OUTPUT_ENV = "GAUSSMAX_OUTPUT_DIR"

_DEFAULT_REPS = {
    "concentration": 1000,
    "phase-diagram": 100,
    "gumbel-check": 5000,
    "conjecture-probe": 1000,
}


def default_output_dir() -> str:
    return os.environ.get(OUTPUT_ENV, "gaussmax-out")


@dataclass
class ExperimentConfig:
    """Everything that determines the output of one run.

    Worker count is deliberately absent: it changes wall time only.
    """

    command: str
    model: dict = field(default_factory=lambda: {"kind": "iid"})
    transform: dict = field(default_factory=lambda: {"kind": "identity"})
    p_grid: list = field(default_factory=list)
    tau: Optional[float] = None
    delta_schedule: dict = field(default_factory=lambda: {"name": "c_over_logp", "c": 1.0})
    norm_kind: str = "u_p"
    reps: Optional[int] = None
    seed: int = 0
    beta_grid: list = field(default_factory=list)
    r_grid: list = field(default_factory=list)
    r_relative: bool = False
    threshold: dict = field(default_factory=lambda: {"rule": "bonferroni", "alpha": 0.01})
    c_grid: list = field(default_factory=list)
    output_dir: str = field(default_factory=default_output_dir)
    svg: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}; expected one of {', '.join(COMMANDS)}")
        try:
            self.p_grid = [int(p) for p in self.p_grid]
            self.beta_grid = [float(b) for b in self.beta_grid]
            self.r_grid = [float(r) for r in self.r_grid]
            self.c_grid = [float(c) for c in self.c_grid]
            self.tau = None if self.tau is None else float(self.tau)
            self.seed = int(self.seed)
            if self.reps is None:
                self.reps = _DEFAULT_REPS.get(self.command)
            else:
                self.reps = int(self.reps)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad field value: {exc}") from None
        for name in ("model", "transform", "delta_schedule", "threshold"):
            if not isinstance(getattr(self, name), dict):
                raise ConfigError(f"field {name!r} must be a mapping")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a mapping of field names to values")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown field {unknown[0]!r}")
        if "command" not in data:
            raise ConfigError("missing required field 'command'")
        return cls(**data)


def config_to_text(config: ExperimentConfig) -> str:
    return yaml.safe_dump(config.to_dict(), sort_keys=False, default_flow_style=False, width=1 << 16)


def config_from_text(text: str) -> ExperimentConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(f"malformed config: {exc.problem or exc}", line=line) from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    if isinstance(data, dict) and "config" in data and "schema_version" in data:
        data = data["config"]  # a run manifest
    return ExperimentConfig.from_dict(data)


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return config_from_text(text)


def save_config(config: ExperimentConfig, path) -> None:
    Path(path).write_text(config_to_text(config))
