"""Experiment configuration, read from and written to YAML.

Example::

    datasets: [BasicMotions, /data/ERing]
    classifiers:
      - name: DTW_D
      - name: gRSF
        params: {n_estimators: 50}
        seed: 3
    resample_seed: 0
    normalise: false
    time_budget: 2h
    memory_budget: 8GB
    output_dir: runs
    workers: 2
"""

from __future__ import annotations

import re
from dataclasses import asdict, dataclass, field

import yaml

from ..budget import parse_duration

__all__ = ["ConfigError", "ClassifierSpec", "ExperimentConfig", "parse_size"]


class ConfigError(ValueError):
    pass


_SIZE = re.compile(r"^\s*([0-9.]+)\s*([kmgt]?)i?b?\s*$", re.IGNORECASE)


def parse_size(text):
    """Parse ``"512MB"``, ``"4GB"`` or a plain byte count; ``None`` means unlimited."""
    if text is None or (isinstance(text, str) and text.strip().lower() in ("", "none", "inf")):
        return None
    if isinstance(text, (int, float)):
        return int(text)
    m = _SIZE.match(str(text))
    if not m:
        raise ConfigError(f"cannot parse memory size {text!r}")
    scale = {"": 1, "k": 2**10, "m": 2**20, "g": 2**30, "t": 2**40}[m.group(2).lower()]
    return int(float(m.group(1)) * scale)


@dataclass(frozen=True)
class ClassifierSpec:
    name: str
    params: dict = field(default_factory=dict)
    seed: int = 0


@dataclass(frozen=True)
class ExperimentConfig:
    datasets: tuple
    classifiers: tuple
    resample_seed: int = 0
    normalise: bool = False
    time_budget: str | None = None
    memory_budget: str | None = None
    output_dir: str = "runs"
    workers: int = 1

    def __post_init__(self):
        if not self.datasets:
            raise ConfigError("no datasets configured")
        if not self.classifiers:
            raise ConfigError("no classifiers configured")
        try:
            parse_duration(self.time_budget)
        except ValueError as exc:
            raise ConfigError(f"bad time budget {self.time_budget!r}") from exc
        parse_size(self.memory_budget)
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")

    @property
    def time_budget_seconds(self):
        return parse_duration(self.time_budget)

    @property
    def memory_budget_bytes(self):
        return parse_size(self.memory_budget)

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ConfigError("config must be a mapping")
        unknown = set(d) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        specs = []
        for c in d.get("classifiers") or ():
            if isinstance(c, str):
                c = {"name": c}
            if not isinstance(c, dict) or "name" not in c:
                raise ConfigError(f"bad classifier entry {c!r}")
            extra = set(c) - {"name", "params", "seed"}
            if extra:
                raise ConfigError(f"unknown classifier keys {sorted(extra)}")
            specs.append(ClassifierSpec(str(c["name"]), dict(c.get("params") or {}), int(c.get("seed", 0))))
        datasets = d.get("datasets") or ()
        if isinstance(datasets, str):
            datasets = [datasets]
        kwargs = {k: d[k] for k in ("resample_seed", "normalise", "time_budget", "memory_budget",
                                    "output_dir", "workers") if k in d}
        for k in ("time_budget", "memory_budget"):
            if kwargs.get(k) is not None:
                kwargs[k] = str(kwargs[k])
        return cls(tuple(str(p) for p in datasets), tuple(specs), **kwargs)

    @classmethod
    def from_yaml(cls, text):
        try:
            return cls.from_dict(yaml.safe_load(text))
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML: {exc}") from exc

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                return cls.from_yaml(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc

    def to_dict(self):
        d = asdict(self)
        d["datasets"] = list(self.datasets)
        d["classifiers"] = [asdict(c) for c in self.classifiers]
        return d

    def to_yaml(self):
        return yaml.safe_dump(self.to_dict(), sort_keys=False)
