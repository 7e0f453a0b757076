"""Run configuration with strict JSON round-tripping."""

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .exceptions import InvalidConfigError

SUBCOMMANDS = ("sample", "eval", "variance", "covariance", "highpoints", "fit", "energy",
               "events", "conformal", "check-estimates", "holder", "liouville", "run")


@dataclass
class RunConfig:
    """Every tunable of every subcommand; each run echoes it into its report."""

    subcommand: str = "run"
    seed: int = 0
    trials: int = 1000
    seeds: int = 20
    steps: int = 1000
    workers: int | None = None
    mode: str = "spectral"
    cutoff: int = 256
    grid: list = field(default_factory=lambda: [64, 128, 256, 512])
    points: list = field(default_factory=lambda: [[0.5, 0.5]])
    radii: list = field(default_factory=lambda: [0.05, 0.02, 0.01])
    region: str = "disk"
    a: list = field(default_factory=lambda: [1.0])
    m: list = field(default_factory=lambda: [2, 5, 10])
    event: str = "perfect"
    horizons: list = field(default_factory=lambda: [5.0, 10.0, 20.0])
    alpha: float | None = None
    gamma: float = 1.0
    pairs: int = 1000
    r_min: float = 0.01
    region_center: list = field(default_factory=lambda: [0.5, 0.5])
    region_side: float = 0.2
    map: str = "moebius:c=0.2"
    resolution: int = 4096
    threshold_coef: float = 1 / math.sqrt(math.pi)
    checks: list = field(default_factory=lambda: ["variance", "covariance", "check-estimates"])
    field_path: str | None = None
    input: str | None = None
    out: str | None = None
    csv: str | None = None
    json: str | None = None
    svg: str | None = None

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise InvalidConfigError(f"unknown subcommand {self.subcommand!r}")

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise InvalidConfigError("a config must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InvalidConfigError(f"unknown config keys: {unknown}")
        return cls(**data)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidConfigError(f"config is not valid JSON: {exc}") from None
        return cls.from_dict(data)

    @classmethod
    def load(cls, path):
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise InvalidConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_json(text)

    def dump(self, path):
        Path(path).write_text(self.to_json() + "\n")
