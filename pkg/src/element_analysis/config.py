"""Run configuration with layered resolution: defaults <- file <- flags."""

from __future__ import annotations

import dataclasses
import json
import re
from dataclasses import dataclass, fields
from pathlib import Path

from .preprocess import FilterSpec
from .theory import ElementParams

DAYS_PER_UNIT = {"d": 1.0, "w": 7.0, "m": 365.25 / 12, "y": 365.25}
NOISE_METHODS = ("monte-carlo", "analytic-white")


def parse_period(value) -> float:
    """Period in days from a number or a string such as ``"8d"``, ``"3m"``, ``"0.25y"``."""
    if isinstance(value, (int, float)):
        return float(value)
    m = re.fullmatch(r"\s*([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*([dwmy]?)\s*", str(value))
    if not m:
        raise ValueError(f"cannot parse period {value!r}; use a number with optional suffix d, w, m or y")
    return float(m.group(1)) * DAYS_PER_UNIT.get(m.group(2) or "d")


@dataclass(frozen=True)
class AnalysisConfig:
    """Every tunable of an analysis run.

    Periods and ``dt`` are in days (the time unit of dated input). The
    defaults are the usual daily-data choices: beta = 3, gamma = 1, an order-3
    high-pass at a one-third-year period.
    """

    beta: float = 3.0
    gamma: float = 1.0
    mu: float = 3.0
    min_period: float = 8.0
    max_period: float = 128.0
    voxels_per_octave: int = 16
    alpha: float = 0.05
    noise_method: str = "monte-carlo"
    mc_trials: int = 200
    cutoff_period: float = 365.25 / 3
    filter_order: int = 3
    apply_filter: bool = True
    seed: int = 42
    dt: float = 1.0
    max_gap: float = 5.0
    decay_multiplier: float = 2.0
    date_column: str | None = None
    value_column: str | None = None

    def __post_init__(self):
        for name in ("min_period", "max_period", "cutoff_period"):
            object.__setattr__(self, name, parse_period(getattr(self, name)))
        self.validate()

    def validate(self) -> None:
        def bad(field, why):
            raise ValueError(f"invalid config field {field!r}: {why} (got {getattr(self, field)!r})")

        for name in ("beta", "gamma", "mu", "dt", "max_gap", "decay_multiplier"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and v > 0):
                bad(name, "must be a positive number")
        if not self.min_period >= 2 * self.dt:
            bad("min_period", "must span at least two samples")
        if not self.max_period > self.min_period:
            bad("max_period", "must exceed min_period")
        if not (isinstance(self.voxels_per_octave, int) and self.voxels_per_octave >= 4):
            bad("voxels_per_octave", "must be an integer >= 4")
        if not 0 < self.alpha < 1:
            bad("alpha", "must lie in (0, 1)")
        if self.noise_method not in NOISE_METHODS:
            bad("noise_method", f"must be one of {NOISE_METHODS}")
        if not (isinstance(self.mc_trials, int) and self.mc_trials >= 20):
            bad("mc_trials", "must be an integer >= 20")
        if not (isinstance(self.filter_order, int) and self.filter_order >= 1):
            bad("filter_order", "must be a positive integer")
        if self.apply_filter and not self.cutoff_period > 2 * self.dt:
            bad("cutoff_period", "must be longer than two samples (below Nyquist)")
        if not isinstance(self.seed, int):
            bad("seed", "must be an integer")

    @property
    def element_params(self) -> ElementParams:
        return ElementParams(self.beta, self.mu, self.gamma)

    @property
    def filter(self) -> FilterSpec | None:
        if not self.apply_filter:
            return None
        return FilterSpec.from_period(self.cutoff_period, self.filter_order)

    def warnings(self) -> list[str]:
        out = []
        if self.gamma > 3:
            out.append(f"gamma={self.gamma:g} > 3 favours sidelobe maxima")
        if self.beta < 1:
            out.append(f"beta={self.beta:g} < 1 favours sidelobe maxima")
        return out

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def load_config(path: str | Path | None = None, **overrides) -> AnalysisConfig:
    """Resolve a configuration.

    Built-in defaults are updated from the JSON file at ``path`` and then
    from ``overrides``; overrides equal to ``None`` are ignored.
    """
    known = {f.name for f in fields(AnalysisConfig)}
    values: dict = {}
    if path is not None:
        data = json.loads(Path(path).read_text())
        if not isinstance(data, dict):
            raise ValueError(f"config file {path} must hold a JSON object")
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config field(s) in {path}: {', '.join(sorted(unknown))}")
        values.update(data)
    for key, value in overrides.items():
        if key not in known:
            raise ValueError(f"unknown config field {key!r}")
        if value is not None:
            values[key] = value
    return AnalysisConfig(**values)
