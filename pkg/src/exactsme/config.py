"""Run configuration: JSON parsing with line and field diagnostics."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ConfigError, EstimationError
from .plant import System
from .tolerances import Tolerances

LAWS = ("uniform", "vertex")


@dataclass(frozen=True)
class SeededMeasurements:
    seed: int
    law: str = "uniform"


@dataclass(frozen=True)
class RunConfig:
    n: tuple[float, ...]
    d: tuple[float, ...]
    x0: tuple[float, ...]
    horizon: int
    measurements: tuple[float, ...] | SeededMeasurements
    bounds_check: bool = True
    oracle: bool = False
    sample_density: int = 64
    tolerances: Tolerances = field(default_factory=Tolerances)

    @property
    def seeded(self) -> bool:
        return isinstance(self.measurements, SeededMeasurements)

    def system(self) -> System:
        return System.from_coefficients(self.n, self.d)

    def with_overrides(self, oracle: bool | None = None, seed: int | None = None) -> "RunConfig":
        meas = self.measurements
        if seed is not None:
            if not self.seeded:
                raise ConfigError("--seed needs seeded measurements ({\"seed\": ..., \"law\": ...})")
            meas = SeededMeasurements(int(seed), meas.law)
        return RunConfig(self.n, self.d, self.x0, self.horizon, meas, self.bounds_check,
                         self.oracle if oracle is None else oracle, self.sample_density, self.tolerances)

    def to_dict(self) -> dict:
        meas: Any = ({"seed": self.measurements.seed, "law": self.measurements.law}
                     if self.seeded else list(self.measurements))
        return {
            "plant": {"n": list(self.n), "d": list(self.d)},
            "x0": list(self.x0),
            "horizon": self.horizon,
            "measurements": meas,
            "bounds_check": self.bounds_check,
            "oracle": "on" if self.oracle else "off",
            "sample_density": self.sample_density,
            "tolerances": {k: getattr(self.tolerances, k) for k in ("align", "feas", "opt", "geom", "cone_angle")},
        }


def _numbers(value, where: str) -> tuple[float, ...]:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"field '{where}': expected a nonempty list of numbers")
    out = []
    for i, item in enumerate(value):
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise ConfigError(f"field '{where}[{i}]': expected a number, got {item!r}")
        out.append(float(item))
    return tuple(out)


def _flag(value, where: str) -> bool:
    if isinstance(value, bool):
        return value
    if value in ("on", "off"):
        return value == "on"
    raise ConfigError(f"field '{where}': expected true/false or \"on\"/\"off\", got {value!r}")


def parse_config(data: Any, env_tolerances: Tolerances | None = None) -> RunConfig:
    """Validate a decoded JSON object. Environment tolerances apply before the file's own map."""
    if not isinstance(data, dict):
        raise ConfigError("top level: expected a JSON object")
    known = {"plant", "x0", "horizon", "measurements", "bounds_check", "oracle", "sample_density", "tolerances"}
    extra = sorted(set(data) - known)
    if extra:
        raise ConfigError(f"unknown field(s): {extra}")
    for key in ("plant", "x0", "horizon", "measurements"):
        if key not in data:
            raise ConfigError(f"field '{key}': missing")
    plant = data["plant"]
    if not isinstance(plant, dict) or set(plant) != {"n", "d"}:
        raise ConfigError("field 'plant': expected an object with keys 'n' and 'd'")
    n = _numbers(plant["n"], "plant.n")
    d = _numbers(plant["d"], "plant.d")
    x0 = _numbers(data["x0"], "x0")
    horizon = data["horizon"]
    if isinstance(horizon, bool) or not isinstance(horizon, int) or horizon < 1:
        raise ConfigError(f"field 'horizon': expected an integer >= 1, got {horizon!r}")
    meas = data["measurements"]
    if isinstance(meas, dict):
        if "seed" not in meas or set(meas) - {"seed", "law"}:
            raise ConfigError("field 'measurements': expected {\"seed\": int, \"law\": ...}")
        seed = meas["seed"]
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise ConfigError(f"field 'measurements.seed': expected a nonnegative integer, got {seed!r}")
        law = meas.get("law", "uniform")
        if law not in LAWS:
            raise ConfigError(f"field 'measurements.law': expected one of {list(LAWS)}, got {law!r}")
        measurements: tuple[float, ...] | SeededMeasurements = SeededMeasurements(seed, law)
    else:
        measurements = _numbers(meas, "measurements")
        if len(measurements) != horizon:
            raise ConfigError(f"field 'measurements': length {len(measurements)} differs from horizon {horizon}")
    density = data.get("sample_density", 64)
    if isinstance(density, bool) or not isinstance(density, int) or density < 0:
        raise ConfigError(f"field 'sample_density': expected an integer >= 0, got {density!r}")
    tol = env_tolerances if env_tolerances is not None else Tolerances.from_env()
    tol_map = data.get("tolerances", {})
    if not isinstance(tol_map, dict):
        raise ConfigError("field 'tolerances': expected an object")
    try:
        tol = tol.updated(tol_map)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"field 'tolerances': {exc}") from None
    cfg = RunConfig(n, d, x0, horizon, measurements,
                    _flag(data.get("bounds_check", True), "bounds_check"),
                    _flag(data.get("oracle", False), "oracle"), density, tol)
    try:
        sysm = cfg.system()
    except (EstimationError, ValueError) as exc:
        raise ConfigError(f"field 'plant': {exc}") from None
    if len(x0) != sysm.m:
        raise ConfigError(f"field 'x0': expected {sysm.m} entries for this plant, got {len(x0)}")
    if sysm.m > 2:
        raise ConfigError("field 'plant': runs support plant order m <= 2")
    return cfg


def load_config(path: str | Path, env_tolerances: Tolerances | None = None) -> RunConfig:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return parse_config(data, env_tolerances)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None
