"""Experiment configuration files (JSON)."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from .engine import TdConfig
from .experiment import METHODS
from .predictor import PredictorConfig
from .simulator import ScenarioConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    td: TdConfig = field(default_factory=TdConfig)
    predictor: PredictorConfig = field(default_factory=PredictorConfig)
    methods: tuple[str, ...] = METHODS
    repetitions: int = 6
    lam: float = 0.3
    output: str = "out"

    def __post_init__(self):
        if not self.methods:
            raise ConfigError("methods: must not be empty")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ConfigError(f"methods: unknown {bad}; expected a subset of {list(METHODS)}")
        if self.repetitions < 1:
            raise ConfigError("repetitions: must be >= 1")
        if not self.lam > 0:
            raise ConfigError("lam: must be > 0")

    @property
    def seeds(self) -> list[int]:
        return [self.scenario.seed + i for i in range(self.repetitions)]

    def to_dict(self) -> dict:
        return {
            "scenario": dataclasses.asdict(self.scenario),
            "td": dataclasses.asdict(self.td),
            "predictor": dataclasses.asdict(self.predictor),
            "methods": list(self.methods),
            "repetitions": self.repetitions,
            "lam": self.lam,
            "output": self.output,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _build(cls, section: str, data) -> object:
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"{section}: expected an object")
    names = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(names))
    if unknown:
        raise ConfigError(f"{section}: unknown field(s) {unknown}")
    for key, value in data.items():
        default = names[key].default
        if isinstance(default, bool) and not isinstance(value, bool):
            raise ConfigError(f"{section}.{key}: expected true/false")
        if isinstance(default, int) and not isinstance(default, bool) and not (
                isinstance(value, int) and not isinstance(value, bool)):
            raise ConfigError(f"{section}.{key}: expected an integer")
        if isinstance(default, float) and not (isinstance(value, (int, float)) and not isinstance(value, bool)):
            raise ConfigError(f"{section}.{key}: expected a number")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{section}: {exc}") from None


def from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("top level: expected an object")
    allowed = {"scenario", "td", "predictor", "methods", "repetitions", "lam", "output"}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown top-level field(s) {unknown}")
    kw = {}
    if "methods" in data:
        methods = data["methods"]
        if isinstance(methods, str):
            methods = [m.strip() for m in methods.split(",") if m.strip()]
        if not isinstance(methods, list) or not all(isinstance(m, str) for m in methods):
            raise ConfigError("methods: expected a list of names")
        kw["methods"] = tuple(methods)
    if "repetitions" in data:
        if not isinstance(data["repetitions"], int) or isinstance(data["repetitions"], bool):
            raise ConfigError("repetitions: expected an integer")
        kw["repetitions"] = data["repetitions"]
    if "lam" in data:
        if not isinstance(data["lam"], (int, float)) or isinstance(data["lam"], bool):
            raise ConfigError("lam: expected a number")
        kw["lam"] = float(data["lam"])
    if "output" in data:
        kw["output"] = str(data["output"])
    return ExperimentConfig(
        scenario=_build(ScenarioConfig, "scenario", data.get("scenario")),
        td=_build(TdConfig, "td", data.get("td")),
        predictor=_build(PredictorConfig, "predictor", data.get("predictor")),
        **kw,
    )


def load(path) -> ExperimentConfig:
    """Parse and validate a config file; raises :class:`ConfigError` on bad content."""
    with open(path) as fh:
        text = fh.read()
    try:
        data = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"not valid JSON: {exc}") from None
    return from_dict(data)
