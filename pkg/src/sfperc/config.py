"""Experiment configuration: sectioned key-value files with per-key overrides."""

from __future__ import annotations

import configparser
import dataclasses
import math
import os
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, InvalidParameterError
from .graphgen import ModelParams
from .pointprocess import BoxGeometry, Topology
from .seeds import derive_seed
from .weights import WeightLaw

OUT_ENV = "SFPERC_OUT"
ESTIMATORS = ("degrees", "tail", "cc", "palm-cc", "components")
LAWS = ("pareto", "constant", "log_power")
ENGINES = ("cell", "naive")
FORMATS = ("json", "csv")


@dataclass(frozen=True)
class Key:
    section: str
    name: str
    kind: type
    default: object
    help: str
    choices: tuple | None = None


# every key is also a command-line flag of the same name
KEYS = (
    Key("model", "d", int, 2, "spatial dimension"),
    Key("model", "alpha", float, 4.0, "distance exponent alpha"),
    Key("model", "intensity", float, 1.0, "Poisson intensity lambda"),
    Key("model", "law", str, "pareto", "weight law", LAWS),
    Key("model", "tau", float, 2.5, "weight tail exponent tau"),
    Key("model", "c", float, 1.0, "slowly varying constant"),
    Key("model", "a", float, 0.0, "log-power exponent of the slowly varying factor"),
    Key("geometry", "side", float, 64.0, "box side n"),
    Key("geometry", "topology", str, "torus", "box topology", ("torus", "free")),
    Key("estimators", "run", str, "degrees,tail,cc", "comma-separated estimators: " + ", ".join(ESTIMATORS)),
    Key("estimators", "hill_k", int, 0, "Hill order statistics (0: floor(sqrt(N)))"),
    Key("estimators", "m", float, 16.0, "truncation box side m"),
    Key("estimators", "delta", float, 0.1, "truncation frame fraction delta"),
    Key("estimators", "replicas", int, 100, "Palm replicas"),
    Key("estimators", "ci_level", float, 0.95, "Palm confidence level"),
    Key("run", "seed", int, 0, "master seed"),
    Key("run", "out", str, "", f"output directory (default: ${OUT_ENV} or ./sfperc-out)"),
    Key("run", "threads", int, 1, "worker threads (speed only)"),
    Key("run", "format", str, "json", "table format", FORMATS),
    Key("run", "engine", str, "cell", "graph engine", ENGINES),
)
KEY_BY_NAME = {k.name: k for k in KEYS}


@dataclass(frozen=True)
class ExperimentConfig:
    d: int = 2
    alpha: float = 4.0
    intensity: float = 1.0
    law: str = "pareto"
    tau: float = 2.5
    c: float = 1.0
    a: float = 0.0
    side: float = 64.0
    topology: str = "torus"
    run: tuple = ("degrees", "tail", "cc")
    hill_k: int = 0
    m: float = 16.0
    delta: float = 0.1
    replicas: int = 100
    ci_level: float = 0.95
    seed: int = 0
    out: str = ""
    threads: int = 1
    format: str = "json"
    engine: str = "cell"

    def __post_init__(self):
        run = self.run
        if isinstance(run, str):
            run = tuple(s.strip() for s in run.split(",") if s.strip())
        object.__setattr__(self, "run", tuple(run))
        for name in self.run:
            if name not in ESTIMATORS:
                raise ConfigError(f"unknown estimator {name!r}; choose from {', '.join(ESTIMATORS)}")
        for key in KEYS:
            if key.choices and getattr(self, key.name) not in key.choices:
                raise ConfigError(f"{key.name} must be one of {', '.join(key.choices)}")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")
        if self.replicas < 2:
            raise ConfigError("replicas must be at least 2")
        if self.hill_k < 0:
            raise ConfigError("hill_k must be non-negative")
        try:
            self.model
            self.geometry
        except InvalidParameterError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def weight_law(self) -> WeightLaw:
        if self.law == "pareto":
            return WeightLaw.pareto(self.tau)
        if self.law == "constant":
            return WeightLaw.constant(self.tau, self.c)
        return WeightLaw.log_power(self.tau, self.a, self.c)

    @property
    def model(self) -> ModelParams:
        return ModelParams(self.d, self.alpha, self.weight_law, self.intensity)

    @property
    def geometry(self) -> BoxGeometry:
        return BoxGeometry(self.d, self.side, Topology(self.topology))

    def out_dir(self) -> Path:
        return Path(self.out or os.environ.get(OUT_ENV) or "sfperc-out")

    def derived_seed(self, stage: str, index: int = 0) -> int:
        return derive_seed(self.seed, stage, index)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        out = {k.name: getattr(self, k.name) for k in KEYS}
        out["run"] = ",".join(self.run)
        return out

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        for key in KEYS:
            if not cp.has_section(key.section):
                cp.add_section(key.section)
            cp.set(key.section, key.name, _format_value(self.to_dict()[key.name]))
        lines = []
        for section in cp.sections():
            lines.append(f"[{section}]")
            lines.extend(f"{k} = {v}" for k, v in cp.items(section))
            lines.append("")
        return "\n".join(lines)

    def write(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_ini())
        return path


def _format_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse_value(key: Key, raw: str):
    raw = raw.strip()
    try:
        if key.kind is int:
            return int(raw)
        if key.kind is float:
            val = float(raw)
            if math.isnan(val):
                raise ValueError("nan")
            return val
    except ValueError as exc:
        raise ConfigError(f"{key.section}.{key.name}: cannot parse {raw!r} as {key.kind.__name__}") from exc
    return raw


def parse_ini(text: str) -> dict:
    """Key-value pairs of a config file; unknown sections or keys are errors."""
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    values = {}
    for section in cp.sections():
        for name, raw in cp.items(section):
            key = KEY_BY_NAME.get(name)
            if key is None or key.section != section:
                raise ConfigError(f"unknown key {section}.{name}")
            values[name] = _parse_value(key, raw)
    return values


def load_config(path=None, overrides: dict | None = None) -> ExperimentConfig:
    """Defaults, then the file at ``path``, then non-``None`` ``overrides``."""
    values = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        values.update(parse_ini(text))
    for name, v in (overrides or {}).items():
        if v is None:
            continue
        if name not in KEY_BY_NAME:
            raise ConfigError(f"unknown key {name}")
        values[name] = _parse_value(KEY_BY_NAME[name], str(v)) if isinstance(v, str) else v
    return ExperimentConfig(**values)


def config_from_string(text: str) -> ExperimentConfig:
    return ExperimentConfig(**parse_ini(text))
