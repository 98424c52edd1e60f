"""Flat ``key = value`` experiment configuration.

Blank lines and ``#`` comments are ignored. Every key must be a field of
:class:`ExperimentConfig`; list-valued keys take comma-separated values.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path

METHODS = ("ce", "ls", "gce", "fd", "fd_est", "al")
SMOOTHING = ("none", "power", "linear", "temperature")
NOISE = ("uniform", "asymmetric", "none")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    label: str = ""
    method: str = "ce"
    smoothing: str = "none"
    smoothing_param: float = 1.0
    label_smoothing: float = 0.0
    gce_q: float = 0.7
    # data
    classes: int = 10
    n_per_class: int = 1000
    test_per_class: int = 200
    dim: int = 20
    separation: float = 3.0
    cluster_std: float = 1.0
    data_seed: int = 0
    dataset_file: str = ""
    test_fraction: float = 0.2
    # noise
    noise: str = "uniform"
    eta: float = 0.4
    pair_map: tuple[int, ...] = ()
    # model and optimiser
    hidden: tuple[int, ...] = (128, 128)
    epochs: int = 60
    milestones: tuple[int, ...] = (30, 50)
    lr: float = 0.05
    momentum: float = 0.9
    weight_decay: float = 1e-4
    batch_size: int = 128
    seeds: tuple[int, ...] = (0,)
    # estimation
    al_warmup: int = 15
    al_lr: float = 0.0
    al_kappa: float = 6.0
    al_jitter: float = 0.01
    estimator_percentile: float = 100.0
    # selection and output
    val_fraction: float = 0.2
    output_dir: str = "out"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.smoothing not in SMOOTHING:
            raise ConfigError(f"smoothing must be one of {SMOOTHING}, got {self.smoothing!r}")
        if self.smoothing != "none" and self.method not in ("fd", "fd_est", "al"):
            raise ConfigError(f"matrix smoothing needs a transition-matrix method, not {self.method!r}")
        if self.noise not in NOISE:
            raise ConfigError(f"noise must be one of {NOISE}, got {self.noise!r}")
        if self.method == "ls" and not 0 < self.label_smoothing < 1:
            raise ConfigError("method 'ls' needs label_smoothing in (0, 1)")
        if not 0 <= self.eta < 1:
            raise ConfigError(f"eta must lie in [0, 1), got {self.eta}")
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigError("epochs and batch_size must be positive")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if self.dataset_file and not Path(self.dataset_file).exists():
            raise ConfigError(f"dataset_file does not exist: {self.dataset_file}")
        if not 0 < self.val_fraction < 1:
            raise ConfigError("val_fraction must lie in (0, 1)")
        if not 0 < self.estimator_percentile <= 100:
            raise ConfigError("estimator_percentile must lie in (0, 100]")

    @property
    def matrix_lr(self) -> float:
        return self.al_lr if self.al_lr > 0 else self.lr

    @property
    def method_label(self) -> str:
        if self.label:
            return self.label
        base = {"ce": "CE", "ls": "LS", "gce": "GCE", "fd": "FD", "fd_est": "FD_est", "al": "AL"}[self.method]
        if self.method == "fd" and self.label_smoothing > 0:
            base += "+LS"
        suffix = {"none": "", "power": "+MS", "linear": "+L", "temperature": "+T"}[self.smoothing]
        return base + suffix

    def replace(self, **overrides) -> "ExperimentConfig":
        return dataclasses.replace(self, **overrides)

    def echo(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(str(x) for x in v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


_FIELDS = {f.name: f for f in fields(ExperimentConfig)}


def _convert(key: str, raw: str):
    kind = _FIELDS[key].type
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind.startswith("tuple"):
            return tuple(int(v) for v in raw.split(",") if v.strip())
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def parse_overrides(pairs: dict[str, str]) -> dict:
    out = {}
    for key, raw in pairs.items():
        if key not in _FIELDS:
            raise ConfigError(f"unknown config key {key!r}")
        out[key] = _convert(key, raw)
    return out


def _key_values(text: str, source: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{n}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in pairs:
            raise ConfigError(f"{source}:{n}: duplicate key {key!r}")
        pairs[key] = value
    return pairs


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    return ExperimentConfig(**parse_overrides(_key_values(text, source)))


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text(encoding="utf-8"), str(path))


@dataclass
class Grid:
    """Sweep definition: named variants crossed with axes of alternative values."""

    axes: dict[str, list[str]] = field(default_factory=dict)
    variants: list[tuple[str, dict[str, str]]] = field(default_factory=list)

    def cells(self, base: ExperimentConfig) -> list[ExperimentConfig]:
        import itertools

        variants = self.variants or [("", {})]
        keys = list(self.axes)
        out = []
        for name, overrides in variants:
            for combo in itertools.product(*(self.axes[k] for k in keys)):
                pairs = dict(overrides)
                pairs.update(zip(keys, combo))
                if name:
                    pairs["label"] = name
                out.append(base.replace(**parse_overrides(pairs)))
        return out


def parse_grid(text: str, source: str = "<grid>") -> Grid:
    """Grid syntax.

    ``key = a | b | c`` adds an axis; ``+ NAME: key=value key=value`` adds a
    variant. Cells are every variant crossed with every axis combination.
    """
    grid = Grid()
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("+"):
            name, _, rest = line[1:].partition(":")
            overrides = {}
            for token in rest.split():
                if "=" not in token:
                    raise ConfigError(f"{source}:{n}: variant entries must be key=value, got {token!r}")
                k, v = token.split("=", 1)
                if k not in _FIELDS:
                    raise ConfigError(f"{source}:{n}: unknown config key {k!r}")
                overrides[k] = v
            grid.variants.append((name.strip(), overrides))
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{n}: expected 'key = a | b' or '+ name: key=value ...'")
        key, values = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"{source}:{n}: unknown config key {key!r}")
        grid.axes[key] = [v.strip() for v in values.split("|") if v.strip()]
    return grid


def load_grid(path) -> Grid:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"grid file not found: {path}")
    return parse_grid(path.read_text(encoding="utf-8"), str(path))
