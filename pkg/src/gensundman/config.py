"""Run configuration: flat ``key = value`` files, environment, flag overrides."""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Mapping, Optional

from .symcore import ZeroTestConfig

ENV_VAR = "SUNDMAN_CONFIG"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Config:
    x_min: float = 0.3
    x_max: float = 2.7
    y_min: float = 0.3
    y_max: float = 2.7
    eps_abs: float = 1e-9
    eps_rel: float = 1e-9
    reject: float = 1e-6
    samples: int = 32
    min_valid: int = 8
    seed: int = 20100615
    h: Optional[float] = None  # None: 1e-3 of the span
    span: float = 1.0
    x0: Optional[float] = None  # reference abscissa for F; None: box center
    format: str = "human"

    def __post_init__(self):
        if not self.x_max > self.x_min or not self.y_max > self.y_min:
            raise ConfigError("sampling intervals must be nonempty")
        if self.eps_abs > self.reject:
            raise ConfigError("eps_abs must not exceed reject")
        if self.samples < 1 or self.min_valid < 1:
            raise ConfigError("samples and min_valid must be positive")
        if self.h is not None and self.h <= 0:
            raise ConfigError("h must be positive")
        if self.format not in ("human", "json"):
            raise ConfigError("format must be 'human' or 'json'")

    def zero_test(self) -> ZeroTestConfig:
        return ZeroTestConfig(
            box={"x": (self.x_min, self.x_max), "y": (self.y_min, self.y_max)},
            eps_abs=self.eps_abs,
            eps_rel=self.eps_rel,
            reject=self.reject,
            samples=self.samples,
            min_valid=self.min_valid,
            seed=self.seed,
        )

    def to_text(self) -> str:
        lines = []
        for k, v in asdict(self).items():
            lines.append(f"{k} = {'none' if v is None else v}")
        return "\n".join(lines) + "\n"


_TYPES = {f.name: f.type for f in fields(Config)}


def _coerce(key: str, raw: str):
    if key not in _TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    raw = raw.strip()
    kind = _TYPES[key]
    if "Optional" in str(kind) and raw.lower() in ("none", ""):
        return None
    try:
        if "int" in str(kind):
            return int(raw)
        if "float" in str(kind):
            return float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None
    return raw


def parse_config_text(text: str, source: str = "<config>") -> dict:
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{n}: expected key = value")
        k, v = line.split("=", 1)
        k = k.strip().replace("-", "_")
        out[k] = _coerce(k, v)
    return out


def load_config(path: Optional[str] = None, overrides: Optional[Mapping[str, object]] = None,
                environ: Optional[Mapping[str, str]] = None) -> Config:
    """Defaults, then the file (``path`` or $SUNDMAN_CONFIG), then ``overrides``."""
    environ = os.environ if environ is None else environ
    path = path or environ.get(ENV_VAR) or None
    values = {}
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                values.update(parse_config_text(fh.read(), path))
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    for k, v in (overrides or {}).items():
        if v is not None:
            values[k] = v
    try:
        return replace(Config(), **values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
