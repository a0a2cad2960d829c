"""Runtime configuration with flags > environment > config file > defaults."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Mapping

ENV_PREFIX = "CCTV_"


class ConfigError(ValueError):
    pass


@dataclass
class AppConfig:
    registry_path: Path = Path("cameras.geojson")
    graph_path: Path = Path("graph.json")
    listen_port: int = 8080
    lambda_: float = 10.0
    beta: float = 0.7
    camera_penalty_m: float = 50.0
    sample_interval_m: float = 1.0
    cluster_eps_m: float = 8.0
    validate_radius_m: float = 15.0


# config-file / environment key for each field ("lambda_" sheds its underscore)
_KEYS = {
    "registry_path": "registry_path",
    "graph_path": "graph_path",
    "listen_port": "listen_port",
    "lambda_": "lambda",
    "beta": "beta",
    "camera_penalty_m": "camera_penalty_m",
    "sample_interval_m": "sample_interval_m",
    "cluster_eps_m": "cluster_eps_m",
    "validate_radius_m": "validate_radius_m",
}


def _coerce(field_name: str, value, kind):
    try:
        if kind is Path:
            return Path(value)
        return kind(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{_KEYS[field_name]}: {exc}") from exc


def load_config(
    flags: Mapping | None = None,
    env: Mapping[str, str] | None = None,
    config_path: str | Path | None = None,
) -> AppConfig:
    """Assemble the configuration. flags holds already-typed values keyed by
    field name (None entries are skipped); env supplies CCTV_* strings."""
    flags = flags or {}
    env = os.environ if env is None else env

    if config_path is None and env.get(ENV_PREFIX + "CONFIG"):
        config_path = env[ENV_PREFIX + "CONFIG"]
    file_values: dict = {}
    if config_path is not None:
        try:
            file_values = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"config file {config_path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {config_path}: invalid JSON ({exc})") from exc
        if not isinstance(file_values, dict):
            raise ConfigError(f"config file {config_path}: expected a JSON object")

    config = AppConfig()
    for f in fields(AppConfig):
        key = _KEYS[f.name]
        kind = Path if f.name.endswith("_path") else type(getattr(config, f.name))
        if key in file_values:
            setattr(config, f.name, _coerce(f.name, file_values[key], kind))
        env_key = ENV_PREFIX + key.upper()
        if env.get(env_key):
            setattr(config, f.name, _coerce(f.name, env[env_key], kind))
        if flags.get(f.name) is not None:
            setattr(config, f.name, _coerce(f.name, flags[f.name], kind))
    return config
