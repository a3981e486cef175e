"""Service configuration: JSON file, environment overrides, defaults.

Precedence, lowest to highest: built-in defaults, config file, environment
variables. Environment variables: KGSERVE_LISTEN, KGSERVE_DATA_DIR,
KGSERVE_FSYNC, KGSERVE_KNOWN_FUNCTIONS (comma separated).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .descriptors import DEFAULT_KNOWN_FUNCTIONS

DEFAULT_LISTEN = "127.0.0.1:8000"

ENV_PREFIX = "KGSERVE_"

CONFIG_KEYS = ("listen", "data_dir", "fsync", "known_functions")


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class ServiceConfig:
    listen: str = DEFAULT_LISTEN
    data_dir: Path | None = None
    fsync: bool = False
    known_functions: frozenset[str] = field(default=DEFAULT_KNOWN_FUNCTIONS)

    @property
    def host(self) -> str:
        return self.listen.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen.rsplit(":", 1)[1])

    @property
    def schema_base(self) -> str:
        return f"http://{self.listen}/schemas/"


def _coerce(raw: dict[str, Any]) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for key, value in raw.items():
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        if key == "listen":
            if not isinstance(value, str) or ":" not in value:
                raise ConfigError("listen must be a host:port string")
            out[key] = value
        elif key == "data_dir":
            out[key] = None if value is None else Path(value)
        elif key == "fsync":
            if isinstance(value, bool):
                out[key] = value
            elif value in ("always", "never"):
                out[key] = value == "always"
            else:
                raise ConfigError("fsync must be \"always\" or \"never\"")
        elif key == "known_functions":
            if isinstance(value, str):
                names = [v.strip() for v in value.split(",") if v.strip()]
            elif isinstance(value, list) and all(isinstance(v, str) for v in value):
                names = value
            else:
                raise ConfigError("known_functions must be a list of names")
            out[key] = frozenset(names)
    return out


def load_config(path: Path | str | None = None,
                env: dict[str, str] | None = None) -> ServiceConfig:
    """Build the effective configuration from an optional JSON file and
    the environment."""
    values: dict[str, Any] = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
        values.update(_coerce(raw))

    env = os.environ if env is None else env
    from_env = {
        key: env[ENV_PREFIX + key.upper()]
        for key in CONFIG_KEYS
        if ENV_PREFIX + key.upper() in env
    }
    values.update(_coerce(from_env))
    return ServiceConfig(**values)
