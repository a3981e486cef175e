"""Configuration precedence: defaults, file, environment."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from kgserve.config import ConfigError, ServiceConfig, load_config


def test_defaults():
    config = load_config(env={})
    assert config.listen == "127.0.0.1:8000"
    assert config.data_dir is None
    assert config.fsync is False
    assert config.known_functions == frozenset({"unique", "index"})


def test_derived_properties():
    config = ServiceConfig(listen="0.0.0.0:9001")
    assert config.host == "0.0.0.0"
    assert config.port == 9001
    assert config.schema_base == "http://0.0.0.0:9001/schemas/"


def test_file_values(tmp_path):
    path = tmp_path / "conf.json"
    path.write_text(json.dumps({
        "listen": "127.0.0.1:9000",
        "data_dir": str(tmp_path / "data"),
        "fsync": "always",
        "known_functions": ["unique", "fulltext"],
    }), encoding="utf-8")
    config = load_config(path, env={})
    assert config.listen == "127.0.0.1:9000"
    assert config.data_dir == tmp_path / "data"
    assert config.fsync is True
    assert config.known_functions == frozenset({"unique", "fulltext"})


def test_env_overrides_file(tmp_path):
    path = tmp_path / "conf.json"
    path.write_text(json.dumps({"listen": "127.0.0.1:9000"}),
                    encoding="utf-8")
    env = {
        "KGSERVE_LISTEN": "127.0.0.1:9100",
        "KGSERVE_DATA_DIR": str(tmp_path / "d"),
        "KGSERVE_FSYNC": "never",
        "KGSERVE_KNOWN_FUNCTIONS": "unique, index ,geo",
    }
    config = load_config(path, env=env)
    assert config.listen == "127.0.0.1:9100"
    assert config.data_dir == Path(tmp_path / "d")
    assert config.fsync is False
    assert config.known_functions == frozenset({"unique", "index", "geo"})


def test_boolean_fsync_in_file(tmp_path):
    path = tmp_path / "conf.json"
    path.write_text(json.dumps({"fsync": True}), encoding="utf-8")
    assert load_config(path, env={}).fsync is True


@pytest.mark.parametrize("payload", [
    {"listen": "no-port"},
    {"fsync": "sometimes"},
    {"known_functions": 7},
    {"mystery": 1},
])
def test_invalid_values(tmp_path, payload):
    path = tmp_path / "conf.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(path, env={})


def test_file_must_hold_object(tmp_path):
    path = tmp_path / "conf.json"
    path.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(path, env={})


def test_unreadable_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json", env={})
