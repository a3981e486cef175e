"""Append-only JSON Lines logs (UTF-8, LF, one record per line)."""

from __future__ import annotations

import json
import os
from pathlib import Path
from threading import RLock
from typing import Any


class LogCorruptError(Exception):
    """A non-final log line failed to parse; the file needs repair."""


class AppendLog:
    """Durable record journal. Appends are atomic per record under the
    internal lock; a truncated final line (torn write) is tolerated on
    read, anything else corrupt raises."""

    def __init__(self, path: Path | str, *, fsync: bool = False):
        self._path = Path(path)
        self._fsync = fsync
        self._lock = RLock()
        self._path.parent.mkdir(parents=True, exist_ok=True)
        self._handle = None

    @property
    def path(self) -> Path:
        return self._path

    def append(self, record: dict[str, Any]) -> None:
        line = json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n"
        with self._lock:
            if self._handle is None:
                self._handle = self._path.open("a", encoding="utf-8")
            self._handle.write(line)
            self._handle.flush()
            if self._fsync:
                os.fsync(self._handle.fileno())

    def read_all(self) -> list[dict[str, Any]]:
        if not self._path.exists():
            return []
        with self._lock:
            raw_lines = self._path.read_text(encoding="utf-8").splitlines()
        records: list[dict[str, Any]] = []
        for index, line in enumerate(raw_lines):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError:
                if index == len(raw_lines) - 1:
                    break
                raise LogCorruptError(f"{self._path}: corrupt record on line {index + 1}")
        return records

    def close(self) -> None:
        with self._lock:
            if self._handle is not None:
                self._handle.close()
                self._handle = None
