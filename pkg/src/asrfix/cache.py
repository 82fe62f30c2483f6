"""Append-only on-disk cache for provider responses.

One JSON object per line: ``{"k": key, "v": value}``. A single process-wide
lock serializes appends; loading skips a trailing partial line left by an
interrupted writer.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
from pathlib import Path

logger = logging.getLogger(__name__)

_LOCKS: dict[str, threading.Lock] = {}
_LOCKS_GUARD = threading.Lock()


def cache_key(*parts: str) -> str:
    h = hashlib.sha256()
    for part in parts:
        h.update(part.encode("utf-8"))
        h.update(b"\x1f")
    return h.hexdigest()


def _lock_for(path: Path) -> threading.Lock:
    with _LOCKS_GUARD:
        return _LOCKS.setdefault(str(path.resolve()), threading.Lock())


class DiskCache:
    def __init__(self, path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = _lock_for(self.path)
        self._data = {}
        self._load()

    def _load(self):
        if not self.path.exists():
            return
        with open(self.path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                if not line.endswith("\n"):
                    logger.debug("ignoring incomplete trailing entry in %s", self.path)
                    break
                try:
                    entry = json.loads(line)
                    self._data[entry["k"]] = entry["v"]
                except (json.JSONDecodeError, KeyError, TypeError):
                    logger.warning("skipping corrupt cache line %s:%d", self.path, lineno)

    def __contains__(self, key):
        return key in self._data

    def __len__(self):
        return len(self._data)

    def get(self, key, default=None):
        return self._data.get(key, default)

    def put(self, key, value):
        line = json.dumps({"k": key, "v": value}, ensure_ascii=False) + "\n"
        with self._lock:
            if key in self._data:
                return
            self._data[key] = value
            with open(self.path, "a", encoding="utf-8") as f:
                f.write(line)

    def get_or_compute(self, key, compute):
        if key in self._data:
            return self._data[key]
        value = compute()
        self.put(key, value)
        return self._data[key]
