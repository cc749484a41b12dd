"""Content-addressed result cache with atomic writes."""
from __future__ import annotations

import hashlib
import json
import os
import tempfile
import warnings
from pathlib import Path

from . import __version__

ENV_VAR = "TENSIONLAB_CACHE"
DEFAULT_DIR = ".tensionlab-cache"


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def cache_key(payload: dict, version: str = __version__) -> str:
    """Stable across field ordering; changes with the tool version."""
    return hashlib.sha256((canonical_json(payload) + "|" + version).encode()).hexdigest()


def resolve_dir(configured: str | None = None) -> Path:
    env = os.environ.get(ENV_VAR)
    return Path(env or configured or DEFAULT_DIR)


class Cache:
    def __init__(self, directory, version: str = __version__):
        self.directory = Path(directory)
        self.version = version

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def lookup(self, key: str):
        """Stored payload, or None on a miss (corrupt entries count as misses)."""
        path = self._path(key)
        if not path.exists():
            return None
        try:
            with open(path) as fh:
                entry = json.load(fh)
            if entry["key"] != key:
                raise ValueError("key mismatch")
        except (OSError, ValueError, KeyError, TypeError) as exc:
            warnings.warn(f"ignoring corrupt cache entry {path}: {exc}", stacklevel=2)
            return None
        if entry.get("version") != self.version:
            return None
        return entry["payload"]

    def store(self, key: str, payload) -> None:
        self.directory.mkdir(parents=True, exist_ok=True)
        entry = {"key": key, "version": self.version, "payload": payload}
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                json.dump(entry, fh, sort_keys=True)
            os.replace(tmp, self._path(key))
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


def cache_lookup(key: str, directory=None, version: str = __version__):
    return Cache(resolve_dir(directory), version).lookup(key)
