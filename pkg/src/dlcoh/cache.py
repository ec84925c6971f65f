"""Optional persistent result cache.

The heavy recursions revisit subwords constantly, so results can be kept in
a single-file JSON store mapping the canonical word key to the serialized
result.  The location comes from the DLCOH_CACHE environment variable or an
explicit path; without either the cache is memory-only.
"""
from __future__ import annotations

import json
import os
import tempfile


class ResultCache:
    def __init__(self, path: str | None = None):
        self.path = path
        self.data: dict[str, dict] = {}
        if path and os.path.exists(path):
            try:
                with open(path) as fh:
                    self.data = json.load(fh)
            except (OSError, json.JSONDecodeError):
                self.data = {}

    @staticmethod
    def _key(word) -> str:
        return json.dumps(word.to_json(), sort_keys=True)

    def get(self, word):
        from .cohomology import CohResult

        raw = self.data.get(self._key(word))
        if raw is None:
            return None
        return CohResult.from_json(raw)

    def put(self, word, result) -> None:
        self.data[self._key(word)] = result.to_json()
        if self.path:
            self._flush()

    def _flush(self) -> None:
        directory = os.path.dirname(os.path.abspath(self.path))
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                json.dump(self.data, fh)
            os.replace(tmp, self.path)
        except OSError:
            if os.path.exists(tmp):
                os.unlink(tmp)


_cache: ResultCache | None = None


def result_cache() -> ResultCache:
    global _cache
    if _cache is None:
        _cache = ResultCache(os.environ.get("DLCOH_CACHE"))
    return _cache


def set_cache_path(path: str | None) -> None:
    global _cache
    _cache = ResultCache(path)
