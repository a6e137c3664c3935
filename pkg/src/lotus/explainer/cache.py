"""Append-only JSONL cache of generated explanations.

Each line is one entry::

    {"key": "...", "example_id": "...", "input_text": "...",
     "explanation_text": "...", "backend_id": "...", "prompt_version": "...",
     "created_at": "2026-01-01T00:00:00+00:00"}

``key`` is the 16-hex-digit FNV-1a-64 digest of
``prompt_version + "\\x1f" + input_text``. On load, later lines win over
earlier lines with the same key, and a torn final line (crash mid-write) is
skipped.
"""

from __future__ import annotations

import json
import logging
import os
import threading
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path

from lotus.hashing import fnv1a64_hex

log = logging.getLogger(__name__)

CACHE_ENV = "LOTUS_CACHE"
DEFAULT_CACHE = "explanations_cache.jsonl"


def cache_key(prompt_version: str, input_text: str) -> str:
    return fnv1a64_hex(prompt_version + "\x1f" + input_text)


def resolve_cache_path(configured: str | Path | None) -> Path:
    """``LOTUS_CACHE`` beats the configured path, which beats the default."""
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path(configured) if configured else Path(DEFAULT_CACHE)


@dataclass(frozen=True)
class CacheEntry:
    key: str
    example_id: str
    input_text: str
    explanation_text: str
    backend_id: str
    prompt_version: str
    created_at: str


class ExplanationCache:
    """Thread-safe cache: lock-free reads of a dict, serialized appends."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self._entries: dict[str, CacheEntry] = {}
        self._write_lock = threading.Lock()
        self._needs_newline = False
        if self.path is not None and self.path.exists():
            self._load()

    def _load(self) -> None:
        raw = self.path.read_bytes()
        self._needs_newline = bool(raw) and not raw.endswith(b"\n")
        with self.path.open("r", encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    entry = CacheEntry(**json.loads(line))
                except (json.JSONDecodeError, TypeError) as e:
                    log.warning("%s:%d: skipping unreadable cache line (%s)", self.path, line_no, e)
                    continue
                self._entries[entry.key] = entry

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: str) -> bool:
        return key in self._entries

    def get(self, prompt_version: str, input_text: str) -> CacheEntry | None:
        return self._entries.get(cache_key(prompt_version, input_text))

    def put(self, example_id: str, input_text: str, explanation_text: str,
            backend_id: str, prompt_version: str) -> CacheEntry:
        entry = CacheEntry(
            key=cache_key(prompt_version, input_text),
            example_id=example_id,
            input_text=input_text,
            explanation_text=explanation_text,
            backend_id=backend_id,
            prompt_version=prompt_version,
            created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        )
        line = json.dumps(asdict(entry), ensure_ascii=False) + "\n"
        with self._write_lock:
            if self.path is not None:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with self.path.open("a", encoding="utf-8") as f:
                    if self._needs_newline:
                        # terminate a torn line left by an interrupted writer
                        f.write("\n")
                        self._needs_newline = False
                    f.write(line)
                    f.flush()
            self._entries[entry.key] = entry
        return entry
