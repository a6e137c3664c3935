"""Explanation backends: deterministic stub, external command, external HTTP.

Protocols
---------
external-command
    The prompt is written to the command's stdin (UTF-8); the explanation is
    read from stdout. Exit status 0 means success.
external-http
    ``POST <endpoint>`` with JSON ``{"prompt": ..., **options}``; the reply
    must be JSON ``{"explanation": ...}``.

Every backend performs exactly one attempt per call. Retrying is left to the
caller.
"""

from __future__ import annotations

import json
import shlex
import subprocess
import threading
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from typing import Mapping

from lotus.errors import BackendError, ValidationError

KINDS = ("external-http", "external-command", "stub")

DEFAULT_CUE_MAP: dict[str, str] = {
    "warpath": "conveys tension or confrontation",
    "bombing": "references a tragic event",
    "muscle": "recounts a minor injury",
    "happy": "reflects on their mood",
    "can't believe": "reacts to something unexpected",
    "nervous": "describes mounting unease",
    "courage": "describes hesitation",
    "fire": "describes an intense reaction",
}

STUB_DEFAULT = "The speaker describes a situation."


def stub_explain(text: str, cue_map: Mapping[str, str]) -> str:
    """Rule-based explanation: one clause per keyword found in ``text``.

    Keywords match case-insensitively as substrings; clauses keep ``cue_map``
    order and are joined with " and ".
    """
    if not cue_map:
        raise ValueError("cue_map must be non-empty")
    lowered = text.lower()
    clauses = [clause for keyword, clause in cue_map.items() if keyword.lower() in lowered]
    if not clauses:
        return STUB_DEFAULT
    return "The speaker " + " and ".join(clauses) + "."


@dataclass(frozen=True)
class BackendDescriptor:
    backend_id: str
    kind: str = "stub"
    endpoint: str | None = None
    command: tuple[str, ...] | None = None
    timeout: float = 60.0
    max_parallel: int = 1
    cue_map: dict[str, str] | None = None
    # decoding parameters forwarded verbatim (temperature, max_tokens, ...)
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.backend_id:
            raise ValidationError("backend_id must be non-empty")
        if self.kind not in KINDS:
            raise ValidationError(f"backend kind must be one of {KINDS}, got {self.kind!r}")
        if not self.timeout > 0:
            raise ValidationError(f"timeout must be positive, got {self.timeout}")
        if self.max_parallel < 1:
            raise ValidationError(f"max_parallel must be >= 1, got {self.max_parallel}")
        if self.kind == "external-http" and not self.endpoint:
            raise ValidationError("external-http backend needs an endpoint")
        if self.kind == "external-command":
            if not self.command:
                raise ValidationError("external-command backend needs a command")
            if isinstance(self.command, str):
                object.__setattr__(self, "command", tuple(shlex.split(self.command)))
            else:
                object.__setattr__(self, "command", tuple(self.command))

    def to_json(self) -> dict:
        d = {
            "backend_id": self.backend_id,
            "kind": self.kind,
            "timeout": self.timeout,
            "max_parallel": self.max_parallel,
        }
        if self.endpoint is not None:
            d["endpoint"] = self.endpoint
        if self.command is not None:
            d["command"] = list(self.command)
        if self.cue_map is not None:
            d["cue_map"] = dict(self.cue_map)
        if self.options:
            d["options"] = dict(self.options)
        return d

    @classmethod
    def from_json(cls, d: Mapping) -> "BackendDescriptor":
        known = {"backend_id", "kind", "endpoint", "command", "timeout", "max_parallel", "cue_map", "options"}
        extra = set(d) - known
        if extra:
            raise ValidationError(f"unknown backend key(s): {sorted(extra)}")
        return cls(**dict(d))


STUB_DESCRIPTOR = BackendDescriptor("stub", "stub")


class Backend:
    """Callable wrapper around a descriptor that counts invocations."""

    def __init__(self, descriptor: BackendDescriptor):
        self.descriptor = descriptor
        self._lock = threading.Lock()
        self.calls = 0

    @property
    def backend_id(self) -> str:
        return self.descriptor.backend_id

    def __call__(self, prompt: str, text: str, example_id: str) -> str:
        with self._lock:
            self.calls += 1
        return self._invoke(prompt, text, example_id)

    def _invoke(self, prompt: str, text: str, example_id: str) -> str:
        raise NotImplementedError


class StubBackend(Backend):
    def __init__(self, descriptor: BackendDescriptor = STUB_DESCRIPTOR):
        super().__init__(descriptor)
        self.cue_map = dict(descriptor.cue_map) if descriptor.cue_map else dict(DEFAULT_CUE_MAP)

    def _invoke(self, prompt, text, example_id):
        # works on the raw text so the prompt wrapper cannot trigger cues
        return stub_explain(text, self.cue_map)


class CommandBackend(Backend):
    def _invoke(self, prompt, text, example_id):
        try:
            proc = subprocess.run(
                list(self.descriptor.command),
                input=prompt.encode("utf-8"),
                capture_output=True,
                timeout=self.descriptor.timeout,
                check=False,
            )
        except subprocess.TimeoutExpired:
            raise BackendError(f"command timed out after {self.descriptor.timeout}s", example_id) from None
        except OSError as e:
            raise BackendError(f"cannot run backend command: {e}", example_id) from e
        if proc.returncode != 0:
            stderr = proc.stderr.decode("utf-8", "replace").strip()
            raise BackendError(f"command exited with status {proc.returncode}: {stderr[:200]}", example_id)
        return proc.stdout.decode("utf-8")


class HttpBackend(Backend):
    def _invoke(self, prompt, text, example_id):
        body = json.dumps({"prompt": prompt, **self.descriptor.options}).encode("utf-8")
        req = urllib.request.Request(
            self.descriptor.endpoint,
            data=body,
            headers={"Content-Type": "application/json"},
            method="POST",
        )
        try:
            with urllib.request.urlopen(req, timeout=self.descriptor.timeout) as resp:
                payload = json.loads(resp.read().decode("utf-8"))
        except urllib.error.HTTPError as e:
            raise BackendError(f"HTTP {e.code} from {self.descriptor.endpoint}", example_id) from e
        except (urllib.error.URLError, TimeoutError, OSError) as e:
            raise BackendError(f"request to {self.descriptor.endpoint} failed: {e}", example_id) from e
        except json.JSONDecodeError as e:
            raise BackendError(f"non-JSON reply from {self.descriptor.endpoint}", example_id) from e
        if not isinstance(payload, dict) or not isinstance(payload.get("explanation"), str):
            raise BackendError("reply lacks a string 'explanation' field", example_id)
        return payload["explanation"]


def make_backend(descriptor: BackendDescriptor) -> Backend:
    if descriptor.kind == "stub":
        return StubBackend(descriptor)
    if descriptor.kind == "external-command":
        return CommandBackend(descriptor)
    return HttpBackend(descriptor)
