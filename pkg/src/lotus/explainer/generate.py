"""Cache-first explanation generation."""

from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from lotus.corpus import LabeledExample
from lotus.errors import ContentError, ValidationError
from lotus.explainer.backends import Backend
from lotus.explainer.cache import ExplanationCache
from lotus.explainer.prompt import PromptTemplate, build_prompt

_NEWLINES = re.compile(r"(?:\r\n|\r|\n)+")


@dataclass(frozen=True)
class Explanation:
    example_id: str
    text: str
    backend_id: str
    prompt_version: str

    def __post_init__(self):
        if not self.text.strip():
            raise ValidationError(f"explanation for {self.example_id!r} is empty")
        if "\n" in self.text or "\r" in self.text:
            raise ValidationError(f"explanation for {self.example_id!r} spans several lines")

    def to_json(self) -> dict:
        return {
            "example_id": self.example_id,
            "text": self.text,
            "backend_id": self.backend_id,
            "prompt_version": self.prompt_version,
        }

    @classmethod
    def from_json(cls, d: dict) -> "Explanation":
        return cls(d["example_id"], d["text"], d["backend_id"], d["prompt_version"])


def normalize_explanation(raw: str) -> str:
    """Collapse newline runs into single spaces and trim the ends."""
    return _NEWLINES.sub(" ", raw).strip()


def generate_explanation(backend: Backend, template: PromptTemplate, example: LabeledExample,
                         cache: ExplanationCache) -> Explanation:
    """Return the cached explanation for ``example`` or ask ``backend`` once.

    A miss costs exactly one backend call; its normalized answer is appended
    to the cache before returning. Backend failures propagate as
    ``BackendError`` carrying ``example.id``.
    """
    hit = cache.get(template.version, example.text)
    if hit is not None:
        return Explanation(example.id, hit.explanation_text, hit.backend_id, hit.prompt_version)

    prompt = build_prompt(template, example.text)
    text = normalize_explanation(backend(prompt, example.text, example.id))
    if not text:
        raise ContentError(f"backend {backend.backend_id!r} returned an empty explanation for {example.id!r}")
    cache.put(example.id, example.text, text, backend.backend_id, template.version)
    return Explanation(example.id, text, backend.backend_id, template.version)


def lookup_explanation(template: PromptTemplate, example: LabeledExample,
                       cache: ExplanationCache) -> Explanation | None:
    hit = cache.get(template.version, example.text)
    if hit is None:
        return None
    return Explanation(example.id, hit.explanation_text, hit.backend_id, hit.prompt_version)


def generate_many(backend: Backend, template: PromptTemplate, examples: Sequence[LabeledExample],
                  cache: ExplanationCache) -> list[Explanation]:
    """Explain every example, with up to ``max_parallel`` backend calls in flight.

    Output order follows ``examples``. Two concurrent misses on the same text
    may both reach the backend; the cache then keeps the later write.
    """
    workers = backend.descriptor.max_parallel
    if workers <= 1 or len(examples) <= 1:
        return [generate_explanation(backend, template, ex, cache) for ex in examples]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(generate_explanation, backend, template, ex, cache) for ex in examples]
        return [f.result() for f in futures]
