"""Prompt template for explanation generation."""

from __future__ import annotations

import re
from dataclasses import dataclass

from lotus.errors import ValidationError
from lotus.hashing import fnv1a64_hex

INSTRUCTION = (
    "Read the given text and generate a short explanation of the emotional or "
    "situational context behind the sentence. The explanation should be concise "
    "and relevant to the sentence. Do not explicitly mention emotions but focus "
    "on the implications behind the sentence."
)
LAYOUT = "{instruction}\n\nText: {text}\nExplanation:"
DEFAULT_VERSION = "explain-v1"
_PLACEHOLDER = re.compile(r"\{(instruction|text)\}")

# version -> fingerprint of (instruction, layout); a registered version may never
# change content without also changing its name
KNOWN_VERSIONS: dict[str, str] = {
    DEFAULT_VERSION: "526c425699107abc",
}


def fingerprint(instruction: str, layout: str) -> str:
    return fnv1a64_hex(instruction + "\x1f" + layout)


@dataclass(frozen=True)
class PromptTemplate:
    version: str = DEFAULT_VERSION
    instruction: str = INSTRUCTION
    layout: str = LAYOUT

    @property
    def fingerprint(self) -> str:
        return fingerprint(self.instruction, self.layout)

    def validate(self) -> "PromptTemplate":
        if not self.version:
            raise ValidationError("prompt template version must be non-empty")
        if "{instruction}" not in self.layout or "{text}" not in self.layout:
            raise ValidationError("prompt layout must contain {instruction} and {text}")
        expected = KNOWN_VERSIONS.get(self.version)
        if expected is not None and expected != self.fingerprint:
            raise ValidationError(
                f"prompt template {self.version!r} was modified without a version bump "
                f"(fingerprint {self.fingerprint}, registered {expected})"
            )
        return self


DEFAULT_TEMPLATE = PromptTemplate()


def get_template(version: str) -> PromptTemplate:
    if version == DEFAULT_VERSION:
        return DEFAULT_TEMPLATE
    raise ValidationError(f"unknown prompt template version {version!r}")


def build_prompt(template: PromptTemplate, text: str) -> str:
    if not text:
        raise ValueError("cannot build a prompt for empty text")
    template.validate()
    # single-pass substitution: braces inside the text itself are left alone
    values = {"instruction": template.instruction, "text": text}
    return _PLACEHOLDER.sub(lambda m: values[m.group(1)], template.layout)
