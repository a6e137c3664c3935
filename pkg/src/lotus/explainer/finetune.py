"""Job descriptor for fine-tuning the explanation generator on an external trainer.

The descriptor is a JSON object::

    {
      "format": "lotus-finetune-job/1",
      "hyperparameters": {"quantization": "4bit", "adapter": "LoRA",
                          "batch_size": 2, "grad_accum_steps": 4,
                          "learning_rate": 0.0001, "train_steps": 30},
      "inputs": {"seed_corpus_ref": "...", "explanation_corpus_ref": "...",
                 "prompt_version": "..."},
      "pairs": [{"id": "...", "prompt": "...", "completion": "..."}, ...]
    }

``prompt`` is the flat rendered prompt; mapping it onto chat roles is left to
the trainer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from lotus.corpus import LabeledExample
from lotus.errors import ConsistencyError, ValidationError
from lotus.explainer.generate import Explanation
from lotus.explainer.prompt import DEFAULT_TEMPLATE, PromptTemplate, build_prompt

JOB_FORMAT = "lotus-finetune-job/1"
_HYPER = ("quantization", "adapter", "batch_size", "grad_accum_steps", "learning_rate", "train_steps")


@dataclass(frozen=True)
class FinetuneJobSpec:
    quantization: str = "4bit"
    adapter: str = "LoRA"
    batch_size: int = 2
    grad_accum_steps: int = 4
    learning_rate: float = 1e-4
    train_steps: int = 30
    seed_corpus_ref: str = ""
    explanation_corpus_ref: str = ""

    def __post_init__(self):
        for name in ("batch_size", "grad_accum_steps", "train_steps"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be positive")
        if not self.learning_rate > 0:
            raise ValidationError("learning_rate must be positive")

    def hyperparameters(self) -> dict:
        return {name: getattr(self, name) for name in _HYPER}


def build_job(spec: FinetuneJobSpec, seed_corpus: Sequence[LabeledExample],
              explanations: Sequence[Explanation], template: PromptTemplate = DEFAULT_TEMPLATE) -> dict:
    if not seed_corpus:
        raise ConsistencyError("seed corpus is empty; fine-tuning needs at least one pair")
    by_id: dict[str, list[Explanation]] = {}
    for exp in explanations:
        by_id.setdefault(exp.example_id, []).append(exp)
    missing = [ex.id for ex in seed_corpus if ex.id not in by_id]
    if missing:
        raise ConsistencyError(f"no explanation for seed example(s): {', '.join(missing)}")
    doubled = [ex.id for ex in seed_corpus if len(by_id[ex.id]) > 1]
    if doubled:
        raise ConsistencyError(f"several explanations for seed example(s): {', '.join(doubled)}")

    pairs = [
        {"id": ex.id, "prompt": build_prompt(template, ex.text), "completion": by_id[ex.id][0].text}
        for ex in seed_corpus
    ]
    return {
        "format": JOB_FORMAT,
        "hyperparameters": spec.hyperparameters(),
        "inputs": {
            "seed_corpus_ref": spec.seed_corpus_ref,
            "explanation_corpus_ref": spec.explanation_corpus_ref,
            "prompt_version": template.version,
        },
        "pairs": pairs,
    }


def export_finetune_job(spec: FinetuneJobSpec, seed_corpus: Sequence[LabeledExample],
                        explanations: Sequence[Explanation], out_path: str | Path,
                        template: PromptTemplate = DEFAULT_TEMPLATE) -> Path:
    job = build_job(spec, seed_corpus, explanations, template)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(json.dumps(job, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return out_path


def load_finetune_job(path: str | Path) -> tuple[FinetuneJobSpec, list[dict]]:
    job = json.loads(Path(path).read_text(encoding="utf-8"))
    if job.get("format") != JOB_FORMAT:
        raise ValidationError(f"{path}: unsupported job format {job.get('format')!r}")
    hyper = job["hyperparameters"]
    inputs = job.get("inputs", {})
    spec = FinetuneJobSpec(
        **{name: hyper[name] for name in _HYPER},
        seed_corpus_ref=inputs.get("seed_corpus_ref", ""),
        explanation_corpus_ref=inputs.get("explanation_corpus_ref", ""),
    )
    return spec, list(job["pairs"])
