"""Single- and multi-run experiments in text-only and text+explanation modes."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Mapping, Sequence

from lotus.classifier import PredictionRecord, TrainConfig, get_classifier, make_records
from lotus.corpus import Dataset, EmotionLabelSet, LabeledExample, parse_dataset
from lotus.errors import DataError, LotusError, StageError, ValidationError
from lotus.explainer import (
    STUB_DESCRIPTOR,
    Backend,
    BackendDescriptor,
    ExplanationCache,
    generate_many,
    get_template,
    lookup_explanation,
    make_backend,
    resolve_cache_path,
)
from lotus.explainer.prompt import DEFAULT_VERSION
from lotus.metrics import MetricsReport, aggregate, evaluate

log = logging.getLogger(__name__)

TEXT_ONLY = "text_only"
TEXT_PLUS_EXPLANATION = "text_plus_explanation"
MODES = (TEXT_ONLY, TEXT_PLUS_EXPLANATION)


def augment_example(text: str, explanation: str, example_id: str | None = None) -> str:
    """Join text and explanation with one space, byte for byte."""
    if not explanation:
        raise DataError(f"empty explanation for example {example_id!r}")
    if not text:
        raise DataError(f"empty text for example {example_id!r}")
    return text + " " + explanation


@dataclass(frozen=True)
class ExperimentConfig:
    train_path: str
    test_path: str
    dev_path: str | None = None
    mode: str = TEXT_PLUS_EXPLANATION
    backend: BackendDescriptor = STUB_DESCRIPTOR
    backends: Mapping[str, BackendDescriptor] = field(default_factory=dict)
    prompt_version: str = DEFAULT_VERSION
    train: TrainConfig = field(default_factory=TrainConfig)
    run_seeds: tuple[int, ...] = (0, 1, 2, 3)
    cache_path: str | None = None
    classifier_backend: str = "reference"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}, got {self.mode!r}")
        seeds = tuple(self.run_seeds)
        if not seeds:
            raise ValidationError("run_seeds must be non-empty")
        if len(set(seeds)) != len(seeds):
            raise ValidationError(f"run_seeds must be distinct, got {list(seeds)}")
        object.__setattr__(self, "run_seeds", seeds)

    def with_backend(self, name: str) -> "ExperimentConfig":
        if name == "stub" and "stub" not in self.backends:
            return replace(self, backend=STUB_DESCRIPTOR)
        if name == self.backend.backend_id:
            return self
        try:
            return replace(self, backend=self.backends[name])
        except KeyError:
            raise ValidationError(f"unknown backend {name!r} (known: {sorted({'stub', *self.backends})})") from None

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "train_path": self.train_path,
            "dev_path": self.dev_path,
            "test_path": self.test_path,
            "backend": self.backend.to_json(),
            "backends": {k: v.to_json() for k, v in self.backends.items()},
            "prompt_version": self.prompt_version,
            "train": self.train.to_dict(),
            "run_seeds": list(self.run_seeds),
            "cache_path": self.cache_path,
            "classifier": {"backend": self.classifier_backend},
        }

    @classmethod
    def from_json(cls, d: Mapping, base_dir: str | Path | None = None) -> "ExperimentConfig":
        """Build from the JSON config layout; relative paths resolve against ``base_dir``."""
        known = {"mode", "train_path", "dev_path", "test_path", "backend", "backends",
                 "prompt_version", "train", "run_seeds", "cache_path", "classifier"}
        extra = set(d) - known
        if extra:
            raise ValidationError(f"unknown config key(s): {sorted(extra)}")
        for required in ("train_path", "test_path"):
            if not d.get(required):
                raise ValidationError(f"config is missing {required!r}")

        def path(p):
            if p is None or base_dir is None:
                return p
            p = Path(p)
            return str(p if p.is_absolute() else Path(base_dir) / p)

        classifier = d.get("classifier") or {}
        return cls(
            train_path=path(d["train_path"]),
            test_path=path(d["test_path"]),
            dev_path=path(d.get("dev_path")),
            mode=d.get("mode", TEXT_PLUS_EXPLANATION),
            backend=BackendDescriptor.from_json(d["backend"]) if d.get("backend") else STUB_DESCRIPTOR,
            backends={k: BackendDescriptor.from_json(v) for k, v in (d.get("backends") or {}).items()},
            prompt_version=d.get("prompt_version", DEFAULT_VERSION),
            train=TrainConfig.from_dict(d.get("train") or {}),
            run_seeds=tuple(d.get("run_seeds", (0, 1, 2, 3))),
            cache_path=path(d.get("cache_path")),
            classifier_backend=classifier.get("backend", "reference"),
        )


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    return ExperimentConfig.from_json(json.loads(path.read_text(encoding="utf-8")), base_dir=path.parent)


@dataclass(frozen=True)
class RunResult:
    seed: int
    mode: str
    metrics: MetricsReport
    predictions: tuple[PredictionRecord, ...]


@dataclass(frozen=True)
class RunAggregate:
    """Mean and sample standard deviation of every scalar metric."""

    metrics: dict[str, tuple[float, float]]
    n_runs: int
    seeds: tuple[int, ...] = ()

    def mean(self, name: str) -> float:
        return self.metrics[name][0]

    def std(self, name: str) -> float:
        return self.metrics[name][1]

    def to_json(self) -> dict:
        return {
            "n_runs": self.n_runs,
            "seeds": list(self.seeds),
            "std": "sample (divisor n-1); 0 for a single run",
            "metrics": {k: {"mean": m, "std": s} for k, (m, s) in self.metrics.items()},
        }

    @classmethod
    def from_json(cls, d: Mapping) -> "RunAggregate":
        metrics = {k: (float(v["mean"]), float(v["std"])) for k, v in d["metrics"].items()}
        return cls(metrics, int(d["n_runs"]), tuple(d.get("seeds", ())))


def aggregate_runs(results: Sequence[RunResult]) -> RunAggregate:
    if not results:
        raise ValueError("no runs to aggregate")
    per_run = [r.metrics.scalars() for r in results]
    metrics = {name: aggregate([s[name] for s in per_run]) for name in per_run[0]}
    return RunAggregate(metrics, len(results), tuple(r.seed for r in results))


@dataclass(frozen=True)
class PreparedData:
    """Inputs of one experiment after parsing and augmentation."""

    mode: str
    train: Dataset
    test: Dataset
    train_texts: tuple[str, ...]
    test_texts: tuple[str, ...]
    explanations: Mapping[str, str]  # example id -> explanation text (both splits)


def _stage(name: str, fn: Callable, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except (LotusError, OSError, ValueError) as e:
        raise StageError(name, e) from e


def _resolve_explanations(examples: Sequence[LabeledExample], template, backend: Backend | None,
                          cache: ExplanationCache) -> dict[str, str]:
    if backend is None:
        out = {}
        for ex in examples:
            hit = lookup_explanation(template, ex, cache)
            if hit is None:
                raise DataError(f"no cached explanation for example {ex.id!r}")
            out[ex.id] = hit.text
        return out
    return {e.example_id: e.text for e in generate_many(backend, template, examples, cache)}


def prepare(config: ExperimentConfig, backend: Backend | None = None,
            cache: ExplanationCache | None = None, offline: bool = False) -> PreparedData:
    """Parse the splits and, in explanation mode, resolve every explanation.

    With ``offline=True`` explanations must already be cached; a miss is an
    error instead of a backend call.
    """
    train = _stage("parse train", parse_dataset, config.train_path, "train")
    test = _stage("parse test", parse_dataset, config.test_path, "test")
    if config.dev_path:
        _stage("parse dev", parse_dataset, config.dev_path, "dev")

    if config.mode == TEXT_ONLY:
        return PreparedData(config.mode, train, test,
                            tuple(ex.text for ex in train), tuple(ex.text for ex in test), {})

    template = _stage("prompt", get_template, config.prompt_version)
    if cache is None:
        cache = ExplanationCache(resolve_cache_path(config.cache_path))
    if backend is None and not offline:
        backend = make_backend(config.backend)
    active = None if offline else backend
    explanations = {}
    for split in (train, test):
        explanations.update(_stage(f"explain {split.split_name}", _resolve_explanations,
                                   split.examples, template, active, cache))

    def augmented(split: Dataset) -> tuple[str, ...]:
        return tuple(_stage(f"augment {split.split_name}", augment_example, ex.text, explanations[ex.id], ex.id)
                     for ex in split)

    return PreparedData(config.mode, train, test, augmented(train), augmented(test), explanations)


def run_prepared(data: PreparedData, config: ExperimentConfig, seed: int) -> RunResult:
    train_config = replace(config.train, seed=seed)
    classifier = _stage("classifier", get_classifier, config.classifier_backend)
    labels = [ex.labels for ex in data.train]
    _stage("train", classifier.fit, list(data.train_texts), labels, train_config)
    probs = _stage("predict", classifier.predict_proba, list(data.test_texts))
    records = make_records([ex.id for ex in data.test], probs, train_config.threshold)
    metrics = evaluate([ex.labels for ex in data.test], [r.decisions for r in records])
    return RunResult(seed, data.mode, metrics, tuple(records))


def run_experiment(config: ExperimentConfig, seed: int, backend: Backend | None = None,
                   cache: ExplanationCache | None = None) -> RunResult:
    return run_prepared(prepare(config, backend, cache), config, seed)


def run_multi(config: ExperimentConfig, backend: Backend | None = None,
              cache: ExplanationCache | None = None, workers: int = 1,
              data: PreparedData | None = None) -> tuple[RunAggregate, list[RunResult]]:
    """One run per seed in ``config.run_seeds``; explanations are shared by all runs."""
    if data is None:
        data = prepare(config, backend, cache)

    def one(seed: int) -> RunResult:
        try:
            return run_prepared(data, config, seed)
        except LotusError as e:
            raise StageError(f"run seed={seed}", e) from e

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, config.run_seeds))
    else:
        results = [one(s) for s in config.run_seeds]
    return aggregate_runs(results), results


# ---------------------------------------------------------------- artifacts


def write_json(path: Path, obj) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return path


def write_predictions(path: Path, records: Sequence[PredictionRecord]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        for r in records:
            f.write(json.dumps(r.to_json(), ensure_ascii=False) + "\n")
    return path


def read_predictions(path: str | Path) -> list[PredictionRecord]:
    with Path(path).open("r", encoding="utf-8") as f:
        return [PredictionRecord.from_json(json.loads(line)) for line in f if line.strip()]


def write_run_outputs(out_dir: str | Path, aggregate_: RunAggregate, results: Sequence[RunResult]) -> list[Path]:
    """``predictions_<seed>.jsonl``, ``metrics_<seed>.json`` and ``aggregate.json``."""
    out_dir = Path(out_dir)
    written = []
    for r in results:
        written.append(write_predictions(out_dir / f"predictions_{r.seed}.jsonl", r.predictions))
        written.append(write_json(out_dir / f"metrics_{r.seed}.json", r.metrics.to_json()))
    written.append(write_json(out_dir / "aggregate.json", aggregate_.to_json()))
    return written
