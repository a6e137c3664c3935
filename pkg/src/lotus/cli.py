"""Command-line entry point: ``lotus <subcommand> [options]``.

Exit status: 0 on success, 1 on usage, validation or data errors, 2 when an
explanation backend fails. Diagnostics go to stderr; artifacts go to files
under ``--out`` or to stdout.
"""

from __future__ import annotations

import argparse
import copy
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from lotus import corpus, pipeline, report
from lotus.classifier import (
    ReferenceClassifier,
    TrainConfig,
    load_model,
    make_records,
    predict_texts,
    save_model,
)
from lotus.errors import BackendError, DataError, LotusError, StageError, ValidationError
from lotus.explainer import (
    STUB_DESCRIPTOR,
    BackendDescriptor,
    Explanation,
    ExplanationCache,
    FinetuneJobSpec,
    export_finetune_job,
    generate_many,
    get_template,
    lookup_explanation,
    make_backend,
    resolve_cache_path,
)
from lotus.explainer.prompt import DEFAULT_VERSION
from lotus.metrics import evaluate

log = logging.getLogger("lotus")

SUBCOMMANDS = ("stats", "sample-seed", "explain", "export-finetune", "train", "predict", "evaluate", "run", "report")
PATH_KEYS = ("train_path", "dev_path", "test_path", "cache_path")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# ---------------------------------------------------------------- config


def default_config() -> dict:
    return {
        "mode": pipeline.TEXT_PLUS_EXPLANATION,
        "train_path": None,
        "dev_path": None,
        "test_path": None,
        "backend": STUB_DESCRIPTOR.to_json(),
        "backends": {},
        "prompt_version": DEFAULT_VERSION,
        "train": TrainConfig().to_dict(),
        "run_seeds": [0, 1, 2, 3],
        "cache_path": None,
        "classifier": {"backend": "reference"},
    }


def _merge(base: dict, update: dict) -> dict:
    for k, v in update.items():
        if isinstance(v, dict) and isinstance(base.get(k), dict) and k != "backend":
            _merge(base[k], v)
        else:
            base[k] = copy.deepcopy(v)
    return base


def parse_override(item: str) -> tuple[list[str], object]:
    key, sep, raw = item.partition("=")
    if not sep or not key:
        raise UsageError(f"override must look like key.path=value, got {item!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.split("."), value


def apply_override(cfg: dict, dotted: list[str], value) -> None:
    node = cfg
    for part in dotted[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise UsageError(f"cannot override inside non-object key {part!r}")
    node[dotted[-1]] = value


def resolve_config(args) -> dict:
    """Defaults, then the config file, then ``--set`` overrides and flags."""
    cfg = default_config()
    if getattr(args, "config", None):
        path = Path(args.config)
        loaded = json.loads(path.read_text(encoding="utf-8"))
        for key in PATH_KEYS:
            if loaded.get(key) and not Path(loaded[key]).is_absolute():
                loaded[key] = str(path.parent / loaded[key])
        _merge(cfg, loaded)
    for item in getattr(args, "set", None) or []:
        apply_override(cfg, *parse_override(item))
    if getattr(args, "mode", None):
        cfg["mode"] = args.mode
    if getattr(args, "seed", None) is not None:
        cfg["train"]["seed"] = args.seed
    if getattr(args, "backend", None):
        name = args.backend
        if name == "stub" and "stub" not in cfg["backends"]:
            cfg["backend"] = STUB_DESCRIPTOR.to_json()
        elif name in cfg["backends"]:
            cfg["backend"] = copy.deepcopy(cfg["backends"][name])
        elif name != cfg["backend"].get("backend_id"):
            raise UsageError(f"unknown backend {name!r}")
    if cfg.get("cache_path") is None and getattr(args, "out", None):
        cfg["cache_path"] = str(Path(args.out) / "explanations_cache.jsonl")
    return cfg


def experiment_config(cfg: dict) -> pipeline.ExperimentConfig:
    return pipeline.ExperimentConfig.from_json(cfg)


def persist_resolved(cfg: dict, out: str | None) -> None:
    if out:
        pipeline.write_json(Path(out) / "resolved_config.json", cfg)


def _emit(text: str) -> None:
    sys.stdout.write(text)
    sys.stdout.flush()


# ---------------------------------------------------------------- subcommands


def cmd_stats(args) -> int:
    dataset = corpus.parse_dataset(args.data, args.split)
    text = corpus.stats_json(corpus.label_distribution(dataset)) + "\n"
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / f"stats_{args.split}.json").write_text(text, encoding="utf-8")
    _emit(text)
    return 0


def cmd_sample_seed(args) -> int:
    dataset = corpus.parse_dataset(args.data, "train")
    sample = corpus.sample_seed_corpus(dataset, args.n, args.seed if args.seed is not None else 0)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        path = corpus.write_dataset(sample, Path(args.out) / "seed_corpus.csv")
        log.info("wrote %d examples to %s", len(sample), path)
    else:
        _emit(corpus.dump_dataset(sample))
    return 0


def _open_cache(cfg: dict) -> ExplanationCache:
    return ExplanationCache(resolve_cache_path(cfg.get("cache_path")))


def cmd_explain(args) -> int:
    cfg = resolve_config(args)
    persist_resolved(cfg, args.out)
    data = args.data or cfg.get("train_path")
    if not data:
        raise UsageError("explain needs --data or train_path in the config")
    dataset = corpus.parse_dataset(data, "train")
    backend = make_backend(BackendDescriptor.from_json(cfg["backend"]))
    explanations = generate_many(backend, get_template(cfg["prompt_version"]), dataset.examples, _open_cache(cfg))
    lines = "".join(json.dumps(e.to_json(), ensure_ascii=False) + "\n" for e in explanations)
    log.info("%d explanations, %d backend calls", len(explanations), backend.calls)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "explanations.jsonl").write_text(lines, encoding="utf-8")
    else:
        _emit(lines)
    return 0


def cmd_export_finetune(args) -> int:
    cfg = resolve_config(args)
    persist_resolved(cfg, args.out)
    if not args.data:
        raise UsageError("export-finetune needs --data (the seed corpus CSV)")
    seed_corpus = corpus.parse_dataset(args.data, "train")
    template = get_template(cfg["prompt_version"])
    if args.explanations:
        with open(args.explanations, encoding="utf-8") as f:
            explanations = [Explanation.from_json(json.loads(line)) for line in f if line.strip()]
        ref = str(args.explanations)
    else:
        cache = _open_cache(cfg)
        explanations = [e for e in (lookup_explanation(template, ex, cache) for ex in seed_corpus) if e]
        ref = str(cache.path)
    spec = FinetuneJobSpec(seed_corpus_ref=str(args.data), explanation_corpus_ref=ref)
    out = Path(args.out or ".") / "finetune_job.json"
    export_finetune_job(spec, list(seed_corpus), explanations, out, template)
    log.info("wrote %s", out)
    return 0


def _texts_for(cfg: dict, dataset: corpus.Dataset, offline: bool) -> list[str]:
    if cfg["mode"] not in pipeline.MODES:
        raise ValidationError(f"mode must be one of {pipeline.MODES}, got {cfg['mode']!r}")
    if cfg["mode"] == pipeline.TEXT_ONLY:
        return [ex.text for ex in dataset]
    template = get_template(cfg["prompt_version"])
    cache = _open_cache(cfg)
    if offline:
        explanations = {}
        for ex in dataset:
            hit = lookup_explanation(template, ex, cache)
            if hit is None:
                raise DataError(f"no cached explanation for example {ex.id!r}")
            explanations[ex.id] = hit.text
    else:
        backend = make_backend(BackendDescriptor.from_json(cfg["backend"]))
        explanations = {e.example_id: e.text for e in generate_many(backend, template, dataset.examples, cache)}
    return [pipeline.augment_example(ex.text, explanations[ex.id], ex.id) for ex in dataset]


def cmd_train(args) -> int:
    cfg = resolve_config(args)
    persist_resolved(cfg, args.out)
    data = args.data or cfg.get("train_path")
    if not data:
        raise UsageError("train needs --data or train_path in the config")
    if cfg["classifier"].get("backend", "reference") != "reference":
        raise UsageError("only the reference classifier can be trained and saved from the CLI")
    dataset = corpus.parse_dataset(data, "train")
    texts = _texts_for(cfg, dataset, offline=False)
    train_config = TrainConfig.from_dict(cfg["train"])
    clf = ReferenceClassifier()
    clf.fit(texts, [ex.labels for ex in dataset], train_config)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    save_model(out / "model.json", clf.model, train_config)
    log.info("final epoch loss %.6f; model written to %s", clf.history[-1], out / "model.json")
    return 0


def cmd_predict(args) -> int:
    cfg = resolve_config(args)
    persist_resolved(cfg, args.out)
    if not args.model:
        raise UsageError("predict needs --model")
    data = args.data or cfg.get("test_path")
    if not data:
        raise UsageError("predict needs --data or test_path in the config")
    model, train_config = load_model(args.model)
    dataset = corpus.parse_dataset(data, "test")
    # explanations at predict time must already exist; no silent fallback
    texts = _texts_for(cfg, dataset, offline=not args.generate)
    probs = predict_texts(model, texts, train_config)
    records = make_records([ex.id for ex in dataset], probs, train_config.threshold)
    if args.out:
        pipeline.write_predictions(Path(args.out) / "predictions.jsonl", records)
    else:
        _emit("".join(json.dumps(r.to_json()) + "\n" for r in records))
    return 0


def cmd_evaluate(args) -> int:
    if not args.data or not args.predictions:
        raise UsageError("evaluate needs --data (gold CSV) and --predictions")
    dataset = corpus.parse_dataset(args.data, "test")
    records = {r.example_id: r for r in pipeline.read_predictions(args.predictions)}
    missing = [ex.id for ex in dataset if ex.id not in records]
    extra = sorted(set(records) - {ex.id for ex in dataset})
    if missing or extra:
        raise ValidationError(
            f"predictions do not match gold ids (missing {missing[:5]}, unknown {extra[:5]})")
    metrics = evaluate([ex.labels for ex in dataset], [records[ex.id].decisions for ex in dataset])
    if args.out:
        pipeline.write_json(Path(args.out) / "metrics.json", metrics.to_json())
    _emit(metrics.dumps())
    return 0


def method_name(mode: str, cfg: dict) -> str:
    classifier = cfg["classifier"].get("backend", "reference")
    if mode == pipeline.TEXT_ONLY:
        return f"Text Only ({classifier})"
    return f"Text + Exp ({cfg['backend']['backend_id']}) + {classifier}"


def write_reports(out: Path, methods: list[dict], fmt: str) -> str:
    results = []
    for m in methods:
        agg = pipeline.RunAggregate.from_json(json.loads((out / m["dir"] / "aggregate.json").read_text("utf-8")))
        results.append((m["method"], agg))
    overall = report.overall_table(results)
    per_emotion = report.per_emotion_table([(name, report.per_label_means(agg)) for name, agg in results])
    md = "# Overall performance\n\n" + overall.to_markdown() + "\n# Per-emotion performance\n\n" + per_emotion.to_markdown()
    (out / "report.md").write_text(md, encoding="utf-8")
    (out / "report.csv").write_text(overall.to_csv(), encoding="utf-8")
    (out / "report_per_emotion.csv").write_text(per_emotion.to_csv(), encoding="utf-8")
    return md if fmt == "md" else overall.to_csv() + "\n" + per_emotion.to_csv()


def cmd_run(args) -> int:
    cfg = resolve_config(args)
    if not args.out:
        raise UsageError("run needs --out")
    out = Path(args.out)
    persist_resolved(cfg, args.out)
    base = experiment_config(cfg)
    cache = ExplanationCache(resolve_cache_path(base.cache_path))
    methods = []
    explained = None
    for mode in (pipeline.TEXT_ONLY, pipeline.TEXT_PLUS_EXPLANATION):
        exp_cfg = replace(base, mode=mode)
        data = pipeline.prepare(exp_cfg, cache=cache)
        agg, results = pipeline.run_multi(exp_cfg, data=data)
        pipeline.write_run_outputs(out / mode, agg, results)
        methods.append({"mode": mode, "method": method_name(mode, cfg), "dir": mode})
        log.info("%s: macro F1 %.4f ± %.4f", mode, agg.mean("macro_f1"), agg.std("macro_f1"))
        if mode == pipeline.TEXT_PLUS_EXPLANATION:
            explained = (data, results[0])
    pipeline.write_json(out / "methods.json", methods)
    text = write_reports(out, methods, args.format)
    data, first = explained
    buckets = report.error_analysis(data.test, first.predictions, data.explanations, base.train.threshold)
    report.write_error_reports(out, buckets)
    _emit(text)
    return 0


def cmd_report(args) -> int:
    if not args.out:
        raise UsageError("report needs --out pointing at a finished run directory")
    out = Path(args.out)
    methods = json.loads((out / "methods.json").read_text(encoding="utf-8"))
    _emit(write_reports(out, methods, args.format))
    return 0


HANDLERS = {
    "stats": cmd_stats,
    "sample-seed": cmd_sample_seed,
    "explain": cmd_explain,
    "export-finetune": cmd_export_finetune,
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "run": cmd_run,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="experiment config JSON")
    common.add_argument("--data", help="dataset CSV")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--mode", choices=pipeline.MODES)
    common.add_argument("--backend", help="explanation backend name")
    common.add_argument("--format", choices=("md", "csv"), default="md")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="dotted config override, e.g. train.epochs=5 (repeatable)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="lotus", description="Explain-then-classify multi-label emotion harness.")
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND", parser_class=_Parser)
    sub.add_parser("stats", parents=[common], help="label distribution of a split").add_argument(
        "--split", default="train", choices=corpus.SPLITS)
    p = sub.add_parser("sample-seed", parents=[common], help="draw the explanation seed corpus")
    p.add_argument("--n", type=int, default=150)
    sub.add_parser("explain", parents=[common], help="generate and cache explanations")
    p = sub.add_parser("export-finetune", parents=[common], help="write the generator fine-tune job")
    p.add_argument("--explanations", help="explanations JSONL (default: look up the cache)")
    sub.add_parser("train", parents=[common], help="train the reference classifier")
    p = sub.add_parser("predict", parents=[common], help="predict with a saved model")
    p.add_argument("--model", help="model.json written by train")
    p.add_argument("--generate", action="store_true", help="call the backend for uncached explanations")
    p = sub.add_parser("evaluate", parents=[common], help="score predictions against gold labels")
    p.add_argument("--predictions", help="predictions JSONL")
    sub.add_parser("run", parents=[common], help="multi-run comparison of both modes plus reports")
    sub.add_parser("report", parents=[common], help="re-render tables of a finished run")
    return parser


def _exit_code(exc: BaseException) -> int:
    seen = exc
    while seen is not None:
        if isinstance(seen, BackendError):
            return 2
        seen = seen.cause if isinstance(seen, StageError) else seen.__cause__
    return 1


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        if not argv:
            parser.print_usage(sys.stderr)
            return 1
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 1
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                            format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
        return HANDLERS[args.command](args)
    except UsageError as e:
        print(e, file=sys.stderr)
        return 1
    except (LotusError, ValueError, OSError, KeyError, json.JSONDecodeError) as e:
        print(f"lotus: error: {e}", file=sys.stderr)
        return _exit_code(e)


if __name__ == "__main__":
    sys.exit(main())
