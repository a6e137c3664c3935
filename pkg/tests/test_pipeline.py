import json

import pytest

from lotus import pipeline
from lotus.classifier import TrainConfig
from lotus.errors import DataError, StageError, ValidationError
from lotus.explainer import STUB_DESCRIPTOR, BackendDescriptor, ExplanationCache, StubBackend
from lotus.explainer.backends import Backend
from lotus.pipeline import (
    TEXT_ONLY,
    TEXT_PLUS_EXPLANATION,
    ExperimentConfig,
    augment_example,
    prepare,
    run_experiment,
    run_multi,
)
from lotus.synthetic import LATENT_CUE_MAP, keyword_dataset

from conftest import write_split_pair

SMALL = TrainConfig(feature_dim=4096, epochs=3)


class Exploding(Backend):
    def __init__(self):
        super().__init__(BackendDescriptor("exploding", "stub"))

    def _invoke(self, prompt, text, example_id):
        raise AssertionError("backend must not be called")


@pytest.fixture
def small_splits(tmp_path):
    return write_split_pair(tmp_path, keyword_dataset(60, 3), 40, "small")


def config(splits, **kw):
    train, test = splits
    return ExperimentConfig(train_path=str(train), test_path=str(test), train=SMALL, **kw)


def test_augment_examples(appendix_dataset, appendix_explanations):
    assert augment_example("a ", "b") == "a  b"
    assert augment_example("Dad on the warpath.", "X.") == "Dad on the warpath. X."
    first = appendix_dataset.by_id()["t4-1"]
    exp = {e.example_id: e.text for e in appendix_explanations}["t4-1"]
    assert augment_example(first.text, exp) == first.text + " " + exp
    with pytest.raises(DataError, match="t4-1"):
        augment_example(first.text, "", "t4-1")


def test_text_only_never_touches_backend(small_splits):
    backend = Exploding()
    result = run_experiment(config(small_splits, mode=TEXT_ONLY), 0, backend=backend, cache=ExplanationCache())
    assert backend.calls == 0
    assert len(result.predictions) == 20


def test_explanation_mode_uses_augmented_text(small_splits):
    cache = ExplanationCache()
    data = prepare(config(small_splits), backend=StubBackend(), cache=cache)
    for ex, text in zip(data.train, data.train_texts):
        assert text == ex.text + " " + data.explanations[ex.id]
    assert len(cache) == len({ex.text for ex in list(data.train) + list(data.test)})


def test_offline_missing_explanation_is_error(small_splits):
    with pytest.raises(StageError) as info:
        prepare(config(small_splits), cache=ExplanationCache(), offline=True)
    assert isinstance(info.value.cause, DataError)
    assert info.value.stage == "explain train"


def test_runs_are_deterministic(small_splits):
    cfg = config(small_splits)
    cache = ExplanationCache()
    a = run_experiment(cfg, 5, cache=cache)
    b = run_experiment(cfg, 5, cache=cache)
    assert [r.to_json() for r in a.predictions] == [r.to_json() for r in b.predictions]
    assert a.metrics.to_json() == b.metrics.to_json()


def test_run_multi_aggregates_per_seed_results(small_splits):
    cfg = config(small_splits, run_seeds=(0, 1, 2))
    agg, results = run_multi(cfg, cache=ExplanationCache())
    assert [r.seed for r in results] == [0, 1, 2]
    assert agg.n_runs == 3 and agg.seeds == (0, 1, 2)
    vals = [r.metrics.macro.f1 for r in results]
    assert agg.mean("macro_f1") == pytest.approx(sum(vals) / 3, abs=1e-12)
    threaded, _ = run_multi(cfg, cache=ExplanationCache(), workers=3)
    assert threaded.to_json() == agg.to_json()


def test_single_seed_has_zero_std(small_splits):
    agg, _ = run_multi(config(small_splits, run_seeds=(7,)), cache=ExplanationCache())
    assert all(std == 0.0 for _, std in agg.metrics.values())


def test_config_validation(small_splits):
    with pytest.raises(ValidationError):
        config(small_splits, run_seeds=(1, 1))
    with pytest.raises(ValidationError):
        config(small_splits, run_seeds=())
    with pytest.raises(ValidationError):
        config(small_splits, mode="both")
    with pytest.raises(ValidationError):
        ExperimentConfig.from_json({"train_path": "a", "test_path": "b", "epochs": 3})
    with pytest.raises(ValidationError):
        ExperimentConfig.from_json({"train_path": "a"})


def test_config_json_round_trip_and_relative_paths(tmp_path):
    cfg_path = tmp_path / "exp" / "config.json"
    cfg_path.parent.mkdir()
    cfg_path.write_text(json.dumps({
        "train_path": "data/train.csv", "test_path": "/abs/test.csv", "run_seeds": [3, 4],
        "backends": {"latent": {"backend_id": "latent", "kind": "stub", "cue_map": LATENT_CUE_MAP}},
        "train": {"epochs": 5}, "classifier": {"backend": "reference"},
    }))
    cfg = pipeline.load_config(cfg_path)
    assert cfg.train_path == str(tmp_path / "exp" / "data" / "train.csv")
    assert cfg.test_path == "/abs/test.csv"
    assert cfg.train.epochs == 5 and cfg.train.learning_rate == 0.1
    assert cfg.with_backend("latent").backend.cue_map == LATENT_CUE_MAP
    assert cfg.with_backend("stub").backend == STUB_DESCRIPTOR
    with pytest.raises(ValidationError):
        cfg.with_backend("nope")
    assert ExperimentConfig.from_json(cfg.to_json()) == cfg


def test_failing_seed_is_named(small_splits, monkeypatch):
    cfg = config(small_splits, run_seeds=(0, 13))
    real = pipeline.run_prepared

    def flaky(data, config, seed):
        if seed == 13:
            raise DataError("boom")
        return real(data, config, seed)

    monkeypatch.setattr(pipeline, "run_prepared", flaky)
    with pytest.raises(StageError, match="seed=13"):
        run_multi(cfg, cache=ExplanationCache())


def test_write_and_read_run_outputs(small_splits, tmp_path):
    agg, results = run_multi(config(small_splits, run_seeds=(0, 1)), cache=ExplanationCache())
    paths = pipeline.write_run_outputs(tmp_path / "out", agg, results)
    assert {p.name for p in paths} == {"predictions_0.jsonl", "predictions_1.jsonl", "metrics_0.json",
                                       "metrics_1.json", "aggregate.json"}
    back = pipeline.read_predictions(tmp_path / "out" / "predictions_1.jsonl")
    assert [r.to_json() for r in back] == [r.to_json() for r in results[1].predictions]
    loaded = pipeline.RunAggregate.from_json(json.loads((tmp_path / "out" / "aggregate.json").read_text()))
    assert loaded == agg
