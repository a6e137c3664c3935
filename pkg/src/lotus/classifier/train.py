"""Mini-batch training of the reference model and the classifier backend registry."""

from __future__ import annotations

import logging
from typing import Callable, Iterable, Protocol, Sequence

import numpy as np

from lotus.classifier import _kernels
from lotus.classifier.features import featurize_texts
from lotus.classifier.model import (
    N_LABELS,
    ModelParams,
    PredictionRecord,
    TrainConfig,
    decide,
)
from lotus.corpus import EmotionLabelSet
from lotus.errors import ValidationError
from lotus.rng import permutation

log = logging.getLogger(__name__)

TextTransform = Callable[[str], str]


def _identity(text: str) -> str:
    return text


def label_matrix(labels: Iterable[EmotionLabelSet]) -> np.ndarray:
    rows = [tuple(lab) for lab in labels]
    return np.asarray(rows, dtype=np.float64).reshape(len(rows), N_LABELS)


def train_with_history(dataset: Sequence[tuple[str, EmotionLabelSet]], config: TrainConfig,
                       text_transform: TextTransform | None = None) -> tuple[ModelParams, list[float]]:
    """Train and also return the mean training loss of every epoch."""
    if not dataset:
        raise ValueError("cannot train on an empty dataset")
    transform = text_transform or _identity
    texts = [transform(text) for text, _ in dataset]
    fm = featurize_texts(texts, config.feature_dim, config.ngram_max)
    targets = label_matrix(lab for _, lab in dataset)

    model = ModelParams.zeros(config.feature_dim)
    history: list[float] = []
    for epoch in range(config.epochs):
        order = np.asarray(permutation(len(texts), config.seed ^ epoch), dtype=np.int64)
        loss = _kernels.sgd_epoch(fm.indptr, fm.indices, fm.counts, targets, order,
                                  model.weights, model.bias, float(config.learning_rate),
                                  int(config.batch_size))
        history.append(float(loss))
        if not model.is_finite():
            raise FloatingPointError(f"non-finite parameters after epoch {epoch}")
        log.debug("epoch %d loss %.6f", epoch, loss)
    return model, history


def train(dataset: Sequence[tuple[str, EmotionLabelSet]], config: TrainConfig,
          text_transform: TextTransform | None = None) -> ModelParams:
    """Fit the reference model with plain mini-batch SGD.

    Epoch ``e`` visits examples in the order ``permutation(n, config.seed ^ e)``.
    ``text_transform`` is applied to every text before tokenisation.
    """
    return train_with_history(dataset, config, text_transform)[0]


def predict_texts(model: ModelParams, texts: Sequence[str], config: TrainConfig) -> np.ndarray:
    fm = featurize_texts(texts, config.feature_dim, config.ngram_max)
    return _kernels.csr_proba(fm.indptr, fm.indices, fm.counts, model.weights, model.bias)


def make_records(ids: Sequence[str], probabilities: np.ndarray, threshold: float) -> list[PredictionRecord]:
    return [
        PredictionRecord(ex_id, tuple(float(p) for p in row), decide(row, threshold))
        for ex_id, row in zip(ids, probabilities)
    ]


class ClassifierBackend(Protocol):
    """Contract shared by the reference model and external (transformer) adapters.

    Texts arrive already augmented; adapters must not transform them again.
    """

    name: str

    def fit(self, texts: Sequence[str], labels: Sequence[EmotionLabelSet], config: TrainConfig) -> None: ...

    def predict_proba(self, texts: Sequence[str]) -> np.ndarray: ...


class ReferenceClassifier:
    name = "reference"

    def __init__(self):
        self.model: ModelParams | None = None
        self.config: TrainConfig | None = None
        self.history: list[float] = []

    def fit(self, texts, labels, config):
        self.config = config
        self.model, self.history = train_with_history(list(zip(texts, labels)), config)

    def predict_proba(self, texts):
        if self.model is None or self.config is None:
            raise RuntimeError("classifier is not fitted")
        return predict_texts(self.model, texts, self.config)


_EXTERNAL: dict[str, Callable[[], ClassifierBackend]] = {}


def register_external(name: str, factory: Callable[[], ClassifierBackend]) -> None:
    _EXTERNAL[name] = factory


def get_classifier(spec: str) -> ClassifierBackend:
    """Resolve ``classifier.backend``: ``reference`` or ``external:<name>``."""
    if spec == "reference":
        return ReferenceClassifier()
    if spec.startswith("external:"):
        name = spec.split(":", 1)[1]
        try:
            return _EXTERNAL[name]()
        except KeyError:
            raise ValidationError(
                f"no external classifier registered as {name!r} (known: {sorted(_EXTERNAL)})"
            ) from None
    raise ValidationError(f"classifier.backend must be 'reference' or 'external:<name>', got {spec!r}")
