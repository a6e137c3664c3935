"""Parameters, inference, loss and persistence of the reference classifier.

The model is five independent logistic heads over hashed n-gram counts:
``p_k = sigmoid(bias_k + sum_i x_i * W[i, k])``, trained with per-head binary
cross-entropy.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from lotus.classifier._kernels import PROB_CLAMP
from lotus.classifier.features import FeatureVector
from lotus.corpus import EMOTIONS, EmotionLabelSet
from lotus.errors import ValidationError

N_LABELS = len(EMOTIONS)
MODEL_FORMAT = "lotus-reference-model/1"

# learning-rate profile for transformer backends; the reference model uses 0.1
EXTERNAL_LEARNING_RATE = 5e-5
REFERENCE_LEARNING_RATE = 0.1


@dataclass(frozen=True)
class TrainConfig:
    feature_dim: int = 2 ** 18
    ngram_max: int = 2
    batch_size: int = 8
    learning_rate: float = REFERENCE_LEARNING_RATE
    epochs: int = 3
    seed: int = 0
    threshold: float = 0.5

    def __post_init__(self):
        if self.feature_dim < 2:
            raise ValidationError(f"feature_dim must be >= 2, got {self.feature_dim}")
        if self.ngram_max not in (1, 2):
            raise ValidationError(f"ngram_max must be 1 or 2, got {self.ngram_max}")
        if self.batch_size < 1:
            raise ValidationError(f"batch_size must be positive, got {self.batch_size}")
        if not (self.learning_rate > 0 and math.isfinite(self.learning_rate)):
            raise ValidationError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.epochs < 1:
            raise ValidationError(f"epochs must be positive, got {self.epochs}")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValidationError(f"threshold must lie in [0, 1], got {self.threshold}")

    @classmethod
    def external_profile(cls, **overrides) -> "TrainConfig":
        """Defaults for transformer backends: batch 8, lr 5e-5, 3 epochs."""
        return replace(cls(learning_rate=EXTERNAL_LEARNING_RATE, epochs=3, batch_size=8), **overrides)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ValidationError(f"unknown train config key(s): {sorted(extra)}")
        return cls(**d)


@dataclass
class ModelParams:
    weights: np.ndarray  # (feature_dim, 5) float64
    bias: np.ndarray = field(default_factory=lambda: np.zeros(N_LABELS))

    @classmethod
    def zeros(cls, feature_dim: int) -> "ModelParams":
        return cls(np.zeros((feature_dim, N_LABELS)), np.zeros(N_LABELS))

    @property
    def feature_dim(self) -> int:
        return int(self.weights.shape[0])

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.weights).all() and np.isfinite(self.bias).all())

    def copy(self) -> "ModelParams":
        return ModelParams(self.weights.copy(), self.bias.copy())

    def tobytes(self) -> bytes:
        return self.weights.tobytes() + self.bias.tobytes()


@dataclass(frozen=True)
class PredictionRecord:
    example_id: str
    probabilities: tuple[float, ...]
    decisions: EmotionLabelSet

    def to_json(self) -> dict:
        return {
            "id": self.example_id,
            "probabilities": dict(zip(EMOTIONS, self.probabilities)),
            "decisions": self.decisions.as_dict(),
        }

    @classmethod
    def from_json(cls, d: dict) -> "PredictionRecord":
        probs = tuple(float(d["probabilities"][e]) for e in EMOTIONS)
        flags = tuple(int(d["decisions"][e]) for e in EMOTIONS)
        return cls(str(d["id"]), probs, EmotionLabelSet(flags))


@dataclass
class Gradient:
    """Gradient restricted to the weight rows the example touches."""

    rows: np.ndarray  # feature indices
    weights: np.ndarray  # (len(rows), 5)
    bias: np.ndarray  # (5,)


def sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def logits(model: ModelParams, fv: FeatureVector) -> np.ndarray:
    z = np.zeros(N_LABELS)
    for i, c in zip(fv.indices, fv.counts):
        z += float(c) * model.weights[i]
    return z + model.bias


def predict_proba(model: ModelParams, fv: FeatureVector) -> np.ndarray:
    return np.array([sigmoid(z) for z in logits(model, fv)])


def bce_loss_and_grad(model: ModelParams, fv: FeatureVector,
                      labels: EmotionLabelSet | Sequence[int]) -> tuple[float, Gradient]:
    y = np.asarray(tuple(labels), dtype=np.float64)
    p = predict_proba(model, fv)
    pc = np.clip(p, PROB_CLAMP, 1.0 - PROB_CLAMP)
    loss = float(-(y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc)).sum())
    dz = p - y
    grad_w = fv.counts.astype(np.float64)[:, None] * dz[None, :]
    return loss, Gradient(fv.indices.copy(), grad_w, dz)


def decide(probabilities: Sequence[float], threshold: float = 0.5) -> EmotionLabelSet:
    if not 0.0 <= threshold <= 1.0:
        raise ValidationError(f"threshold must lie in [0, 1], got {threshold}")
    return EmotionLabelSet(tuple(int(p >= threshold) for p in probabilities))


# ---------------------------------------------------------------- persistence


def save_model(path: str | Path, model: ModelParams, config: TrainConfig) -> Path:
    """Write non-zero weight rows, biases and the training config as JSON.

    Floats are written with ``repr`` precision so loading restores them exactly.
    """
    rows = np.nonzero(np.any(model.weights != 0.0, axis=1))[0]
    payload = {
        "format": MODEL_FORMAT,
        "feature_dim": model.feature_dim,
        "ngram_max": config.ngram_max,
        "labels": list(EMOTIONS),
        "bias": [float(b) for b in model.bias],
        "rows": [int(r) for r in rows],
        "weights": [[float(v) for v in model.weights[r]] for r in rows],
        "train_config": config.to_dict(),
    }
    path = Path(path)
    path.write_text(json.dumps(payload) + "\n", encoding="utf-8")
    return path


def load_model(path: str | Path) -> tuple[ModelParams, TrainConfig]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != MODEL_FORMAT:
        raise ValidationError(f"{path}: unsupported model format {payload.get('format')!r}")
    if payload.get("labels") != list(EMOTIONS):
        raise ValidationError(f"{path}: label order mismatch")
    config = TrainConfig.from_dict(payload["train_config"])
    dim = int(payload["feature_dim"])
    if dim != config.feature_dim or int(payload["ngram_max"]) != config.ngram_max:
        raise ValidationError(f"{path}: header disagrees with stored train config")
    model = ModelParams.zeros(dim)
    if payload["rows"]:
        model.weights[np.asarray(payload["rows"], dtype=np.int64)] = np.asarray(payload["weights"], dtype=np.float64)
    model.bias[:] = np.asarray(payload["bias"], dtype=np.float64)
    return model, config
