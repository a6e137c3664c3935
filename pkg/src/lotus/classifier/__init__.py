"""Reference multi-label classifier: hashed n-grams, five sigmoid heads, BCE, SGD."""

from lotus.classifier.features import FeatureMatrix, FeatureVector, featurize, featurize_texts, tokenize
from lotus.classifier.model import (
    Gradient,
    ModelParams,
    PredictionRecord,
    TrainConfig,
    bce_loss_and_grad,
    decide,
    load_model,
    predict_proba,
    save_model,
    sigmoid,
)
from lotus.classifier.train import (
    ClassifierBackend,
    ReferenceClassifier,
    get_classifier,
    make_records,
    predict_texts,
    register_external,
    train,
    train_with_history,
)

__all__ = [
    "ClassifierBackend",
    "FeatureMatrix",
    "FeatureVector",
    "Gradient",
    "ModelParams",
    "PredictionRecord",
    "ReferenceClassifier",
    "TrainConfig",
    "bce_loss_and_grad",
    "decide",
    "featurize",
    "featurize_texts",
    "get_classifier",
    "load_model",
    "make_records",
    "predict_proba",
    "predict_texts",
    "register_external",
    "save_model",
    "sigmoid",
    "tokenize",
    "train",
    "train_with_history",
]
