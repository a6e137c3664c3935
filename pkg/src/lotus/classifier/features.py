"""Tokenisation and hashed n-gram featurisation."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from lotus.classifier import _kernels
from lotus.hashing import fnv1a64

MAX_TOKENS = 512

_SPLIT = re.compile(r"[^0-9a-z]+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on maximal runs of non-alphanumeric characters.

    "Alphanumeric" follows ``str.isalnum`` so non-ASCII letters and digits are
    kept inside tokens.
    """
    lowered = text.lower()
    if lowered.isascii():
        return [t for t in _SPLIT.split(lowered) if t]
    tokens: list[str] = []
    current: list[str] = []
    for ch in lowered:
        if ch.isalnum():
            current.append(ch)
        elif current:
            tokens.append("".join(current))
            current = []
    if current:
        tokens.append("".join(current))
    return tokens


def ngrams(tokens: Sequence[str], ngram_max: int) -> list[str]:
    if ngram_max not in (1, 2):
        raise ValueError(f"ngram_max must be 1 or 2, got {ngram_max}")
    grams = list(tokens)
    if ngram_max == 2:
        grams.extend(f"{a}_{b}" for a, b in zip(tokens, tokens[1:]))
    return grams


@dataclass(frozen=True)
class FeatureVector:
    """Sparse count vector; ``indices`` sorted ascending and unique."""

    indices: np.ndarray
    counts: np.ndarray
    dim: int

    def as_dict(self) -> dict[int, int]:
        return {int(i): int(c) for i, c in zip(self.indices, self.counts)}

    def __len__(self) -> int:
        return int(self.indices.shape[0])


@dataclass(frozen=True)
class FeatureMatrix:
    """CSR stack of feature vectors, one row per document."""

    indptr: np.ndarray
    indices: np.ndarray
    counts: np.ndarray
    dim: int

    @property
    def n_rows(self) -> int:
        return int(self.indptr.shape[0] - 1)

    def row(self, r: int) -> FeatureVector:
        lo, hi = self.indptr[r], self.indptr[r + 1]
        return FeatureVector(self.indices[lo:hi], self.counts[lo:hi], self.dim)


def featurize(tokens: Sequence[str], feature_dim: int, ngram_max: int = 2) -> FeatureVector:
    """Hash unigrams (and ``a_b`` bigrams) into ``feature_dim`` buckets with counts."""
    if feature_dim < 2:
        raise ValueError("feature_dim must be >= 2")
    acc: dict[int, int] = {}
    for gram in ngrams(tokens, ngram_max):
        i = fnv1a64(gram) % feature_dim
        acc[i] = acc.get(i, 0) + 1
    keys = sorted(acc)
    return FeatureVector(
        np.array(keys, dtype=np.int64),
        np.array([acc[k] for k in keys], dtype=np.int64),
        feature_dim,
    )


def featurize_texts(texts: Sequence[str], feature_dim: int, ngram_max: int = 2,
                    max_tokens: int = MAX_TOKENS) -> FeatureMatrix:
    """Batch featurisation of raw texts, hashing through the compiled kernel.

    Each text is tokenised and truncated to its first ``max_tokens`` tokens.
    Row ``r`` equals ``featurize(tokenize(texts[r])[:max_tokens], ...)``.
    """
    if feature_dim < 2:
        raise ValueError("feature_dim must be >= 2")
    per_doc: list[int] = []
    encoded: list[bytes] = []
    for text in texts:
        grams = ngrams(tokenize(text)[:max_tokens], ngram_max)
        per_doc.append(len(grams))
        encoded.extend(g.encode("utf-8") for g in grams)

    n = len(per_doc)
    lengths = np.fromiter((len(b) for b in encoded), dtype=np.int64, count=len(encoded))
    offsets = np.zeros(len(encoded) + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    buf = np.frombuffer(b"".join(encoded), dtype=np.uint8) if encoded else np.zeros(0, dtype=np.uint8)
    hashes = _kernels.fnv1a64_many(buf, offsets)
    buckets = (hashes % np.uint64(feature_dim)).astype(np.int64)

    rows = np.repeat(np.arange(n, dtype=np.int64), per_doc)
    keys, counts = np.unique(rows * feature_dim + buckets, return_counts=True)
    key_rows = keys // feature_dim
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(key_rows, minlength=n), out=indptr[1:])
    return FeatureMatrix(indptr, keys % feature_dim, counts.astype(np.int64), feature_dim)
