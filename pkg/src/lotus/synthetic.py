"""Synthetic corpora with known structure, for end-to-end checks.

``keyword_dataset``
    Label k is on exactly when ``KEYWORDS[k]`` occurs as a token. Linearly
    separable on unigram features.
``latent_cue_dataset``
    Label k is on exactly when a token embeds the letter cue ``LATENT_CUES[k]``
    between random digit runs, e.g. ``4821qzv0093``. Every such token is
    unique, so the text alone carries no reusable signal, while
    ``stub_explain`` with ``LATENT_CUE_MAP`` (substring matching) turns each
    cue into a fixed clause.
"""

from __future__ import annotations

from lotus.corpus import EMOTIONS, EmotionLabelSet, LabeledExample
from lotus.rng import SplitMix64

FILLER = (
    "the", "a", "we", "they", "walked", "table", "window", "morning", "paper",
    "street", "train", "said", "looked", "around", "after", "before", "with",
    "blue", "green", "small", "large", "chair", "door", "road", "coffee",
    "phone", "meeting", "yesterday", "later", "then", "outside", "inside",
    "bag", "book", "car", "house", "river", "stone", "hill", "cloud",
)
KEYWORDS = ("furious", "terrified", "delighted", "grieving", "astonished")
LATENT_CUES = ("qzv", "jxk", "wvq", "kzj", "xqw")
LATENT_CUE_MAP = {
    "qzv": "mentions raised voices",
    "jxk": "senses looming danger",
    "wvq": "shares a bright moment",
    "kzj": "recalls a painful loss",
    "xqw": "meets an unexpected twist",
}


def _draw_labels(rng: SplitMix64, rate: float) -> tuple[int, ...]:
    return tuple(int(rng.random() < rate) for _ in EMOTIONS)


def _filler(rng: SplitMix64, lo: int, hi: int) -> list[str]:
    return [FILLER[rng.below(len(FILLER))] for _ in range(lo + rng.below(hi - lo + 1))]


def _insert(rng: SplitMix64, words: list[str], token: str) -> None:
    words.insert(rng.below(len(words) + 1), token)


def keyword_dataset(n: int, seed: int, rate: float = 0.3, prefix: str = "kw") -> list[LabeledExample]:
    rng = SplitMix64(seed)
    out = []
    for i in range(n):
        flags = _draw_labels(rng, rate)
        words = _filler(rng, 4, 10)
        for k, on in enumerate(flags):
            if on:
                _insert(rng, words, KEYWORDS[k])
        out.append(LabeledExample(f"{prefix}{i:05d}", " ".join(words) + ".", EmotionLabelSet(flags)))
    return out


def _digits(rng: SplitMix64, width: int) -> str:
    return "".join(str(rng.below(10)) for _ in range(width))


def latent_cue_dataset(n: int, seed: int, rate: float = 0.3, prefix: str = "lc") -> list[LabeledExample]:
    rng = SplitMix64(seed)
    out = []
    for i in range(n):
        flags = _draw_labels(rng, rate)
        words = _filler(rng, 4, 10)
        for k, on in enumerate(flags):
            if on:
                _insert(rng, words, _digits(rng, 4) + LATENT_CUES[k] + _digits(rng, 4))
        out.append(LabeledExample(f"{prefix}{i:05d}", " ".join(words) + ".", EmotionLabelSet(flags)))
    return out
