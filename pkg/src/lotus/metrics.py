"""Multi-label evaluation: confusion counts, P/R/F1, macro and micro averages.

Zero-division rule: whenever a denominator is zero the metric is 0. This
matters for sparse labels, where a label that is never predicted scores
precision 0 rather than being skipped or counted as 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

from lotus.corpus import EMOTIONS, EmotionLabelSet
from lotus.errors import ValidationError


@dataclass(frozen=True)
class LabelCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class ConfusionCounts:
    per_label: tuple[LabelCounts, ...]

    def __getitem__(self, key: int | str) -> LabelCounts:
        if isinstance(key, str):
            key = EMOTIONS.index(key)
        return self.per_label[key]

    def to_json(self) -> dict:
        return {e: {"tp": c.tp, "fp": c.fp, "fn": c.fn, "tn": c.tn} for e, c in zip(EMOTIONS, self.per_label)}


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float

    def to_json(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}


@dataclass(frozen=True)
class MetricsReport:
    per_label: dict[str, PRF]
    macro: PRF
    micro: PRF
    counts: ConfusionCounts

    def to_json(self) -> dict:
        return {
            "per_label": {e: self.per_label[e].to_json() for e in EMOTIONS},
            "macro": self.macro.to_json(),
            "micro": self.micro.to_json(),
            "counts": self.counts.to_json(),
        }

    def dumps(self) -> str:
        # json uses repr for floats, i.e. full round-trip precision
        return json.dumps(self.to_json(), indent=2) + "\n"

    def scalars(self) -> dict[str, float]:
        """Flat ``{"macro_f1": ..., "anger_precision": ...}`` view used for aggregation."""
        out: dict[str, float] = {}
        for scope, prf_ in (("macro", self.macro), ("micro", self.micro)):
            for name, value in prf_.to_json().items():
                out[f"{scope}_{name}"] = value
        for e in EMOTIONS:
            for name, value in self.per_label[e].to_json().items():
                out[f"{e}_{name}"] = value
        return out

    @classmethod
    def from_json(cls, d: dict) -> "MetricsReport":
        per_label = {e: PRF(**d["per_label"][e]) for e in EMOTIONS}
        counts = ConfusionCounts(tuple(LabelCounts(**d["counts"][e]) for e in EMOTIONS))
        return cls(per_label, PRF(**d["macro"]), PRF(**d["micro"]), counts)


def confusion(gold: Sequence[EmotionLabelSet], pred: Sequence[EmotionLabelSet]) -> ConfusionCounts:
    if len(gold) != len(pred):
        raise ValueError(f"gold and pred differ in length ({len(gold)} vs {len(pred)})")
    cells = [[0, 0, 0, 0] for _ in EMOTIONS]  # tp, fp, fn, tn
    for g_row, p_row in zip(gold, pred):
        for k, (g, p) in enumerate(zip(g_row, p_row)):
            if g and p:
                cells[k][0] += 1
            elif p:
                cells[k][1] += 1
            elif g:
                cells[k][2] += 1
            else:
                cells[k][3] += 1
    return ConfusionCounts(tuple(LabelCounts(*c) for c in cells))


def _div(num: float, den: float) -> float:
    return num / den if den else 0.0


def prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    if min(tp, fp, fn) < 0:
        raise ValidationError("confusion counts must be non-negative")
    p = _div(tp, tp + fp)
    r = _div(tp, tp + fn)
    return p, r, _div(2 * p * r, p + r)


def macro_micro(counts: ConfusionCounts) -> tuple[PRF, PRF]:
    per = [prf(c.tp, c.fp, c.fn) for c in counts.per_label]
    n = len(per)
    macro = PRF(*(math.fsum(col) / n for col in zip(*per)))
    micro = PRF(*prf(
        sum(c.tp for c in counts.per_label),
        sum(c.fp for c in counts.per_label),
        sum(c.fn for c in counts.per_label),
    ))
    return macro, micro


def evaluate(gold: Sequence[EmotionLabelSet], pred: Sequence[EmotionLabelSet]) -> MetricsReport:
    counts = confusion(gold, pred)
    per_label = {e: PRF(*prf(c.tp, c.fp, c.fn)) for e, c in zip(EMOTIONS, counts.per_label)}
    macro, micro = macro_micro(counts)
    return MetricsReport(per_label, macro, micro, counts)


def aggregate(values: Sequence[float]) -> tuple[float, float]:
    """Mean and sample standard deviation (divisor n-1; 0 for a single value)."""
    n = len(values)
    if n == 0:
        raise ValueError("cannot aggregate an empty list")
    if all(x == values[0] for x in values):
        return float(values[0]), 0.0
    mean = math.fsum(values) / n
    var = math.fsum((x - mean) ** 2 for x in values) / (n - 1)
    return mean, math.sqrt(var)
