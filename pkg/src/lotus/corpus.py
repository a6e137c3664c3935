"""Dataset ingestion, validation, class distribution and seed-corpus sampling."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from lotus.errors import SchemaError, ValidationError
from lotus.rng import permutation

EMOTIONS: tuple[str, ...] = ("anger", "fear", "joy", "sadness", "surprise")
HEADER: tuple[str, ...] = ("id", "text", *EMOTIONS)
SPLITS = ("train", "dev", "test")


@dataclass(frozen=True)
class EmotionLabelSet:
    """Five binary flags in the canonical ``EMOTIONS`` order."""

    flags: tuple[int, ...]

    def __post_init__(self):
        flags = tuple(self.flags)
        if len(flags) != len(EMOTIONS):
            raise ValidationError(f"expected {len(EMOTIONS)} flags, got {len(flags)}")
        for f in flags:
            # bool is an int subclass; reject it along with anything not exactly 0/1
            if type(f) is not int or f not in (0, 1):
                raise ValidationError(f"label flags must be 0 or 1, got {f!r}")
        object.__setattr__(self, "flags", flags)

    @classmethod
    def of(cls, *flags: int) -> "EmotionLabelSet":
        return cls(tuple(flags))

    @classmethod
    def from_names(cls, names: Iterable[str]) -> "EmotionLabelSet":
        names = set(names)
        unknown = names - set(EMOTIONS)
        if unknown:
            raise ValidationError(f"unknown emotion(s): {sorted(unknown)}")
        return cls(tuple(int(e in names) for e in EMOTIONS))

    def __getitem__(self, k: int) -> int:
        return self.flags[k]

    def __iter__(self):
        return iter(self.flags)

    def __len__(self) -> int:
        return len(self.flags)

    def names(self) -> list[str]:
        return [e for e, f in zip(EMOTIONS, self.flags) if f]

    def as_dict(self) -> dict[str, int]:
        return dict(zip(EMOTIONS, self.flags))


@dataclass(frozen=True)
class LabeledExample:
    id: str
    text: str
    labels: EmotionLabelSet

    def __post_init__(self):
        if not self.id:
            raise ValidationError("example id must be non-empty")
        if not self.text.strip():
            raise ValidationError(f"example {self.id!r}: text is empty")


@dataclass(frozen=True)
class Dataset:
    split_name: str
    examples: tuple[LabeledExample, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "examples", tuple(self.examples))
        seen: set[str] = set()
        for ex in self.examples:
            if ex.id in seen:
                raise ValidationError(f"duplicate id {ex.id!r} in split {self.split_name!r}")
            seen.add(ex.id)

    def __len__(self) -> int:
        return len(self.examples)

    def __iter__(self):
        return iter(self.examples)

    def by_id(self) -> dict[str, LabeledExample]:
        return {ex.id: ex for ex in self.examples}


@dataclass(frozen=True)
class DistributionStats:
    per_label_positive_count: tuple[int, ...]
    total_examples: int
    split: str = ""

    def to_json(self) -> dict:
        return {
            "split": self.split,
            "total": self.total_examples,
            "counts": dict(zip(EMOTIONS, self.per_label_positive_count)),
        }


def _parse_flag(raw: str, column: str, row: int) -> int:
    if raw not in ("0", "1"):
        raise ValidationError(f"row {row}: column {column!r} must be 0 or 1, got {raw!r}")
    return int(raw)


def read_dataset(stream: io.TextIOBase, split_name: str, source: str = "<stream>") -> Dataset:
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError(f"{source}: missing header line") from None
    for pos, expected in enumerate(HEADER):
        if pos >= len(header) or header[pos] != expected:
            got = header[pos] if pos < len(header) else "<missing>"
            raise SchemaError(f"{source}: header column {pos + 1} must be {expected!r}, got {got!r}")
    if len(header) > len(HEADER):
        raise SchemaError(f"{source}: unexpected extra column {header[len(HEADER)]!r}")

    examples: list[LabeledExample] = []
    seen: dict[str, int] = {}
    # records are numbered from 1 with the header as record 1
    for row_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(HEADER):
            raise ValidationError(f"{source}: row {row_no}: expected {len(HEADER)} fields, got {len(row)}")
        ex_id, text = row[0], row[1]
        flags = tuple(_parse_flag(v, c, row_no) for v, c in zip(row[2:], EMOTIONS))
        if not ex_id:
            raise ValidationError(f"{source}: row {row_no}: empty id")
        if ex_id in seen:
            raise ValidationError(f"{source}: row {row_no}: duplicate id {ex_id!r} (first at row {seen[ex_id]})")
        if not text.strip():
            raise ValidationError(f"{source}: row {row_no}: empty text")
        seen[ex_id] = row_no
        examples.append(LabeledExample(ex_id, text, EmotionLabelSet(flags)))
    return Dataset(split_name, tuple(examples))


def parse_dataset(path: str | Path, split_name: str) -> Dataset:
    """Parse a ``id,text,anger,fear,joy,sadness,surprise`` CSV file.

    RFC-4180 quoting, UTF-8 (an optional BOM is tolerated), LF or CRLF line ends.
    """
    path = Path(path)
    with path.open("r", encoding="utf-8-sig", newline="") as f:
        return read_dataset(f, split_name, source=str(path))


def dump_dataset(dataset: Dataset | Sequence[LabeledExample]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for ex in dataset:
        writer.writerow([ex.id, ex.text, *ex.labels.flags])
    return buf.getvalue()


def write_dataset(dataset: Dataset | Sequence[LabeledExample], path: str | Path) -> Path:
    path = Path(path)
    path.write_text(dump_dataset(dataset), encoding="utf-8", newline="")
    return path


def label_distribution(dataset: Dataset | Sequence[LabeledExample]) -> DistributionStats:
    counts = [0] * len(EMOTIONS)
    total = 0
    for ex in dataset:
        total += 1
        for k, flag in enumerate(ex.labels.flags):
            counts[k] += flag
    split = dataset.split_name if isinstance(dataset, Dataset) else ""
    return DistributionStats(tuple(counts), total, split)


def stats_json(stats: DistributionStats) -> str:
    return json.dumps(stats.to_json(), indent=2)


def sample_seed_corpus(dataset: Dataset | Sequence[LabeledExample], n: int, seed: int) -> list[LabeledExample]:
    """Draw ``n`` distinct examples uniformly without replacement.

    The draw shuffles the index list with ``lotus.rng`` and keeps the first
    ``n`` positions, so the result only depends on ``(dataset order, n, seed)``.
    """
    examples = list(dataset)
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if n > len(examples):
        raise ValueError(f"cannot sample {n} examples from a dataset of {len(examples)}")
    order = permutation(len(examples), seed)
    return [examples[i] for i in order[:n]]
