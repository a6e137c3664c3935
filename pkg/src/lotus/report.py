"""Result tables and false-positive / false-negative error reports.

Markdown column headers
-----------------------
overall table:    ``Method | Macro P | Macro R | Macro F1 | Micro P | Micro R | Micro F1``
per-emotion table: ``Emotion`` then ``<method> P``, ``<method> R``, ``<method> F1`` per method
error report:     ``# | ID | p(<label>) | Text | Explanation``

CSV output uses the same headers and cell strings. Column (overall) or row
(per-emotion, per metric) maxima are wrapped in ``**`` in Markdown and get a
trailing `` *`` in CSV. Values are rounded half-to-even to 4 decimals and
maxima are decided on the rounded values, so displayed ties are all marked.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path
from typing import TYPE_CHECKING, Mapping, Sequence

from lotus.classifier import PredictionRecord
from lotus.corpus import EMOTIONS, Dataset
from lotus.errors import ConsistencyError

if TYPE_CHECKING:
    from lotus.pipeline import RunAggregate

OVERALL_COLUMNS = ("macro_precision", "macro_recall", "macro_f1", "micro_precision", "micro_recall", "micro_f1")
OVERALL_HEADERS = ("Macro P", "Macro R", "Macro F1", "Micro P", "Micro R", "Micro F1")
PRF_KEYS = ("precision", "recall", "f1")
PRF_SHORT = ("P", "R", "F1")

FOOTER = (
    "Metrics with a zero denominator are reported as 0. "
    "± is the sample standard deviation (n-1) over runs. "
    "Whether the official task scorer uses the same zero-division convention is not known."
)


def round4(x: float) -> Decimal:
    return Decimal(repr(float(x))).quantize(Decimal("0.0001"), rounding=ROUND_HALF_EVEN)


def _fmt(mean: float, std: float | None) -> str:
    if std is None:
        return f"{round4(mean)}"
    return f"{round4(mean)} ± {round4(std)}"


@dataclass
class Table:
    headers: list[str]
    rows: list[list[str]]
    marked: set[tuple[int, int]] = field(default_factory=set)  # (row, column) of maxima
    footer: str = ""

    def render(self, fmt: str = "md") -> str:
        if fmt == "md":
            return self.to_markdown()
        if fmt == "csv":
            return self.to_csv()
        raise ValueError(f"unknown format {fmt!r}; use 'md' or 'csv'")

    def _cell(self, r: int, c: int, md: bool) -> str:
        text = self.rows[r][c]
        if (r, c) not in self.marked:
            return text
        return f"**{text}**" if md else f"{text} *"

    def to_markdown(self) -> str:
        lines = ["| " + " | ".join(self.headers) + " |",
                 "|" + "|".join("---" for _ in self.headers) + "|"]
        for r in range(len(self.rows)):
            lines.append("| " + " | ".join(self._cell(r, c, True) for c in range(len(self.headers))) + " |")
        if self.footer:
            lines += ["", self.footer]
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.headers)
        for r in range(len(self.rows)):
            w.writerow([self._cell(r, c, False) for c in range(len(self.headers))])
        return buf.getvalue()


def _mark_max(values: Sequence[Decimal]) -> list[int]:
    best = max(values)
    return [i for i, v in enumerate(values) if v == best]


def overall_table(results: Sequence[tuple[str, "RunAggregate"]]) -> Table:
    """One row per method; Macro and Micro P/R/F1 as ``mean ± std``.

    Single-run aggregates print the mean alone.
    """
    if not results:
        raise ValueError("overall_table needs at least one method")
    table = Table(["Method", *OVERALL_HEADERS], [], footer=FOOTER)
    for name, agg in results:
        cells = [name]
        for col in OVERALL_COLUMNS:
            mean, std = agg.metrics[col]
            cells.append(_fmt(mean, std if agg.n_runs > 1 else None))
        table.rows.append(cells)
    for c, col in enumerate(OVERALL_COLUMNS, start=1):
        for r in _mark_max([round4(agg.metrics[col][0]) for _, agg in results]):
            table.marked.add((r, c))
    return table


def per_emotion_table(results: Sequence[tuple[str, Mapping[str, Mapping[str, float]]]]) -> Table:
    """Rows are emotions; each method contributes P, R and F1 columns.

    ``results`` maps method name to ``{emotion: {"precision", "recall", "f1"}}``.
    """
    if not results:
        raise ValueError("per_emotion_table needs at least one method")
    for name, per_label in results:
        missing = [e for e in EMOTIONS if e not in per_label]
        if missing:
            raise ConsistencyError(f"method {name!r} lacks label(s): {', '.join(missing)}")
    headers = ["Emotion"] + [f"{name} {s}" for name, _ in results for s in PRF_SHORT]
    table = Table(headers, [], footer=FOOTER)
    for r, emotion in enumerate(EMOTIONS):
        row = [emotion.capitalize()]
        for _, per_label in results:
            row += [_fmt(per_label[emotion][k], None) for k in PRF_KEYS]
        table.rows.append(row)
        for j, key in enumerate(PRF_KEYS):
            vals = [round4(per_label[emotion][key]) for _, per_label in results]
            for m in _mark_max(vals):
                table.marked.add((r, 1 + m * 3 + j))
    return table


def per_label_means(agg: "RunAggregate") -> dict[str, dict[str, float]]:
    return {e: {k: agg.metrics[f"{e}_{k}"][0] for k in PRF_KEYS} for e in EMOTIONS}


# ---------------------------------------------------------------- error analysis


@dataclass(frozen=True)
class ErrorEntry:
    example_id: str
    text: str
    explanation: str
    probabilities: tuple[float, ...]


@dataclass(frozen=True)
class ErrorBucket:
    label: str
    kind: str  # "false_positive" | "false_negative"
    entries: tuple[ErrorEntry, ...]


def error_analysis(dataset: Dataset, predictions: Sequence[PredictionRecord],
                   explanations: Mapping[str, str] | None = None,
                   threshold: float = 0.5) -> list[ErrorBucket]:
    """FP and FN buckets for every label, most confident mistakes first.

    Buckets come in canonical label order, FP before FN. Entries are sorted by
    ``|p - threshold|`` descending; ties keep dataset order.
    """
    gold = dataset.by_id()
    pred_ids = {p.example_id for p in predictions}
    unknown = sorted(pred_ids - set(gold))
    if unknown:
        raise ConsistencyError(f"predictions for unknown id(s): {', '.join(unknown[:10])}")
    missing = [ex.id for ex in dataset if ex.id not in pred_ids]
    if missing:
        raise ConsistencyError(f"no prediction for id(s): {', '.join(missing[:10])}")
    by_id = {p.example_id: p for p in predictions}
    explanations = explanations or {}

    buckets = []
    for k, label in enumerate(EMOTIONS):
        for kind, want_pred, want_gold in (("false_positive", 1, 0), ("false_negative", 0, 1)):
            hits = []
            for ex in dataset:
                rec = by_id[ex.id]
                if rec.decisions[k] == want_pred and ex.labels[k] == want_gold:
                    hits.append(ErrorEntry(ex.id, ex.text, explanations.get(ex.id, ""), rec.probabilities))
            hits.sort(key=lambda e: -abs(e.probabilities[k] - threshold))
            buckets.append(ErrorBucket(label, kind, tuple(hits)))
    return buckets


def _md_escape(text: str) -> str:
    return text.replace("|", "\\|").replace("\n", " ")


def render_error_report(label: str, buckets: Sequence[ErrorBucket], limit: int | None = 20) -> str:
    k = EMOTIONS.index(label)
    parts = [f"# Misclassification of {label.capitalize()}", ""]
    for b in buckets:
        if b.label != label:
            continue
        title = "Predicted 1, actual 0" if b.kind == "false_positive" else "Predicted 0, actual 1"
        parts += [f"## {b.kind.replace('_', ' ').capitalize()}s ({title}): {len(b.entries)}", ""]
        if not b.entries:
            parts += ["None.", ""]
            continue
        parts += [f"| # | ID | p({label}) | Text | Explanation |", "|---|---|---|---|---|"]
        shown = b.entries if limit is None else b.entries[:limit]
        for i, e in enumerate(shown, start=1):
            parts.append(f"| {i} | {_md_escape(e.example_id)} | {round4(e.probabilities[k])} | "
                         f"{_md_escape(e.text)} | {_md_escape(e.explanation)} |")
        parts.append("")
    return "\n".join(parts)


def write_error_reports(out_dir: str | Path, buckets: Sequence[ErrorBucket], limit: int | None = 20) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for label in EMOTIONS:
        path = out_dir / f"errors_{label}.md"
        path.write_text(render_error_report(label, buckets, limit), encoding="utf-8")
        paths.append(path)
    return paths

