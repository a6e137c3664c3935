import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from lotus.corpus import EMOTIONS, EmotionLabelSet
from lotus.metrics import MetricsReport, aggregate, confusion, evaluate, prf

L = EmotionLabelSet.of


def test_worked_example():
    gold = [L(1, 0, 1, 0, 0), L(0, 1, 0, 0, 1)]
    pred = [L(1, 0, 0, 0, 0), L(0, 1, 0, 0, 1)]
    rep = evaluate(gold, pred)
    assert rep.macro.f1 == pytest.approx(0.6, abs=1e-12)
    assert rep.micro.precision == 1.0
    assert rep.micro.recall == 0.75
    assert rep.micro.f1 == pytest.approx(6 / 7, abs=1e-12)
    assert rep.per_label["joy"].f1 == 0.0
    assert rep.per_label["sadness"].to_json() == {"precision": 0.0, "recall": 0.0, "f1": 0.0}
    c = rep.counts["joy"]
    assert (c.tp, c.fp, c.fn, c.tn) == (0, 0, 1, 1)


@pytest.mark.parametrize("counts,expected", [
    ((3, 0, 1), (1.0, 0.75, 6 / 7)),
    ((0, 0, 0), (0.0, 0.0, 0.0)),
    ((5, 0, 0), (1.0, 1.0, 1.0)),
    ((0, 4, 0), (0.0, 0.0, 0.0)),
    ((0, 0, 4), (0.0, 0.0, 0.0)),
    ((1, 1, 1), (0.5, 0.5, 0.5)),
])
def test_prf_cases(counts, expected):
    assert prf(*counts) == pytest.approx(expected, abs=1e-12)


def test_length_mismatch_rejected():
    with pytest.raises(ValueError):
        confusion([L(0, 0, 0, 0, 0)], [])


def _fraction_prf(tp, fp, fn):
    p = Fraction(tp, tp + fp) if tp + fp else Fraction(0)
    r = Fraction(tp, tp + fn) if tp + fn else Fraction(0)
    f = 2 * p * r / (p + r) if p + r else Fraction(0)
    return p, r, f


def test_against_exact_rational_oracle():
    rnd = random.Random(2024)
    for _ in range(1000):
        n = rnd.randint(0, 12)
        gold = [EmotionLabelSet(tuple(rnd.randint(0, 1) for _ in EMOTIONS)) for _ in range(n)]
        pred = [EmotionLabelSet(tuple(rnd.randint(0, 1) for _ in EMOTIONS)) for _ in range(n)]
        rep = evaluate(gold, pred)
        per = []
        tot = [0, 0, 0]
        for k, e in enumerate(EMOTIONS):
            tp = sum(g[k] and p[k] for g, p in zip(gold, pred))
            fp = sum((not g[k]) and p[k] for g, p in zip(gold, pred))
            fn = sum(g[k] and not p[k] for g, p in zip(gold, pred))
            tot = [tot[0] + tp, tot[1] + fp, tot[2] + fn]
            exact = _fraction_prf(tp, fp, fn)
            per.append(exact)
            got = rep.per_label[e]
            assert (got.precision, got.recall, got.f1) == pytest.approx([float(x) for x in exact], abs=1e-12)
        macro = [float(sum(x[i] for x in per) / 5) for i in range(3)]
        assert (rep.macro.precision, rep.macro.recall, rep.macro.f1) == pytest.approx(macro, abs=1e-12)
        micro = [float(x) for x in _fraction_prf(*tot)]
        assert (rep.micro.precision, rep.micro.recall, rep.micro.f1) == pytest.approx(micro, abs=1e-12)


label_sets = st.tuples(*[st.integers(0, 1)] * 5).map(EmotionLabelSet)
pairs = st.lists(st.tuples(label_sets, label_sets), max_size=20)


@settings(max_examples=200, deadline=None)
@given(pairs)
def test_metric_properties(rows):
    gold = [g for g, _ in rows]
    pred = [p for _, p in rows]
    rep = evaluate(gold, pred)
    for v in rep.scalars().values():
        assert 0.0 <= v <= 1.0
    # swapping gold and predictions swaps precision and recall
    swapped = evaluate(pred, gold)
    assert swapped.micro.precision == pytest.approx(rep.micro.recall, abs=1e-12)
    assert swapped.micro.f1 == pytest.approx(rep.micro.f1, abs=1e-12)
    for e in EMOTIONS:
        assert swapped.per_label[e].recall == pytest.approx(rep.per_label[e].precision, abs=1e-12)
    # perfect predictions give micro F1 of 1 unless there are no positives at all
    perfect = evaluate(gold, gold)
    if any(any(g.flags) for g in gold):
        assert perfect.micro.f1 == 1.0


@settings(max_examples=100, deadline=None)
@given(st.lists(label_sets, max_size=20))
def test_micro_scores_coincide_with_one_label_per_row(gold):
    # when every row has exactly one gold label and one predicted label,
    # micro precision, recall and F1 coincide
    single = [L(*[int(i == sum(g.flags) % 5) for i in range(5)]) for g in gold]
    pred = [L(*[int(i == (sum(g.flags) + 1) % 5) for i in range(5)]) for g in gold[: len(gold) // 2]] + \
        single[len(gold) // 2:]
    rep = evaluate(single, pred)
    assert rep.micro.precision == pytest.approx(rep.micro.recall, abs=1e-12)
    assert rep.micro.f1 == pytest.approx(rep.micro.precision, abs=1e-12)


def test_report_json_round_trip_and_scalars():
    rep = evaluate([L(1, 0, 1, 0, 0), L(0, 1, 0, 0, 1)], [L(1, 0, 0, 0, 0), L(0, 1, 0, 0, 1)])
    again = MetricsReport.from_json(rep.to_json())
    assert again.to_json() == rep.to_json()
    s = rep.scalars()
    assert {"macro_f1", "micro_precision", "anger_recall", "surprise_f1"} <= set(s)
    assert len(s) == 6 + 15


def test_aggregate_sample_std():
    mean, std = aggregate([0.70, 0.72, 0.74, 0.72])
    assert mean == pytest.approx(0.72, abs=1e-12)
    assert std == pytest.approx(0.0163299316, abs=1e-9)
    assert aggregate([0.5]) == (0.5, 0.0)
    assert aggregate([0.3, 0.3, 0.3]) == (0.3, 0.0)
    with pytest.raises(ValueError):
        aggregate([])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=2, max_size=10))
def test_aggregate_matches_definition(values):
    mean, std = aggregate(values)
    m = math.fsum(values) / len(values)
    assert mean == pytest.approx(m, abs=1e-12)
    assert std == pytest.approx(math.sqrt(math.fsum((v - m) ** 2 for v in values) / (len(values) - 1)), abs=1e-12)
