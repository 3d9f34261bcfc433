import numpy as np
import pytest

from spanchain.corpus import Annotation
from spanchain.errors import ValidationError
from spanchain.metrics import micro_f1, span_f1, token_f1
from spanchain.spanops import Span
from spanchain.tagcodec import TagSequence


def test_span_f1_proportional_overlap_fixture():
    score = span_f1([Span(0, 5)], [Span(0, 10)])
    assert score.precision == pytest.approx(1.0)
    assert score.recall == pytest.approx(0.5)
    assert score.f1 == pytest.approx(2 / 3)


def test_span_f1_identity():
    spans = [Span(0, 5, "PROP"), Span(8, 12, "PROP")]
    assert span_f1(spans, spans).f1 == pytest.approx(1.0)


def test_span_f1_disjoint():
    assert span_f1([Span(0, 3)], [Span(5, 9)]).f1 == 0.0


def test_span_f1_both_empty():
    score = span_f1([], [])
    assert (score.precision, score.recall, score.f1) == (1.0, 1.0, 1.0)


def test_span_f1_empty_prediction():
    score = span_f1([], [Span(0, 4)])
    assert (score.precision, score.recall, score.f1) == (0.0, 0.0, 0.0)


def test_span_f1_symmetry_swaps_p_and_r():
    pred = [Span(0, 5), Span(7, 9)]
    gold = [Span(3, 8)]
    a = span_f1(pred, gold)
    b = span_f1(gold, pred)
    assert a.precision == pytest.approx(b.recall)
    assert a.recall == pytest.approx(b.precision)


def test_span_f1_too_short_penalty():
    gold = [Span(0, 10)]
    full = span_f1([Span(0, 10)], gold)
    short = span_f1([Span(0, 5)], gold)
    assert full.recall == pytest.approx(1.0)
    assert short.precision == pytest.approx(1.0)
    assert short.recall < full.recall


def test_span_f1_duplicate_prediction_cannot_increase_precision():
    gold = [Span(0, 10)]
    single = span_f1([Span(0, 5)], gold)
    doubled = span_f1([Span(0, 5), Span(0, 5)], gold)
    assert doubled.precision <= single.precision + 1e-12


def test_span_f1_label_match_required():
    pred = [Span(0, 5, "A")]
    gold = [Span(0, 5, "B")]
    assert span_f1(pred, gold).f1 == 0.0
    assert span_f1(pred, [Span(0, 5, "A")]).f1 == pytest.approx(1.0)


def test_span_f1_respects_documents():
    pred = [Annotation("1", "PROP", 0, 5)]
    gold = [Annotation("2", "PROP", 0, 5)]
    assert span_f1(pred, gold).f1 == 0.0
    assert span_f1(pred, [Annotation("1", "PROP", 0, 5)]).f1 == pytest.approx(1.0)


def test_span_f1_multi_gold_credit():
    # one prediction overlapping two golds earns credit from both
    pred = [Span(0, 10)]
    gold = [Span(0, 4), Span(6, 10)]
    score = span_f1(pred, gold)
    assert score.precision == pytest.approx((4 / 10) + (4 / 10))
    assert score.recall == pytest.approx(1.0)


def test_micro_f1_examples():
    assert micro_f1(["A", "B"], ["A", "B"]) == pytest.approx(1.0)
    assert micro_f1(["A", "B"], ["A", "A"]) == pytest.approx(0.5)
    with pytest.raises(ValidationError):
        micro_f1(["A"], ["A", "B"])


def test_micro_f1_equals_accuracy_on_random_instances():
    rng = np.random.default_rng(0)
    classes = ["a", "b", "c", "d"]
    gold = [classes[i] for i in rng.integers(0, 4, 50)]
    pred = [classes[i] for i in rng.integers(0, 4, 50)]
    accuracy = sum(1 for p, g in zip(pred, gold) if p == g) / 50
    assert micro_f1(pred, gold) == pytest.approx(accuracy, abs=1e-12)


def test_token_f1_identity():
    seq = TagSequence.of(["O", "B-A", "I-A"], "BIO")
    score = token_f1(seq, seq)
    assert score.f1 == pytest.approx(1.0)


def test_token_f1_all_o_prediction():
    pred = TagSequence.of(["O", "O", "O"], "BIO")
    gold = TagSequence.of(["O", "B-A", "I-A"], "BIO")
    score = token_f1(pred, gold)
    assert score.recall == 0.0
    assert score.f1 == 0.0


def test_token_f1_hand_counted_fixture():
    pred = TagSequence.of(["B-A", "I-A", "O", "O"], "BIO")
    gold = TagSequence.of(["O", "B-A", "I-A", "O"], "BIO")
    score = token_f1(pred, gold)
    # TP at position 1; FP at 0; FN at 2
    assert score.precision == pytest.approx(0.5)
    assert score.recall == pytest.approx(0.5)
    assert score.f1 == pytest.approx(0.5)


def test_token_f1_length_mismatch():
    with pytest.raises(ValidationError):
        token_f1(TagSequence.of(["O"], "BIO"), TagSequence.of(["O", "O"], "BIO"))
