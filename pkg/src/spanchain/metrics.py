"""Task scorers.

``span_f1`` is the proportional-overlap span measure used by span
identification shared tasks: every (predicted, gold) pair earns fractional
credit |s intersect t| / |s| toward precision and |s intersect t| / |t|
toward recall, so predictions that are too long or too short are both
penalized.  ``micro_f1`` pools instance-level counts and equals accuracy
in the single-label setting.  ``token_f1`` is the binary token-level
diagnostic over non-O tags.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import ValidationError
from .tagcodec import TagSequence


@dataclass(frozen=True)
class SpanScore:
    precision: float
    recall: float
    f1: float
    n_predicted: int
    n_gold: int


def _f1(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def _credit_pair(pred, gold) -> int:
    if getattr(pred, "doc_id", None) != getattr(gold, "doc_id", None):
        return 0
    pred_label = getattr(pred, "label", None)
    gold_label = getattr(gold, "label", None)
    if pred_label is not None and gold_label is not None and pred_label != gold_label:
        return 0
    return max(0, min(pred.end, gold.end) - max(pred.start, gold.start))


def span_f1(predicted: Sequence, gold: Sequence) -> SpanScore:
    """Proportional-overlap precision/recall/F1 over span sets.

    Accepts any objects with start/end and optional label/doc_id
    attributes.  Both sets empty scores a perfect 1; an empty side scores 0.
    """
    if not predicted and not gold:
        return SpanScore(1.0, 1.0, 1.0, 0, 0)
    precision_sum = 0.0
    recall_sum = 0.0
    for s in predicted:
        for t in gold:
            shared = _credit_pair(s, t)
            if shared:
                precision_sum += shared / (s.end - s.start)
                recall_sum += shared / (t.end - t.start)
    precision = precision_sum / len(predicted) if predicted else 0.0
    recall = recall_sum / len(gold) if gold else 0.0
    return SpanScore(precision, recall, _f1(precision, recall), len(predicted), len(gold))


def micro_f1(predicted_labels: Sequence[str], gold_labels: Sequence[str]) -> float:
    """Micro-averaged F1 over pooled per-class counts; equals accuracy when
    each instance carries exactly one prediction."""
    if len(predicted_labels) != len(gold_labels):
        raise ValidationError(
            f"label lists differ in length: {len(predicted_labels)} vs {len(gold_labels)}"
        )
    if not gold_labels:
        return 1.0
    tp = fp = fn = 0
    for pred, ref in zip(predicted_labels, gold_labels):
        if pred == ref:
            tp += 1
        else:
            fp += 1
            fn += 1
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return _f1(precision, recall)


def token_f1(predicted: TagSequence, gold: TagSequence) -> SpanScore:
    """Binary token-level P/R/F1 treating any non-O tag as positive."""
    if len(predicted) != len(gold):
        raise ValidationError(f"tag sequences differ in length: {len(predicted)} vs {len(gold)}")
    tp = fp = fn = 0
    for p, g in zip(predicted, gold):
        p_pos, g_pos = p.prefix != "O", g.prefix != "O"
        if p_pos and g_pos:
            tp += 1
        elif p_pos:
            fp += 1
        elif g_pos:
            fn += 1
    n_pred, n_gold = tp + fp, tp + fn
    if n_pred == 0 and n_gold == 0:
        return SpanScore(1.0, 1.0, 1.0, 0, 0)
    precision = tp / n_pred if n_pred else 0.0
    recall = tp / n_gold if n_gold else 0.0
    return SpanScore(precision, recall, _f1(precision, recall), n_pred, n_gold)
