"""Span algebra over character intervals: overlap, containment, nesting,
and union-merging of ensemble predictions.

Spans are half-open ``[start, end)`` intervals.  Two spans are merged only
when they share at least one character; touching intervals stay separate.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Optional

from .errors import ValidationError


@dataclass(frozen=True)
class Span:
    """A half-open interval with an optional class label and score."""

    start: int
    end: int
    label: Optional[str] = None
    score: Optional[float] = None

    def __post_init__(self):
        if self.start >= self.end:
            raise ValidationError(f"span start must precede end, got [{self.start}, {self.end})")

    @property
    def length(self) -> int:
        return self.end - self.start


def sort_key(span) -> tuple:
    return (span.start, span.end, span.label or "")


def sorted_spans(spans: Iterable[Span]) -> list[Span]:
    return sorted(spans, key=sort_key)


def overlap(a, b) -> int:
    """Number of characters shared by two intervals (0 when disjoint)."""
    return max(0, min(a.end, b.end) - max(a.start, b.start))


def contains(outer, inner) -> bool:
    """True when `inner` lies within `outer` and the two are not identical."""
    return (
        outer.start <= inner.start
        and inner.end <= outer.end
        and (outer.start, outer.end) != (inner.start, inner.end)
    )


def find_nested_pairs(spans: Iterable[Span]) -> list[tuple[Span, Span]]:
    """All (inner, outer) pairs with strict containment, in sorted order."""
    items = sorted_spans(spans)
    pairs = []
    for outer in items:
        for inner in items:
            if contains(outer, inner):
                pairs.append((inner, outer))
    pairs.sort(key=lambda p: (sort_key(p[0]), sort_key(p[1])))
    return pairs


def merge_ensemble(span_sets: list[list[Span]]) -> list[Span]:
    """Union-merge spans pooled from several prediction sets.

    Any two intervals sharing >= 1 character fall into the same group
    (transitively); each group collapses to its covering interval.  Only
    single-class ensembles are supported: mixing distinct labels within one
    merged group is an error.
    """
    if not span_sets:
        raise ValidationError("merge_ensemble needs at least one span set")
    pooled = sorted_spans(s for span_set in span_sets for s in span_set)
    merged: list[Span] = []
    for span in pooled:
        if merged and span.start < merged[-1].end:
            prev = merged[-1]
            if prev.label is not None and span.label is not None and prev.label != span.label:
                raise ValidationError(
                    f"cannot merge spans with distinct labels {prev.label!r} and {span.label!r}"
                )
            merged[-1] = replace(
                prev,
                end=max(prev.end, span.end),
                label=prev.label or span.label,
                score=None,
            )
        else:
            merged.append(replace(span, score=None))
    return merged
