"""Prediction-fixing rules applied after decoding/classification.

* boundary fixing: complete a quotation mark that the model dropped just
  outside a span border, then strip stray leading/trailing punctuation
  (quote pairs enclosing the whole span are exempt; a span is never
  emptied, the original is returned instead);
* the repetition override driven by a span's occurrence count within its
  article;
* additive gazetteer score boosting;
* class-nesting resolution, either restricted to pairs seen in training or
  weighted by a temperature-softmaxed co-occurrence matrix;
* distinct top-k label assignment for duplicated spans.

Scores produced here are consumed by argmax/top-k only and are not
renormalized.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ValidationError
from .gazetteer import Gazetteer
from .spanops import Span

DEFAULT_PUNCTUATION = frozenset(".,;:!?'\"—-()[]“”‘’")
DEFAULT_QUOTE_PAIRS = (
    ('"', '"'),
    ("“", "”"),
    ("‘", "’"),
    ("'", "'"),
)


@dataclass(frozen=True)
class PunctuationRuleConfig:
    punctuation: frozenset[str] = DEFAULT_PUNCTUATION
    quote_pairs: tuple[tuple[str, str], ...] = DEFAULT_QUOTE_PAIRS

    def __post_init__(self):
        chars = {c for pair in self.quote_pairs for c in pair}
        if not chars <= set(self.punctuation):
            raise ValidationError("quote characters must be a subset of the punctuation set")

    def closing(self, ch: str) -> Optional[str]:
        for open_ch, close_ch in self.quote_pairs:
            if ch == open_ch:
                return close_ch
        return None

    def opening(self, ch: str) -> Optional[str]:
        for open_ch, close_ch in self.quote_pairs:
            if ch == close_ch:
                return open_ch
        return None


def _scan_forward(text: str, pos: int, target: str, punctuation) -> int:
    """First index >= pos holding `target`, crossing only punctuation; -1 if
    anything else intervenes."""
    n = len(text)
    while pos < n and text[pos] in punctuation:
        if text[pos] == target:
            return pos
        pos += 1
    return -1


def _scan_backward(text: str, pos: int, target: str, punctuation) -> int:
    while pos >= 0 and text[pos] in punctuation:
        if text[pos] == target:
            return pos
        pos -= 1
    return -1


def _quote_chars(config: PunctuationRuleConfig) -> set[str]:
    return {c for pair in config.quote_pairs for c in pair}


def _complete_quotes(s: int, e: int, text: str, config: PunctuationRuleConfig) -> tuple[int, int]:
    """One round of quotation completion: absorb a partner mark sitting just
    outside the border (beyond at most a run of punctuation), or both marks
    when a quote-free span sits flush inside a quotation."""
    punctuation = config.punctuation
    first, last = text[s], text[e - 1]
    close_of_first = config.closing(first)
    open_of_last = config.opening(last)
    if close_of_first is not None and close_of_first not in text[s + 1 : e]:
        pos = _scan_forward(text, e, close_of_first, punctuation)
        if pos >= 0:
            return s, pos + 1
    elif open_of_last is not None and open_of_last not in text[s : e - 1]:
        pos = _scan_backward(text, s - 1, open_of_last, punctuation)
        if pos >= 0:
            return pos, e
    elif s > 0 and config.closing(text[s - 1]) is not None:
        quote_free = not any(c in _quote_chars(config) for c in text[s:e])
        if quote_free:
            pos = _scan_forward(text, e, config.closing(text[s - 1]), punctuation)
            if pos >= 0:
                return s - 1, pos + 1
    return s, e


def _strip(s: int, e: int, text: str, config: PunctuationRuleConfig) -> tuple[int, int]:
    """Strip boundary punctuation, but prefer ending on a balanced quote
    pair reachable by removing only punctuation from the flanks."""
    punctuation = config.punctuation
    # outermost quoted core: open quote after a punctuation-only left flank,
    # matching close before a punctuation-only right flank
    left = s
    while left < e and text[left] in punctuation:
        if config.closing(text[left]) is not None:
            right = e
            while right - 1 > left and text[right - 1] in punctuation:
                if text[right - 1] == config.closing(text[left]):
                    return left, right
                right -= 1
        left += 1
    while e > s and text[s] in punctuation:
        s += 1
    while e > s and text[e - 1] in punctuation:
        e -= 1
    return s, e


def fix_boundaries(span: Span, text: str, config: PunctuationRuleConfig = PunctuationRuleConfig()) -> Span:
    """Repair punctuation/quotation damage at the span borders.

    Completes a quotation whose partner mark the model dropped just outside
    the border, then strips stray boundary punctuation; a span enclosed in
    a balanced quote pair is exempt from stripping, and a span that would
    be stripped empty comes back unchanged.  Idempotent.
    """
    if span.start < 0 or span.end > len(text):
        raise ValidationError(f"span [{span.start}, {span.end}) outside document of length {len(text)}")
    s, e = _complete_quotes(span.start, span.end, text, config)
    s, e = _strip(s, e, text, config)
    if s >= e:
        return span
    # stripping may leave the span flush inside a quotation; complete once
    s, e = _complete_quotes(s, e, text, config)
    return replace(span, start=s, end=e)


@dataclass(frozen=True)
class RepetitionRuleConfig:
    t1: float = 0.001
    t2: float = 0.99
    class_name: str = "Repetition"

    def __post_init__(self):
        if not (0.0 <= self.t1 <= self.t2 <= 1.0):
            raise ValidationError("thresholds must satisfy 0 <= t1 <= t2 <= 1")


def normalize_span_text(text: str) -> str:
    return " ".join(text.casefold().split())


def count_occurrences(span_text: str, all_span_texts: Iterable[str]) -> int:
    """How many spans in the article's prediction set share this text
    (case-insensitive, whitespace-normalized; includes the span itself)."""
    needle = normalize_span_text(span_text)
    return sum(1 for other in all_span_texts if normalize_span_text(other) == needle)


def apply_repetition(
    probs: dict[str, float], k: int, config: RepetitionRuleConfig = RepetitionRuleConfig()
) -> dict[str, float]:
    """Override the repetition-class score from the occurrence count:
    certain when repeated enough, ruled out when unique and not near-certain,
    untouched otherwise."""
    if k < 1:
        raise ValidationError(f"occurrence count must be >= 1, got {k}")
    p = probs.get(config.class_name, 0.0)
    if k >= 3 or (k == 2 and p >= config.t1):
        p_hat = 1.0
    elif k == 1 and p <= config.t2:
        p_hat = 0.0
    else:
        p_hat = p
    out = dict(probs)
    out[config.class_name] = p_hat
    return out


@dataclass(frozen=True)
class GazetteerBoostConfig:
    delta: float = 0.5

    def __post_init__(self):
        if self.delta < 0:
            raise ValidationError("boost delta must be >= 0")


def apply_gazetteer_boost(
    probs: dict[str, float],
    lookup: Optional[dict[str, float]],
    config: GazetteerBoostConfig = GazetteerBoostConfig(),
) -> dict[str, float]:
    """Add delta to every class the gazetteer saw (any nonzero probability)
    for this key; scores are for ranking and may exceed 1."""
    out = dict(probs)
    if not lookup:
        return out
    for cls, p in lookup.items():
        if p > 0.0:
            out[cls] = out.get(cls, 0.0) + config.delta
    return out


def boost_from_gazetteer(
    probs: dict[str, float],
    gazetteer: Gazetteer,
    span_text: str,
    config: GazetteerBoostConfig = GazetteerBoostConfig(),
) -> dict[str, float]:
    return apply_gazetteer_boost(probs, gazetteer.lookup(span_text), config)


@dataclass
class NestingModel:
    """Training-set co-occurrence of (inner class, outer class) nestings."""

    classes: tuple[str, ...]
    cooccurrence: np.ndarray
    temperature: float = 0.26

    def __post_init__(self):
        self.classes = tuple(self.classes)
        c = len(self.classes)
        self.cooccurrence = np.asarray(self.cooccurrence, dtype=np.float64).reshape(c, c)
        if (self.cooccurrence < 0).any():
            raise ValidationError("co-occurrence counts must be non-negative")
        if self.temperature <= 0:
            raise ValidationError("temperature must be positive")

    def allowed_pairs(self) -> set[tuple[str, str]]:
        pairs = set()
        for i, inner in enumerate(self.classes):
            for j, outer in enumerate(self.classes):
                if self.cooccurrence[i, j] > 0:
                    pairs.add((inner, outer))
        return pairs

    def pair_probabilities(self) -> np.ndarray:
        """Softmax with temperature over all C^2 count entries."""
        z = self.cooccurrence / self.temperature
        z -= z.max()
        p = np.exp(z)
        return p / p.sum()


@dataclass(frozen=True)
class NestingDecision:
    inner: str
    outer: str
    constrained: bool


def _pair_argmax(scores: dict[tuple[str, str], float]) -> tuple[str, str]:
    best_pair, best = None, -np.inf
    for pair in sorted(scores):
        if scores[pair] > best:
            best_pair, best = pair, scores[pair]
    return best_pair


def resolve_nesting_strategy1(
    inner_probs: dict[str, float],
    outer_probs: dict[str, float],
    allowed: set[tuple[str, str]],
) -> NestingDecision:
    """Best (inner, outer) product restricted to nestings seen in training;
    falls back to unconstrained argmaxes (flagged) when no pair is allowed.
    Ties break to the lexicographically smallest pair."""
    candidates = {
        (x, y): inner_probs[x] * outer_probs[y]
        for x in inner_probs
        for y in outer_probs
        if (x, y) in allowed
    }
    if not candidates:
        inner = max(sorted(inner_probs), key=lambda c: inner_probs[c])
        outer = max(sorted(outer_probs), key=lambda c: outer_probs[c])
        return NestingDecision(inner=inner, outer=outer, constrained=False)
    x, y = _pair_argmax(candidates)
    return NestingDecision(inner=x, outer=y, constrained=True)


def resolve_nesting_strategy2(
    inner_probs: dict[str, float],
    outer_probs: dict[str, float],
    model: NestingModel,
) -> NestingDecision:
    """Best (inner, outer) product weighted by the temperature-softmaxed
    co-occurrence probability of the nesting."""
    pair_p = model.pair_probabilities()
    idx = {cls: i for i, cls in enumerate(model.classes)}
    scores = {}
    for x, px in inner_probs.items():
        for y, py in outer_probs.items():
            if x not in idx or y not in idx:
                raise ValidationError(f"class {x!r}/{y!r} missing from the nesting model")
            scores[(x, y)] = px * py * pair_p[idx[x], idx[y]]
    x, y = _pair_argmax(scores)
    return NestingDecision(inner=x, outer=y, constrained=True)


def assign_multilabel(probs: dict[str, float], n: int) -> list[str]:
    """Distinct labels for n duplicate instances of one span: the n most
    probable classes in descending order."""
    if n < 1:
        raise ValidationError("need at least one instance")
    if n > len(probs):
        raise ValidationError(f"cannot assign {n} distinct labels from {len(probs)} classes")
    ranked = sorted(probs, key=lambda cls: (-probs[cls], cls))
    return ranked[:n]


def build_nesting_model(
    nested_pairs: Iterable[tuple[str, str]],
    classes: Sequence[str],
    temperature: float = 0.26,
) -> NestingModel:
    """Count (inner class, outer class) nestings observed in training."""
    classes = tuple(sorted(set(classes)))
    idx = {cls: i for i, cls in enumerate(classes)}
    counts = np.zeros((len(classes), len(classes)))
    for inner_cls, outer_cls in nested_pairs:
        counts[idx[inner_cls], idx[outer_cls]] += 1
    return NestingModel(classes=classes, cooccurrence=counts, temperature=temperature)
