import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import exhaustive_pair_argmax
from spanchain.errors import ValidationError
from spanchain.postproc import (
    GazetteerBoostConfig,
    NestingModel,
    PunctuationRuleConfig,
    RepetitionRuleConfig,
    apply_gazetteer_boost,
    apply_repetition,
    assign_multilabel,
    build_nesting_model,
    count_occurrences,
    fix_boundaries,
    resolve_nesting_strategy1,
    resolve_nesting_strategy2,
)
from spanchain.spanops import Span

CFG = PunctuationRuleConfig()


def fix(text, start, end):
    out = fix_boundaries(Span(start, end), text, CFG)
    return text[out.start : out.end]


# --- boundary fixing ----------------------------------------------------------

QUOTE_TEXT = 'He shrugged: "It is what it is." Then left.'
GOLD = '"It is what it is."'
GOLD_START = QUOTE_TEXT.index(GOLD)
GOLD_END = GOLD_START + len(GOLD)


def test_quote_completion_closing_mark_just_outside():
    # span covers the opening quote through the period; the closing quote
    # sits immediately outside
    assert fix(QUOTE_TEXT, GOLD_START, GOLD_END - 1) == GOLD


def test_quote_completion_truncated_before_period():
    # model variant 1: drops both the period and the closing quote
    assert fix(QUOTE_TEXT, GOLD_START, GOLD_END - 2) == GOLD


def test_quote_completion_both_marks_outside():
    # model variant 2: keeps the period but drops both quotes
    assert fix(QUOTE_TEXT, GOLD_START + 1, GOLD_END - 1) == GOLD


def test_trailing_comma_stripped():
    text = "Say Hello, world"
    start = text.index("Hello")
    assert fix(text, start, start + len("Hello,")) == "Hello"


def test_balanced_quotes_untouched():
    text = 'wow "quoted!" indeed'
    start = text.index('"')
    assert fix(text, start, start + len('"quoted!"')) == '"quoted!"'


def test_leading_punctuation_then_enclosed_quotes():
    text = 'x ,"quoted" y'
    start = text.index(",")
    assert fix(text, start, start + len(',"quoted"')) == '"quoted"'


def test_orphan_quote_is_stripped():
    text = 'he said "abc and left'
    start = text.index('"')
    assert fix(text, start, start + 4) == "abc"


def test_all_punctuation_span_returns_original():
    text = "what ?! now"
    start = text.index("?")
    out = fix_boundaries(Span(start, start + 2), text, CFG)
    assert (out.start, out.end) == (start, start + 2)


def test_fix_boundaries_idempotent_on_examples():
    cases = [
        (QUOTE_TEXT, GOLD_START, GOLD_END - 1),
        (QUOTE_TEXT, GOLD_START, GOLD_END - 2),
        (QUOTE_TEXT, GOLD_START + 1, GOLD_END - 1),
        ("Say Hello, world", 4, 10),
        ("what ?! now", 5, 7),
    ]
    for text, start, end in cases:
        once = fix_boundaries(Span(start, end), text, CFG)
        twice = fix_boundaries(once, text, CFG)
        assert (once.start, once.end) == (twice.start, twice.end)


FUZZ_ALPHABET = 'ab c."“”!?,-x '


@given(st.text(alphabet=FUZZ_ALPHABET, min_size=1, max_size=24), st.data())
@settings(max_examples=300)
def test_fix_boundaries_fuzz_invariants(text, data):
    start = data.draw(st.integers(0, len(text) - 1))
    end = data.draw(st.integers(start + 1, len(text)))
    span = Span(start, end)
    out = fix_boundaries(span, text, CFG)
    again = fix_boundaries(out, text, CFG)
    assert (out.start, out.end) == (again.start, again.end)  # idempotent
    assert out.start < out.end
    first, last = text[out.start], text[out.end - 1]
    came_back_whole = (out.start, out.end) == (span.start, span.end)
    span_is_all_punct = all(c in CFG.punctuation or c.isspace() for c in text[span.start : span.end])
    if not (came_back_whole and span_is_all_punct):
        enclosed = (
            out.end - out.start >= 2
            and CFG.closing(first) == last
        )
        assert enclosed or first not in CFG.punctuation
        assert enclosed or last not in CFG.punctuation
    # bounded movement: inward at most the boundary punctuation run, outward
    # at most a punctuation run plus one quote character
    assert abs(out.start - span.start) <= max(_run(text, span.start, +1), _run(text, span.start - 1, -1) + 1)
    assert abs(out.end - span.end) <= max(_run(text, span.end - 1, -1), _run(text, span.end, +1) + 1)


def _run(text, pos, direction):
    n = 0
    while 0 <= pos < len(text) and text[pos] in CFG.punctuation:
        n += 1
        pos += direction
    return n


# --- repetition rule ------------------------------------------------------------

def test_repetition_branches():
    cfg = RepetitionRuleConfig()
    assert apply_repetition({"Repetition": 0.10}, 3, cfg)["Repetition"] == 1.0
    assert apply_repetition({"Repetition": 0.50}, 1, cfg)["Repetition"] == 0.0
    assert apply_repetition({"Repetition": 0.995}, 1, cfg)["Repetition"] == 0.995
    assert apply_repetition({"Repetition": 0.0005}, 2, cfg)["Repetition"] == 0.0005


def test_repetition_leaves_other_classes_untouched():
    out = apply_repetition({"Repetition": 0.2, "Slogans": 0.8}, 3)
    assert out["Slogans"] == 0.8
    assert out["Repetition"] == 1.0


def test_repetition_rejects_bad_count():
    with pytest.raises(ValidationError):
        apply_repetition({"Repetition": 0.5}, 0)


def test_repetition_threshold_config_validated():
    with pytest.raises(ValidationError):
        RepetitionRuleConfig(t1=0.5, t2=0.1)


@given(st.floats(0, 1, allow_nan=False), st.integers(1, 6))
@settings(max_examples=200)
def test_repetition_monotone_in_k(p, k):
    cfg = RepetitionRuleConfig()
    a = apply_repetition({"Repetition": p}, k, cfg)["Repetition"]
    b = apply_repetition({"Repetition": p}, k + 1, cfg)["Repetition"]
    assert b >= a


def test_count_occurrences():
    assert count_occurrences("unique", ["unique", "other"]) == 1
    assert count_occurrences("x y", ["x y", "x  y", "X Y "]) == 3
    assert count_occurrences("War ", ["war", "War ", "peace"]) == 2


# --- gazetteer boost --------------------------------------------------------------

def test_boost_adds_delta_to_seen_classes():
    probs = {"A": 0.3, "B": 0.6, "C": 0.1}
    out = apply_gazetteer_boost(probs, {"A": 0.7, "B": 0.3}, GazetteerBoostConfig(delta=0.5))
    assert out == pytest.approx({"A": 0.8, "B": 1.1, "C": 0.1})


def test_boost_absent_lookup_unchanged():
    probs = {"A": 0.5, "B": 0.5}
    assert apply_gazetteer_boost(probs, None) == probs


def test_boost_zero_delta_unchanged():
    probs = {"A": 0.5, "B": 0.5}
    assert apply_gazetteer_boost(probs, {"A": 1.0}, GazetteerBoostConfig(delta=0.0)) == probs


def test_boost_skips_zero_probability_classes():
    out = apply_gazetteer_boost({"A": 0.5, "B": 0.5}, {"A": 1.0, "B": 0.0})
    assert out == pytest.approx({"A": 1.0, "B": 0.5})


# --- nesting -----------------------------------------------------------------------

def test_strategy1_single_allowed_pair_wins():
    decision = resolve_nesting_strategy1({"A": 0.01, "B": 0.99}, {"A": 0.99, "B": 0.01}, {("A", "B")})
    assert (decision.inner, decision.outer, decision.constrained) == ("A", "B", True)


def test_strategy1_all_pairs_is_independent_argmax():
    inner = {"A": 0.2, "B": 0.5, "C": 0.3}
    outer = {"A": 0.6, "B": 0.1, "C": 0.3}
    allowed = {(x, y) for x in inner for y in outer}
    decision = resolve_nesting_strategy1(inner, outer, allowed)
    assert (decision.inner, decision.outer) == ("B", "A")


def test_strategy1_empty_allowed_falls_back_flagged():
    decision = resolve_nesting_strategy1({"A": 0.9, "B": 0.1}, {"A": 0.1, "B": 0.9}, set())
    assert (decision.inner, decision.outer, decision.constrained) == ("A", "B", False)


def test_strategy1_matches_exhaustive_oracle():
    rng = np.random.default_rng(0)
    classes = ["A", "B", "C"]
    for _ in range(50):
        inner = {c: float(p) for c, p in zip(classes, rng.dirichlet(np.ones(3)))}
        outer = {c: float(p) for c, p in zip(classes, rng.dirichlet(np.ones(3)))}
        allowed = {
            (x, y) for x in classes for y in classes if rng.random() > 0.4
        }
        if not allowed:
            continue
        decision = resolve_nesting_strategy1(inner, outer, allowed)
        expect = exhaustive_pair_argmax(inner, outer, lambda x, y: 1.0 if (x, y) in allowed else None)
        assert (decision.inner, decision.outer) == expect


def test_strategy2_matches_exhaustive_oracle():
    rng = np.random.default_rng(1)
    classes = ("A", "B", "C")
    for _ in range(50):
        counts = rng.integers(0, 9, (3, 3)).astype(float)
        model = NestingModel(classes=classes, cooccurrence=counts, temperature=0.26)
        pair_p = model.pair_probabilities()
        idx = {c: i for i, c in enumerate(classes)}
        inner = {c: float(p) for c, p in zip(classes, rng.dirichlet(np.ones(3)))}
        outer = {c: float(p) for c, p in zip(classes, rng.dirichlet(np.ones(3)))}
        decision = resolve_nesting_strategy2(inner, outer, model)
        expect = exhaustive_pair_argmax(inner, outer, lambda x, y: float(pair_p[idx[x], idx[y]]))
        assert (decision.inner, decision.outer) == expect


def test_strategy2_uniform_counts_is_independent_argmax():
    model = NestingModel(classes=("A", "B", "C"), cooccurrence=np.full((3, 3), 4.0))
    inner = {"A": 0.2, "B": 0.5, "C": 0.3}
    outer = {"A": 0.6, "B": 0.1, "C": 0.3}
    decision = resolve_nesting_strategy2(inner, outer, model)
    assert (decision.inner, decision.outer) == ("B", "A")


def test_strategy2_high_temperature_behaves_uniform():
    # softmax deviation from uniform shrinks as max_count / (C^2 t): at
    # t=1e6 decisions already match the uniform-counts case everywhere,
    # and by t=1e9 the probabilities themselves are uniform to 1e-9
    rng = np.random.default_rng(2)
    counts = rng.integers(0, 9, (3, 3)).astype(float)
    hot = NestingModel(classes=("A", "B", "C"), cooccurrence=counts, temperature=1e6)
    uniform = NestingModel(classes=("A", "B", "C"), cooccurrence=np.zeros((3, 3)))
    for _ in range(100):
        inner = {c: float(p) for c, p in zip("ABC", rng.dirichlet(np.ones(3)))}
        outer = {c: float(p) for c, p in zip("ABC", rng.dirichlet(np.ones(3)))}
        a = resolve_nesting_strategy2(inner, outer, hot)
        b = resolve_nesting_strategy2(inner, outer, uniform)
        assert (a.inner, a.outer) == (b.inner, b.outer)
    hotter = NestingModel(classes=("A", "B", "C"), cooccurrence=counts, temperature=1e9)
    pair_p = hotter.pair_probabilities()
    assert np.max(np.abs(pair_p - 1.0 / 9.0)) <= 1e-9


def test_strategy2_reduces_to_strategy1_with_constant_matrix():
    rng = np.random.default_rng(3)
    classes = ("A", "B", "C")
    model = NestingModel(classes=classes, cooccurrence=np.full((3, 3), 2.0))
    allowed = {(x, y) for x in classes for y in classes}
    for _ in range(20):
        inner = {c: float(p) for c, p in zip(classes, rng.dirichlet(np.ones(3)))}
        outer = {c: float(p) for c, p in zip(classes, rng.dirichlet(np.ones(3)))}
        d1 = resolve_nesting_strategy1(inner, outer, allowed)
        d2 = resolve_nesting_strategy2(inner, outer, model)
        assert (d1.inner, d1.outer) == (d2.inner, d2.outer)


def test_build_nesting_model_counts_pairs():
    model = build_nesting_model([("A", "B"), ("A", "B"), ("C", "B")], ["A", "B", "C"])
    assert model.cooccurrence[0, 1] == 2
    assert model.cooccurrence[2, 1] == 1
    assert model.allowed_pairs() == {("A", "B"), ("C", "B")}


# --- multilabel --------------------------------------------------------------------

def test_multilabel_examples():
    probs = {"A": 0.5, "B": 0.3, "C": 0.2}
    assert assign_multilabel(probs, 1) == ["A"]
    assert assign_multilabel(probs, 2) == ["A", "B"]
    assert assign_multilabel(probs, 3) == ["A", "B", "C"]
    with pytest.raises(ValidationError):
        assign_multilabel(probs, 4)


@given(st.integers(1, 4))
@settings(max_examples=50)
def test_multilabel_labels_distinct(n):
    probs = {"A": 0.4, "B": 0.3, "C": 0.2, "D": 0.1}
    labels = assign_multilabel(probs, n)
    assert len(labels) == len(set(labels)) == n
