"""Emission-score and span-probability sources.

Two ways to obtain model scores without any neural dependency: load them
from the line-delimited interchange files, or train the built-in
hand-crafted-feature softmax baseline (char/token length, binned length,
?/!/quote counts, stemmed bags of span and context words).

Feature strings hash to stable 64-bit ids (FNV-1a), so vectors are
reproducible across runs and processes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .corpus import TokenSpan, tokenize
from .crf.model import EmissionMatrix, TrainConfig
from .errors import ParseError, ValidationError
from .porter import stem

QUOTE_CHARS = "\"'“”‘’"

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def feature_id(name: str) -> int:
    """FNV-1a 64-bit hash of the feature string."""
    h = _FNV_OFFSET
    for byte in name.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


@dataclass(frozen=True)
class LengthBinning:
    """Ascending char-length thresholds; lengths >= the last edge fall into
    the implicit final bin."""

    edges: tuple[int, ...] = (1, 2, 3, 5, 8, 13, 21, 34, 55, 89)

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.edges, self.edges[1:])):
            raise ValidationError("binning edges must be strictly ascending")

    def bin_of(self, length: int) -> int:
        for i, edge in enumerate(self.edges):
            if length < edge:
                return i
        return len(self.edges)


FeatureVector = dict[int, float]


def featurize_span(
    span_text: str,
    context_sentence: str = "",
    binning: LengthBinning = LengthBinning(),
    include_length: bool = True,
) -> FeatureVector:
    """Sparse features for one span in its sentence context."""
    fv: FeatureVector = {}

    def bump(name: str, value: float = 1.0):
        fid = feature_id(name)
        fv[fid] = fv.get(fid, 0.0) + value

    span_tokens = tokenize(span_text)
    if include_length:
        if span_text:
            bump("len_chars", float(len(span_text)))
            bump("len_tokens", float(len(span_tokens)))
        bump(f"len_bin={binning.bin_of(len(span_text))}")
    quest = span_text.count("?")
    excl = span_text.count("!")
    quotes = sum(span_text.count(q) for q in QUOTE_CHARS)
    if quest:
        bump("quest_count", float(quest))
    if excl:
        bump("excl_count", float(excl))
    if quotes:
        bump("quote_count", float(quotes))
    for token in span_tokens:
        if any(ch.isalnum() for ch in token.text):
            bump(f"span:{stem(token.text)}")
    for token in tokenize(context_sentence):
        if any(ch.isalnum() for ch in token.text):
            bump(f"ctx:{stem(token.text)}")
    return fv


def split_sentences(text: str) -> list[tuple[int, int]]:
    """Greedy sentence intervals: break after runs of .!? and at newlines."""
    bounds = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            bounds.append((start, i))
            start = i + 1
            i += 1
        elif ch in ".!?":
            j = i
            while j < n and text[j] in ".!?":
                j += 1
            if j >= n or text[j].isspace():
                bounds.append((start, j))
                start = j
            i = j
        else:
            i += 1
    if start < n:
        bounds.append((start, n))
    return [(s, e) for s, e in bounds if text[s:e].strip()]


def sentence_containing(text: str, start: int, end: int) -> str:
    """The sentence (or smallest sentence run) covering [start, end)."""
    hit = [(s, e) for s, e in split_sentences(text) if s < end and e > start]
    if not hit:
        return ""
    return text[hit[0][0] : hit[-1][1]]


@dataclass
class SoftmaxModel:
    classes: tuple[str, ...]
    weights: dict[int, np.ndarray] = field(default_factory=dict)
    bias: np.ndarray = None

    def __post_init__(self):
        self.classes = tuple(self.classes)
        if len(self.classes) < 2:
            raise ValidationError("softmax model needs at least 2 classes")
        if self.bias is None:
            self.bias = np.zeros(len(self.classes))
        self.bias = np.asarray(self.bias, dtype=np.float64)

    def class_index(self, label: str) -> int:
        try:
            return self.classes.index(label)
        except ValueError:
            raise ValidationError(f"class {label!r} was not seen at training time") from None


def predict_logits(model: SoftmaxModel, fv: FeatureVector) -> np.ndarray:
    logits = model.bias.copy()
    for fid, value in fv.items():
        w = model.weights.get(fid)
        if w is not None:
            logits += w * value
    return logits


def predict_proba(model: SoftmaxModel, fv: FeatureVector) -> dict[str, float]:
    """Class distribution for one feature vector (sums to 1, all > 0)."""
    logits = predict_logits(model, fv)
    logits -= logits.max()
    p = np.exp(logits)
    p /= p.sum()
    return {cls: float(p[i]) for i, cls in enumerate(model.classes)}


def train_softmax(
    examples: Sequence[tuple[FeatureVector, str]], config: TrainConfig = TrainConfig()
) -> SoftmaxModel:
    """Minimize cross-entropy by mini-batch gradient descent (seeded)."""
    if not examples:
        raise ValidationError("training set is empty")
    classes = tuple(sorted({label for _, label in examples}))
    if len(classes) < 2:
        raise ValidationError("training set must contain at least 2 classes")
    model = SoftmaxModel(classes=classes)
    index = {cls: i for i, cls in enumerate(classes)}
    k = len(classes)
    rng = np.random.default_rng(config.seed)
    order = np.arange(len(examples))
    for _epoch in range(config.epochs):
        rng.shuffle(order)
        for lo in range(0, len(order), config.batch_size):
            batch = order[lo : lo + config.batch_size]
            grad_b = np.zeros(k)
            grad_w: dict[int, np.ndarray] = {}
            for i in batch:
                fv, label = examples[i]
                logits = predict_logits(model, fv)
                logits -= logits.max()
                p = np.exp(logits)
                p /= p.sum()
                p[index[label]] -= 1.0
                grad_b += p
                for fid, value in fv.items():
                    g = grad_w.get(fid)
                    if g is None:
                        g = grad_w[fid] = np.zeros(k)
                    g += p * value
            step = config.learning_rate / len(batch)
            model.bias -= step * grad_b
            for fid, g in grad_w.items():
                w = model.weights.get(fid)
                if w is None:
                    w = model.weights[fid] = np.zeros(k)
                if config.l2:
                    g = g + 2.0 * config.l2 * w
                w -= step * g
    return model


# ---------------------------------------------------------------------------
# Interchange files
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpanProbRecord:
    doc_id: str
    start: int
    end: int
    probs: dict[str, float]


def _check_finite(value, where: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{where}: non-finite score")
    return value


def load_emissions(path) -> list[EmissionMatrix]:
    """Read line-delimited emission records, validating shape and finiteness."""
    path = Path(path)
    records = []
    for idx, line in enumerate(path.read_text(encoding="utf-8").splitlines()):
        if not line.strip():
            continue
        where = f"{path}: record {idx}"
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{where}: invalid JSON: {exc}") from exc
        for key in ("doc_id", "tag_order", "tokens", "scores"):
            if key not in obj:
                raise ParseError(f"{where}: missing key {key!r}")
        tag_order = obj["tag_order"]
        if not isinstance(tag_order, list) or not all(isinstance(t, str) for t in tag_order):
            raise ParseError(f"{where}: tag_order must be a list of strings")
        tokens = []
        for i, tok in enumerate(obj["tokens"]):
            try:
                tokens.append(
                    TokenSpan(index=i, start=int(tok["start"]), end=int(tok["end"]), text=str(tok["text"]))
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"{where}: malformed token {i}: {exc}") from exc
        scores = obj["scores"]
        if len(scores) != len(tokens):
            raise ParseError(f"{where}: {len(scores)} score rows for {len(tokens)} tokens")
        for t, row in enumerate(scores):
            if len(row) != len(tag_order):
                raise ParseError(f"{where}: score row {t} has {len(row)} entries, expected {len(tag_order)}")
            for v in row:
                _check_finite(v, where)
        mask = obj.get("ignore_mask")
        if mask is not None and len(mask) != len(tokens):
            raise ParseError(f"{where}: ignore_mask length {len(mask)} != T={len(tokens)}")
        matrix = np.array(scores, dtype=np.float64).reshape(len(tokens), len(tag_order))
        records.append(
            EmissionMatrix(
                doc_id=str(obj["doc_id"]),
                scores=matrix,
                tag_order=tuple(tag_order),
                ignore_mask=np.asarray(mask, dtype=bool) if mask is not None else None,
                tokens=tokens,
            )
        )
    return records


def save_emissions(records: Iterable[EmissionMatrix], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        for em in records:
            obj = {
                "doc_id": em.doc_id,
                "tag_order": list(em.tag_order),
                "tokens": [
                    {"text": t.text, "start": t.start, "end": t.end} for t in (em.tokens or [])
                ],
                "scores": [[float(v) for v in row] for row in em.scores],
            }
            if em.ignore_mask is not None:
                obj["ignore_mask"] = [bool(b) for b in em.ignore_mask]
            handle.write(json.dumps(obj, ensure_ascii=False) + "\n")


def load_span_probs(path, tolerance: float = 1e-6) -> list[SpanProbRecord]:
    """Read line-delimited span probability records; each probs map must be
    a distribution within `tolerance`."""
    path = Path(path)
    records = []
    for idx, line in enumerate(path.read_text(encoding="utf-8").splitlines()):
        if not line.strip():
            continue
        where = f"{path}: record {idx}"
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{where}: invalid JSON: {exc}") from exc
        for key in ("doc_id", "start", "end", "probs"):
            if key not in obj:
                raise ParseError(f"{where}: missing key {key!r}")
        try:
            start, end = int(obj["start"]), int(obj["end"])
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{where}: offsets must be integers") from exc
        if end <= start:
            raise ValidationError(f"{where}: end must exceed start")
        probs = {}
        if not isinstance(obj["probs"], dict) or not obj["probs"]:
            raise ParseError(f"{where}: probs must be a non-empty object")
        for cls, p in obj["probs"].items():
            p = _check_finite(p, where)
            if p < 0.0 or p > 1.0:
                raise ValidationError(f"{where}: probability for {cls!r} outside [0, 1]")
            probs[str(cls)] = p
        total = sum(probs.values())
        if abs(total - 1.0) > tolerance:
            raise ValidationError(f"{where}: probabilities sum to {total}, not 1")
        records.append(SpanProbRecord(doc_id=str(obj["doc_id"]), start=start, end=end, probs=probs))
    return records


def save_span_probs(records: Iterable[SpanProbRecord], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        for rec in records:
            obj = {
                "doc_id": rec.doc_id,
                "start": rec.start,
                "end": rec.end,
                "probs": {cls: float(p) for cls, p in sorted(rec.probs.items())},
            }
            handle.write(json.dumps(obj, ensure_ascii=False) + "\n")
