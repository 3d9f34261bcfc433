"""Training-set gazetteer: stemmed span text -> empirical class distribution.

Keys are built by tokenizing the span text, dropping punctuation tokens,
stemming what remains, and joining with single spaces, so lookups are
robust to case, spacing, and inflection.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .corpus import Annotation, Corpus, tokenize
from .errors import ParseError, ValidationError
from .porter import stem

__all__ = ["Gazetteer", "build", "load_gazetteer", "make_key", "save_gazetteer", "stem"]


def make_key(span_text: str) -> str:
    """Normalized lookup key: stems of the alphanumeric tokens, space-joined."""
    parts = []
    for token in tokenize(span_text):
        if not any(ch.isalnum() for ch in token.text):
            continue
        parts.append(stem(token.text))
    return " ".join(parts)


@dataclass
class Gazetteer:
    """Map from stem key to per-class counts with normalized distributions."""

    counts: dict[str, dict[str, int]] = field(default_factory=dict)

    def add(self, span_text: str, label: str, n: int = 1) -> None:
        if n < 1:
            raise ValidationError("gazetteer counts must be >= 1")
        entry = self.counts.setdefault(make_key(span_text), {})
        entry[label] = entry.get(label, 0) + n

    def distribution(self, key: str) -> Optional[dict[str, float]]:
        entry = self.counts.get(key)
        if not entry:
            return None
        total = sum(entry.values())
        return {label: count / total for label, count in sorted(entry.items())}

    def lookup(self, span_text: str) -> Optional[dict[str, float]]:
        """Class distribution for the span's key, or None when unseen."""
        return self.distribution(make_key(span_text))

    def __len__(self) -> int:
        return len(self.counts)


def build(corpus: Corpus, annotations: Optional[Iterable[Annotation]] = None) -> Gazetteer:
    """Aggregate labeled training spans into a gazetteer (order-invariant)."""
    gaz = Gazetteer()
    annotations = corpus.annotations if annotations is None else annotations
    for ann in sorted(annotations, key=lambda a: (a.doc_id, a.start, a.end, a.label)):
        doc = corpus.documents.get(ann.doc_id)
        if doc is None:
            raise ValidationError(f"annotation references unknown document {ann.doc_id!r}")
        gaz.add(doc.text[ann.start : ann.end], ann.label)
    return gaz


def save_gazetteer(gaz: Gazetteer, path) -> None:
    """TSV rows ``key<TAB>class:count[,class:count...]``, sorted by key."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        for key in sorted(gaz.counts):
            entry = gaz.counts[key]
            packed = ",".join(f"{label}:{count}" for label, count in sorted(entry.items()))
            handle.write(f"{key}\t{packed}\n")


def load_gazetteer(path) -> Gazetteer:
    path = Path(path)
    gaz = Gazetteer()
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line:
            continue
        key, sep, packed = line.partition("\t")
        if not sep:
            raise ParseError(f"{path}:{lineno}: expected key<TAB>counts")
        entry = {}
        for item in packed.split(","):
            label, sep2, count_s = item.rpartition(":")
            if not sep2:
                raise ParseError(f"{path}:{lineno}: malformed count {item!r}")
            try:
                count = int(count_s)
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: malformed count {item!r}") from exc
            if count < 1:
                raise ParseError(f"{path}:{lineno}: counts must be >= 1")
            entry[label] = count
        gaz.counts[key] = entry
    return gaz
