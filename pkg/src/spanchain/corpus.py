"""Document and annotation loading, tokenization, and span/token alignment.

Character offsets are Unicode scalar-value indices, half-open [start, end).
Documents live one per file named ``article<ID>.txt``; annotations are TSV
rows ``doc_id<TAB>[label<TAB>]start<TAB>end`` (no header, LF endings).
Rows without a label column get the synthetic label ``PROP``, matching the
binary span-identification formulation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .errors import ParseError, ValidationError

DOCUMENT_PATTERN = re.compile(r"^article(?P<id>.+)\.txt$")
DEFAULT_SPAN_LABEL = "PROP"


@dataclass(frozen=True)
class Document:
    id: str
    text: str

    def __post_init__(self):
        if not self.id:
            raise ValidationError("document id must be non-empty")


@dataclass(frozen=True)
class TokenSpan:
    """A token with its character extent; ``text == document.text[start:end]``."""

    index: int
    start: int
    end: int
    text: str


@dataclass(frozen=True)
class Annotation:
    doc_id: str
    label: str
    start: int
    end: int

    def __post_init__(self):
        if self.start >= self.end:
            raise ValidationError(
                f"annotation end must exceed start, got [{self.start}, {self.end}) in doc {self.doc_id!r}"
            )


@dataclass
class Corpus:
    """Documents keyed by id plus their annotations, in stable sorted order."""

    documents: dict[str, Document] = field(default_factory=dict)
    annotations: list[Annotation] = field(default_factory=list)

    def __post_init__(self):
        self.documents = {doc_id: self.documents[doc_id] for doc_id in sorted(self.documents)}
        self.annotations = sorted(
            self.annotations, key=lambda a: (a.doc_id, a.start, a.end, a.label)
        )
        for ann in self.annotations:
            doc = self.documents.get(ann.doc_id)
            if doc is None:
                raise ValidationError(f"annotation references unknown document {ann.doc_id!r}")
            if ann.end > len(doc.text):
                raise ValidationError(
                    f"annotation [{ann.start}, {ann.end}) exceeds document {ann.doc_id!r} "
                    f"of length {len(doc.text)}"
                )

    def annotations_for(self, doc_id: str) -> list[Annotation]:
        return [a for a in self.annotations if a.doc_id == doc_id]


def load_documents(directory: str | Path) -> Corpus:
    """Read every ``article<ID>.txt`` file under `directory` into a Corpus.

    All files are decoded before the corpus is built, so a bad file leaves
    nothing partially loaded.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise ParseError(f"document directory not found: {directory}")
    documents = {}
    for path in sorted(directory.iterdir()):
        match = DOCUMENT_PATTERN.match(path.name)
        if not match:
            continue
        try:
            raw = path.read_bytes()
        except OSError as exc:
            raise ParseError(f"cannot read document file {path}: {exc}") from exc
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(
                f"document file {path} is not valid UTF-8 at byte {exc.start}"
            ) from exc
        documents[match.group("id")] = Document(id=match.group("id"), text=text)
    return Corpus(documents=documents)


def save_documents(corpus: Corpus, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for doc in corpus.documents.values():
        (directory / f"article{doc.id}.txt").write_text(doc.text, encoding="utf-8")


def load_annotations(path: str | Path, default_label: str = DEFAULT_SPAN_LABEL) -> list[Annotation]:
    """Parse a span TSV; 3-column rows (no label) get `default_label`."""
    path = Path(path)
    annotations = []
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ParseError(f"cannot read annotation file {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) == 3:
            doc_id, label, (start_s, end_s) = fields[0], default_label, fields[1:]
        elif len(fields) == 4:
            doc_id, label, start_s, end_s = fields
        else:
            raise ParseError(f"{path}:{lineno}: expected 3 or 4 tab-separated fields, got {len(fields)}")
        try:
            start, end = int(start_s), int(end_s)
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: offsets must be integers: {line!r}") from exc
        if end <= start:
            raise ValidationError(f"{path}:{lineno}: end must exceed start, got [{start}, {end})")
        annotations.append(Annotation(doc_id=doc_id, label=label, start=start, end=end))
    return annotations


def save_annotations(
    annotations: Iterable[Annotation], path: str | Path, with_labels: bool = True
) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        for ann in annotations:
            if with_labels:
                handle.write(f"{ann.doc_id}\t{ann.label}\t{ann.start}\t{ann.end}\n")
            else:
                handle.write(f"{ann.doc_id}\t{ann.start}\t{ann.end}\n")


def tokenize(document: Document | str) -> list[TokenSpan]:
    """Split into maximal alphanumeric runs; every other non-space character
    becomes its own single-character token."""
    text = document.text if isinstance(document, Document) else document
    tokens: list[TokenSpan] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isalnum():
            j = i + 1
            while j < n and text[j].isalnum():
                j += 1
        else:
            j = i + 1
        tokens.append(TokenSpan(index=len(tokens), start=i, end=j, text=text[i:j]))
        i = j
    return tokens


def align_span(annotation, tokens: list[TokenSpan], text_length: Optional[int] = None) -> tuple[int, int]:
    """Smallest token index range [i, j) covering every token that overlaps
    the annotation's character interval.

    A span falling entirely inside whitespace yields an empty range (i == j)
    positioned at the first token starting at or after it.
    """
    start, end = annotation.start, annotation.end
    if start < 0 or start >= end:
        raise ValidationError(f"invalid span offsets [{start}, {end})")
    if text_length is not None and end > text_length:
        raise ValidationError(f"span [{start}, {end}) exceeds document length {text_length}")
    first = last = None
    for tok in tokens:
        if tok.start < end and tok.end > start:
            if first is None:
                first = tok.index
            last = tok.index
    if first is None:
        insertion = sum(1 for tok in tokens if tok.end <= start)
        return (insertion, insertion)
    return (first, last + 1)


def check_within_document(annotation: Annotation, document: Document) -> None:
    if annotation.end > len(document.text) or annotation.start < 0:
        raise ValidationError(
            f"annotation [{annotation.start}, {annotation.end}) out of bounds for "
            f"document {document.id!r} of length {len(document.text)}"
        )
