"""Per-token tag encodings (IO, BIO, BIOES) over token-range spans.

Tags are ``O`` or ``<prefix>-<class>`` with prefixes B/I/E/S.  ``decode``
supports a strict mode (any illegal transition is an error) and a lenient
mode that recovers spans from illegal model output: an I after O or after a
different class opens a new span, E/S close spans (an unmatched E acts as a
single), and a span still open at the end of the sequence is closed there.

``repair`` re-encodes the lenient decoding, so its output always validates
and ``decode(repair(x), strict) == decode(x, lenient)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence, Union

from .errors import ParseError, ValidationError
from .spanops import Span, sorted_spans


class EncodingScheme(str, Enum):
    IO = "IO"
    BIO = "BIO"
    BIOES = "BIOES"


_PREFIXES = {
    EncodingScheme.IO: "OI",
    EncodingScheme.BIO: "OBI",
    EncodingScheme.BIOES: "OBIES",
}


class _Boundary:
    """Sentinel chain endpoint for transition checks."""

    def __init__(self, name: str):
        self._name = name

    def __repr__(self):
        return self._name


START = _Boundary("START")
END = _Boundary("END")


@dataclass(frozen=True)
class Tag:
    prefix: str
    label: Optional[str] = None

    def __post_init__(self):
        if self.prefix == "O":
            if self.label is not None:
                raise ValidationError("O tags carry no class")
        elif self.prefix in "BIES":
            if not self.label:
                raise ValidationError(f"{self.prefix} tags need a class")
        else:
            raise ValidationError(f"unknown tag prefix {self.prefix!r}")

    def __str__(self):
        return self.prefix if self.label is None else f"{self.prefix}-{self.label}"

    @classmethod
    def parse(cls, text: str) -> "Tag":
        if text == "O":
            return cls("O")
        prefix, sep, label = text.partition("-")
        if not sep or prefix not in "BIES" or not label:
            raise ParseError(f"cannot parse tag {text!r}")
        return cls(prefix, label)


OUTSIDE = Tag("O")

TagLike = Union[Tag, str]


def _as_tag(tag: TagLike) -> Tag:
    return tag if isinstance(tag, Tag) else Tag.parse(tag)


def check_tag(tag: Tag, scheme: EncodingScheme) -> None:
    if tag.prefix not in _PREFIXES[scheme]:
        raise ValidationError(f"tag {tag} is not valid under {scheme.value}")


@dataclass(frozen=True)
class TagSequence:
    tags: tuple[Tag, ...]
    scheme: EncodingScheme

    def __post_init__(self):
        for tag in self.tags:
            check_tag(tag, self.scheme)

    def __len__(self):
        return len(self.tags)

    def __iter__(self):
        return iter(self.tags)

    @classmethod
    def of(cls, tags: Iterable[TagLike], scheme: EncodingScheme | str) -> "TagSequence":
        return cls(tuple(_as_tag(t) for t in tags), EncodingScheme(scheme))


def tags_for_scheme(labels: Sequence[str], scheme: EncodingScheme | str) -> list[Tag]:
    """Canonical tag inventory: O first, then per class in sorted order."""
    scheme = EncodingScheme(scheme)
    prefixes = {"IO": "I", "BIO": "BI", "BIOES": "BIES"}[scheme.value]
    tags = [OUTSIDE]
    for label in sorted(set(labels)):
        tags.extend(Tag(p, label) for p in prefixes)
    return tags


def legal_transition(
    prev: Union[Tag, _Boundary], nxt: Union[Tag, _Boundary], scheme: EncodingScheme | str
) -> bool:
    """Whether `prev` -> `nxt` may appear in a well-formed sequence."""
    scheme = EncodingScheme(scheme)
    if isinstance(prev, Tag):
        check_tag(prev, scheme)
    if isinstance(nxt, Tag):
        check_tag(nxt, scheme)

    if scheme is EncodingScheme.IO:
        return True

    if scheme is EncodingScheme.BIO:
        if isinstance(nxt, Tag) and nxt.prefix == "I":
            return isinstance(prev, Tag) and prev.prefix in "BI" and prev.label == nxt.label
        return True

    # BIOES: B/I must continue into I/E of the same class; O/B/S/END may only
    # follow a terminated position (O, E, S, or the chain start).
    mid_entity = isinstance(prev, Tag) and prev.prefix in "BI"
    if nxt is END:
        return not mid_entity
    assert isinstance(nxt, Tag)
    if nxt.prefix in "IE":
        return mid_entity and prev.label == nxt.label
    return not mid_entity


@dataclass(frozen=True)
class Violation:
    position: int
    prev: Union[Tag, _Boundary]
    next: Union[Tag, _Boundary]

    def __str__(self):
        return f"illegal transition {self.prev} -> {self.next} at position {self.position}"


def validate(sequence: TagSequence) -> list[Violation]:
    """All illegal transitions; position is the index transitioned into
    (``len(tags)`` for a bad chain end)."""
    tags, scheme = sequence.tags, sequence.scheme
    if not tags:
        return []
    chain = [START, *tags, END]
    violations = []
    for i in range(len(chain) - 1):
        if not legal_transition(chain[i], chain[i + 1], scheme):
            violations.append(Violation(position=i, prev=chain[i], next=chain[i + 1]))
    return violations


def encode(spans: Iterable[Span], n_tokens: int, scheme: EncodingScheme | str) -> TagSequence:
    """Tag a token sequence from non-overlapping token-range spans."""
    scheme = EncodingScheme(scheme)
    spans = sorted_spans(spans)
    tags = [OUTSIDE] * n_tokens
    prev_end = 0
    for span in spans:
        if span.start < prev_end:
            raise ValidationError(f"overlapping spans at token {span.start}; flatten before encoding")
        if span.start < 0 or span.end > n_tokens:
            raise ValidationError(f"span [{span.start}, {span.end}) outside [0, {n_tokens})")
        if span.label is None:
            raise ValidationError("cannot encode a span without a class")
        prev_end = span.end
        if scheme is EncodingScheme.IO:
            for i in range(span.start, span.end):
                tags[i] = Tag("I", span.label)
        elif scheme is EncodingScheme.BIO:
            tags[span.start] = Tag("B", span.label)
            for i in range(span.start + 1, span.end):
                tags[i] = Tag("I", span.label)
        else:
            if span.length == 1:
                tags[span.start] = Tag("S", span.label)
            else:
                tags[span.start] = Tag("B", span.label)
                for i in range(span.start + 1, span.end - 1):
                    tags[i] = Tag("I", span.label)
                tags[span.end - 1] = Tag("E", span.label)
    return TagSequence(tuple(tags), scheme)


def decode(sequence: TagSequence, mode: str = "strict") -> list[Span]:
    """Recover token-range spans from a tag sequence.

    ``strict`` raises on any illegal transition; ``lenient`` applies the
    recovery rules described in the module docstring.
    """
    if mode not in ("strict", "lenient"):
        raise ValidationError(f"decode mode must be 'strict' or 'lenient', got {mode!r}")
    if mode == "strict":
        violations = validate(sequence)
        if violations:
            detail = "; ".join(str(v) for v in violations)
            raise ValidationError(f"illegal tag sequence: {detail}")

    spans: list[Span] = []
    open_start: Optional[int] = None
    open_label: Optional[str] = None

    def close(end: int):
        nonlocal open_start, open_label
        if open_start is not None:
            spans.append(Span(open_start, end, open_label))
            open_start = open_label = None

    for i, tag in enumerate(sequence.tags):
        if tag.prefix == "O":
            close(i)
        elif tag.prefix == "B":
            close(i)
            open_start, open_label = i, tag.label
        elif tag.prefix == "I":
            if open_start is None or open_label != tag.label:
                close(i)
                open_start, open_label = i, tag.label
        elif tag.prefix == "E":
            if open_start is not None and open_label == tag.label:
                close(i + 1)
            else:
                close(i)
                spans.append(Span(i, i + 1, tag.label))
        else:  # S
            close(i)
            spans.append(Span(i, i + 1, tag.label))
    close(len(sequence.tags))
    return spans


def repair(sequence: TagSequence) -> TagSequence:
    """Nearest well-formed sequence under the lenient reading: re-encode the
    lenient decoding.  Idempotent; legal input comes back unchanged."""
    return encode(decode(sequence, "lenient"), len(sequence.tags), sequence.scheme)


def write_conll(pairs: Iterable[tuple[Sequence[str], TagSequence]], path) -> None:
    """Serialize ``token<TAB>tag`` lines, blank line between documents."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for tokens, sequence in pairs:
            if len(tokens) != len(sequence):
                raise ValidationError(
                    f"token/tag length mismatch: {len(tokens)} vs {len(sequence)}"
                )
            for token, tag in zip(tokens, sequence.tags):
                handle.write(f"{token}\t{tag}\n")
            handle.write("\n")


def read_conll(path, scheme: EncodingScheme | str) -> list[tuple[list[str], TagSequence]]:
    scheme = EncodingScheme(scheme)
    results = []
    tokens: list[str] = []
    tags: list[Tag] = []

    def flush():
        nonlocal tokens, tags
        if tokens:
            results.append((tokens, TagSequence(tuple(tags), scheme)))
            tokens, tags = [], []

    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line:
                flush()
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise ParseError(f"{path}:{lineno}: expected token<TAB>tag, got {line!r}")
            tokens.append(fields[0])
            tags.append(Tag.parse(fields[1]))
    flush()
    return results
