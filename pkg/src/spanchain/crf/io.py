"""Flat text (de)serialization of trained chain models.

Layout: a header with K, scheme, and tag order, then one line each for the
start and end vectors and one line per transition row.  Values use Python
repr, which round-trips float64 exactly.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import ParseError
from ..tagcodec import EncodingScheme
from .model import CrfModel

_MAGIC = "crf-model v1"


def save_model(model: CrfModel, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [_MAGIC]
    lines.append(f"K\t{model.n_tags}")
    lines.append(f"scheme\t{model.scheme.value}")
    lines.append("tags\t" + "\t".join(model.tag_order))
    lines.append("start\t" + "\t".join(repr(float(v)) for v in model.start))
    lines.append("end\t" + "\t".join(repr(float(v)) for v in model.end))
    for row in model.transitions:
        lines.append("trans\t" + "\t".join(repr(float(v)) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path) -> CrfModel:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != _MAGIC:
        raise ParseError(f"{path}: not a model file (missing '{_MAGIC}' header)")
    fields = {}
    trans_rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        key, _, rest = line.partition("\t")
        if key == "trans":
            trans_rows.append(rest)
        else:
            fields[key] = rest
    try:
        k = int(fields["K"])
        scheme = EncodingScheme(fields["scheme"])
        tag_order = tuple(fields["tags"].split("\t"))
        start = np.array([float(v) for v in fields["start"].split("\t")])
        end = np.array([float(v) for v in fields["end"].split("\t")])
        transitions = np.array([[float(v) for v in row.split("\t")] for row in trans_rows])
    except (KeyError, ValueError) as exc:
        raise ParseError(f"{path}: malformed model file: {exc}") from exc
    if len(tag_order) != k or transitions.shape != (k, k):
        raise ParseError(f"{path}: header K={k} inconsistent with stored arrays")
    return CrfModel(transitions=transitions, start=start, end=end, tag_order=tag_order, scheme=scheme)
