"""Config-driven pipelines: span identification (decode, ensemble-merge,
boundary fix, evaluate), span classification (probability post-processing,
label assignment, evaluate), and the toggle-lattice ablation harness.

Runs are deterministic: fixed seeds, sorted iteration orders, and fixed
float formatting everywhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import crf, emitters, gazetteer as gazetteer_mod, metrics, postproc, spanops, tagcodec
from .corpus import Annotation, Corpus, align_span, load_annotations, load_documents, save_annotations
from .errors import ConfigError, DataError

STAGE_NAMES = (
    "crf",
    "merge",
    "punct_fix",
    "length",
    "gazetteer_boost",
    "repetition",
    "nesting",
    "multilabel",
)

DEFAULT_STAGES = {name: False for name in STAGE_NAMES}
DEFAULT_STAGES["length"] = True


@dataclass
class PipelineConfig:
    task: str = "identification"
    scheme: str = "BIO"
    seed: int = 0
    documents: Optional[str] = None
    annotations: Optional[str] = None
    train_documents: Optional[str] = None
    train_annotations: Optional[str] = None
    train_emissions: Optional[str] = None
    emissions: list[str] = field(default_factory=list)
    span_probs: Optional[str] = None
    source: str = "file"
    stages: dict = field(default_factory=lambda: dict(DEFAULT_STAGES))
    crf_params: dict = field(default_factory=dict)
    softmax_params: dict = field(default_factory=dict)
    punct: postproc.PunctuationRuleConfig = field(default_factory=postproc.PunctuationRuleConfig)
    repetition: postproc.RepetitionRuleConfig = field(default_factory=postproc.RepetitionRuleConfig)
    gazetteer: postproc.GazetteerBoostConfig = field(default_factory=postproc.GazetteerBoostConfig)
    gazetteer_path: Optional[str] = None
    nesting_strategy: int = 2
    nesting_temperature: float = 0.26
    binning: emitters.LengthBinning = field(default_factory=emitters.LengthBinning)
    out: Optional[str] = None
    ablate_rows: list[dict] = field(default_factory=list)


def _take(obj: dict, key: str, default=None):
    return obj[key] if key in obj else default


def parse_config(obj: dict) -> PipelineConfig:
    """Build a validated PipelineConfig from a parsed JSON object."""
    if not isinstance(obj, dict):
        raise ConfigError("config root must be an object")
    cfg = PipelineConfig()
    cfg.task = _take(obj, "task", cfg.task)
    if cfg.task not in ("identification", "classification"):
        raise ConfigError(f"unknown task {cfg.task!r}")
    cfg.scheme = _take(obj, "scheme", cfg.scheme)
    try:
        tagcodec.EncodingScheme(cfg.scheme)
    except ValueError:
        raise ConfigError(f"unknown scheme {cfg.scheme!r}") from None
    cfg.seed = int(_take(obj, "seed", cfg.seed))
    corpus_section = _take(obj, "corpus", {}) or {}
    cfg.documents = _take(corpus_section, "documents")
    cfg.annotations = _take(corpus_section, "annotations")
    train_section = _take(obj, "train", {}) or {}
    cfg.train_documents = _take(train_section, "documents")
    cfg.train_annotations = _take(train_section, "annotations")
    cfg.train_emissions = _take(train_section, "emissions")
    emissions = _take(obj, "emissions", [])
    cfg.emissions = [emissions] if isinstance(emissions, str) else list(emissions)
    cfg.span_probs = _take(obj, "span_probs")
    cfg.source = _take(obj, "source", cfg.source)
    if cfg.source not in ("file", "baseline"):
        raise ConfigError(f"unknown probability source {cfg.source!r}")
    stages = dict(DEFAULT_STAGES)
    for name, value in (_take(obj, "stages", {}) or {}).items():
        if name not in STAGE_NAMES:
            raise ConfigError(f"unknown stage toggle {name!r}")
        stages[name] = bool(value)
    cfg.stages = stages
    cfg.crf_params = dict(_take(obj, "crf", {}) or {})
    cfg.softmax_params = dict(_take(obj, "softmax", {}) or {})
    punct = _take(obj, "punct", {}) or {}
    kwargs = {}
    if "set" in punct:
        kwargs["punctuation"] = frozenset(punct["set"])
    if "quotes" in punct:
        kwargs["quote_pairs"] = tuple((o, c) for o, c in punct["quotes"])
    if kwargs:
        cfg.punct = postproc.PunctuationRuleConfig(**kwargs)
    rep = _take(obj, "repetition", {}) or {}
    cfg.repetition = postproc.RepetitionRuleConfig(
        t1=float(_take(rep, "t1", 0.001)),
        t2=float(_take(rep, "t2", 0.99)),
        class_name=_take(rep, "class", "Repetition"),
    )
    gaz = _take(obj, "gazetteer", {}) or {}
    cfg.gazetteer = postproc.GazetteerBoostConfig(delta=float(_take(gaz, "delta", 0.5)))
    cfg.gazetteer_path = _take(gaz, "path")
    nest = _take(obj, "nesting", {}) or {}
    cfg.nesting_strategy = int(_take(nest, "strategy", 2))
    if cfg.nesting_strategy not in (1, 2):
        raise ConfigError("nesting.strategy must be 1 or 2")
    cfg.nesting_temperature = float(_take(nest, "temperature", 0.26))
    if "binning" in obj:
        cfg.binning = emitters.LengthBinning(edges=tuple(obj["binning"]))
    cfg.out = _take(obj, "out")
    ablate = _take(obj, "ablate", {}) or {}
    cfg.ablate_rows = list(_take(ablate, "rows", []))
    return cfg


def load_config(path) -> PipelineConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return parse_config(obj)


def _require(value, what: str):
    if not value:
        raise ConfigError(f"missing required config entry: {what}")
    return value


def _load_eval_corpus(cfg: PipelineConfig) -> Corpus:
    docs = load_documents(_require(cfg.documents, "corpus.documents"))
    anns = load_annotations(_require(cfg.annotations, "corpus.annotations"))
    return Corpus(documents=docs.documents, annotations=anns)


def write_report(rows: list[tuple[str, object]], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        for key, value in rows:
            if isinstance(value, float):
                handle.write(f"{key}\t{value:.6f}\n")
            else:
                handle.write(f"{key}\t{value}\n")


# ---------------------------------------------------------------------------
# Identification
# ---------------------------------------------------------------------------


def gold_paths(
    records: list[crf.EmissionMatrix], annotations: list[Annotation], scheme
) -> list[tuple[crf.EmissionMatrix, list[int]]]:
    """Pair each emission record with its encoded gold tag-index path."""
    by_doc: dict[str, list[Annotation]] = {}
    for ann in annotations:
        by_doc.setdefault(ann.doc_id, []).append(ann)
    tag_index = None
    dataset = []
    for em in records:
        if em.tokens is None:
            raise DataError(f"emission record for doc {em.doc_id!r} lacks token spans")
        if tag_index is None:
            tag_index = {tag: i for i, tag in enumerate(em.tag_order)}
        token_ranges = []
        for ann in by_doc.get(em.doc_id, []):
            i, j = align_span(ann, em.tokens)
            if i < j:
                token_ranges.append(spanops.Span(i, j, ann.label))
        flat = spanops.merge_ensemble([token_ranges]) if token_ranges else []
        seq = tagcodec.encode(flat, em.n_tokens, scheme)
        path = [tag_index[str(tag)] for tag in seq.tags]
        dataset.append((em, path))
    return dataset


def _train_crf_model(cfg: PipelineConfig) -> crf.CrfModel:
    model_path = cfg.crf_params.get("model")
    if model_path:
        return crf.load_model(model_path)
    emissions_path = _require(cfg.train_emissions, "train.emissions (or crf.model)")
    annotations_path = _require(cfg.train_annotations, "train.annotations")
    records = emitters.load_emissions(emissions_path)
    annotations = load_annotations(annotations_path)
    dataset = gold_paths(records, annotations, cfg.scheme)
    train_config = crf.TrainConfig(
        learning_rate=float(cfg.crf_params.get("learning_rate", 0.1)),
        epochs=int(cfg.crf_params.get("epochs", 20)),
        l2=float(cfg.crf_params.get("l2", 0.0)),
        seed=int(cfg.crf_params.get("seed", cfg.seed)),
        batch_size=int(cfg.crf_params.get("batch_size", 8)),
    )
    return crf.train(dataset, cfg.scheme, train_config)


def decode_emissions(
    records: list[crf.EmissionMatrix],
    scheme,
    model: Optional[crf.CrfModel] = None,
    constrain: bool = True,
) -> tuple[list[Annotation], int, int]:
    """Decode one emission set to char-offset annotations.

    Without a model this is per-token argmax; with one, Viterbi (legality-
    masked when `constrain`).  Returns (annotations, n_illegal, n_tags)
    counted on the raw tag sequences before lenient repair.
    """
    scheme = tagcodec.EncodingScheme(scheme)
    predictions = []
    n_illegal = 0
    n_tags = 0
    for em in sorted(records, key=lambda r: r.doc_id):
        if em.tokens is None:
            raise DataError(f"emission record for doc {em.doc_id!r} lacks token spans")
        tags = crf.parse_tag_order(em.tag_order, scheme)
        if model is None:
            path = [int(i) for i in np.argmax(em.scores, axis=1)] if em.n_tokens else []
        else:
            mask = crf.legality_mask(em.tag_order, scheme) if constrain else None
            path, _ = crf.viterbi(model, em, mask)
        seq = tagcodec.TagSequence(tuple(tags[i] for i in path), scheme)
        n_illegal += len(tagcodec.validate(seq))
        n_tags += len(seq)
        for span in tagcodec.decode(seq, "lenient"):
            predictions.append(
                Annotation(
                    doc_id=em.doc_id,
                    label=span.label,
                    start=em.tokens[span.start].start,
                    end=em.tokens[span.end - 1].end,
                )
            )
    return predictions, n_illegal, n_tags


def merge_predictions(prediction_sets: list[list[Annotation]]) -> list[Annotation]:
    """Interval-union merge across prediction sets, per document."""
    doc_ids = sorted({a.doc_id for preds in prediction_sets for a in preds})
    merged = []
    for doc_id in doc_ids:
        sets = [
            [spanops.Span(a.start, a.end, a.label) for a in preds if a.doc_id == doc_id]
            for preds in prediction_sets
        ]
        for span in spanops.merge_ensemble(sets):
            merged.append(Annotation(doc_id=doc_id, label=span.label, start=span.start, end=span.end))
    return merged


def fix_prediction_boundaries(
    predictions: list[Annotation], corpus: Corpus, config: postproc.PunctuationRuleConfig
) -> list[Annotation]:
    fixed = []
    for ann in predictions:
        doc = corpus.documents.get(ann.doc_id)
        if doc is None:
            raise DataError(f"prediction references unknown document {ann.doc_id!r}")
        span = postproc.fix_boundaries(spanops.Span(ann.start, ann.end, ann.label), doc.text, config)
        fixed.append(replace(ann, start=span.start, end=span.end))
    return fixed


@dataclass
class IdentificationResult:
    predictions: list[Annotation]
    report: list[tuple[str, object]]
    score: metrics.SpanScore


def run_identification(cfg: PipelineConfig, out_dir: Optional[Path] = None) -> IdentificationResult:
    corpus = _load_eval_corpus(cfg)
    if not cfg.emissions:
        raise ConfigError("identification requires at least one emissions file")
    model = _train_crf_model(cfg) if cfg.stages["crf"] else None
    constrain = bool(cfg.crf_params.get("constrain", True))
    prediction_sets = []
    illegal = total = 0
    for path in cfg.emissions:
        records = emitters.load_emissions(path)
        preds, n_illegal, n_tags = decode_emissions(records, cfg.scheme, model, constrain)
        prediction_sets.append(preds)
        illegal += n_illegal
        total += n_tags
    if cfg.stages["merge"]:
        predictions = merge_predictions(prediction_sets)
    else:
        predictions = prediction_sets[0]
    if cfg.stages["punct_fix"]:
        predictions = fix_prediction_boundaries(predictions, corpus, cfg.punct)
    predictions = sorted(predictions, key=lambda a: (a.doc_id, a.start, a.end, a.label))
    score = metrics.span_f1(predictions, corpus.annotations)
    report: list[tuple[str, object]] = [
        ("task", "identification"),
        ("span_precision", score.precision),
        ("span_recall", score.recall),
        ("span_f1", score.f1),
        ("n_predicted", score.n_predicted),
        ("n_gold", score.n_gold),
        ("illegal_tag_rate", (illegal / total) if total else 0.0),
    ]
    if out_dir is not None:
        out_dir = Path(out_dir)
        save_annotations(predictions, out_dir / "predictions.tsv")
        write_report(report, out_dir / "report.tsv")
    return IdentificationResult(predictions=predictions, report=report, score=score)


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------


def _load_train_corpus(cfg: PipelineConfig) -> Corpus:
    docs = load_documents(_require(cfg.train_documents, "train.documents"))
    anns = load_annotations(_require(cfg.train_annotations, "train.annotations"))
    return Corpus(documents=docs.documents, annotations=anns)


def _span_text(corpus: Corpus, ann: Annotation) -> str:
    doc = corpus.documents.get(ann.doc_id)
    if doc is None:
        raise DataError(f"annotation references unknown document {ann.doc_id!r}")
    return doc.text[ann.start : ann.end]


def _featurize(corpus: Corpus, ann: Annotation, cfg: PipelineConfig, include_length: bool):
    doc = corpus.documents[ann.doc_id]
    context = emitters.sentence_containing(doc.text, ann.start, ann.end)
    return emitters.featurize_span(
        _span_text(corpus, ann), context, cfg.binning, include_length=include_length
    )


def _baseline_probs(
    cfg: PipelineConfig, eval_corpus: Corpus, include_length: bool
) -> list[dict[str, float]]:
    train_corpus = _load_train_corpus(cfg)
    examples = [
        (_featurize(train_corpus, ann, cfg, include_length), ann.label)
        for ann in train_corpus.annotations
    ]
    train_config = crf.TrainConfig(
        learning_rate=float(cfg.softmax_params.get("learning_rate", 0.5)),
        epochs=int(cfg.softmax_params.get("epochs", 100)),
        l2=float(cfg.softmax_params.get("l2", 1e-4)),
        seed=int(cfg.softmax_params.get("seed", cfg.seed)),
        batch_size=int(cfg.softmax_params.get("batch_size", 16)),
    )
    model = emitters.train_softmax(examples, train_config)
    return [
        emitters.predict_proba(model, _featurize(eval_corpus, ann, cfg, include_length))
        for ann in eval_corpus.annotations
    ]


def _file_probs(cfg: PipelineConfig, eval_corpus: Corpus) -> list[dict[str, float]]:
    records = emitters.load_span_probs(_require(cfg.span_probs, "span_probs"))
    ordered = sorted(records, key=lambda r: (r.doc_id, r.start, r.end))
    if len(ordered) != len(eval_corpus.annotations):
        raise DataError(
            f"span probability file has {len(ordered)} records for "
            f"{len(eval_corpus.annotations)} annotated spans"
        )
    probs = []
    for rec, ann in zip(ordered, eval_corpus.annotations):
        if (rec.doc_id, rec.start, rec.end) != (ann.doc_id, ann.start, ann.end):
            raise DataError(
                f"span probability record ({rec.doc_id}, {rec.start}, {rec.end}) does not "
                f"match annotation ({ann.doc_id}, {ann.start}, {ann.end})"
            )
        probs.append(dict(rec.probs))
    return probs


def _argmax_label(scores: dict[str, float]) -> str:
    return max(sorted(scores), key=lambda cls: scores[cls])


@dataclass
class ClassificationResult:
    labels: list[Annotation]
    report: list[tuple[str, object]]
    micro_f1: float


def run_classification(cfg: PipelineConfig, out_dir: Optional[Path] = None) -> ClassificationResult:
    eval_corpus = _load_eval_corpus(cfg)
    instances = eval_corpus.annotations
    if not instances:
        raise DataError("no spans to classify")
    include_length = cfg.stages["length"]
    if cfg.source == "baseline":
        scores = _baseline_probs(cfg, eval_corpus, include_length)
    else:
        scores = _file_probs(cfg, eval_corpus)

    gaz = None
    nesting_model = None
    train_corpus = None
    if cfg.stages["gazetteer_boost"]:
        if cfg.gazetteer_path:
            gaz = gazetteer_mod.load_gazetteer(cfg.gazetteer_path)
        else:
            train_corpus = _load_train_corpus(cfg)
            gaz = gazetteer_mod.build(train_corpus)
    if cfg.stages["nesting"]:
        if train_corpus is None:
            train_corpus = _load_train_corpus(cfg)
        nested = [
            (inner.label, outer.label)
            for doc_id in train_corpus.documents
            for inner, outer in _nested_annotation_pairs(train_corpus.annotations_for(doc_id))
        ]
        classes = sorted(
            {a.label for a in train_corpus.annotations} | {cls for s in scores for cls in s}
        )
        nesting_model = postproc.build_nesting_model(nested, classes, cfg.nesting_temperature)

    if cfg.stages["gazetteer_boost"]:
        scores = [
            postproc.boost_from_gazetteer(s, gaz, _span_text(eval_corpus, ann), cfg.gazetteer)
            for s, ann in zip(scores, instances)
        ]

    if cfg.stages["repetition"]:
        texts = [postproc.normalize_span_text(_span_text(eval_corpus, ann)) for ann in instances]
        by_doc: dict[str, dict[str, int]] = {}
        for ann, text in zip(instances, texts):
            counts = by_doc.setdefault(ann.doc_id, {})
            counts[text] = counts.get(text, 0) + 1
        scores = [
            postproc.apply_repetition(s, by_doc[ann.doc_id][text], cfg.repetition)
            for s, ann, text in zip(scores, instances, texts)
        ]

    labels = [_argmax_label(s) for s in scores]

    if cfg.stages["nesting"]:
        _apply_nesting(instances, scores, labels, cfg, nesting_model)

    if cfg.stages["multilabel"]:
        groups: dict[tuple, list[int]] = {}
        for i, ann in enumerate(instances):
            groups.setdefault((ann.doc_id, ann.start, ann.end), []).append(i)
        for indices in groups.values():
            if len(indices) > 1:
                assigned = postproc.assign_multilabel(scores[indices[0]], len(indices))
                for i, label in zip(indices, assigned):
                    labels[i] = label

    predicted = [replace(ann, label=label) for ann, label in zip(instances, labels)]
    score = metrics.micro_f1(labels, [ann.label for ann in instances])
    report: list[tuple[str, object]] = [
        ("task", "classification"),
        ("micro_f1", score),
        ("n_instances", len(instances)),
    ]
    for cls in sorted({ann.label for ann in instances}):
        gold_cls = [ann.label == cls for ann in instances]
        pred_cls = [label == cls for label in labels]
        tp = sum(1 for p, g in zip(pred_cls, gold_cls) if p and g)
        fp = sum(1 for p, g in zip(pred_cls, gold_cls) if p and not g)
        fn = sum(1 for p, g in zip(pred_cls, gold_cls) if not p and g)
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        f1 = 0.0 if p + r == 0 else 2 * p * r / (p + r)
        report.append((f"class_f1[{cls}]", f1))
    if out_dir is not None:
        out_dir = Path(out_dir)
        save_annotations(predicted, out_dir / "labels.tsv")
        write_report(report, out_dir / "report.tsv")
    return ClassificationResult(labels=predicted, report=report, micro_f1=score)


def _nested_annotation_pairs(annotations: list[Annotation]):
    spans = [spanops.Span(a.start, a.end, a.label) for a in annotations]
    seen = set()
    for inner, outer in spanops.find_nested_pairs(spans):
        key = (inner.start, inner.end, inner.label, outer.start, outer.end, outer.label)
        if key not in seen:
            seen.add(key)
            yield inner, outer


def _apply_nesting(instances, scores, labels, cfg: PipelineConfig, nesting_model) -> None:
    """Resolve labels of nested span pairs, innermost pairs first."""
    by_doc: dict[str, list[int]] = {}
    for i, ann in enumerate(instances):
        by_doc.setdefault(ann.doc_id, []).append(i)
    allowed = nesting_model.allowed_pairs()
    for doc_id in sorted(by_doc):
        indices = by_doc[doc_id]
        pairs = []
        for i in indices:
            for j in indices:
                if i != j and spanops.contains(instances[j], instances[i]):
                    pairs.append((i, j))
        pairs.sort(
            key=lambda p: (
                instances[p[1]].end - instances[p[1]].start,
                instances[p[0]].end - instances[p[0]].start,
                instances[p[0]].start,
                instances[p[1]].start,
            )
        )
        for inner_i, outer_i in pairs:
            if cfg.nesting_strategy == 1:
                decision = postproc.resolve_nesting_strategy1(scores[inner_i], scores[outer_i], allowed)
            else:
                decision = postproc.resolve_nesting_strategy2(scores[inner_i], scores[outer_i], nesting_model)
            labels[inner_i] = decision.inner
            labels[outer_i] = decision.outer


# ---------------------------------------------------------------------------
# Ablation
# ---------------------------------------------------------------------------


@dataclass
class AblationRow:
    name: str
    metric: str
    value: float
    delta: float


def ablate(cfg: PipelineConfig, out_dir: Optional[Path] = None) -> list[AblationRow]:
    """Run the configured toggle-lattice rows in order and report deltas."""
    if not cfg.ablate_rows:
        raise ConfigError("ablate.rows must be a non-empty list")
    rows = []
    previous = None
    for row_obj in cfg.ablate_rows:
        name = row_obj.get("name")
        if not name:
            raise ConfigError("each ablation row needs a name")
        stages = dict(cfg.stages)
        for key, value in (row_obj.get("stages") or {}).items():
            if key not in STAGE_NAMES:
                raise ConfigError(f"unknown stage toggle {key!r} in ablation row {name!r}")
            stages[key] = bool(value)
        row_cfg = replace(cfg, stages=stages)
        row_out = Path(out_dir) / name.replace(" ", "_") if out_dir is not None else None
        if cfg.task == "identification":
            result = run_identification(row_cfg, row_out)
            metric, value = "span_f1", result.score.f1
        else:
            result = run_classification(row_cfg, row_out)
            metric, value = "micro_f1", result.micro_f1
        delta = 0.0 if previous is None else value - previous
        rows.append(AblationRow(name=name, metric=metric, value=value, delta=delta))
        previous = value
    if out_dir is not None:
        path = Path(out_dir) / "ablation.tsv"
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="\n") as handle:
            handle.write("row\tmetric\tvalue\tdelta\n")
            for row in rows:
                handle.write(f"{row.name}\t{row.metric}\t{row.value:.6f}\t{row.delta:+.6f}\n")
    return rows


def run_pipeline(cfg: PipelineConfig, out_dir: Optional[Path] = None):
    if cfg.task == "identification":
        return run_identification(cfg, out_dir)
    return run_classification(cfg, out_dir)
