"""Command-line entry points for every pipeline stage.

Exit codes: 0 success, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import crf, emitters, gazetteer as gazetteer_mod, metrics, pipeline, postproc, spanops, tagcodec
from .corpus import Corpus, align_span, load_annotations, load_documents, save_annotations, tokenize
from .errors import ConfigError, SpanchainError


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="pipeline configuration file (JSON)")
    parser.add_argument("--seed", type=int, help="override the configured seed")
    parser.add_argument("--out", help="output file or directory")


def _load_config(args) -> pipeline.PipelineConfig:
    if not args.config:
        raise ConfigError("this command requires --config")
    cfg = pipeline.load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out:
        cfg.out = args.out
    return cfg


def _out_path(args, default: str) -> Path:
    return Path(args.out) if args.out else Path(default)


def cmd_tokenize(args) -> int:
    corpus = load_documents(args.docs)
    out = _out_path(args, "tokens.jsonl")
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8", newline="\n") as handle:
        for doc in corpus.documents.values():
            tokens = tokenize(doc)
            obj = {
                "doc_id": doc.id,
                "tokens": [{"text": t.text, "start": t.start, "end": t.end} for t in tokens],
            }
            handle.write(json.dumps(obj, ensure_ascii=False) + "\n")
    return 0


def cmd_encode(args) -> int:
    docs = load_documents(args.docs)
    annotations = load_annotations(args.annotations)
    corpus = Corpus(documents=docs.documents, annotations=annotations)
    pairs = []
    for doc in corpus.documents.values():
        tokens = tokenize(doc)
        ranges = []
        for ann in corpus.annotations_for(doc.id):
            i, j = align_span(ann, tokens)
            if i < j:
                ranges.append(spanops.Span(i, j, ann.label))
        flat = spanops.merge_ensemble([ranges]) if ranges else []
        seq = tagcodec.encode(flat, len(tokens), args.scheme)
        pairs.append(([t.text for t in tokens], seq))
    tagcodec.write_conll(pairs, _out_path(args, "tags.conll"))
    return 0


def cmd_train_crf(args) -> int:
    records = emitters.load_emissions(args.emissions)
    annotations = load_annotations(args.annotations)
    dataset = pipeline.gold_paths(records, annotations, args.scheme)
    config = crf.TrainConfig(
        learning_rate=args.learning_rate,
        epochs=args.epochs,
        l2=args.l2,
        seed=args.seed if args.seed is not None else 0,
        batch_size=args.batch_size,
    )
    model = crf.train(dataset, args.scheme, config)
    crf.save_model(model, _out_path(args, "crf.model"))
    return 0


def cmd_decode(args) -> int:
    records = emitters.load_emissions(args.emissions)
    model = crf.load_model(args.model) if args.model else None
    predictions, n_illegal, n_tags = pipeline.decode_emissions(
        records, args.scheme, model, constrain=not args.no_constrain
    )
    save_annotations(predictions, _out_path(args, "predictions.tsv"))
    if args.report:
        pipeline.write_report(
            [("illegal_tag_rate", (n_illegal / n_tags) if n_tags else 0.0), ("n_tags", n_tags)],
            args.report,
        )
    return 0


def cmd_merge(args) -> int:
    prediction_sets = [load_annotations(path) for path in args.inputs]
    merged = pipeline.merge_predictions(prediction_sets)
    save_annotations(merged, _out_path(args, "merged.tsv"))
    return 0


def cmd_fix_boundaries(args) -> int:
    corpus = load_documents(args.docs)
    predictions = load_annotations(args.predictions)
    config = postproc.PunctuationRuleConfig()
    fixed = pipeline.fix_prediction_boundaries(predictions, corpus, config)
    fixed = sorted(fixed, key=lambda a: (a.doc_id, a.start, a.end, a.label))
    save_annotations(fixed, _out_path(args, "fixed.tsv"))
    return 0


def cmd_gazetteer_build(args) -> int:
    docs = load_documents(args.docs)
    annotations = load_annotations(args.annotations)
    corpus = Corpus(documents=docs.documents, annotations=annotations)
    gaz = gazetteer_mod.build(corpus)
    gazetteer_mod.save_gazetteer(gaz, _out_path(args, "gazetteer.tsv"))
    return 0


def cmd_gazetteer_apply(args) -> int:
    gaz = gazetteer_mod.load_gazetteer(args.gazetteer)
    corpus = load_documents(args.docs)
    records = emitters.load_span_probs(args.span_probs)
    config = postproc.GazetteerBoostConfig(delta=args.delta)
    out = _out_path(args, "boosted.jsonl")
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8", newline="\n") as handle:
        for rec in records:
            doc = corpus.documents.get(rec.doc_id)
            if doc is None:
                raise ConfigError(f"span references unknown document {rec.doc_id!r}")
            boosted = postproc.boost_from_gazetteer(
                rec.probs, gaz, doc.text[rec.start : rec.end], config
            )
            obj = {
                "doc_id": rec.doc_id,
                "start": rec.start,
                "end": rec.end,
                "scores": {cls: float(v) for cls, v in sorted(boosted.items())},
            }
            handle.write(json.dumps(obj, ensure_ascii=False) + "\n")
    return 0


def cmd_classify(args) -> int:
    cfg = _load_config(args)
    cfg.task = "classification"
    out_dir = Path(cfg.out) if cfg.out else Path("classify-out")
    pipeline.run_classification(cfg, out_dir)
    return 0


def cmd_evaluate(args) -> int:
    predicted = load_annotations(args.pred)
    gold = load_annotations(args.gold)
    rows: list[tuple[str, object]] = []
    if args.task == "si":
        score = metrics.span_f1(predicted, gold)
        rows += [
            ("span_precision", score.precision),
            ("span_recall", score.recall),
            ("span_f1", score.f1),
            ("n_predicted", score.n_predicted),
            ("n_gold", score.n_gold),
        ]
        for label in sorted({a.label for a in gold}):
            sub = metrics.span_f1(
                [a for a in predicted if a.label == label], [a for a in gold if a.label == label]
            )
            rows.append((f"span_f1[{label}]", sub.f1))
    else:
        key = lambda a: (a.doc_id, a.start, a.end)
        predicted = sorted(predicted, key=key)
        gold = sorted(gold, key=key)
        if [key(a) for a in predicted] != [key(a) for a in gold]:
            raise ConfigError("prediction and gold files must cover the same spans")
        rows.append(("micro_f1", metrics.micro_f1([a.label for a in predicted], [a.label for a in gold])))
        for label in sorted({a.label for a in gold}):
            tp = sum(1 for p, g in zip(predicted, gold) if p.label == label and g.label == label)
            fp = sum(1 for p, g in zip(predicted, gold) if p.label == label and g.label != label)
            fn = sum(1 for p, g in zip(predicted, gold) if p.label != label and g.label == label)
            prec = tp / (tp + fp) if tp + fp else 0.0
            rec = tp / (tp + fn) if tp + fn else 0.0
            f1 = 0.0 if prec + rec == 0 else 2 * prec * rec / (prec + rec)
            rows.append((f"class_f1[{label}]", f1))
    if args.out:
        pipeline.write_report(rows, args.out)
    else:
        for name, value in rows:
            print(f"{name}\t{value:.6f}" if isinstance(value, float) else f"{name}\t{value}")
    return 0


def cmd_ablate(args) -> int:
    cfg = _load_config(args)
    out_dir = Path(cfg.out) if cfg.out else Path("ablation-out")
    rows = pipeline.ablate(cfg, out_dir)
    for row in rows:
        print(f"{row.name}\t{row.metric}\t{row.value:.6f}\t{row.delta:+.6f}")
    return 0


def cmd_pipeline(args) -> int:
    cfg = _load_config(args)
    out_dir = Path(cfg.out) if cfg.out else Path("pipeline-out")
    pipeline.run_pipeline(cfg, out_dir)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spanchain", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        _common(p)
        p.set_defaults(fn=fn)
        return p

    p = add("tokenize", cmd_tokenize, help="tokenize documents to JSONL")
    p.add_argument("--docs", required=True)

    p = add("encode", cmd_encode, help="encode gold spans as CoNLL tag lines")
    p.add_argument("--docs", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--scheme", default="BIO", choices=["IO", "BIO", "BIOES"])

    p = add("train-crf", cmd_train_crf, help="fit a chain model on emission files")
    p.add_argument("--emissions", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--scheme", default="BIO", choices=["IO", "BIO", "BIOES"])
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--l2", type=float, default=0.0)
    p.add_argument("--batch-size", type=int, default=8)

    p = add("decode", cmd_decode, help="decode emissions to span predictions")
    p.add_argument("--emissions", required=True)
    p.add_argument("--scheme", default="BIO", choices=["IO", "BIO", "BIOES"])
    p.add_argument("--model", help="trained model file; omit for per-token argmax")
    p.add_argument("--no-constrain", action="store_true", help="drop the legality mask")
    p.add_argument("--report", help="write illegal-tag-rate report here")

    p = add("merge", cmd_merge, help="interval-union merge of prediction files")
    p.add_argument("--inputs", nargs="+", required=True)

    p = add("fix-boundaries", cmd_fix_boundaries, help="apply punctuation/quote boundary fixing")
    p.add_argument("--predictions", required=True)
    p.add_argument("--docs", required=True)

    gaz = sub.add_parser("gazetteer", help="build or apply a training-set gazetteer")
    gaz_sub = gaz.add_subparsers(dest="gazetteer_command", required=True)
    p = gaz_sub.add_parser("build")
    _common(p)
    p.set_defaults(fn=cmd_gazetteer_build)
    p.add_argument("--docs", required=True)
    p.add_argument("--annotations", required=True)
    p = gaz_sub.add_parser("apply")
    _common(p)
    p.set_defaults(fn=cmd_gazetteer_apply)
    p.add_argument("--gazetteer", required=True)
    p.add_argument("--docs", required=True)
    p.add_argument("--span-probs", required=True)
    p.add_argument("--delta", type=float, default=0.5)

    add("classify", cmd_classify, help="run the classification pipeline from a config")

    p = add("evaluate", cmd_evaluate, help="score predictions against gold")
    p.add_argument("--task", required=True, choices=["si", "tc"])
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)

    add("ablate", cmd_ablate, help="run the configured ablation lattice")
    add("pipeline", cmd_pipeline, help="run the configured end-to-end pipeline")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SpanchainError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
