import pytest

from spanchain.corpus import (
    Annotation,
    Corpus,
    Document,
    align_span,
    load_annotations,
    load_documents,
    save_annotations,
    save_documents,
    tokenize,
)
from spanchain.errors import ParseError, ValidationError


def test_load_documents_maps_filename_to_id(tmp_path):
    (tmp_path / "article111.txt").write_text("abc", encoding="utf-8")
    corpus = load_documents(tmp_path)
    assert corpus.documents == {"111": Document(id="111", text="abc")}


def test_load_documents_empty_directory(tmp_path):
    assert load_documents(tmp_path).documents == {}


def test_load_documents_bad_utf8_names_file_and_loads_nothing(tmp_path):
    for i in range(3):
        (tmp_path / f"article{i}.txt").write_text("ok", encoding="utf-8")
    (tmp_path / "article9.txt").write_bytes(b"\xff\xfe broken")
    with pytest.raises(ParseError) as err:
        load_documents(tmp_path)
    assert "article9.txt" in str(err.value)
    assert "byte" in str(err.value)


def test_load_documents_ignores_other_files(tmp_path):
    (tmp_path / "article1.txt").write_text("x", encoding="utf-8")
    (tmp_path / "README.md").write_text("not an article", encoding="utf-8")
    assert list(load_documents(tmp_path).documents) == ["1"]


def test_load_annotations_labeled_row(tmp_path):
    path = tmp_path / "gold.tsv"
    path.write_text("111\tRepetition\t10\t25\n", encoding="utf-8")
    assert load_annotations(path) == [Annotation("111", "Repetition", 10, 25)]


def test_load_annotations_unlabeled_row_gets_default_label(tmp_path):
    path = tmp_path / "gold.tsv"
    path.write_text("111\t10\t25\n", encoding="utf-8")
    assert load_annotations(path) == [Annotation("111", "PROP", 10, 25)]


def test_load_annotations_rejects_inverted_offsets(tmp_path):
    path = tmp_path / "gold.tsv"
    path.write_text("111\t5\t2\n", encoding="utf-8")
    with pytest.raises(ValidationError):
        load_annotations(path)


def test_load_annotations_parse_error_carries_line_number(tmp_path):
    path = tmp_path / "gold.tsv"
    path.write_text("111\tA\t1\t2\nbroken line\n", encoding="utf-8")
    with pytest.raises(ParseError) as err:
        load_annotations(path)
    assert ":2:" in str(err.value)


def test_tokenize_words_and_punctuation():
    spans = tokenize("It is.")
    assert [(t.text, t.start, t.end) for t in spans] == [("It", 0, 2), ("is", 3, 5), (".", 5, 6)]


def test_tokenize_empty():
    assert tokenize("") == []


def test_tokenize_quotes_are_single_tokens():
    spans = tokenize('"Hi!"')
    assert [(t.text, t.start, t.end) for t in spans] == [
        ('"', 0, 1),
        ("Hi", 1, 3),
        ("!", 3, 4),
        ('"', 4, 5),
    ]


def test_tokenize_is_total():
    text = "A “B”  c3,\nd-e!"
    tokens = tokenize(text)
    rebuilt = list(text)
    covered = set()
    for t in tokens:
        assert text[t.start : t.end] == t.text
        for i in range(t.start, t.end):
            assert i not in covered
            covered.add(i)
    for i, ch in enumerate(rebuilt):
        assert (i in covered) == (not ch.isspace())


def test_align_span_basic():
    tokens = tokenize("It is.")
    assert align_span(Annotation("d", "X", 3, 5), tokens) == (1, 2)
    assert align_span(Annotation("d", "X", 0, 6), tokens) == (0, 3)
    assert align_span(Annotation("d", "X", 4, 6), tokens) == (1, 3)


def test_align_span_whitespace_only_is_empty_range():
    tokens = tokenize("It is.")
    assert align_span(Annotation("d", "X", 2, 3), tokens) == (1, 1)


def test_align_span_out_of_bounds():
    tokens = tokenize("It is.")
    with pytest.raises(ValidationError):
        align_span(Annotation("d", "X", 3, 10), tokens, text_length=6)


def test_align_span_monotone():
    text = "alpha beta gamma, delta"
    tokens = tokenize(text)
    inner = Annotation("d", "X", 6, 10)
    outer = Annotation("d", "X", 2, 18)
    ri = align_span(inner, tokens)
    ro = align_span(outer, tokens)
    assert ro[0] <= ri[0] and ri[1] <= ro[1]


def test_corpus_orders_and_validates():
    docs = {"b": Document("b", "xxxx"), "a": Document("a", "yyyy")}
    anns = [Annotation("b", "L", 1, 3), Annotation("a", "L", 0, 2), Annotation("a", "K", 0, 1)]
    corpus = Corpus(documents=docs, annotations=anns)
    assert list(corpus.documents) == ["a", "b"]
    assert [(a.doc_id, a.start, a.end) for a in corpus.annotations] == [("a", 0, 1), ("a", 0, 2), ("b", 1, 3)]
    with pytest.raises(ValidationError):
        Corpus(documents=docs, annotations=[Annotation("zz", "L", 0, 1)])
    with pytest.raises(ValidationError):
        Corpus(documents=docs, annotations=[Annotation("a", "L", 0, 99)])


def test_corpus_roundtrip(tmp_path):
    docs = {
        "1": Document("1", 'He said "no".\nShe left.'),
        "2": Document("2", "Unicode — café!"),
    }
    anns = [Annotation("1", "A", 3, 7), Annotation("2", "B", 0, 7), Annotation("1", "A", 0, 2)]
    corpus = Corpus(documents=docs, annotations=anns)
    save_documents(corpus, tmp_path / "docs")
    save_annotations(corpus.annotations, tmp_path / "gold.tsv")
    reloaded = Corpus(
        documents=load_documents(tmp_path / "docs").documents,
        annotations=load_annotations(tmp_path / "gold.tsv"),
    )
    assert reloaded.documents == corpus.documents
    assert reloaded.annotations == corpus.annotations
