import json
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modeda.corpus import (
    EMPTY_STOPWORDS,
    Corpus,
    CorpusFormatError,
    StopwordList,
    clean_text,
    default_stopwords,
    load_corpus,
    load_stopwords,
    make_document,
    merge_annotations,
    save_corpus,
    tokenize,
)

THE = StopwordList(frozenset({"the"}))


@pytest.mark.parametrize("raw, expected", [
    ("Goooood!!! https://t.co/x #NHPIndia @user", "goood nhpindia"),
    ("", ""),
    ("abc", "abc"),
    ("Check www.example.com/path now", "check now"),
    ("don't   STOP\tbelieving", "don't stop believing"),
    ("aaaa bbbbbbb cc", "aaa bbb cc"),
    ("under_score and #tag", "underscore and tag"),
    ("!!!", ""),
])
def test_clean_text_examples(raw, expected):
    assert clean_text(raw) == expected


@settings(max_examples=300, deadline=None)
@given(st.text())
def test_clean_text_idempotent(raw):
    once = clean_text(raw)
    assert clean_text(once) == once


@settings(max_examples=300, deadline=None)
@given(st.text())
def test_clean_text_output_contract(raw):
    out = clean_text(raw)
    assert out == out.strip()
    assert "  " not in out
    assert "http" not in out or "://" not in out
    assert not re.search(r"(.)\1{3,}", out)
    assert not any(ord(c) < 32 or ord(c) == 127 for c in out)


@pytest.mark.parametrize("text, stop, expected", [
    ("the great scheme", THE, ["great", "scheme"]),
    ("a b", EMPTY_STOPWORDS, ["a", "b"]),
    ("the the", THE, []),
])
def test_tokenize_examples(text, stop, expected):
    assert tokenize(text, stop, True) == expected


@given(st.lists(st.sampled_from(["the", "a", "cat", "sat", "on", "mat"]), max_size=20),
       st.sets(st.sampled_from(["the", "a", "on", "dog"])))
def test_tokenize_drop_is_subsequence(words, stop):
    text = " ".join(words)
    sw = StopwordList(frozenset(stop))
    full = tokenize(text, sw, drop_stopwords=False)
    kept = tokenize(text, sw, drop_stopwords=True)
    it = iter(full)
    assert all(any(t == u for u in it) for t in kept)
    assert not set(kept) & stop


def test_document_tokens_follow_clean_text():
    doc = make_document("x", "The GREAT scheme!!!", "pos", THE)
    assert doc.clean_text == "the great scheme"
    assert doc.tokens == ("great", "scheme")


@pytest.mark.parametrize("labels, expected", [
    (["A", "A", "B"], "A"),
    (["A", "A", "A"], "A"),
    (["A", "B", "C"], None),
    (["A", "B"], None),
    (["A", "B", "A", "B"], None),
])
def test_merge_annotations(labels, expected):
    assert merge_annotations(labels) == expected


@pytest.mark.parametrize("labels", [[], ["A"]])
def test_merge_annotations_needs_two(labels):
    with pytest.raises(ValueError):
        merge_annotations(labels)


def test_load_tsv(tmp_path):
    p = tmp_path / "c.tsv"
    p.write_text("pos\tgood day\n", encoding="utf-8")
    c = load_corpus(p, "tsv", stopwords=EMPTY_STOPWORDS)
    assert len(c) == 1
    assert c[0].label == "pos" and c[0].tokens == ("good", "day") and c[0].id == "000001"


def test_load_jsonl(tmp_path):
    p = tmp_path / "c.jsonl"
    p.write_text('{"text":"a","label":"x"}\n{"id":"k","text":"b c"}\n', encoding="utf-8")
    c = load_corpus(p, "jsonl", stopwords=EMPTY_STOPWORDS)
    assert [d.label for d in c] == ["x", None]
    assert [d.id for d in c] == ["000001", "k"]
    assert c.label_set == {"x"}


@pytest.mark.parametrize("content, line", [
    ("pos\tgood\nneg\t   \npos\tfine\n", 2),
    ("pos\tgood\nno tab here\n", 2),
    ("pos\tgood\n\npos\tfine\n", 2),
])
def test_load_tsv_errors_name_line(tmp_path, content, line):
    p = tmp_path / "c.tsv"
    p.write_text(content, encoding="utf-8")
    with pytest.raises(CorpusFormatError, match=f":{line}:"):
        load_corpus(p, "tsv")


@pytest.mark.parametrize("content, line", [
    ('{"text":"a"}\n{bad json\n', 2),
    ('{"label":"x"}\n', 1),
    ('{"text":"a","label":3}\n', 1),
])
def test_load_jsonl_errors_name_line(tmp_path, content, line):
    p = tmp_path / "c.jsonl"
    p.write_text(content, encoding="utf-8")
    with pytest.raises(CorpusFormatError, match=f":{line}:"):
        load_corpus(p, "jsonl")


def test_load_empty_file(tmp_path):
    p = tmp_path / "e.tsv"
    p.write_text("", encoding="utf-8")
    with pytest.raises(CorpusFormatError, match="empty"):
        load_corpus(p)


def test_duplicate_ids_rejected(tmp_path):
    p = tmp_path / "d.jsonl"
    p.write_text('{"id":"a","text":"x"}\n{"id":"a","text":"y"}\n', encoding="utf-8")
    with pytest.raises(CorpusFormatError, match="duplicate"):
        load_corpus(p, "jsonl")


def test_undecodable_bytes_dropped(tmp_path):
    p = tmp_path / "b.tsv"
    p.write_bytes(b"pos\tgo\xffod\n")
    assert load_corpus(p, stopwords=EMPTY_STOPWORDS)[0].tokens == ("good",)


_texts = st.text(st.characters(blacklist_categories=("Cs",), blacklist_characters="\t\n\r"), min_size=1) \
    .filter(lambda s: s.strip())


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["pos", "neg", "neu"]), _texts), min_size=1, max_size=8))
def test_tsv_round_trip(tmp_path_factory, rows):
    docs = tuple(make_document(f"{i:06d}", t, lab, default_stopwords()) for i, (lab, t) in enumerate(rows, 1))
    corpus = Corpus(docs)
    p = tmp_path_factory.mktemp("rt") / "c.tsv"
    save_corpus(corpus, p, "tsv")
    assert load_corpus(p, "tsv") == corpus


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.text(min_size=1, max_size=6), st.one_of(st.none(), st.sampled_from(["a", "b"])),
                          st.text(st.characters(blacklist_categories=("Cs",))).filter(lambda s: s.strip())),
                min_size=1, max_size=8, unique_by=lambda r: r[0]))
def test_jsonl_round_trip(tmp_path_factory, rows):
    corpus = Corpus(tuple(make_document(i, t, lab, default_stopwords()) for i, lab, t in rows))
    p = tmp_path_factory.mktemp("rt") / "c.jsonl"
    save_corpus(corpus, p, "jsonl")
    assert load_corpus(p, "jsonl") == corpus
    assert all(json.loads(line) for line in p.read_text(encoding="utf-8").split("\n") if line)


def test_tsv_rejects_unstorable_text(tmp_path):
    corpus = Corpus((make_document("000001", "a\tb", "x"),))
    with pytest.raises(ValueError):
        save_corpus(corpus, tmp_path / "x.tsv", "tsv")


def test_default_stopwords():
    sw = default_stopwords()
    assert 150 <= len(sw.words) <= 200
    assert {"the", "a", "is"} <= sw.words
    assert all(w == w.lower() and " " not in w for w in sw.words)


def test_load_stopwords_rejects_uppercase(tmp_path):
    p = tmp_path / "s.txt"
    p.write_text("the\nAnd\n", encoding="utf-8")
    with pytest.raises(CorpusFormatError, match=":2:"):
        load_stopwords(p)


def test_subset_keeps_requested_order(small_corpus):
    ids = [small_corpus[5].id, small_corpus[2].id]
    assert [d.id for d in small_corpus.subset(ids)] == ids
