import json
import random
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_corpus
from modeda.augment import (
    AugmentationConfig,
    Augmenter,
    Edit,
    augment_corpus,
    augment_sentence,
    document_seed,
    eda_random_insertion,
    eda_synonym_replacement,
    load_synonyms,
    modified_insertion,
    modified_substitution,
    random_deletion,
    random_swap,
    replay,
    write_augmented_jsonl,
)
from modeda.corpus import EMPTY_STOPWORDS, Corpus, Document, StopwordList, make_document
from modeda.embeddings import EmbeddingStore
from modeda.keywords import ClassKeywordTable
from modeda.sentiment import SentimentLexicon, default_lexicon, sentence_polarity, word_polarity

token_lists = st.lists(st.sampled_from(["a", "b", "c", "d", "e", "f"]), max_size=15)


def is_subsequence(sub, seq):
    it = iter(seq)
    return all(any(x == y for y in it) for x in sub)


def great_store():
    # "great" sits closest to the four context-mates named for it, far from everything else
    words = ["great", "well", "good", "minor", "little", "awful", "table"]
    vecs = [[1, 0, 0], [0.95, 0.1, 0], [0.9, 0.2, 0], [0.85, 0.3, 0], [0.8, 0.4, 0], [-1, 0, 0], [0, 0, 1]]
    return EmbeddingStore(words, vecs)


def test_substitution_great_to_good():
    store, lex = great_store(), default_lexicon()
    nbrs = store.most_similar("great", 4).words
    assert sorted(nbrs) == ["good", "little", "minor", "well"]
    out, edits = modified_substitution(["great"], 1, 4, store, lex, random.Random(0))
    assert out == ["good"]
    (e,) = edits
    assert (e.op, e.pos, e.old, e.new, e.reference) == ("sub", 0, "great", "good", 3.0)
    assert {c[0]: c[1] for c in e.candidates} == {"well": 0, "good": 3, "minor": 0, "little": 0}


def test_substitution_identity_cases(small_store, small_lexicon):
    toks = list(small_store.vocab[:5])
    assert modified_substitution(toks, 0, 5, small_store, small_lexicon, random.Random(0)) == (toks, [])
    oov = ["zz1", "zz2"]
    assert modified_substitution(oov, 3, 5, small_store, small_lexicon, random.Random(0)) == (oov, [])


def test_substitution_tie_prefers_similarity_then_alpha():
    store = EmbeddingStore(["w", "near", "far", "b", "a"], [[1, 0], [1, 0.1], [1, 0.5], [0, 1], [0, 1]])
    lex = SentimentLexicon({})
    out, _ = modified_substitution(["w"], 1, 4, store, lex, random.Random(0))
    assert out == ["near"]
    store2 = EmbeddingStore(["w", "b", "a"], [[1, 0], [1, 1], [1, 1]])
    assert modified_substitution(["w"], 1, 2, store2, lex, random.Random(0))[0] == ["a"]


def test_substitution_excludes_stopwords():
    store = EmbeddingStore(["w", "the", "cat"], [[1, 0], [1, 0.01], [1, 0.5]])
    out, _ = modified_substitution(["w"], 1, 2, store, SentimentLexicon({}), random.Random(0), {"the"})
    assert out == ["cat"]


def insertion_setup():
    words = ["pos3", "zero", "neg2", "e1", "e2", "e3"]
    store = EmbeddingStore(words, np.eye(6) + 0.01)
    lex = SentimentLexicon({"pos3": 3, "neg2": -2, "e1": 4, "e2": -4, "e3": 5})
    table = ClassKeywordTable({"L": (("pos3", 5), ("zero", 4), ("neg2", 3))})
    return store, lex, table


def test_insertion_picks_exact_minimizer():
    store, lex, table = insertion_setup()
    out, edits = modified_insertion(["x", "y"], "L", 1, 3, store, lex, table, random.Random(0))
    assert edits[0].new == "zero" and edits[0].reference == 0
    assert out.count("zero") == 1 and len(out) == 3
    assert out[edits[0].pos] == "zero"


def test_insertion_identity_and_errors():
    store, lex, table = insertion_setup()
    assert modified_insertion(["x"], "L", 0, 3, store, lex, table, random.Random(0)) == (["x"], [])
    empty = ClassKeywordTable({"L": ()})
    assert modified_insertion(["x"], "L", 2, 3, store, lex, empty, random.Random(0)) == (["x"], [])
    with pytest.raises(ValueError):
        modified_insertion(["x"], "missing", 1, 3, store, lex, table, random.Random(0))


def test_insertion_deterministic(small_store, small_lexicon, small_table):
    doc = next(iter(random_corpus(small_store, 1, seed=9)))
    runs = [modified_insertion(list(doc.tokens), "pos", 3, 5, small_store, small_lexicon, small_table,
                               random.Random(42)) for _ in range(2)]
    assert runs[0] == runs[1]


def test_insertion_pool_includes_oov_seeds():
    store, lex, _ = insertion_setup()
    table = ClassKeywordTable({"L": (("unknownword", 2),)})
    out, edits = modified_insertion(["x"], "L", 1, 5, store, lex, table, random.Random(0))
    assert edits[0].new == "unknownword"


def test_swap_examples():
    assert random_swap(["a"], 3, random.Random(0)) == (["a"], [])
    src = ["a", "b", "c", "d"]
    for seed in range(50):
        out, _ = random_swap(src, 1, random.Random(seed))
        assert sum(x != y for x, y in zip(src, out)) in (0, 2)


@given(token_lists, st.integers(0, 6), st.integers(0, 10**6))
def test_swap_preserves_multiset(tokens, n, seed):
    out, edits = random_swap(tokens, n, random.Random(seed))
    assert Counter(out) == Counter(tokens)
    assert replay(tokens, edits) == out
    assert all(i != j for i, j in (e.pos for e in edits))


@given(token_lists, st.floats(0, 0.99), st.integers(0, 10**6))
def test_deletion_properties(tokens, p, seed):
    out, edits = random_deletion(tokens, p, random.Random(seed))
    assert is_subsequence(out, tokens)
    if tokens:
        assert len(out) >= 1
    assert len(out) == len(tokens) - len(edits)
    assert replay(tokens, edits) == out


def test_deletion_examples():
    assert random_deletion(["a", "b"], 0.0, random.Random(0)) == (["a", "b"], [])
    for seed in range(30):
        assert len(random_deletion(["a"], 0.9, random.Random(seed))[0]) == 1


def test_eda_synonym_examples():
    assert eda_synonym_replacement(["good"], 1, {}, random.Random(0)) == (["good"], [])
    assert eda_synonym_replacement(["good"], 1, {"good": ["fine"]}, random.Random(0))[0] == ["fine"]
    out, edits = eda_synonym_replacement(["good", "cat"], 2, {"good": ["fine"]}, random.Random(0))
    assert len(edits) <= 1 and out[1] == "cat"
    sw = StopwordList(frozenset({"good"}))
    assert eda_synonym_replacement(["good"], 1, {"good": ["fine"]}, random.Random(0), sw)[1] == []


@given(token_lists, st.integers(0, 5), st.integers(0, 10**6))
def test_eda_insertion_properties(tokens, n, seed):
    vocab = ["v1", "v2", "v3"]
    out, edits = eda_random_insertion(tokens, n, vocab, random.Random(seed))
    assert len(out) == len(tokens) + n
    assert all(e.new in vocab for e in edits)
    assert replay(tokens, edits) == out


def test_eda_insertion_empty_vocab():
    with pytest.raises(ValueError):
        eda_random_insertion(["a"], 1, [], random.Random(0))


def test_replay_checks_log():
    with pytest.raises(ValueError):
        replay(["a"], [Edit("sub", 0, "b", "c")])
    with pytest.raises(ValueError):
        replay(["a"], [Edit("bogus", 0)])


def test_edit_counts_default():
    cfg = AugmentationConfig()
    assert cfg.edit_counts(3) == (1, 1, 1)
    assert cfg.edit_counts(25) == (3, 3, 3)
    assert AugmentationConfig(n_sub=0, n_ins=2).edit_counts(25) == (0, 2, 3)


@pytest.mark.parametrize("kwargs", [{"mode": "x"}, {"t": 0}, {"n_aug": 0}, {"p_del": 1.0}, {"n_sub": -1}])
def test_config_bounds(kwargs):
    with pytest.raises(ValueError):
        AugmentationConfig(**kwargs)


def mod_augmenter(store, lex, table, **kw):
    return Augmenter(AugmentationConfig(**kw), store, lex, table)


def check_sentence(doc, aug, lex, store):
    """Every structural and minimality promise for one augmented sentence."""
    assert aug.label == doc.label and aug.source_id == doc.id
    assert replay(doc.tokens, aug.ops_applied) == list(aug.tokens)
    assert aug.tokens
    state = list(doc.tokens)
    ins_ref = None
    for e in aug.ops_applied:
        if e.op == "sub" and e.candidates:
            gap = abs(word_polarity(lex, e.new) - word_polarity(lex, e.old))
            assert e.reference == word_polarity(lex, e.old)
            assert all(gap <= abs(c[1] - e.reference) for c in e.candidates)
            assert e.new in [c[0] for c in e.candidates]
        elif e.op == "ins" and e.candidates:
            if ins_ref is None:
                ins_ref = sentence_polarity(lex, state)
            assert e.reference == ins_ref
            gap = abs(word_polarity(lex, e.new) - ins_ref)
            assert all(gap <= abs(c[1] - ins_ref) for c in e.candidates)
        if e.op != "ins":
            ins_ref = None
        state = replay(state, [e])


def test_augment_sentence_invariants(small_store, small_lexicon, small_table, small_corpus):
    aug = mod_augmenter(small_store, small_lexicon, small_table)
    for doc in small_corpus:
        outs = aug.augment_sentence(doc)
        assert len(outs) == 9
        for a in outs:
            check_sentence(doc, a, small_lexicon, small_store)


def test_op_order_and_lengths(small_store, small_lexicon, small_table, small_corpus):
    aug = mod_augmenter(small_store, small_lexicon, small_table, p_del=0.3, n_aug=20)
    order = {"sub": 0, "ins": 1, "swap": 2, "del": 3}
    seen = set()
    for doc in small_corpus:
        for a in aug.augment_sentence(doc):
            ranks = [order[e.op] for e in a.ops_applied]
            assert ranks == sorted(ranks)
            seen.update(e.op for e in a.ops_applied)
            n_ins = sum(e.op == "ins" for e in a.ops_applied)
            n_del = sum(e.op == "del" for e in a.ops_applied)
            assert len(a.tokens) == len(doc.tokens) + n_ins - n_del
    assert seen == set(order)


def test_mode_none_returns_original(small_corpus):
    doc = small_corpus[0]
    (only,) = augment_sentence(doc, AugmentationConfig(mode="none"))
    assert only.tokens == doc.tokens and only.ops_applied == ()


def test_augment_sentence_needs_tokens(small_store, small_lexicon, small_table):
    with pytest.raises(ValueError):
        mod_augmenter(small_store, small_lexicon, small_table).augment_sentence(Document("e", "", "", (), "pos"))


def test_mod_eda_needs_resources():
    with pytest.raises(ValueError):
        Augmenter(AugmentationConfig(mode="mod_eda"))


def test_document_seed_stable():
    assert document_seed(0, "abc") == document_seed(0, "abc")
    assert document_seed(0, "abc") != document_seed(1, "abc")
    assert document_seed(-1, "x") >= 0


@pytest.mark.parametrize("mode", ["mod_eda", "eda"])
def test_corpus_count_law_and_ids(small_store, small_lexicon, small_table, mode):
    corpus = random_corpus(small_store, 100, seed=5)
    res = augment_corpus(corpus, AugmentationConfig(mode=mode), small_store, small_lexicon, small_table,
                         synonyms={w: ["syn"] for w in small_store.vocab[:50]})
    assert len(res.corpus) == 1000
    assert res.corpus[0].id == corpus[0].id and res.corpus[1].id == f"{corpus[0].id}-aug1"
    assert res.corpus[9].id == f"{corpus[0].id}-aug9"
    assert all(d.label == corpus.by_id()[s.source_id].label for d, s in zip(res.corpus, res.sentences))


def test_corpus_workers_identical(small_store, small_lexicon, small_table, small_corpus):
    cfg = AugmentationConfig(seed=7)
    one = augment_corpus(small_corpus, cfg, small_store, small_lexicon, small_table, workers=1)
    eight = augment_corpus(small_corpus, cfg, small_store, small_lexicon, small_table, workers=8)
    assert one.corpus == eight.corpus and one.sentences == eight.sentences


def test_corpus_order_independent(small_store, small_lexicon, small_table, small_corpus):
    cfg = AugmentationConfig(seed=3)
    fwd = augment_corpus(small_corpus, cfg, small_store, small_lexicon, small_table)
    rev = augment_corpus(Corpus(tuple(reversed(small_corpus.documents))), cfg, small_store, small_lexicon, small_table)
    assert {d.id: d.tokens for d in fwd.corpus} == {d.id: d.tokens for d in rev.corpus}


def test_empty_corpus(small_store, small_lexicon, small_table):
    res = augment_corpus(Corpus(()), AugmentationConfig(), small_store, small_lexicon, small_table)
    assert len(res.corpus) == 0


def test_tokenless_document_copied(small_store, small_lexicon, small_table):
    corpus = Corpus((make_document("s", "the the", "pos", StopwordList(frozenset({"the"}))),))
    res = augment_corpus(corpus, AugmentationConfig(n_aug=3), small_store, small_lexicon, small_table)
    assert len(res.corpus) == 4 and res.skipped == ["s"]
    assert all(d.tokens == () for d in res.corpus)


def test_jsonl_output(tmp_path, small_store, small_lexicon, small_table, small_corpus):
    res = augment_corpus(small_corpus.subset([small_corpus[0].id]), AugmentationConfig(n_aug=2),
                         small_store, small_lexicon, small_table)
    write_augmented_jsonl(res, tmp_path / "o.jsonl")
    recs = [json.loads(x) for x in (tmp_path / "o.jsonl").read_text(encoding="utf-8").splitlines()]
    assert len(recs) == 3
    assert set(recs[1]) == {"id", "label", "text", "source_id", "ops"}
    assert recs[1]["text"].split() == list(res.sentences[1].tokens)
    for op in recs[1]["ops"]:
        assert set(op) == {"op", "pos", "old", "new"}
    audit = res.audit()
    assert all("candidates" in op for r in audit for op in r["ops"] if op["op"] in ("sub", "ins"))


def test_load_synonyms(tmp_path):
    p = tmp_path / "s.tsv"
    p.write_text("good\tfine, nice\nbad\t\n", encoding="utf-8")
    assert load_synonyms(p) == {"good": ("fine", "nice")}
    p.write_text("nope\n", encoding="utf-8")
    with pytest.raises(ValueError, match=":1:"):
        load_synonyms(p)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["mod_eda", "eda"]))
def test_random_documents_keep_invariants(small_store, small_lexicon, small_table, seed, mode):
    corpus = random_corpus(small_store, 3, seed=seed, max_len=6)
    aug = Augmenter(AugmentationConfig(mode=mode, seed=seed, p_del=0.5), small_store, small_lexicon, small_table,
                    synonyms={w: ["s1", "s2"] for w in small_store.vocab[::3]}, vocabulary=["v"],
                    stopwords=EMPTY_STOPWORDS)
    for doc in corpus:
        for a in aug.augment_sentence(doc):
            check_sentence(doc, a, small_lexicon, small_store)
