"""Regenerate the bundled data files under src/modeda/data/.

Inputs (not shipped):
  --snippets  directory with the ``*_GroundTruth.txt`` files from the
              hutto_ICWSM_2014 archive inside the vaderSentiment sdist
  --wordnet   a WordNet 3.0 ``dict`` directory (data.noun, data.verb, ...)

Outputs:
  rt_train.tsv / rt_heldout.tsv   500 + 500 balanced Rotten Tomatoes snippets
  rt_glove50.txt                  50-d vectors trained on every snippet not in rt_heldout
  synonyms_wordnet.tsv            WordNet synonyms for the subset vocabulary
"""

import argparse
import logging
import random
from pathlib import Path

from modeda.corpus import default_stopwords, make_document
from modeda.embeddings import EmbedTrainConfig, save_vectors, train_embeddings

DATA = Path(__file__).resolve().parents[1] / "src" / "modeda" / "data"
SOURCES = ("movieReviewSnippets", "amazonReviewSnippets", "nytEditorialSnippets", "tweets")


def read_snippets(path):
    rows = []
    for line in path.read_text(encoding="utf-8").splitlines():
        parts = line.split("\t", 2)
        if len(parts) == 3 and parts[2].strip():
            rows.append((float(parts[1]), " ".join(parts[2].split())))
    return rows


def wordnet_synonyms(wn_dir: Path, wanted: set) -> dict:
    syn = {}
    for pos in ("noun", "verb", "adj", "adv"):
        for line in (wn_dir / f"data.{pos}").read_text(encoding="latin-1").splitlines():
            if line.startswith(" "):
                continue
            fields = line.split()
            n = int(fields[3], 16)
            lemmas = []
            for k in range(n):
                lemma = fields[4 + 2 * k].lower()
                if "(" in lemma:
                    lemma = lemma[: lemma.index("(")]
                if "_" not in lemma and lemma.isalpha():
                    lemmas.append(lemma)
            for w in lemmas:
                if w in wanted:
                    syn.setdefault(w, set()).update(x for x in lemmas if x != w)
    return {w: sorted(s) for w, s in syn.items() if s}


def main():
    logging.basicConfig(level=logging.INFO)
    ap = argparse.ArgumentParser()
    ap.add_argument("--snippets", type=Path, required=True)
    ap.add_argument("--wordnet", type=Path, required=True)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    movie = read_snippets(args.snippets / "movieReviewSnippets_GroundTruth.txt")
    # binary polarity, near-neutral snippets dropped
    pos = [t for s, t in movie if s >= 0.5 and "\t" not in t]
    neg = [t for s, t in movie if s <= -0.5 and "\t" not in t]
    rng = random.Random(args.seed)
    rng.shuffle(pos)
    rng.shuffle(neg)
    train = [("pos", t) for t in pos[:250]] + [("neg", t) for t in neg[:250]]
    heldout = [("pos", t) for t in pos[250:500]] + [("neg", t) for t in neg[250:500]]
    rng.shuffle(train)
    rng.shuffle(heldout)
    for name, rows in (("rt_train.tsv", train), ("rt_heldout.tsv", heldout)):
        (DATA / name).write_text("".join(f"{lab}\t{t}\n" for lab, t in rows), encoding="utf-8")

    stop = default_stopwords()
    held_text = {t for _, t in heldout}
    docs = []
    for src in SOURCES:
        for _, text in read_snippets(args.snippets / f"{src}_GroundTruth.txt"):
            if text not in held_text:
                docs.append(make_document(str(len(docs)), text, None, stop))
    logging.info("training vectors on %d snippets", len(docs))
    # x_max=10: with x_max=100 almost every cell of a corpus this small gets a
    # near-zero weight and the vectors collapse onto one direction
    cfg = EmbedTrainConfig(dim=50, window=5, x_max=10.0, epochs=50, min_count=3, seed=args.seed)
    store = train_embeddings(docs, cfg)
    logging.info("vocab %d, final loss %.4f", len(store), store.train_history[-1])
    save_vectors(store, DATA / "rt_glove50.txt")

    wanted = set()
    for _, t in train + heldout:
        wanted.update(make_document("x", t, None, stop).tokens)
    syn = wordnet_synonyms(args.wordnet, wanted)
    (DATA / "synonyms_wordnet.tsv").write_text(
        "".join(f"{w}\t{','.join(s)}\n" for w, s in sorted(syn.items())), encoding="utf-8"
    )
    logging.info("synonyms for %d of %d words", len(syn), len(wanted))


if __name__ == "__main__":
    main()
