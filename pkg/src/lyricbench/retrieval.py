"""TF-IDF cosine retrieval baseline.

Training lyrics become L2-normalised tf-idf vectors in an inverted index;
a test lyric receives the annotation of its most similar training lyric.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from .corpus import Corpus
from .textproc import tokenize

INDEX_FORMAT = "lyricbench-tfidf"
INDEX_VERSION = 1
# scores this close are treated as equal and resolved by document id
TIE_TOLERANCE = 1e-12


class NoMatch(LookupError):
    """The query has no indexable term in common with the index."""


@dataclass(frozen=True)
class RetrievalResult:
    annotation: str
    score: float
    doc_id: int


class TfIdfIndex:
    """Immutable inverted index; build with :func:`build_index`."""

    def __init__(self, vocabulary: dict[str, tuple[int, int]], doc_vectors: list[dict[int, float]],
                 payloads: list[str], pair_ids: list[str], n_docs: int):
        self.vocabulary = vocabulary
        self.doc_vectors = doc_vectors
        self.payloads = payloads
        self.pair_ids = pair_ids
        self.n_docs = n_docs
        self.idf = {tid: idf(n_docs, df) for tid, df in vocabulary.values()}
        postings: dict[int, list[tuple[int, float]]] = {}
        for doc_id, vec in enumerate(doc_vectors):
            for tid, weight in vec.items():
                postings.setdefault(tid, []).append((doc_id, weight))
        self._postings = postings

    def __len__(self) -> int:
        return len(self.doc_vectors)

    def query_vector(self, tokens: Sequence[str]) -> dict[int, float]:
        tf = Counter(tokens)
        raw = {}
        for term, count in tf.items():
            entry = self.vocabulary.get(term)
            if entry is not None:
                raw[entry[0]] = count * self.idf[entry[0]]
        return normalize(raw)

    def scores(self, qvec: dict[int, float]) -> dict[int, float]:
        acc: dict[int, float] = {}
        for tid in sorted(qvec):
            qw = qvec[tid]
            for doc_id, dw in self._postings.get(tid, ()):
                acc[doc_id] = acc.get(doc_id, 0.0) + qw * dw
        return acc

    # -- persistence -----------------------------------------------------------

    def save(self, path: str | Path) -> None:
        terms = sorted(self.vocabulary.items(), key=lambda kv: kv[1][0])
        body = {
            "n_docs": self.n_docs,
            "terms": [[term, tid, df] for term, (tid, df) in terms],
            "docs": [
                {"id": pid, "payload": payload, "vec": [[t, w] for t, w in sorted(vec.items())]}
                for pid, payload, vec in zip(self.pair_ids, self.payloads, self.doc_vectors)
            ],
        }
        with Path(path).open("w", encoding="utf-8") as fh:
            fh.write(f"{INDEX_FORMAT}\t{INDEX_VERSION}\n")
            json.dump(body, fh, ensure_ascii=False)
            fh.write("\n")

    @classmethod
    def load(cls, path: str | Path) -> "TfIdfIndex":
        with Path(path).open(encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n").split("\t")
            if len(header) != 2 or header[0] != INDEX_FORMAT:
                raise ValueError(f"{path}: not a tf-idf index file")
            if int(header[1]) != INDEX_VERSION:
                raise ValueError(f"{path}: unsupported index version {header[1]}")
            body = json.load(fh)
        vocab = {term: (tid, df) for term, tid, df in body["terms"]}
        vectors = [{t: w for t, w in d["vec"]} for d in body["docs"]]
        return cls(vocab, vectors, [d["payload"] for d in body["docs"]],
                   [d["id"] for d in body["docs"]], body["n_docs"])


def idf(n_docs: int, df: int) -> float:
    """Smoothed inverse document frequency, ln((1 + N) / (1 + df)) + 1."""
    return math.log((1 + n_docs) / (1 + df)) + 1.0


def normalize(vec: dict[int, float]) -> dict[int, float]:
    norm = math.sqrt(math.fsum(w * w for _, w in sorted(vec.items())))
    if norm == 0.0:
        return {}
    return {t: w / norm for t, w in sorted(vec.items())}


def build_index(train: Corpus, tokenizer: Callable[[str], Sequence[str]] = tokenize) -> TfIdfIndex:
    """Index every training lyric that tokenizes to at least one token."""
    docs = []
    for pair in train:
        tokens = tokenizer(pair.lyric)
        if tokens:
            docs.append((pair, Counter(tokens)))
    if not docs:
        raise ValueError("no indexable documents in training corpus")
    n_docs = len(docs)
    df: Counter = Counter()
    for _, tf in docs:
        df.update(tf.keys())
    vocabulary = {term: (tid, df[term]) for tid, term in enumerate(sorted(df))}
    vectors = []
    for _, tf in docs:
        raw = {vocabulary[t][0]: c * idf(n_docs, vocabulary[t][1]) for t, c in tf.items()}
        vectors.append(normalize(raw))
    return TfIdfIndex(vocabulary, vectors, [p.annotation for p, _ in docs],
                      [p.id for p, _ in docs], n_docs)


def best_document(scores: dict[int, float]) -> tuple[int, float]:
    """Highest score; near-equal scores resolve to the smallest document id."""
    top = max(scores.values())
    doc_id = min(d for d, s in scores.items() if s >= top - TIE_TOLERANCE)
    return doc_id, scores[doc_id]


def retrieve(index: TfIdfIndex, lyric: str,
             tokenizer: Callable[[str], Sequence[str]] = tokenize) -> RetrievalResult:
    tokens = tokenizer(lyric)
    if not tokens:
        raise NoMatch("query is empty after tokenization")
    qvec = index.query_vector(tokens)
    if not qvec:
        raise NoMatch("query shares no vocabulary with the index")
    doc_id, score = best_document(index.scores(qvec))
    return RetrievalResult(index.payloads[doc_id], score, doc_id)


def annotate_corpus(index: TfIdfIndex, test: Corpus,
                    tokenizer: Callable[[str], Sequence[str]] = tokenize) -> list[str]:
    """One annotation per test pair; unmatched lyrics get an empty string."""
    out = []
    for pair in test:
        try:
            out.append(retrieve(index, pair.lyric, tokenizer).annotation)
        except NoMatch:
            out.append("")
    return out
