"""Word n-gram counts scored with Stupid Backoff."""

from __future__ import annotations

import math
from collections import Counter
from pathlib import Path
from typing import Iterable, Sequence

BOS = "<s>"
EOS = "</s>"


class NGramLM:
    """Counts for every order up to ``order`` over ``<s> w1 .. wn </s>``.

    S(w | h) = count(h w) / count(h) when count(h w) > 0, otherwise
    alpha * S(w | h minus its first word); the empty history uses
    count(w) / N, and a word never seen at all gets alpha / |V|. N and V
    count predicted tokens (words and ``</s>``), never ``<s>``.
    """

    def __init__(self, counts: dict[tuple, int], order: int = 3, alpha: float = 0.4):
        if order < 1:
            raise ValueError("LM order must be >= 1")
        self.order = order
        self.alpha = alpha
        self.counts = counts
        unigrams = [(g, c) for g, c in counts.items() if len(g) == 1 and g[0] != BOS]
        self.total = sum(c for _, c in unigrams)
        self.vocab_size = len(unigrams)
        self._cache: dict[tuple, float] = {}
        self._log_cache: dict[tuple, float] = {}

    @classmethod
    def train(cls, sentences: Iterable[Sequence[str]], order: int = 3, alpha: float = 0.4) -> "NGramLM":
        counts: Counter = Counter()
        n_sent = 0
        for sent in sentences:
            n_sent += 1
            padded = (BOS,) + tuple(sent) + (EOS,)
            for n in range(1, order + 1):
                for i in range(len(padded) - n + 1):
                    counts[padded[i:i + n]] += 1
        if n_sent == 0:
            raise ValueError("cannot train a language model on an empty corpus")
        return cls(dict(counts), order, alpha)

    def score(self, word: str, history: Sequence[str] = ()) -> float:
        """Stupid Backoff score of ``word`` after ``history`` (not a probability)."""
        history = tuple(history)[-(self.order - 1):] if self.order > 1 else ()
        key = history + (word,)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        factor = 1.0
        h = history
        while True:
            if not h:
                c = self.counts.get((word,), 0)
                value = factor * (c / self.total if c > 0 else self.alpha / max(self.vocab_size, 1))
                break
            c_hw = self.counts.get(h + (word,), 0)
            c_h = self.counts.get(h, 0)
            if c_hw > 0 and c_h > 0:
                value = factor * c_hw / c_h
                break
            factor *= self.alpha
            h = h[1:]
        self._cache[key] = value
        return value

    def logscore(self, word: str, history: Sequence[str] = ()) -> float:
        key = (tuple(history), word)
        value = self._log_cache.get(key)
        if value is None:
            value = self._log_cache[key] = math.log(self.score(word, history))
        return value

    def sentence_logscore(self, tokens: Sequence[str]) -> float:
        """Sum of log scores for ``tokens`` followed by ``</s>``, from ``<s>``."""
        history = [BOS]
        total = 0.0
        for w in list(tokens) + [EOS]:
            total += self.logscore(w, history)
            history.append(w)
        return total

    def save(self, path: str | Path) -> None:
        """TSV ``n<TAB>n-gram<TAB>count`` with a ``#`` header line of parameters."""
        with Path(path).open("w", encoding="utf-8") as fh:
            fh.write(f"# order={self.order} alpha={self.alpha!r}\n")
            for gram, c in sorted(self.counts.items(), key=lambda kv: (len(kv[0]), kv[0])):
                fh.write(f"{len(gram)}\t{' '.join(gram)}\t{c}\n")

    @classmethod
    def load(cls, path: str | Path) -> "NGramLM":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        params = dict(kv.split("=") for kv in lines[0].lstrip("# ").split())
        counts = {}
        for line in lines[1:]:
            if line:
                n, gram, c = line.split("\t")
                counts[tuple(gram.split(" "))] = int(c)
        return cls(counts, int(params["order"]), float(params["alpha"]))
