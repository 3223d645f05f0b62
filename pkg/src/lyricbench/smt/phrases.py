"""Phrase-pair extraction from word alignments and phrase scoring."""

from __future__ import annotations

import math
from collections import Counter
from pathlib import Path
from typing import Iterable, Sequence

from ..align import PROB_FLOOR, Alignment, TranslationTable

SCORE_NAMES = ("phi_fe", "phi_ef", "lex_fe", "lex_ef")


def extract_phrases(sentences: Iterable[tuple[Sequence[str], Sequence[str], Alignment]],
                    max_phrase_len: int = 7) -> Counter:
    """Count every phrase pair consistent with its sentence's alignment.

    A pair is consistent when no link leaves its box and at least one link
    falls inside. Unaligned source words on the box edges extend the source
    side; unaligned target words are covered because every target span is
    enumerated.
    """
    if max_phrase_len < 1:
        raise ValueError("max_phrase_len must be >= 1")
    counts: Counter = Counter()
    for src, tgt, alignment in sentences:
        src, tgt = tuple(src), tuple(tgt)
        links = sorted(alignment.links)
        src_aligned = {i for i, _ in links}
        for t_start in range(len(tgt)):
            for t_end in range(t_start, min(len(tgt), t_start + max_phrase_len)):
                inside = [i for i, j in links if t_start <= j <= t_end]
                if not inside:
                    continue
                s_start, s_end = min(inside), max(inside)
                if s_end - s_start >= max_phrase_len:
                    continue
                if any(s_start <= i <= s_end and not t_start <= j <= t_end for i, j in links):
                    continue
                fs = s_start
                while True:
                    fe = s_end
                    while True:
                        if fe - fs < max_phrase_len:
                            counts[(src[fs:fe + 1], tgt[t_start:t_end + 1])] += 1
                        fe += 1
                        if fe >= len(src) or fe in src_aligned or fe - fs >= max_phrase_len:
                            break
                    fs -= 1
                    if fs < 0 or fs in src_aligned or s_end - fs >= max_phrase_len:
                        break
    return counts


def lexical_weight(source: Sequence[str], target: Sequence[str], table: TranslationTable) -> float:
    """Product over target words of the best t(target word | source word)."""
    weight = 1.0
    for e in target:
        weight *= max(max((table.prob(f, e) for f in source), default=0.0), PROB_FLOOR)
    return weight


class PhraseTable:
    """source phrase -> list of (target phrase, (phi_fe, phi_ef, lex_fe, lex_ef))."""

    def __init__(self, entries: dict[tuple, list[tuple[tuple, tuple]]], max_phrase_len: int = 7):
        self.entries = entries
        self.max_phrase_len = max_phrase_len
        self._log_entries: dict[tuple, list] = {}

    def __len__(self) -> int:
        return sum(len(v) for v in self.entries.values())

    def __contains__(self, source: tuple) -> bool:
        return tuple(source) in self.entries

    def options(self, source: Sequence[str]) -> list[tuple[tuple, tuple]]:
        return self.entries.get(tuple(source), [])

    def log_options(self, source: Sequence[str]) -> list[tuple[tuple, tuple]]:
        """Like :meth:`options` with scores as floored natural logs."""
        source = tuple(source)
        cached = self._log_entries.get(source)
        if cached is None:
            cached = [
                (tgt, tuple(math.log(max(s, PROB_FLOOR)) for s in scores))
                for tgt, scores in self.entries.get(source, [])
            ]
            self._log_entries[source] = cached
        return cached

    def covered_positions(self, source: Sequence[str]) -> set[int]:
        """Positions of ``source`` inside at least one span the table knows."""
        covered: set[int] = set()
        n = len(source)
        for i in range(n):
            for j in range(i + 1, min(n, i + self.max_phrase_len) + 1):
                if tuple(source[i:j]) in self.entries:
                    covered.update(range(i, j))
        return covered

    def save(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8") as fh:
            for src in sorted(self.entries):
                for tgt, scores in self.entries[src]:
                    fh.write(f"{' '.join(src)} ||| {' '.join(tgt)} ||| {' '.join(repr(s) for s in scores)}\n")

    @classmethod
    def load(cls, path: str | Path, max_phrase_len: int = 7) -> "PhraseTable":
        entries: dict[tuple, list] = {}
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            parts = line.split(" ||| ")
            if len(parts) != 3:
                raise ValueError(f"{path}: line {lineno}: expected 'src ||| tgt ||| scores'")
            scores = tuple(float(x) for x in parts[2].split())
            if len(scores) != len(SCORE_NAMES):
                raise ValueError(f"{path}: line {lineno}: expected {len(SCORE_NAMES)} scores")
            entries.setdefault(tuple(parts[0].split()), []).append((tuple(parts[1].split()), scores))
        return cls(entries, max_phrase_len)


def score_phrases(extracted: Counter, fwd: TranslationTable, rev: TranslationTable,
                  max_phrase_len: int = 7) -> PhraseTable:
    """Relative frequencies in both directions plus lexical weights.

    ``fwd`` holds t(target | source) and ``rev`` holds t(source | target).
    Targets under each source phrase are ordered by descending phi_fe.
    """
    if not extracted:
        raise ValueError("no phrase pairs to score")
    src_count: Counter = Counter()
    tgt_count: Counter = Counter()
    for (f, e), c in extracted.items():
        src_count[f] += c
        tgt_count[e] += c
    entries: dict[tuple, list] = {}
    for (f, e), c in sorted(extracted.items()):
        scores = (
            c / src_count[f],
            c / tgt_count[e],
            lexical_weight(f, e, fwd),
            lexical_weight(e, f, rev),
        )
        entries.setdefault(f, []).append((e, scores))
    for f in entries:
        entries[f].sort(key=lambda item: (-item[1][0], item[0]))
    return PhraseTable(entries, max_phrase_len)
