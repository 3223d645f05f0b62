"""IBM Model 1 lexical translation by EM, Viterbi links, and symmetrization."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

NULL = "<null>"
PROB_FLOOR = 1e-12

Pair = tuple[Sequence[str], Sequence[str]]


@dataclass
class TranslationTable:
    """t(target | source) stored as source -> {target: prob}."""

    t: dict[str, dict[str, float]]
    direction: str = "src->tgt"
    log_likelihoods: list[float] = field(default_factory=list)

    def prob(self, source: str, target: str) -> float:
        return self.t.get(source, {}).get(target, 0.0)

    def __contains__(self, source: str) -> bool:
        return source in self.t

    def dump(self, path: str | Path, min_prob: float = 1e-6) -> None:
        """TSV ``source target prob`` sorted by source then descending prob."""
        with Path(path).open("w", encoding="utf-8") as fh:
            for s in sorted(self.t):
                row = sorted(self.t[s].items(), key=lambda kv: (-kv[1], kv[0]))
                for tgt, p in row:
                    if p >= min_prob:
                        fh.write(f"{s}\t{tgt}\t{p!r}\n")

    @classmethod
    def load(cls, path: str | Path, direction: str = "src->tgt") -> "TranslationTable":
        t: dict[str, dict[str, float]] = {}
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if line:
                s, tgt, p = line.split("\t")
                t.setdefault(s, {})[tgt] = float(p)
        return cls(t, direction)


def _sources(src: Sequence[str], use_null: bool) -> list[str]:
    return ([NULL] if use_null else []) + list(src)


def log_likelihood(t: dict[str, dict[str, float]], pairs: Sequence[Pair], use_null: bool) -> float:
    """Corpus log-likelihood under Model 1 (uniform alignment prior)."""
    total = 0.0
    for src, tgt in pairs:
        srcs = _sources(src, use_null)
        if not srcs:
            continue
        norm = math.log(len(srcs))
        for e in tgt:
            p = sum(t[s].get(e, 0.0) for s in srcs)
            total += math.log(max(p, 1e-300)) - norm
    return total


def train_model1(pairs: Sequence[Pair], iterations: int = 5, use_null: bool = True,
                 direction: str = "src->tgt") -> TranslationTable:
    """EM for IBM Model 1; the returned table records the log-likelihood
    before every iteration and after the last one."""
    if not pairs:
        raise ValueError("no sentence pairs to train on")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    pairs = [(tuple(s), tuple(e)) for s, e in pairs]

    cooc: dict[str, set] = {}
    for src, tgt in pairs:
        for s in _sources(src, use_null):
            cooc.setdefault(s, set()).update(tgt)
    t = {s: {e: 1.0 / len(es) for e in sorted(es)} for s, es in sorted(cooc.items()) if es}

    history = []
    for _ in range(iterations):
        counts: dict[str, dict[str, float]] = {s: {} for s in t}
        ll = 0.0
        for src, tgt in pairs:
            srcs = _sources(src, use_null)
            if not srcs:
                continue
            norm = math.log(len(srcs))
            for e in tgt:
                probs = [t[s][e] for s in srcs]
                z = sum(probs)
                ll += math.log(z) - norm
                for s, p in zip(srcs, probs):
                    row = counts[s]
                    row[e] = row.get(e, 0.0) + p / z
        history.append(ll)
        new_t = {}
        for s, row in counts.items():
            total = sum(row.values())
            if total == 0.0:
                new_t[s] = t[s]
                continue
            floored = {e: max(c / total, PROB_FLOOR) for e, c in row.items()}
            z = sum(floored.values())
            new_t[s] = {e: p / z for e, p in floored.items()}
        t = new_t
    history.append(log_likelihood(t, pairs, use_null))
    return TranslationTable(t, direction, history)


@dataclass(frozen=True)
class Alignment:
    """Word links (source position, target position) for one sentence pair."""

    links: frozenset
    src_len: int
    tgt_len: int

    def __post_init__(self):
        links = frozenset(self.links)
        for i, j in links:
            if not (0 <= i < self.src_len and 0 <= j < self.tgt_len):
                raise ValueError(f"link {(i, j)} outside a {self.src_len}x{self.tgt_len} sentence pair")
        object.__setattr__(self, "links", links)

    def transposed(self) -> "Alignment":
        return Alignment(frozenset((j, i) for i, j in self.links), self.tgt_len, self.src_len)

    def __str__(self) -> str:
        return " ".join(f"{i}-{j}" for i, j in sorted(self.links))


def viterbi_align(table: TranslationTable, source: Sequence[str], target: Sequence[str],
                  use_null: bool = True) -> Alignment:
    """Link each target word to its most probable source word (leftmost on ties).

    Target words whose best option is NULL, or that are unknown, stay unlinked.
    """
    links = set()
    for j, e in enumerate(target):
        best_i, best_p = None, 0.0
        if use_null:
            best_p = table.prob(NULL, e)
        for i, s in enumerate(source):
            p = table.prob(s, e)
            if p > best_p:
                best_i, best_p = i, p
        if best_i is not None:
            links.add((best_i, j))
    return Alignment(frozenset(links), len(source), len(target))


_NEIGHBOURS = ((-1, 0), (0, -1), (1, 0), (0, 1), (-1, -1), (-1, 1), (1, -1), (1, 1))


def symmetrize(fwd: Alignment, rev: Alignment) -> Alignment:
    """grow-diag-final-and over two alignments of the same sentence pair.

    Both arguments use (source, target) positions; ``rev`` is the reverse
    model's alignment already mapped back into that orientation.
    """
    if (fwd.src_len, fwd.tgt_len) != (rev.src_len, rev.tgt_len):
        raise ValueError("alignments cover different sentence lengths")
    union = fwd.links | rev.links
    current = set(fwd.links & rev.links)
    src_cov = {i for i, _ in current}
    tgt_cov = {j for _, j in current}

    def add(i: int, j: int) -> None:
        current.add((i, j))
        src_cov.add(i)
        tgt_cov.add(j)

    grew = True
    while grew:
        grew = False
        for i in range(fwd.src_len):
            for j in range(fwd.tgt_len):
                if (i, j) not in current:
                    continue
                for di, dj in _NEIGHBOURS:
                    ni, nj = i + di, j + dj
                    if (ni, nj) in union and (ni, nj) not in current and (
                            ni not in src_cov or nj not in tgt_cov):
                        add(ni, nj)
                        grew = True
    for directional in (fwd.links, rev.links):
        for i in range(fwd.src_len):
            for j in range(fwd.tgt_len):
                if (i, j) in directional and i not in src_cov and j not in tgt_cov:
                    add(i, j)
    return Alignment(frozenset(current), fwd.src_len, fwd.tgt_len)


def align_corpus(pairs: Sequence[Pair], fwd: TranslationTable, rev: TranslationTable,
                 use_null: bool = True) -> list[Alignment]:
    """Symmetrized alignments; ``rev`` is trained with target and source swapped."""
    out = []
    for src, tgt in pairs:
        a_fwd = viterbi_align(fwd, src, tgt, use_null)
        a_rev = viterbi_align(rev, tgt, src, use_null).transposed()
        out.append(symmetrize(a_fwd, a_rev))
    return out
