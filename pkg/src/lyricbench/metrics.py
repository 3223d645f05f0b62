"""Automatic evaluation of generated annotations.

Corpus-level BLEU, iBLEU, METEOR and SARI, plus two output properties
(length relative to the lyric and profanity per token). All scores except
the properties are reported on a 0-100 scale.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .porter import stem
from .textproc import ngram_set, ngrams

Tokens = tuple  # tuple[str, ...]

METEOR_SEARCH_BUDGET = 50_000


@dataclass(frozen=True)
class EvalInstance:
    source: Tokens
    candidate: Tokens
    references: tuple

    def __post_init__(self):
        object.__setattr__(self, "source", tuple(self.source))
        object.__setattr__(self, "candidate", tuple(self.candidate))
        refs = tuple(tuple(r) for r in self.references)
        if not refs:
            raise ValueError("an evaluation instance needs at least one reference")
        object.__setattr__(self, "references", refs)


@dataclass(frozen=True)
class MetricConfig:
    bleu_max_n: int = 4
    bleu_epsilon: float = 1e-9
    ibleu_alpha: float = 0.9
    meteor_alpha: float = 0.9
    meteor_beta: float = 3.0
    meteor_gamma: float = 0.5
    sari_max_n: int = 4

    def __post_init__(self):
        if not 0.0 <= self.ibleu_alpha <= 1.0:
            raise ValueError("ibleu_alpha must lie in [0, 1]")
        if self.bleu_max_n < 1 or self.sari_max_n < 1:
            raise ValueError("n-gram orders must be >= 1")


@dataclass(frozen=True)
class MetricReport:
    system: str
    bleu: float | None
    ibleu: float | None
    meteor: float | None
    sari: float | None
    length_ratio: float
    profanity_per_token: float


def _require(instances: Sequence) -> None:
    if not instances:
        raise ValueError("empty instance list")


# --- BLEU ----------------------------------------------------------------------

@dataclass(frozen=True)
class BleuStats:
    """Sufficient statistics for corpus BLEU; sums of these are exact."""

    matches: tuple
    totals: tuple
    cand_len: int
    ref_len: int

    def __add__(self, other: "BleuStats") -> "BleuStats":
        return BleuStats(
            tuple(a + b for a, b in zip(self.matches, other.matches)),
            tuple(a + b for a, b in zip(self.totals, other.totals)),
            self.cand_len + other.cand_len,
            self.ref_len + other.ref_len,
        )

    @classmethod
    def zero(cls, max_n: int) -> "BleuStats":
        return cls((0,) * max_n, (0,) * max_n, 0, 0)


def closest_ref_length(cand_len: int, references: Iterable[Sequence]) -> int:
    return min((len(r) for r in references), key=lambda rl: (abs(rl - cand_len), rl))


def bleu_stats(candidate: Sequence[str], references: Sequence[Sequence[str]], max_n: int = 4) -> BleuStats:
    matches, totals = [], []
    for n in range(1, max_n + 1):
        cand = ngrams(candidate, n)
        max_ref: Counter = Counter()
        for ref in references:
            for g, c in ngrams(ref, n).items():
                if c > max_ref[g]:
                    max_ref[g] = c
        matches.append(sum(min(c, max_ref[g]) for g, c in cand.items()))
        totals.append(sum(cand.values()))
    return BleuStats(tuple(matches), tuple(totals), len(candidate),
                     closest_ref_length(len(candidate), references))


def bleu_from_stats(stats: BleuStats, epsilon: float = 1e-9) -> float:
    """Corpus BLEU on 0-100 from pooled statistics."""
    if stats.cand_len == 0:
        return 0.0
    logs = [
        math.log(max(m / t, epsilon))
        for m, t in zip(stats.matches, stats.totals)
        if t > 0
    ]
    if not logs:
        return 0.0
    bp = min(1.0, math.exp(1.0 - stats.ref_len / stats.cand_len))
    return 100.0 * bp * math.exp(sum(logs) / len(logs))


def _corpus_stats(pairs, max_n: int) -> BleuStats:
    total = BleuStats.zero(max_n)
    for cand, refs in pairs:
        total = total + bleu_stats(cand, refs, max_n)
    return total


def bleu(instances: Sequence[EvalInstance], cfg: MetricConfig = MetricConfig()) -> float:
    _require(instances)
    stats = _corpus_stats(((i.candidate, i.references) for i in instances), cfg.bleu_max_n)
    return bleu_from_stats(stats, cfg.bleu_epsilon)


def source_bleu(instances: Sequence[EvalInstance], cfg: MetricConfig = MetricConfig()) -> float:
    """BLEU of each candidate against its own source as the sole reference."""
    _require(instances)
    stats = _corpus_stats(((i.candidate, (i.source,)) for i in instances), cfg.bleu_max_n)
    return bleu_from_stats(stats, cfg.bleu_epsilon)


def ibleu_combine(bleu_ref: float, bleu_src: float, alpha: float = 0.9) -> float:
    # round() strips the representation error of 1 - alpha (1 - 0.9 != 0.1)
    return alpha * bleu_ref - round(1.0 - alpha, 12) * bleu_src


def ibleu(instances: Sequence[EvalInstance], cfg: MetricConfig = MetricConfig()) -> float:
    return ibleu_combine(bleu(instances, cfg), source_bleu(instances, cfg), cfg.ibleu_alpha)


# --- METEOR --------------------------------------------------------------------

class SynonymLexicon:
    """Synonym sets; two words match when they share at least one set."""

    def __init__(self, synsets: Iterable[Iterable[str]] = ()):
        self._sets: dict[str, frozenset] = {}
        index: dict[str, set] = {}
        for k, words in enumerate(synsets):
            for w in words:
                index.setdefault(w.lower(), set()).add(k)
        self._sets = {w: frozenset(ids) for w, ids in index.items()}

    @classmethod
    def load(cls, path: str | Path) -> "SynonymLexicon":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls(line.split() for line in lines if line.strip())

    def __bool__(self) -> bool:
        return bool(self._sets)

    def related(self, a: str, b: str) -> bool:
        sa = self._sets.get(a)
        sb = self._sets.get(b)
        return bool(sa and sb and not sa.isdisjoint(sb))


def count_chunks(links: Iterable[tuple[int, int]]) -> int:
    """Runs of links contiguous and in order on both sides."""
    chunks = 0
    prev = None
    for i, j in sorted(links):
        if prev is None or i != prev[0] + 1 or j != prev[1] + 1:
            chunks += 1
        prev = (i, j)
    return chunks


def _max_matching(options: dict[int, list[int]]) -> int:
    """Maximum bipartite matching size (augmenting paths)."""
    owner: dict[int, int] = {}

    def augment(i: int, seen: set) -> bool:
        for j in options[i]:
            if j in seen:
                continue
            seen.add(j)
            if j not in owner or augment(owner[j], seen):
                owner[j] = i
                return True
        return False

    return sum(augment(i, set()) for i in sorted(options))


def _stage_alignment(options: dict[int, list[int]], fixed: dict[int, int],
                     budget: int = METEOR_SEARCH_BUDGET) -> list[tuple[int, int]]:
    """Max-cardinality links for one stage, fewest total chunks, lex-first.

    ``options`` maps each still-unmatched candidate position to its
    matchable, still-unmatched reference positions (ascending). ``fixed``
    holds links from earlier stages.
    """
    positions = sorted(i for i, js in options.items() if js)
    if not positions:
        return []
    target = _max_matching({i: options[i] for i in positions})
    pos_set = set(positions)
    fixed_pairs = set(fixed.items())

    # static per-position bound on adjacency gain
    bound = []
    for i in positions:
        best = 0
        for j in options[i]:
            left = (i - 1, j - 1) in fixed_pairs or (
                (i - 1) in pos_set and (j - 1) in options[i - 1])
            right = (i + 1, j + 1) in fixed_pairs
            best = max(best, int(left) + int(right))
        bound.append(best)
    suffix = [0] * (len(positions) + 1)
    for k in range(len(positions) - 1, -1, -1):
        suffix[k] = suffix[k + 1] + bound[k]

    best_score = -1
    best_links: list[tuple[int, int]] | None = None
    chosen: list[tuple[int, int]] = []
    chosen_at: dict[int, int] = {}
    used: set[int] = set(fixed.values())
    nodes = 0

    def dfs(k: int, score: int) -> None:
        nonlocal best_score, best_links, nodes
        nodes += 1
        if nodes > budget:
            return
        if len(chosen) == target:
            if score > best_score:
                best_score = score
                best_links = list(chosen)
            return
        if k == len(positions) or len(chosen) + (len(positions) - k) < target:
            return
        if score + suffix[k] <= best_score:
            return
        i = positions[k]
        for j in options[i]:
            if j in used:
                continue
            gain = int(chosen_at.get(i - 1, fixed.get(i - 1)) == j - 1)
            gain += int(fixed.get(i + 1) == j + 1)
            used.add(j)
            chosen.append((i, j))
            chosen_at[i] = j
            dfs(k + 1, score + gain)
            del chosen_at[i]
            chosen.pop()
            used.discard(j)
        dfs(k + 1, score)

    dfs(0, 0)
    if best_links is None:
        # budget exhausted before any full-size alignment: greedy fallback
        best_links = []
        taken = set(fixed.values())
        for i in positions:
            for j in options[i]:
                if j not in taken:
                    best_links.append((i, j))
                    taken.add(j)
                    break
    return best_links


def meteor_align(candidate: Sequence[str], reference: Sequence[str],
                 synonyms: SynonymLexicon | None = None) -> dict[int, int]:
    """Staged unigram alignment: exact, then stem, then synonym."""
    stages = [lambda a, b: a == b, lambda a, b: stem(a) == stem(b)]
    if synonyms:
        stages.append(synonyms.related)
    links: dict[int, int] = {}
    for related in stages:
        used = set(links.values())
        options = {
            i: [j for j, r in enumerate(reference) if j not in used and related(c, r)]
            for i, c in enumerate(candidate) if i not in links
        }
        for i, j in _stage_alignment(options, links):
            links[i] = j
    return links


def meteor_sentence(candidate: Sequence[str], reference: Sequence[str],
                    cfg: MetricConfig = MetricConfig(),
                    synonyms: SynonymLexicon | None = None) -> float:
    """METEOR of one candidate against one reference, in [0, 1]."""
    if not candidate or not reference:
        return 0.0
    links = meteor_align(candidate, reference, synonyms)
    m = len(links)
    if m == 0:
        return 0.0
    p = m / len(candidate)
    r = m / len(reference)
    f = p * r / (cfg.meteor_alpha * p + (1.0 - cfg.meteor_alpha) * r)
    penalty = cfg.meteor_gamma * (count_chunks(links.items()) / m) ** cfg.meteor_beta
    return f * (1.0 - penalty)


def meteor(instances: Sequence[EvalInstance], cfg: MetricConfig = MetricConfig(),
           synonyms: SynonymLexicon | None = None) -> float:
    _require(instances)
    scores = [
        max(meteor_sentence(inst.candidate, ref, cfg, synonyms) for ref in inst.references)
        for inst in instances
    ]
    return 100.0 * math.fsum(scores) / len(scores)


# --- SARI ----------------------------------------------------------------------

def _ratio(num: float, den: float) -> float:
    # den == 0 means the set on that side is empty, so num is 0 as well
    return num / den if den > 0 else 1.0


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def sari_order(source: Sequence[str], candidate: Sequence[str],
               references: Sequence[Sequence[str]], n: int) -> tuple[float, float, float] | None:
    """(F_add, F_keep, P_del) at one n-gram order, or None when nothing exists."""
    s = ngram_set(source, n)
    c = ngram_set(candidate, n)
    refs = [ngram_set(r, n) for r in references]
    if not s and not c and not any(refs):
        return None
    k = len(refs)
    weight: Counter = Counter()
    for r in refs:
        for g in r:
            weight[g] += 1
    w = {g: cnt / k for g, cnt in weight.items()}

    added = c - s
    ref_added = sorted(g for g in w if g not in s)
    hit_add = math.fsum(w.get(g, 0.0) for g in sorted(added))
    f_add = _f1(_ratio(hit_add, len(added)), _ratio(hit_add, math.fsum(w[g] for g in ref_added)))

    kept = c & s
    hit_keep = math.fsum(w.get(g, 0.0) for g in sorted(kept))
    f_keep = _f1(_ratio(hit_keep, len(kept)),
                 _ratio(hit_keep, math.fsum(w.get(g, 0.0) for g in sorted(s))))

    deleted = s - c
    hit_del = math.fsum(1.0 - w.get(g, 0.0) for g in sorted(deleted))
    p_del = _ratio(hit_del, len(deleted))
    return f_add, f_keep, p_del


def sari_sentence(source: Sequence[str], candidate: Sequence[str],
                  references: Sequence[Sequence[str]], max_n: int = 4) -> float:
    """SARI of one instance in [0, 1]."""
    per_order = []
    for n in range(1, max_n + 1):
        parts = sari_order(source, candidate, references, n)
        if parts is not None:
            per_order.append(math.fsum(parts) / 3.0)
    if not per_order:
        return 1.0
    return math.fsum(per_order) / len(per_order)


def sari(instances: Sequence[EvalInstance], cfg: MetricConfig = MetricConfig()) -> float:
    _require(instances)
    scores = [sari_sentence(i.source, i.candidate, i.references, cfg.sari_max_n) for i in instances]
    return 100.0 * math.fsum(scores) / len(scores)


# --- output properties ----------------------------------------------------------

def length_ratio(instances: Sequence[EvalInstance]) -> float:
    _require(instances)
    ratios = []
    for inst in instances:
        if not inst.source:
            raise ValueError("zero-length source in length_ratio")
        ratios.append(len(inst.candidate) / len(inst.source))
    return math.fsum(ratios) / len(ratios)


def load_profanity(path: str | Path | None = None) -> frozenset:
    """Read a one-word-per-line list; ``None`` loads the bundled list."""
    if path is None:
        text = (resources.files("lyricbench") / "data" / "profanity_en.txt").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return frozenset(
        line.strip().lower() for line in text.splitlines()
        if line.strip() and not line.startswith("#")
    )


def profanity_rate(instances: Sequence[EvalInstance], lexicon: Iterable[str]) -> float:
    lexicon = frozenset(lexicon)
    if not lexicon:
        raise ValueError("empty profanity lexicon")
    total = sum(len(i.candidate) for i in instances)
    if total == 0:
        return 0.0
    hits = sum(tok in lexicon for i in instances for tok in i.candidate)
    return hits / total


# --- reports --------------------------------------------------------------------

def build_report(name: str, instances: Sequence[EvalInstance], cfg: MetricConfig = MetricConfig(),
                 lexicon: Iterable[str] | None = None,
                 synonyms: SynonymLexicon | None = None) -> MetricReport:
    _require(instances)
    lexicon = load_profanity() if lexicon is None else frozenset(lexicon)
    b_ref = bleu(instances, cfg)
    b_src = source_bleu(instances, cfg)
    return MetricReport(
        system=name,
        bleu=b_ref,
        ibleu=ibleu_combine(b_ref, b_src, cfg.ibleu_alpha),
        meteor=meteor(instances, cfg, synonyms),
        sari=sari(instances, cfg),
        length_ratio=length_ratio(instances),
        profanity_per_token=profanity_rate(instances, lexicon),
    )


def human_report(instances: Sequence[EvalInstance], lexicon: Iterable[str] | None = None,
                 name: str = "human") -> MetricReport:
    """Properties of the first reference itself; no reference-based scores."""
    _require(instances)
    lexicon = load_profanity() if lexicon is None else frozenset(lexicon)
    as_cand = [EvalInstance(i.source, i.references[0], i.references) for i in instances]
    return MetricReport(name, None, None, None, None,
                        length_ratio(as_cand), profanity_rate(as_cand, lexicon))


REPORT_COLUMNS = ("system", "bleu", "ibleu", "meteor", "sari", "length_ratio", "profanity_per_token")


def _fmt(value: float | None, places: int = 2) -> str:
    return "-" if value is None else f"{value:.{places}f}"


def format_report(reports: Sequence[MetricReport]) -> str:
    lines = ["\t".join(REPORT_COLUMNS)]
    for r in reports:
        lines.append("\t".join([
            r.system, _fmt(r.bleu), _fmt(r.ibleu), _fmt(r.meteor), _fmt(r.sari),
            _fmt(r.length_ratio), _fmt(r.profanity_per_token, 4),
        ]))
    return "\n".join(lines) + "\n"
