"""Minimum error rate training: exact line search over merged n-best pools."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from ..metrics import BleuStats, bleu_from_stats, bleu_stats
from ..rng import XorShift64
from .decoder import N_FEATURES, Derivation, FeatureWeights

log = logging.getLogger(__name__)

IMPROVEMENT_TOL = 1e-10


@dataclass(frozen=True)
class Candidate:
    output: tuple
    features: tuple
    stats: BleuStats


class NBestPool:
    """Per-sentence candidate lists, deduplicated by output string."""

    def __init__(self, references: Sequence[Sequence[Sequence[str]]], max_n: int = 4):
        self.references = [tuple(tuple(r) for r in refs) for refs in references]
        self.max_n = max_n
        self.sentences: list[list[Candidate]] = [[] for _ in self.references]
        self._seen: list[set] = [set() for _ in self.references]

    def __len__(self) -> int:
        return sum(len(s) for s in self.sentences)

    def add(self, sent: int, output: Sequence[str], features: Sequence[float]) -> bool:
        output = tuple(output)
        if output in self._seen[sent]:
            return False
        self._seen[sent].add(output)
        stats = bleu_stats(output, self.references[sent], self.max_n)
        self.sentences[sent].append(Candidate(output, tuple(features), stats))
        return True

    def merge(self, sent: int, derivations: Sequence[Derivation]) -> int:
        return sum(self.add(sent, d.output, d.features) for d in derivations)

    def select(self, weights: Sequence[float]) -> list[int]:
        """Index of the highest-scoring candidate per sentence (first on ties)."""
        picks = []
        for cands in self.sentences:
            best, best_s = 0, -math.inf
            for k, c in enumerate(cands):
                s = sum(a * b for a, b in zip(weights, c.features))
                if s > best_s:
                    best, best_s = k, s
            picks.append(best)
        return picks

    def bleu(self, weights: Sequence[float]) -> float:
        total = BleuStats.zero(self.max_n)
        for cands, k in zip(self.sentences, self.select(weights)):
            if cands:
                total = total + cands[k].stats
        return bleu_from_stats(total)


def upper_envelope(lines: Sequence[tuple[float, float]]) -> list[tuple[float, int]]:
    """Upper envelope of y = slope * x + intercept.

    Returns (start_x, line index) segments in increasing x; the first
    segment starts at -inf. Among identical lines the lowest index wins.
    """
    order = sorted(range(len(lines)), key=lambda k: (lines[k][0], -lines[k][1], k))
    dedup = []
    for k in order:
        if dedup and lines[dedup[-1]][0] == lines[k][0]:
            continue
        dedup.append(k)
    hull: list[tuple[float, int]] = []
    for k in dedup:
        m, b = lines[k]
        x = -math.inf
        while hull:
            x0, top = hull[-1]
            mt, bt = lines[top]
            x = (bt - b) / (m - mt)
            if x <= x0:
                hull.pop()
                x = -math.inf
            else:
                break
        hull.append((x, k))
    return hull


def _add(acc: list[int], stats: BleuStats, sign: int) -> None:
    n = len(stats.matches)
    for i in range(n):
        acc[i] += sign * stats.matches[i]
        acc[n + i] += sign * stats.totals[i]
    acc[2 * n] += sign * stats.cand_len
    acc[2 * n + 1] += sign * stats.ref_len


def _bleu_of(acc: list[int], n: int) -> float:
    return bleu_from_stats(BleuStats(tuple(acc[:n]), tuple(acc[n:2 * n]), acc[2 * n], acc[2 * n + 1]))


@dataclass(frozen=True)
class LineSearchResult:
    gamma: float
    bleu: float
    intervals: tuple  # ((lo, hi, bleu), ...) over the whole line


def line_search(pool: NBestPool, weights: Sequence[float], direction: Sequence[float]) -> LineSearchResult:
    """Exact search of BLEU along weights + gamma * direction.

    BLEU is piecewise constant in gamma; the best interval is chosen, and
    the point returned is gamma = 0 when the current point is already in a
    best interval, else the best interval's midpoint (or one unit past its
    finite end when it is unbounded). Ties go to the interval nearest zero.
    """
    n = pool.max_n
    acc = [0] * (2 * n + 2)
    events = []
    for s, cands in enumerate(pool.sentences):
        if not cands:
            continue
        lines = [
            (sum(d * f for d, f in zip(direction, c.features)),
             sum(w * f for w, f in zip(weights, c.features)))
            for c in cands
        ]
        env = upper_envelope(lines)
        _add(acc, cands[env[0][1]].stats, +1)
        for (x, k), (_, prev) in zip(env[1:], env[:-1]):
            events.append((x, s, prev, k))
    events.sort(key=lambda e: (e[0], e[1]))
    intervals = []
    lo = -math.inf
    i = 0
    while i < len(events):
        x = events[i][0]
        intervals.append((lo, x, _bleu_of(acc, n)))
        while i < len(events) and events[i][0] == x:
            _, s, prev, k = events[i]
            _add(acc, pool.sentences[s][prev].stats, -1)
            _add(acc, pool.sentences[s][k].stats, +1)
            i += 1
        lo = x
    intervals.append((lo, math.inf, _bleu_of(acc, n)))

    top = max(b for _, _, b in intervals)
    best = [iv for iv in intervals if iv[2] >= top - IMPROVEMENT_TOL]
    for lo, hi, b in best:
        if lo < 0.0 < hi:
            return LineSearchResult(0.0, b, tuple(intervals))

    def pick(iv):
        lo, hi, _ = iv
        if math.isinf(lo) and math.isinf(hi):
            return 0.0
        if math.isinf(lo):
            return hi - 1.0
        if math.isinf(hi):
            return lo + 1.0
        return (lo + hi) / 2.0

    chosen = min(best, key=lambda iv: (abs(pick(iv)), pick(iv)))
    return LineSearchResult(pick(chosen), chosen[2], tuple(intervals))


def _normalize(vec: Sequence[float]) -> tuple[float, ...]:
    scale = max(abs(v) for v in vec)
    return tuple(v / scale for v in vec) if scale > 0 else tuple(vec)


@dataclass
class PoolOptimum:
    weights: tuple
    bleu: float
    history: list = field(default_factory=list)  # pool BLEU after every accepted update


def coordinate_ascent(pool: NBestPool, start: Sequence[float], max_rounds: int = 50) -> PoolOptimum:
    """Repeated exact line searches along each feature axis; the best axis
    update is accepted while it strictly improves pool BLEU."""
    w = tuple(start)
    current = pool.bleu(w)
    history = [current]
    for _ in range(max_rounds):
        best = None
        for dim in range(N_FEATURES):
            direction = tuple(1.0 if k == dim else 0.0 for k in range(N_FEATURES))
            res = line_search(pool, w, direction)
            if res.gamma != 0.0 and res.bleu > current + IMPROVEMENT_TOL and (best is None or res.bleu > best[0]):
                best = (res.bleu, dim, res.gamma)
        if best is None:
            break
        _, dim, gamma = best
        trial = list(w)
        trial[dim] += gamma
        if not any(trial):
            break
        achieved = pool.bleu(trial)
        if achieved <= current + IMPROVEMENT_TOL:
            break
        w, current = tuple(trial), achieved
        history.append(current)
    return PoolOptimum(w, current, history)


def optimize_pool(pool: NBestPool, initial: Sequence[float], restarts: int = 20,
                  seed: int = 0) -> PoolOptimum:
    """Coordinate ascent from ``initial`` and ``restarts`` random points; the
    first start reaching the highest BLEU wins."""
    rng = XorShift64(seed)
    starts = [tuple(initial)]
    for _ in range(restarts):
        starts.append(tuple(rng.uniform(-1.0, 1.0) for _ in range(N_FEATURES)))
    best = None
    for start in starts:
        result = coordinate_ascent(pool, start)
        if best is None or result.bleu > best.bleu + IMPROVEMENT_TOL:
            best = result
    best.weights = _normalize(best.weights)
    return best


@dataclass
class MertResult:
    weights: FeatureWeights
    bleu: float
    iterations: int
    history: list = field(default_factory=list)  # dev BLEU of each decoding round


def mert(sources: Sequence[Sequence[str]], references: Sequence[Sequence[Sequence[str]]],
         nbest_fn: Callable[[Sequence[str], FeatureWeights, int], list[Derivation]],
         initial: FeatureWeights, max_iters: int = 10, n: int = 100, restarts: int = 20,
         seed: int = 0, batch_fn: Callable | None = None) -> MertResult:
    """Alternate n-best decoding of the dev set with pool optimization.

    ``nbest_fn(source, weights, n)`` decodes one sentence. Stops after
    ``max_iters`` rounds or once decoding adds nothing new to the pool.
    ``batch_fn(sources, weights, n)``, when given, decodes the whole dev
    set at once (used for parallel decoding).
    """
    if not sources:
        raise ValueError("empty dev set")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    pool = NBestPool(references)
    weights = initial
    best_w, best_bleu = initial, -math.inf
    history = []
    it = 0
    for it in range(1, max_iters + 1):
        added = 0
        if batch_fn is not None:
            lists = batch_fn(sources, weights, n)
        else:
            lists = [nbest_fn(src, weights, n) for src in sources]
        for s, found in enumerate(lists):
            added += pool.merge(s, found)
        # pool argmax under ``weights`` is the decoder's 1-best unless an
        # older candidate outscores it (possible only under pruning)
        current = pool.bleu(weights.vector())
        history.append(current)
        log.info("mert iteration %d: %d new candidates, pool size %d, dev BLEU %.3f",
                 it, added, len(pool), current)
        if current > best_bleu:
            best_w, best_bleu = weights, current
        if added == 0 or it == max_iters:
            break
        opt = optimize_pool(pool, weights.vector(), restarts, seed + it)
        weights = FeatureWeights.from_vector(opt.weights)
    return MertResult(best_w, best_bleu, it, history)
