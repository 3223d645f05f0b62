"""Coverage-stack beam decoder with lattice n-best extraction."""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..align import PROB_FLOOR
from .lm import BOS, EOS, NGramLM
from .phrases import PhraseTable

FEATURES = ("phi_fe", "phi_ef", "lex_fe", "lex_ef", "lm", "word_penalty", "distortion")
N_FEATURES = len(FEATURES)
# phrase scores given to a source word copied through untranslated
OOV_LOGPROB = math.log(PROB_FLOOR)


class FeatureWeights(dict):
    """Feature name -> weight for the log-linear model."""

    def __init__(self, values: Mapping[str, float] | None = None, **kw):
        super().__init__({name: 0.0 for name in FEATURES})
        for name, value in {**(values or {}), **kw}.items():
            if name not in FEATURES:
                raise KeyError(f"unknown feature {name!r}")
            self[name] = float(value)
        if not all(math.isfinite(v) for v in self.values()):
            raise ValueError("feature weights must be finite")
        if not any(self.values()):
            raise ValueError("at least one feature weight must be nonzero")

    @classmethod
    def from_vector(cls, vec: Sequence[float]) -> "FeatureWeights":
        return cls(dict(zip(FEATURES, vec)))

    def vector(self) -> tuple[float, ...]:
        return tuple(self[name] for name in FEATURES)

    def dot(self, feats: Sequence[float]) -> float:
        return sum(w * f for w, f in zip(self.vector(), feats))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for name in FEATURES:
                fh.write(f"{name}\t{self[name]!r}\n")

    @classmethod
    def load(cls, path) -> "FeatureWeights":
        values = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    name, value = line.split("\t")
                    values[name] = float(value)
        return cls(values)


DEFAULT_WEIGHTS = FeatureWeights(
    phi_fe=0.2, phi_ef=0.2, lex_fe=0.2, lex_ef=0.2, lm=0.5, word_penalty=-0.5, distortion=0.3,
)


@dataclass(frozen=True)
class Option:
    """One way to translate the source span [start, end)."""

    start: int
    end: int
    target: tuple
    logscores: tuple
    copied: bool = False

    @property
    def mask(self) -> int:
        return ((1 << self.end) - 1) ^ ((1 << self.start) - 1)

    def delta(self, lm_delta: float, jump: int) -> tuple:
        """Feature contribution of applying this option."""
        return self.logscores + (lm_delta, -float(len(self.target)), -float(jump))


@dataclass(eq=False)
class Hypothesis:
    coverage: int
    last_end: int
    tail: tuple
    score: float
    n_covered: int
    # incoming arcs: (previous hypothesis, option, feature delta); arcs[0] is the best.
    # Deltas are stored as (lm delta, jump) and expanded on demand.
    arcs: list = field(default_factory=list)

    @property
    def key(self) -> tuple:
        return (self.coverage, self.tail, self.last_end)


@dataclass(frozen=True)
class Derivation:
    output: tuple
    features: tuple
    score: float
    steps: tuple  # options in application order


class DecodeError(ValueError):
    pass


def collect_options(source: Sequence[str], table: PhraseTable, weights: FeatureWeights,
                    max_options: int = 20) -> list[Option]:
    """Table options per span (best ``max_options`` by weighted phrase score),
    plus a verbatim copy for every position with no single-word option."""
    w = weights.vector()
    n = len(source)
    options = []
    for i in range(n):
        for j in range(i + 1, min(n, i + table.max_phrase_len) + 1):
            found = []
            for tgt, logs in table.log_options(source[i:j]):
                local = sum(a * b for a, b in zip(w[:4], logs)) - w[5] * len(tgt)
                found.append((-local, tgt, logs))
            found.sort(key=lambda x: (x[0], x[1]))
            options.extend(Option(i, j, tgt, logs) for _, tgt, logs in found[:max_options])
    single = {o.start for o in options if o.end - o.start == 1}
    for i in range(n):
        if i not in single:
            options.append(Option(i, i + 1, (source[i],), (OOV_LOGPROB,) * 4, copied=True))
    options.sort(key=lambda o: (o.start, o.end))
    return options


def _lm_delta(tail: tuple, target: tuple, lm: NGramLM, order: int) -> tuple[float, tuple]:
    total = 0.0
    history = tail
    for word in target:
        total += lm.logscore(word, history)
        history = (history + (word,))[-(order - 1):] if order > 1 else ()
    return total, history


class Lattice:
    """Search graph left by one decoder run; used for 1-best and n-best."""

    def __init__(self, source: tuple, goal_arcs: list, weights: FeatureWeights):
        self.source = source
        self.goal_arcs = goal_arcs  # (complete hypothesis, end-of-sentence delta)
        self.weights = weights

    def best(self) -> Derivation:
        return self.nbest(1)[0]

    def nbest(self, n: int, max_pops: int | None = None) -> list[Derivation]:
        """Up to ``n`` distinct outputs, best first.

        Best-first search backwards from the goal; each node's forward
        Viterbi score is an exact bound on its completions, so full paths
        pop in score order.
        """
        if n < 1:
            raise ValueError("n must be >= 1")
        w = self.weights.vector()
        max_pops = max_pops or 100 * n + 1000
        tie = itertools.count()
        heap = []
        for hyp, delta in self.goal_arcs:
            suffix = _dot(w, delta)
            heapq.heappush(heap, (-(hyp.score + suffix), next(tie), hyp, suffix, ((None, delta),)))
        seen = set()
        out = []
        pops = 0
        while heap and len(out) < n and pops < max_pops:
            _, _, node, suffix, path = heapq.heappop(heap)
            pops += 1
            if not node.arcs:  # initial hypothesis
                deriv = self._derivation(path)
                if deriv.output not in seen:
                    seen.add(deriv.output)
                    out.append(deriv)
                continue
            for prev, opt, lm_delta, jump in node.arcs:
                delta = opt.delta(lm_delta, jump)
                s = suffix + _dot(w, delta)
                heapq.heappush(heap, (-(prev.score + s), next(tie), prev, s, ((opt, delta),) + path))
        out.sort(key=lambda d: -d.score)
        return out

    def _derivation(self, path) -> Derivation:
        feats = [0.0] * N_FEATURES
        steps = []
        output: list[str] = []
        for opt, delta in path:
            for k, v in enumerate(delta):
                feats[k] += v
            if opt is not None:
                steps.append(opt)
                output.extend(opt.target)
        feats = tuple(feats)
        return Derivation(tuple(output), feats, self.weights.dot(feats), tuple(steps))


def _dot(w, feats) -> float:
    return sum(a * b for a, b in zip(w, feats))


def search(source: Sequence[str], table: PhraseTable, lm: NGramLM, weights: FeatureWeights,
           beam_size: int = 100, distortion_limit: int = 6, max_options: int = 20) -> Lattice:
    source = tuple(source)
    if not source:
        raise DecodeError("cannot decode an empty source sentence")
    if beam_size < 1:
        raise ValueError("beam_size must be >= 1")
    if distortion_limit < 0:
        raise ValueError("distortion_limit must be >= 0")
    n = len(source)
    order = lm.order
    w = weights.vector()
    options = collect_options(source, table, weights, max_options)

    start_tail = (BOS,) if order > 1 else ()
    initial = Hypothesis(0, 0, start_tail, 0.0, 0)
    stacks: list[dict] = [dict() for _ in range(n + 1)]
    stacks[0][initial.key] = initial

    w_lm, w_dist = w[4], w[6]
    lm_cache: dict[tuple, tuple] = {}
    by_start: list[list] = [[] for _ in range(n)]
    for opt in options:
        by_start[opt.start].append((opt, opt.mask, _dot(w, opt.delta(0.0, 0))))
    for size in range(n):
        ranked = sorted(stacks[size].values(), key=lambda h: -h.score)[:beam_size]
        for hyp in ranked:
            lo = max(0, hyp.last_end - distortion_limit)
            hi = min(n - 1, hyp.last_end + distortion_limit)
            for start in range(lo, hi + 1):
                if hyp.coverage >> start & 1:
                    continue
                jump = abs(start - hyp.last_end)
                for opt, mask, local in by_start[start]:
                    if hyp.coverage & mask:
                        continue
                    lm_key = (hyp.tail, opt.target)
                    cached = lm_cache.get(lm_key)
                    if cached is None:
                        cached = lm_cache[lm_key] = _lm_delta(hyp.tail, opt.target, lm, order)
                    lm_delta, tail = cached
                    score = hyp.score + local + w_lm * lm_delta - w_dist * jump
                    key = (hyp.coverage | mask, tail, opt.end)
                    stack = stacks[size + opt.end - opt.start]
                    old = stack.get(key)
                    arc = (hyp, opt, lm_delta, jump)
                    if old is None:
                        stack[key] = Hypothesis(key[0], opt.end, tail, score, size + opt.end - opt.start, [arc])
                    elif score > old.score:
                        stack[key] = Hypothesis(key[0], opt.end, tail, score, size + opt.end - opt.start,
                                                [arc] + old.arcs)
                    else:
                        old.arcs.append(arc)
    finished = sorted(stacks[n].values(), key=lambda h: -h.score)[:beam_size]
    if not finished:
        if distortion_limit == 0:
            raise DecodeError("no complete hypothesis")
        return search(source, table, lm, weights, beam_size, 0, max_options)
    goal_arcs = []
    for hyp in finished:
        delta = (0.0, 0.0, 0.0, 0.0, lm.logscore(EOS, hyp.tail), 0.0, 0.0)
        goal_arcs.append((hyp, delta))
    return Lattice(source, goal_arcs, weights)


def decode(source: Sequence[str], table: PhraseTable, lm: NGramLM, weights: FeatureWeights,
           beam_size: int = 100, distortion_limit: int = 6, max_options: int = 20) -> Derivation:
    return search(source, table, lm, weights, beam_size, distortion_limit, max_options).best()


def nbest(source: Sequence[str], table: PhraseTable, lm: NGramLM, weights: FeatureWeights, n: int,
          beam_size: int = 100, distortion_limit: int = 6, max_options: int = 20) -> list[Derivation]:
    return search(source, table, lm, weights, beam_size, distortion_limit, max_options).nbest(n)
