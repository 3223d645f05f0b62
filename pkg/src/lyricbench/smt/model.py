"""Training, persistence and batch annotation for the phrase-based system."""

from __future__ import annotations

import logging
import multiprocessing
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Callable, Sequence

from ..align import align_corpus, train_model1
from ..corpus import Corpus, expand_sentences
from ..textproc import tokenize
from .decoder import DEFAULT_WEIGHTS, Derivation, FeatureWeights, search
from .lm import NGramLM
from .mert import MertResult, mert
from .phrases import PhraseTable, extract_phrases, score_phrases

log = logging.getLogger(__name__)

# set in the parent right before forking so workers inherit the model
_WORKER_MODEL: "SMTModel | None" = None


def _nbest_job(job):
    source, weights, n = job
    return _WORKER_MODEL.nbest(source, n, weights)


@dataclass
class SMTConfig:
    max_phrase_len: int = 7
    align_iterations: int = 5
    use_null: bool = True
    lm_order: int = 3
    lm_alpha: float = 0.4
    beam_size: int = 100
    distortion_limit: int = 6
    max_options: int = 20
    sentence_expand: bool = True

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for f in fields(self):
                fh.write(f"{f.name}={getattr(self, f.name)}\n")

    @classmethod
    def load(cls, path) -> "SMTConfig":
        raw = {}
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if line.strip():
                k, v = line.split("=", 1)
                raw[k] = v
        kwargs = {}
        for f in fields(cls):
            if f.name in raw:
                default = getattr(cls(), f.name)
                v = raw[f.name]
                kwargs[f.name] = v == "True" if isinstance(default, bool) else type(default)(v)
        return cls(**kwargs)


class SMTModel:
    """Phrase table, language model and weights for one translation direction."""

    def __init__(self, table: PhraseTable, lm: NGramLM, weights: FeatureWeights = DEFAULT_WEIGHTS,
                 config: SMTConfig | None = None):
        self.table = table
        self.lm = lm
        self.weights = weights
        self.config = config or SMTConfig()

    def search(self, source: Sequence[str], weights: FeatureWeights | None = None, **overrides):
        cfg = self.config
        return search(
            source, self.table, self.lm, weights or self.weights,
            beam_size=overrides.get("beam_size", cfg.beam_size),
            distortion_limit=overrides.get("distortion_limit", cfg.distortion_limit),
            max_options=overrides.get("max_options", cfg.max_options),
        )

    def translate(self, source: Sequence[str], **overrides) -> Derivation:
        return self.search(source, **overrides).best()

    def nbest(self, source: Sequence[str], n: int, weights: FeatureWeights | None = None,
              **overrides) -> list[Derivation]:
        return self.search(source, weights, **overrides).nbest(n)

    def nbest_many(self, sources: Sequence[Sequence[str]], n: int,
                   weights: FeatureWeights | None = None, workers: int = 1) -> list[list[Derivation]]:
        """n-best lists for every source, in input order.

        With ``workers > 1`` sentences are decoded in forked processes;
        results are identical to the sequential path.
        """
        global _WORKER_MODEL
        weights = weights or self.weights
        jobs = [(tuple(s), weights, n) for s in sources]
        if workers <= 1 or len(jobs) < 2 or "fork" not in multiprocessing.get_all_start_methods():
            return [self.nbest(src, n, w) for src, w, n in jobs]
        _WORKER_MODEL = self
        try:
            with multiprocessing.get_context("fork").Pool(workers) as pool:
                return pool.map(_nbest_job, jobs, chunksize=max(1, len(jobs) // (4 * workers)))
        finally:
            _WORKER_MODEL = None

    def annotate(self, lyric: str, tokenizer: Callable = tokenize) -> str:
        tokens = tokenizer(lyric)
        if not tokens:
            return ""
        return " ".join(self.translate(tokens).output)

    def annotate_corpus(self, test: Corpus, tokenizer: Callable = tokenize, workers: int = 1) -> list[str]:
        sources = [tokenizer(p.lyric) for p in test]
        todo = [s for s in sources if s]
        best = iter(self.nbest_many(todo, 1, workers=workers))
        return [" ".join(next(best)[0].output) if s else "" for s in sources]

    def tune(self, dev: Corpus, max_iters: int = 10, n: int = 100, restarts: int = 20,
             seed: int = 0, tokenizer: Callable = tokenize, workers: int = 1) -> MertResult:
        """MERT on ``dev``; the model's weights are replaced by the result."""
        if len(dev) == 0:
            raise ValueError("empty dev set")
        items = [(tokenizer(p.lyric), [tokenizer(p.annotation)]) for p in dev]
        items = [(s, r) for s, r in items if s]
        result = mert(
            [s for s, _ in items], [r for _, r in items],
            lambda src, w, k: self.nbest(src, k, w),
            self.weights, max_iters=max_iters, n=n, restarts=restarts, seed=seed,
            batch_fn=lambda srcs, w, k: self.nbest_many(srcs, k, w, workers),
        )
        self.weights = result.weights
        return result

    # -- persistence -------------------------------------------------------------

    def save(self, directory: str | Path) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        self.table.save(d / "phrase-table.txt")
        self.lm.save(d / "lm.tsv")
        self.weights.save(d / "weights.txt")
        self.config.save(d / "smt.cfg")

    @classmethod
    def load(cls, directory: str | Path) -> "SMTModel":
        d = Path(directory)
        config = SMTConfig.load(d / "smt.cfg")
        return cls(
            PhraseTable.load(d / "phrase-table.txt", config.max_phrase_len),
            NGramLM.load(d / "lm.tsv"),
            FeatureWeights.load(d / "weights.txt"),
            config,
        )


def training_pairs(train: Corpus, config: SMTConfig, tokenizer: Callable = tokenize):
    if config.sentence_expand:
        train = expand_sentences(train)
    pairs = []
    for p in train:
        src, tgt = tokenizer(p.lyric), tokenizer(p.annotation)
        if src and tgt:
            pairs.append((src, tgt))
    return pairs


def train_smt(train: Corpus, config: SMTConfig | None = None, tokenizer: Callable = tokenize,
              model_dir: str | Path | None = None) -> SMTModel:
    """Model 1 both ways, symmetrized links, phrase table, target-side LM."""
    config = config or SMTConfig()
    pairs = training_pairs(train, config, tokenizer)
    if not pairs:
        raise ValueError("no usable training pairs")
    log.info("training on %d sentence pairs", len(pairs))
    fwd = train_model1(pairs, config.align_iterations, config.use_null, "lyric->annotation")
    rev = train_model1([(e, f) for f, e in pairs], config.align_iterations, config.use_null,
                       "annotation->lyric")
    alignments = align_corpus(pairs, fwd, rev, config.use_null)
    extracted = extract_phrases(
        ((f, e, a) for (f, e), a in zip(pairs, alignments)), config.max_phrase_len)
    table = score_phrases(extracted, fwd, rev, config.max_phrase_len)
    lm = NGramLM.train((e for _, e in pairs), config.lm_order, config.lm_alpha)
    log.info("phrase table: %d entries over %d source phrases", len(table), len(table.entries))
    model = SMTModel(table, lm, DEFAULT_WEIGHTS, config)
    if model_dir is not None:
        model.save(model_dir)
        fwd.dump(Path(model_dir) / "model1.fwd.tsv")
        rev.dump(Path(model_dir) / "model1.rev.tsv")
    return model
