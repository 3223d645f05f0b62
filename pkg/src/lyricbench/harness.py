"""Synthetic corpora and the end-to-end evaluation pipeline."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Sequence

from .corpus import (AnnotationPair, Corpus, SplitSpec, expand_sentences, filter_english,
                     load_corpus, make_splits, save_corpus, strip_link_only, write_split_manifest)
from .metrics import (EvalInstance, MetricConfig, SynonymLexicon, build_report, format_report,
                      human_report, load_profanity)
from .retrieval import annotate_corpus, build_index
from .rng import XorShift64
from .smt import SMTConfig, train_smt
from .textproc import tokenize

log = logging.getLogger(__name__)

SYSTEMS = ("retrieval", "smt")


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


# --- synthetic data -----------------------------------------------------------

@dataclass
class SynthSpec:
    n_pairs: int
    slang_lexicon: dict
    templates: list
    ci_fraction: float = 0.35
    seed: int = 0
    background: list = field(default_factory=lambda: ["The song was recorded in {city}."])
    explanations: list = field(default_factory=list)
    fillers: list = field(default_factory=list)
    names: dict = field(default_factory=lambda: {"city": ["Compton"], "artist": ["Nas"], "year": ["1994"]})
    explain_probability: float = 0.0
    filler_probability: float = 0.0

    def __post_init__(self):
        if not self.templates:
            raise ValueError("synthetic spec needs at least one template")
        if not self.slang_lexicon:
            raise ValueError("synthetic spec needs a non-empty slang lexicon")
        if not 0.0 <= self.ci_fraction <= 1.0:
            raise ValueError("ci_fraction must lie in [0, 1]")
        if self.n_pairs < 0:
            raise ValueError("n_pairs must be non-negative")

    @classmethod
    def load(cls, path: str | Path | None = None, **overrides) -> "SynthSpec":
        if path is None:
            text = (resources.files("lyricbench") / "data" / "synth_default.json").read_text(encoding="utf-8")
        else:
            text = Path(path).read_text(encoding="utf-8")
        raw = json.loads(text)
        raw.update({k: v for k, v in overrides.items() if v is not None})
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in raw.items() if k in known})


def _sentence_case(text: str) -> str:
    return text[:1].upper() + text[1:]


def generate_synthetic(spec: SynthSpec) -> Corpus:
    """Seeded corpus of first-person slang lyrics with annotations.

    CI annotations narrate the lyric in the third person with every slang
    term replaced by its standard equivalent; CS annotations are unrelated
    background sentences. Exactly round(n_pairs * ci_fraction) pairs are CI.
    """
    rng = XorShift64(spec.seed)
    slang = sorted(spec.slang_lexicon)
    n_ci = int(round(spec.n_pairs * spec.ci_fraction))
    ci_ids = set(rng.sample(range(spec.n_pairs), n_ci))
    pairs = []
    for k in range(spec.n_pairs):
        lyric_t, annot_t = rng.choice(spec.templates)
        a, b = rng.sample(slang, 2)
        lyric = lyric_t.format(a=a, b=b)
        if spec.fillers and rng.random() < spec.filler_probability:
            lyric = f"{rng.choice(spec.fillers)}, {lyric}"
        lyric = _sentence_case(lyric)
        if k in ci_ids:
            std = spec.slang_lexicon
            annotation = annot_t.format(a=std[a], b=std[b])
            if spec.explanations and rng.random() < spec.explain_probability:
                term = rng.choice((a, b))
                annotation += " " + _sentence_case(
                    rng.choice(spec.explanations).format(A=term, a=std[term]))
            label = "CI"
        else:
            filled = {key: rng.choice(vals) for key, vals in sorted(spec.names.items())}
            annotation = _sentence_case(rng.choice(spec.background).format(**filled))
            label = "CS"
        pairs.append(AnnotationPair(f"p{k:06d}", f"song{k // 4:05d}", lyric, annotation, label))
    return Corpus(tuple(pairs), f"synthetic(seed={spec.seed}, n={spec.n_pairs})")


def slang_mapping_rate(lyrics: Sequence[str], outputs: Sequence[str], lexicon: dict) -> float:
    """Share of slang occurrences in lyrics whose standard term shows up in
    the paired output."""
    hits = total = 0
    for lyric, out in zip(lyrics, outputs):
        out_tokens = set(tokenize(out))
        for tok in tokenize(lyric):
            if tok in lexicon:
                total += 1
                hits += lexicon[tok] in out_tokens
    return hits / total if total else 0.0


# --- pipeline -----------------------------------------------------------------

@dataclass
class PipelineConfig:
    """Flat key=value configuration; every field is also a ``run`` flag."""

    corpus: str = "synthetic"
    synth_spec: str = ""
    n_pairs: int = 5000
    synth_seed: int = 1
    english_only: bool = False
    strip_links: bool = True
    test_size: int = 354
    dev_size: int = 2000
    split_seed: int = 7
    systems: str = "retrieval,smt"
    retrieval_sentences: bool = False
    max_phrase_len: int = 7
    align_iterations: int = 5
    lm_order: int = 3
    beam: int = 100
    distortion: int = 6
    max_options: int = 20
    tune: bool = True
    mert_iters: int = 10
    nbest: int = 100
    restarts: int = 20
    mert_seed: int = 0
    workers: int = 1
    syns: str = ""
    profanity: str = ""

    @classmethod
    def parse(cls, text: str) -> "PipelineConfig":
        values = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line {lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key] = value
        return cls().updated(values)

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    def updated(self, values: dict) -> "PipelineConfig":
        kinds = {f.name: type(getattr(self, f.name)) for f in fields(self)}
        new = dict((f.name, getattr(self, f.name)) for f in fields(self))
        for key, value in values.items():
            if value is None:
                continue
            if key not in kinds:
                raise ValueError(f"unknown config key {key!r}")
            kind = kinds[key]
            if kind is bool and isinstance(value, str):
                if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
                    raise ValueError(f"config key {key!r}: expected a boolean, got {value!r}")
                value = value.lower() in ("true", "1", "yes")
            new[key] = kind(value)
        return PipelineConfig(**new)

    def dump(self) -> str:
        return "".join(f"{f.name}={getattr(self, f.name)}\n" for f in fields(self))

    @property
    def system_list(self) -> list[str]:
        names = [s.strip() for s in self.systems.split(",") if s.strip()]
        for s in names:
            if s not in SYSTEMS:
                raise ValueError(f"unknown system {s!r}")
        return names

    def smt_config(self) -> SMTConfig:
        return SMTConfig(max_phrase_len=self.max_phrase_len, align_iterations=self.align_iterations,
                         lm_order=self.lm_order, beam_size=self.beam,
                         distortion_limit=self.distortion, max_options=self.max_options)


def write_hyp(path: str | Path, lines: Sequence[str]) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(" ".join(line.split()) + "\n")


def read_hyp(path: str | Path) -> list[str]:
    return Path(path).read_text(encoding="utf-8").split("\n")[:-1]


def eval_instances(test: Corpus, hyps: Sequence[str]) -> list[EvalInstance]:
    if len(hyps) != len(test):
        raise ValueError(f"{len(hyps)} hypotheses for {len(test)} test pairs")
    return [EvalInstance(tokenize(p.lyric), tokenize(h), [tokenize(p.annotation)])
            for p, h in zip(test, hyps)]


def evaluate_systems(test: Corpus, hyps: dict[str, Sequence[str]], cfg: MetricConfig = MetricConfig(),
                     lexicon=None, synonyms: SynonymLexicon | None = None,
                     include_human: bool = True) -> str:
    lexicon = load_profanity() if lexicon is None else lexicon
    reports = []
    if include_human:
        refs = eval_instances(test, [p.annotation for p in test])
        reports.append(human_report(refs, lexicon))
    for name, lines in hyps.items():
        reports.append(build_report(name, eval_instances(test, lines), cfg, lexicon, synonyms))
    return format_report(reports)


class _Stage:
    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        self.t0 = time.perf_counter()
        log.info("stage %s", self.name)
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, PipelineError):
            raise PipelineError(self.name, exc) from exc
        log.info("stage %s done in %.1fs", self.name, time.perf_counter() - self.t0)
        return False


def run_pipeline(config: PipelineConfig, out_dir: str | Path) -> dict:
    """ingest -> split -> train -> annotate -> evaluate, all under ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    systems = config.system_list
    (out / "config.txt").write_text(config.dump(), encoding="utf-8")

    with _Stage("ingest"):
        if config.corpus == "synthetic":
            spec = SynthSpec.load(config.synth_spec or None, n_pairs=config.n_pairs, seed=config.synth_seed)
            corpus = generate_synthetic(spec)
        else:
            corpus = load_corpus(config.corpus)
        if config.english_only:
            corpus = filter_english(corpus)
        if config.strip_links:
            corpus = strip_link_only(corpus)
        save_corpus(corpus, out / "corpus.jsonl")

    with _Stage("split"):
        test, dev, train = make_splits(corpus, SplitSpec(config.test_size, config.dev_size, config.split_seed))
        write_split_manifest(out / "splits.tsv", test, dev, train)
        save_corpus(test, out / "test.jsonl")

    hyps: dict[str, list[str]] = {}
    results: dict = {"sizes": {"train": len(train), "dev": len(dev), "test": len(test)}}
    for system in systems:
        model_dir = out / "models" / system
        model_dir.mkdir(parents=True, exist_ok=True)
        if system == "retrieval":
            with _Stage("train:retrieval"):
                index = build_index(expand_sentences(train) if config.retrieval_sentences else train)
                index.save(model_dir / "index.tfidf")
            with _Stage("annotate:retrieval"):
                hyps[system] = annotate_corpus(index, test)
        else:
            with _Stage("train:smt"):
                model = train_smt(train, config.smt_config(), model_dir=model_dir)
            if config.tune and len(dev):
                with _Stage("tune:smt"):
                    tuned = model.tune(dev, config.mert_iters, config.nbest, config.restarts, config.mert_seed,
                                       workers=config.workers)
                    model.weights.save(model_dir / "weights.txt")
                    results["mert_history"] = tuned.history
            with _Stage("annotate:smt"):
                hyps[system] = model.annotate_corpus(test, workers=config.workers)
        write_hyp(out / f"hyp.{system}.txt", hyps[system])

    with _Stage("evaluate"):
        lexicon = load_profanity(config.profanity or None)
        synonyms = SynonymLexicon.load(config.syns) if config.syns else None
        # re-read hyps so the report comes from the persisted artifacts
        persisted = {s: read_hyp(out / f"hyp.{s}.txt") for s in systems}
        report = evaluate_systems(test, persisted, MetricConfig(), lexicon, synonyms)
        (out / "report.tsv").write_text(report, encoding="utf-8")
    results["report"] = report
    return results


def regenerate_report(out_dir: str | Path) -> str:
    """Rebuild report.tsv text from a finished run's files, without retraining."""
    out = Path(out_dir)
    config = PipelineConfig.load(out / "config.txt")
    test = load_corpus(out / "test.jsonl")
    hyps = {s: read_hyp(out / f"hyp.{s}.txt") for s in config.system_list}
    lexicon = load_profanity(config.profanity or None)
    synonyms = SynonymLexicon.load(config.syns) if config.syns else None
    return evaluate_systems(test, hyps, MetricConfig(), lexicon, synonyms)
