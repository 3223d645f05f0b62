"""Lyric/annotation corpora: loading, cleaning, sentence expansion, splits."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Iterator, Sequence

from .langid import LanguageProfiles
from .rng import XorShift64
from .textproc import tokenize

CONTEXT_LABELS = ("CI", "CS")


class CorpusError(ValueError):
    """Malformed corpus input or an unsatisfiable corpus operation."""


@dataclass(frozen=True)
class AnnotationPair:
    id: str
    song_id: str
    lyric: str
    annotation: str
    context_label: str | None = None

    def __post_init__(self):
        if not self.lyric.strip():
            raise CorpusError(f"pair {self.id!r}: empty lyric")
        if not self.annotation.strip():
            raise CorpusError(f"pair {self.id!r}: empty annotation")
        if self.context_label is not None and self.context_label not in CONTEXT_LABELS:
            raise CorpusError(f"pair {self.id!r}: bad context_label {self.context_label!r}")

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "song_id": self.song_id,
            "lyric": self.lyric,
            "annotation": self.annotation,
            "context_label": self.context_label,
        }


@dataclass(frozen=True)
class Corpus:
    pairs: tuple[AnnotationPair, ...] = ()
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(self.pairs))
        seen = set()
        for p in self.pairs:
            if p.id in seen:
                raise CorpusError(f"duplicate id {p.id!r}")
            seen.add(p.id)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[AnnotationPair]:
        return iter(self.pairs)

    def __getitem__(self, i):
        return self.pairs[i]

    def derive(self, pairs: Iterable[AnnotationPair], step: str) -> "Corpus":
        prov = f"{self.provenance} | {step}" if self.provenance else step
        return Corpus(tuple(pairs), prov)


@dataclass(frozen=True)
class SplitSpec:
    test_size: int
    dev_size: int
    seed: int = 0

    def __post_init__(self):
        if self.test_size < 0 or self.dev_size < 0 or self.seed < 0:
            raise CorpusError("split sizes and seed must be non-negative")


@dataclass(frozen=True)
class CorpusStats:
    n_pairs: int
    mean_lyric_tokens: float
    mean_annotation_tokens: float
    vocab_lyrics: int
    vocab_annotations: int


# --- I/O -------------------------------------------------------------------

def _parse_record(line: str, lineno: int) -> AnnotationPair:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorpusError(f"line {lineno}: invalid JSON ({exc.msg})") from None
    if not isinstance(obj, dict):
        raise CorpusError(f"line {lineno}: expected a JSON object")
    for key in ("id", "song_id", "lyric", "annotation"):
        if key not in obj:
            raise CorpusError(f"line {lineno}: missing field {key!r}")
        if not isinstance(obj[key], str):
            raise CorpusError(f"line {lineno}: field {key!r} must be a string")
    label = obj.get("context_label")
    try:
        return AnnotationPair(obj["id"], obj["song_id"], obj["lyric"], obj["annotation"], label)
    except CorpusError as exc:
        raise CorpusError(f"line {lineno}: {exc}") from None


def load_corpus(path: str | Path) -> Corpus:
    """Read a JSONL corpus. Blank lines are skipped; anything else must parse."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"corpus file not found: {path}")
    pairs = []
    seen: dict[str, int] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            pair = _parse_record(line, lineno)
            if pair.id in seen:
                raise CorpusError(f"line {lineno}: duplicate id {pair.id!r} (first on line {seen[pair.id]})")
            seen[pair.id] = lineno
            pairs.append(pair)
    return Corpus(tuple(pairs), str(path))


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for p in corpus:
            fh.write(json.dumps(p.to_json(), ensure_ascii=False) + "\n")


# --- filters ---------------------------------------------------------------

def filter_english(corpus: Corpus, profiles: LanguageProfiles | None = None) -> Corpus:
    """Keep pairs whose annotation is classified as English."""
    if profiles is None:
        profiles = LanguageProfiles.bundled()
    if "en" not in profiles:
        raise CorpusError("language profiles must include 'en'")
    return corpus.derive((p for p in corpus if profiles.classify(p.annotation) == "en"), "english-only")


_URL = re.compile(r"^\W*(?:[a-z][a-z0-9+.-]*://|www\.)\S*$", re.IGNORECASE)


def is_link_only(text: str) -> bool:
    residual = [tok for tok in text.split() if not _URL.match(tok)]
    return not any(any(ch.isalpha() for ch in tok) for tok in residual)


def strip_link_only(corpus: Corpus) -> Corpus:
    return corpus.derive((p for p in corpus if not is_link_only(p.annotation)), "strip-links")


# --- sentence expansion -----------------------------------------------------

ABBREVIATIONS = frozenset(
    {"mr.", "mrs.", "ms.", "dr.", "ft.", "feat.", "st.", "jr.", "sr.", "vs.",
     "prof.", "mt.", "no.", "vol.", "e.g.", "i.e.", "a.k.a.", "u.s."}
)

_BOUNDARY = re.compile(r"[.!?]+[\"'”’)\]]*(?=\s+[A-Z\"“(]|\s*$)")


def split_sentences(text: str) -> list[str]:
    """Split on . ! ? followed by whitespace and an uppercase start, or end of text."""
    sentences = []
    start = 0
    for m in _BOUNDARY.finditer(text):
        end = m.end()
        last_word = text[start:end].split()[-1].lower() if text[start:end].split() else ""
        if last_word in ABBREVIATIONS:
            continue
        chunk = text[start:end].strip()
        if chunk:
            sentences.append(chunk)
        start = end
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def expand_sentences(corpus: Corpus) -> Corpus:
    """One pair per annotation sentence; the lyric is never split."""
    out = []
    for p in corpus:
        for k, sent in enumerate(split_sentences(p.annotation)):
            out.append(AnnotationPair(f"{p.id}#{k}", p.song_id, p.lyric, sent, p.context_label))
    return corpus.derive(out, "sentence-expanded")


# --- splits ------------------------------------------------------------------

def make_splits(corpus: Corpus, spec: SplitSpec) -> tuple[Corpus, Corpus, Corpus]:
    """Draw test from CI pairs, dev from the remainder, train is the rest.

    Each split keeps corpus order.
    """
    if spec.test_size + spec.dev_size > len(corpus):
        raise CorpusError(
            f"test_size + dev_size = {spec.test_size + spec.dev_size} exceeds corpus size {len(corpus)}"
        )
    ci_idx = [i for i, p in enumerate(corpus) if p.context_label == "CI"]
    if len(ci_idx) < spec.test_size:
        raise CorpusError(f"only {len(ci_idx)} CI pairs available for a test split of {spec.test_size}")
    rng = XorShift64(spec.seed)
    test_idx = set(rng.sample(ci_idx, spec.test_size))
    rest = [i for i in range(len(corpus)) if i not in test_idx]
    dev_idx = set(rng.sample(rest, spec.dev_size))
    test = [p for i, p in enumerate(corpus) if i in test_idx]
    dev = [p for i, p in enumerate(corpus) if i in dev_idx]
    train = [p for i, p in enumerate(corpus) if i not in test_idx and i not in dev_idx]
    tag = f"seed={spec.seed}"
    return (corpus.derive(test, f"test({tag})"), corpus.derive(dev, f"dev({tag})"),
            corpus.derive(train, f"train({tag})"))


def write_split_manifest(path: str | Path, test: Corpus, dev: Corpus, train: Corpus) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write("id\tsplit\n")
        for name, part in (("test", test), ("dev", dev), ("train", train)):
            for p in part:
                fh.write(f"{p.id}\t{name}\n")


def read_split_manifest(path: str | Path) -> dict[str, str]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].split("\t") != ["id", "split"]:
        raise CorpusError(f"{path}: missing 'id<TAB>split' header")
    out = {}
    for lineno, line in enumerate(lines[1:], 2):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2 or parts[1] not in ("test", "dev", "train"):
            raise CorpusError(f"{path}: line {lineno}: bad manifest row")
        out[parts[0]] = parts[1]
    return out


def apply_split_manifest(corpus: Corpus, manifest: dict[str, str]) -> tuple[Corpus, Corpus, Corpus]:
    parts: dict[str, list] = {"test": [], "dev": [], "train": []}
    for p in corpus:
        if p.id in manifest:
            parts[manifest[p.id]].append(p)
    return tuple(corpus.derive(parts[k], k) for k in ("test", "dev", "train"))


# --- statistics --------------------------------------------------------------

def corpus_stats(corpus: Corpus, tokenizer: Callable[[str], Sequence[str]] = tokenize) -> CorpusStats:
    n = len(corpus)
    lyric_vocab: set = set()
    annot_vocab: set = set()
    lyric_tokens = annot_tokens = 0
    for p in corpus:
        lt = tokenizer(p.lyric)
        at = tokenizer(p.annotation)
        lyric_tokens += len(lt)
        annot_tokens += len(at)
        lyric_vocab.update(lt)
        annot_vocab.update(at)
    return CorpusStats(
        n_pairs=n,
        mean_lyric_tokens=lyric_tokens / n if n else 0.0,
        mean_annotation_tokens=annot_tokens / n if n else 0.0,
        vocab_lyrics=len(lyric_vocab),
        vocab_annotations=len(annot_vocab),
    )


def estimate_ci_fraction(sample: Corpus) -> float:
    if len(sample) == 0:
        raise CorpusError("cannot estimate CI fraction of an empty sample")
    unlabeled = [p.id for p in sample if p.context_label is None]
    if unlabeled:
        raise CorpusError(f"{len(unlabeled)} unlabeled pairs in sample (first: {unlabeled[0]!r})")
    return sum(p.context_label == "CI" for p in sample) / len(sample)
