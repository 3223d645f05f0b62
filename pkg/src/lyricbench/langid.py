"""Character-trigram language identification (Cavnar & Trenkle ranking).

Each language is represented by its most frequent padded character
trigrams in rank order. A text is assigned to the language whose profile
has the smallest out-of-place distance to the text's own ranking.
"""

from __future__ import annotations

import re
from collections import Counter
from importlib import resources
from typing import Mapping

PROFILE_SIZE = 300
BUNDLED_LANGUAGES = ("en", "fr", "es", "de")

_WORD = re.compile(r"[^\W\d_]+")


def trigram_counts(text: str) -> Counter:
    counts: Counter = Counter()
    for word in _WORD.findall(text.lower()):
        padded = f"_{word}_"
        for i in range(len(padded) - 2):
            counts[padded[i:i + 3]] += 1
    return counts


def rank_profile(text: str, size: int = PROFILE_SIZE) -> dict[str, int]:
    """Map trigram -> rank (0 = most frequent); ties ordered lexically."""
    ranked = sorted(trigram_counts(text).items(), key=lambda kv: (-kv[1], kv[0]))
    return {gram: rank for rank, (gram, _) in enumerate(ranked[:size])}


def out_of_place(doc: Mapping[str, int], profile: Mapping[str, int]) -> int:
    penalty = len(profile)
    return sum(
        abs(rank - profile[gram]) if gram in profile else penalty
        for gram, rank in doc.items()
    )


class LanguageProfiles:
    """Named rank profiles; immutable after construction."""

    def __init__(self, profiles: Mapping[str, Mapping[str, int]]):
        if not profiles:
            raise ValueError("empty language profile set")
        self._profiles = {name: dict(p) for name, p in sorted(profiles.items())}

    @classmethod
    def from_texts(cls, texts: Mapping[str, str], size: int = PROFILE_SIZE) -> "LanguageProfiles":
        return cls({lang: rank_profile(text, size) for lang, text in texts.items()})

    @classmethod
    def bundled(cls) -> "LanguageProfiles":
        data = resources.files("lyricbench") / "data"
        texts = {
            lang: (data / f"langid_{lang}.txt").read_text(encoding="utf-8")
            for lang in BUNDLED_LANGUAGES
        }
        return cls.from_texts(texts)

    @property
    def languages(self) -> list[str]:
        return list(self._profiles)

    def __contains__(self, lang: str) -> bool:
        return lang in self._profiles

    def distances(self, text: str) -> dict[str, int]:
        doc = rank_profile(text)
        return {lang: out_of_place(doc, prof) for lang, prof in self._profiles.items()}

    def classify(self, text: str) -> str:
        """Closest language; ties go to the lexically first language name."""
        dists = self.distances(text)
        return min(dists, key=lambda lang: (dists[lang], lang))
