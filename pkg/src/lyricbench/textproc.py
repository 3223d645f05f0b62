"""Tokenization and n-gram counting shared by every other module."""

from __future__ import annotations

from collections import Counter
from typing import Sequence

from .porter import stem

__all__ = ["tokenize", "ngrams", "ngram_set", "stem", "detokenize"]


def _is_punct(ch: str) -> bool:
    return not ch.isalnum()


def _split_word(word: str) -> list[str]:
    lead = []
    i = 0
    while i < len(word) and _is_punct(word[i]):
        lead.append(word[i])
        i += 1
    core = word[i:]
    trail = []
    while core and _is_punct(core[-1]):
        # g-dropping apostrophe ("ridin'") belongs to the word
        if core[-1] == "'" and len(core) > 1 and core[-2].isalpha():
            break
        trail.append(core[-1])
        core = core[:-1]
    out = lead
    if core:
        out.append(core)
    out.extend(reversed(trail))
    return out


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, peel punctuation off word edges.

    >>> tokenize("How does it feel?")
    ['how', 'does', 'it', 'feel', '?']
    >>> tokenize("ridin' shotgun")
    ["ridin'", 'shotgun']
    """
    tokens: list[str] = []
    for word in text.lower().split():
        tokens.extend(_split_word(word))
    return tokens


def detokenize(tokens: Sequence[str]) -> str:
    return " ".join(tokens)


def ngrams(tokens: Sequence[str], n: int) -> Counter:
    """Multiset of contiguous n-token windows."""
    if n < 1:
        raise ValueError(f"n-gram order must be >= 1, got {n}")
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def ngram_set(tokens: Sequence[str], n: int) -> set:
    if n < 1:
        raise ValueError(f"n-gram order must be >= 1, got {n}")
    return {tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)}
