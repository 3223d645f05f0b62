"""Agreement and correlation statistics over human ratings."""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from pathlib import Path
from typing import Mapping, Sequence

ASPECTS = ("fluency", "information")
SCALE = (1, 2, 3, 4, 5)


class AgreementError(ValueError):
    pass


def fleiss_kappa(matrix: Sequence[Sequence[int]]) -> float:
    """Fleiss' kappa for an items x categories count matrix.

    Every row must sum to the same number of raters n >= 2.
    """
    rows = [list(r) for r in matrix]
    if len(rows) < 2:
        raise AgreementError("need at least 2 items")
    k = len(rows[0])
    if k == 0 or any(len(r) != k for r in rows):
        raise AgreementError("rows must have the same number of categories")
    if any(c < 0 or c != int(c) for r in rows for c in r):
        raise AgreementError("counts must be non-negative integers")
    n = sum(rows[0])
    if any(sum(r) != n for r in rows):
        raise AgreementError("every item needs the same number of ratings")
    if n < 2:
        raise AgreementError("need at least 2 raters per item")
    N = len(rows)

    p_bar = sum((sum(c * c for c in r) - n) / (n * (n - 1)) for r in rows) / N
    p_cat = [sum(r[j] for r in rows) / (N * n) for j in range(k)]
    p_e = sum(p * p for p in p_cat)
    if p_e >= 1.0:
        raise AgreementError("degenerate ratings: every rating falls in one category")
    kappa = (p_bar - p_e) / (1.0 - p_e)
    return max(-1.0, min(1.0, kappa))


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    if len(x) != len(y):
        raise AgreementError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise AgreementError("need at least 2 points")
    mx = math.fsum(x) / len(x)
    my = math.fsum(y) / len(y)
    dx = [a - mx for a in x]
    dy = [b - my for b in y]
    # r is scale-free; rescaling keeps tiny or huge spreads from under/overflowing
    scale_x = max(abs(a) for a in dx)
    scale_y = max(abs(b) for b in dy)
    if scale_x == 0.0 or scale_y == 0.0:
        raise AgreementError("zero variance")
    dx = [a / scale_x for a in dx]
    dy = [b / scale_y for b in dy]
    sxx = math.fsum(a * a for a in dx)
    syy = math.fsum(b * b for b in dy)
    if sxx == 0.0 or syy == 0.0:
        raise AgreementError("zero variance")
    sxy = math.fsum(a * b for a, b in zip(dx, dy))
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def mean_ratings(ratings: Mapping[str, Sequence[float]]) -> dict[str, float]:
    """Per-item arithmetic mean of rater scores."""
    means = {}
    for item, scores in ratings.items():
        if not scores:
            raise AgreementError(f"item {item!r} has no ratings")
        means[item] = math.fsum(scores) / len(scores)
    return means


# -- ratings files -------------------------------------------------------------

def load_ratings(path: str | Path) -> dict[str, dict[str, dict[str, int]]]:
    """Read ``item_id,rater_id,fluency,information`` rows.

    Returns aspect -> item -> rater -> score. A header row is optional.
    """
    out: dict = {a: defaultdict(dict) for a in ASPECTS}
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or not "".join(row).strip():
                continue
            if lineno == 1 and row[0].strip().lower() == "item_id":
                continue
            if len(row) != 4:
                raise AgreementError(f"line {lineno}: expected 4 fields, got {len(row)}")
            item, rater = row[0].strip(), row[1].strip()
            for aspect, raw in zip(ASPECTS, row[2:]):
                try:
                    score = int(raw)
                except ValueError:
                    raise AgreementError(f"line {lineno}: {aspect} score {raw!r} is not an integer") from None
                if score not in SCALE:
                    raise AgreementError(f"line {lineno}: {aspect} score {score} outside 1-5")
                if rater in out[aspect][item]:
                    raise AgreementError(f"line {lineno}: duplicate rating by {rater!r} for {item!r}")
                out[aspect][item][rater] = score
    return {a: dict(v) for a, v in out.items()}


def rating_matrix(by_item: Mapping[str, Mapping[str, int]]) -> list[list[int]]:
    """Category counts per item (items in sorted id order)."""
    matrix = []
    for item in sorted(by_item):
        row = [0] * len(SCALE)
        for score in by_item[item].values():
            row[score - 1] += 1
        matrix.append(row)
    return matrix


def ratings_agreement(path: str | Path) -> dict[str, float]:
    ratings = load_ratings(path)
    return {aspect: fleiss_kappa(rating_matrix(ratings[aspect])) for aspect in ASPECTS}


def load_scores(path: str | Path) -> tuple[list[str], dict[str, dict[str, float]]]:
    """Metric scores TSV: header ``item_id<TAB>metric...``, one row per item."""
    with Path(path).open(encoding="utf-8") as fh:
        rows = [line.rstrip("\n").split("\t") for line in fh if line.strip()]
    if not rows:
        raise AgreementError("empty scores file")
    header = rows[0]
    metrics = header[1:]
    scores: dict[str, dict[str, float]] = {m: {} for m in metrics}
    for lineno, row in enumerate(rows[1:], 2):
        if len(row) != len(header):
            raise AgreementError(f"scores line {lineno}: expected {len(header)} fields")
        for m, v in zip(metrics, row[1:]):
            scores[m][row[0]] = float(v)
    return metrics, scores


def correlate(ratings_path: str | Path, scores_path: str | Path) -> dict[tuple[str, str], float]:
    """Pearson r between every metric column and each mean human aspect."""
    ratings = load_ratings(ratings_path)
    metrics, scores = load_scores(scores_path)
    result = {}
    for aspect in ASPECTS:
        human = mean_ratings({i: list(r.values()) for i, r in ratings[aspect].items()})
        for m in metrics:
            items = sorted(set(human) & set(scores[m]))
            if len(items) < 2:
                raise AgreementError(f"fewer than 2 items shared between ratings and {m!r}")
            result[(m, aspect)] = pearson([scores[m][i] for i in items], [human[i] for i in items])
    return result
