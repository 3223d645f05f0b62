"""Automated lyric annotation toolkit.

Retrieval and phrase-based SMT baselines for generating lyric annotations,
the metric suite used to score them (BLEU, iBLEU, METEOR, SARI plus length
and profanity properties), and agreement statistics over human ratings.
"""

__version__ = "0.1.0"
