"""Desk-scale phrase-based translation: extraction, LM, decoding, MERT."""

from .decoder import DEFAULT_WEIGHTS, FEATURES, Derivation, FeatureWeights, decode, nbest, search
from .lm import NGramLM
from .mert import NBestPool, line_search, mert, optimize_pool, upper_envelope
from .model import SMTConfig, SMTModel, train_smt
from .phrases import PhraseTable, extract_phrases, lexical_weight, score_phrases

__all__ = [
    "DEFAULT_WEIGHTS", "FEATURES", "Derivation", "FeatureWeights", "decode", "nbest", "search",
    "NGramLM", "NBestPool", "line_search", "mert", "optimize_pool", "upper_envelope",
    "SMTConfig", "SMTModel", "train_smt",
    "PhraseTable", "extract_phrases", "lexical_weight", "score_phrases",
]
