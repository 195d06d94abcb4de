"""Rule-based lemmatization and BM25 retrieval."""

import json as _json

from ._lemir import (
    DO_NOTHING,
    AlignmentError,
    Index,
    InvalidInput,
    Lemmatizer,
    LemirError,
    ParseError,
    RuleIncompatible,
    ScorerError,
    apply_rule,
    bootstrap_ci,
    extract_rule,
    rule_frequencies,
    tokenize,
    verbalize_rule,
)
from ._lemir import evaluate_run as _evaluate_run


def evaluate_run(run, qrels, ks=(1, 5, 100)):
    """Recall@k, MAP@k and Success@k as a dict."""
    return _json.loads(_evaluate_run(run, qrels, list(ks)))


__all__ = [
    "DO_NOTHING",
    "AlignmentError",
    "Index",
    "InvalidInput",
    "Lemmatizer",
    "LemirError",
    "ParseError",
    "RuleIncompatible",
    "ScorerError",
    "apply_rule",
    "bootstrap_ci",
    "evaluate_run",
    "extract_rule",
    "rule_frequencies",
    "tokenize",
    "verbalize_rule",
]
