"""Measurement and generation toolkit for German text simplification."""

from ._einfach import (
    NGramLM,
    __version__,
    aggregate_ratings,
    bleu,
    complexity_profile,
    default_config,
    meteor,
    metric_tokens,
    sari,
    standardize_typography,
    tokenize,
)

__all__ = [
    "NGramLM",
    "__version__",
    "aggregate_ratings",
    "bleu",
    "complexity_profile",
    "default_config",
    "meteor",
    "metric_tokens",
    "sari",
    "standardize_typography",
    "tokenize",
]
