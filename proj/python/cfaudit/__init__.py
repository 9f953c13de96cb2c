"""Counterfactual bias audit toolkit (C++ core bindings)."""

from ._core import (
    __version__,
    bootstrap_metrics,
    chi_square_p,
    chi_square_sf,
    matches_lexicon,
    odds_ratio,
    paired_metrics,
    parse_generation,
    project_impact,
    synth_truth,
    validate_rewrite,
    weighted_kappa,
)

__all__ = [
    "__version__",
    "bootstrap_metrics",
    "chi_square_p",
    "chi_square_sf",
    "matches_lexicon",
    "odds_ratio",
    "paired_metrics",
    "parse_generation",
    "project_impact",
    "synth_truth",
    "validate_rewrite",
    "weighted_kappa",
]
