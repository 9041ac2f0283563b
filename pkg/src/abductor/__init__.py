"""Deterministic codex-driven abductive reasoning engine.

Maps validated observations onto a finite expert-curated hypothesis space and
emits ranked, traceable differentials, with a lexicon/embedding normalization
front-end, a Bernoulli naive-Bayes baseline, a Top-k evaluation harness with
exact binomial confidence intervals, an HTTP session service, and a CLI.
"""

from .codex import (
    Codex,
    EvokingMatrix,
    EvokingOverride,
    Feature,
    Hypothesis,
    Violation,
    derive_evoking_matrix,
    feature_set,
    incidence_vector,
    load_codex,
    parse_codex,
    serialize_codex,
    validate_codex,
)
from .observation import (
    FindingStatus,
    ObservationVector,
    assert_finding,
    binary_projection,
    merge_observations,
    new_observation,
    observation_from_findings,
)
from .reasoning import (
    Contribution,
    ContributionTerm,
    Differential,
    DifferentialEntry,
    ScoringPolicy,
    confidence_normalize,
    matrix_for_policy,
    nb_rank,
    rank_differential,
    render_explanation,
    render_hypothesis_explanation,
    score_hypothesis,
    serialize_differential,
)

__version__ = "0.1.0"

__all__ = [
    "Codex",
    "Contribution",
    "ContributionTerm",
    "Differential",
    "DifferentialEntry",
    "EvokingMatrix",
    "EvokingOverride",
    "Feature",
    "FindingStatus",
    "Hypothesis",
    "ObservationVector",
    "ScoringPolicy",
    "Violation",
    "assert_finding",
    "binary_projection",
    "confidence_normalize",
    "derive_evoking_matrix",
    "feature_set",
    "incidence_vector",
    "load_codex",
    "matrix_for_policy",
    "merge_observations",
    "nb_rank",
    "new_observation",
    "observation_from_findings",
    "parse_codex",
    "rank_differential",
    "render_explanation",
    "render_hypothesis_explanation",
    "score_hypothesis",
    "serialize_codex",
    "serialize_differential",
    "validate_codex",
]
