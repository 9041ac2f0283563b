"""Exception types shared across the engine."""

from __future__ import annotations


class AbductorError(Exception):
    """Base class for all engine errors."""


class CodexParseError(AbductorError):
    """Codex (or corpus/embeddings) text is malformed or violates the file schema."""


class CodexValidationError(AbductorError):
    """A loaded codex violates one or more structural invariants."""

    def __init__(self, violations: list) -> None:
        lines = "; ".join(str(v) for v in violations)
        super().__init__(f"codex validation failed: {lines}")
        self.violations = violations


class UnknownHypothesisError(AbductorError, KeyError):
    def __init__(self, hypothesis_id: str) -> None:
        super().__init__(f"unknown hypothesis id: {hypothesis_id!r}")
        self.hypothesis_id = hypothesis_id


class UnknownFeatureError(AbductorError, KeyError):
    def __init__(self, feature_id: str) -> None:
        super().__init__(f"unknown feature id: {feature_id!r}")
        self.feature_id = feature_id


class VersionMismatchError(AbductorError):
    """Observation or corpus was built against a different codex version."""


class EmbeddingsError(AbductorError):
    """Embeddings file is missing vectors, mixes dimensions, or contains a zero vector."""


class UnembeddableMentionError(AbductorError):
    """File-backed provider has no vector for the mention surface."""


class ExtractorTimeoutError(AbductorError):
    """External extractor did not answer within the configured timeout."""


class ExtractorContractError(AbductorError):
    """External extractor response is malformed or oversteps its non-authoritative role."""


class CorpusError(AbductorError):
    """Evaluation corpus is malformed or references ids missing from the codex."""
