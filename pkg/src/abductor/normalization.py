"""Map extracted mentions onto codex features.

Exact (case-insensitive) lookup against feature names and synonyms always
wins; only unmatched surfaces fall through to semantic proximity, measured as
cosine similarity in a shared embedding space with a configurable acceptance
threshold. This stage is a mapping mechanism, not a reasoning one: it
consults feature definitions only and its output cannot name a hypothesis.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import IO, Protocol, Union

from .codex import Codex
from .errors import EmbeddingsError, UnembeddableMentionError
from .extraction import Mention

DEFAULT_MATCH_THRESHOLD = 0.80


@dataclass(frozen=True)
class EmbeddingStore:
    """One vector per codex feature, all with the same dimensionality."""

    dim: int
    vectors: dict[str, tuple[float, ...]]


@dataclass(frozen=True)
class MatchOutcome:
    """Result of normalizing one mention.

    ``feature_id`` is None when unmatched; ``score`` then holds the best
    similarity seen. Exact matches always score 1.0.
    """

    mention: Mention
    feature_id: str | None
    score: float
    method: str | None  # "exact" | "embedding" | None when unmatched

    @property
    def matched(self) -> bool:
        return self.feature_id is not None


def _parse_vector_file(source: Union[str, bytes, IO], what: str) -> tuple[int, dict[str, tuple[float, ...]]]:
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    try:
        raw = json.loads(source)
    except json.JSONDecodeError as exc:
        raise EmbeddingsError(f"malformed {what} JSON: {exc}") from exc
    if not isinstance(raw, dict) or set(raw) != {"dim", "vectors"}:
        raise EmbeddingsError(f'{what} file must be {{"dim": d, "vectors": {{...}}}}')
    dim = raw["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise EmbeddingsError(f"{what}: 'dim' must be a positive integer")
    vectors_raw = raw["vectors"]
    if not isinstance(vectors_raw, dict):
        raise EmbeddingsError(f"{what}: 'vectors' must be an object")
    vectors: dict[str, tuple[float, ...]] = {}
    for key, values in vectors_raw.items():
        if not isinstance(values, list) or any(
            not isinstance(v, (int, float)) or isinstance(v, bool) for v in values
        ):
            raise EmbeddingsError(f"{what}: vector for {key!r} must be an array of numbers")
        if len(values) != dim:
            raise EmbeddingsError(
                f"{what}: dimension mismatch for {key!r} (expected {dim}, got {len(values)})"
            )
        vector = tuple(float(v) for v in values)
        if all(v == 0.0 for v in vector):
            raise EmbeddingsError(f"{what}: zero vector for {key!r}")
        vectors[key] = vector
    return dim, vectors


def load_embeddings(source: Union[str, bytes, IO], codex: Codex) -> EmbeddingStore:
    """Load and validate feature vectors covering every codex feature."""
    dim, vectors = _parse_vector_file(source, "embeddings")
    for f in codex.features:
        if f.id not in vectors:
            raise EmbeddingsError(f"missing feature vector {f.id}")
    return EmbeddingStore(dim=dim, vectors=vectors)


def cosine_similarity(u: tuple[float, ...] | list[float], v: tuple[float, ...] | list[float]) -> float:
    """Cosine of the angle between two vectors, clamped against rounding."""
    if len(u) != len(v):
        raise ValueError(f"dimension mismatch: {len(u)} vs {len(v)}")
    norm_u = math.sqrt(math.fsum(x * x for x in u))
    norm_v = math.sqrt(math.fsum(x * x for x in v))
    if norm_u == 0.0 or norm_v == 0.0:
        raise ValueError("cosine similarity is undefined for a zero vector")
    value = math.fsum(x * y for x, y in zip(u, v)) / (norm_u * norm_v)
    return max(-1.0, min(1.0, value))


class MentionEmbedder(Protocol):
    def embed(self, surface: str) -> tuple[float, ...]: ...


@dataclass(frozen=True)
class TableMentionEmbedder:
    """File-backed surface -> vector lookup; keys are matched case-insensitively."""

    dim: int
    vectors: dict[str, tuple[float, ...]]

    def embed(self, surface: str) -> tuple[float, ...]:
        vector = self.vectors.get(surface.lower())
        if vector is None:
            raise UnembeddableMentionError(f"no vector for mention surface {surface!r}")
        return vector


def load_mention_table(source: Union[str, bytes, IO]) -> TableMentionEmbedder:
    dim, vectors = _parse_vector_file(source, "mention table")
    return TableMentionEmbedder(dim=dim, vectors={k.lower(): v for k, v in vectors.items()})


def embed_mention(mention: Mention, provider: MentionEmbedder) -> tuple[float, ...]:
    """Vector for one mention (deterministic for file-backed providers)."""
    return provider.embed(mention.surface)


def exact_feature_match(surface: str, codex: Codex) -> str | None:
    """Case-insensitive name/synonym lookup; ties go to the smaller feature id."""
    lowered = surface.lower()
    candidates = [
        f.id
        for f in codex.features
        if f.name.lower() == lowered or any(s.lower() == lowered for s in f.synonyms)
    ]
    return min(candidates) if candidates else None


def match_mention(
    mention: Mention,
    store: EmbeddingStore,
    codex: Codex,
    threshold: float = DEFAULT_MATCH_THRESHOLD,
    embedder: MentionEmbedder | None = None,
) -> MatchOutcome:
    """Exact lookup first, then nearest feature by cosine similarity.

    An exact name/synonym hit scores 1.0 and preempts the embedding path
    entirely. Otherwise the mention is embedded and the best-scoring feature
    accepted iff its similarity reaches the threshold; ties break toward the
    higher score, then the lexicographically smaller feature id.
    """
    if not (0.0 < threshold <= 1.0):
        raise ValueError(f"threshold must lie in (0, 1], got {threshold}")

    exact = exact_feature_match(mention.surface, codex)
    if exact is not None:
        return MatchOutcome(mention=mention, feature_id=exact, score=1.0, method="exact")

    if embedder is None:
        raise UnembeddableMentionError(
            f"no exact match for {mention.surface!r} and no mention embedder configured"
        )
    vector = embed_mention(mention, embedder)
    best_id: str | None = None
    best_score = -1.0
    for f in codex.features:
        score = cosine_similarity(vector, store.vectors[f.id])
        if score > best_score or (score == best_score and (best_id is None or f.id < best_id)):
            best_id, best_score = f.id, score
    if best_id is not None and best_score >= threshold:
        return MatchOutcome(mention=mention, feature_id=best_id, score=best_score, method="embedding")
    return MatchOutcome(mention=mention, feature_id=None, score=best_score, method=None)
