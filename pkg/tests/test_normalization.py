from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from abductor.codex import Codex
from abductor.errors import EmbeddingsError, UnembeddableMentionError
from abductor.extraction import Mention, Polarity
from abductor.normalization import (
    EmbeddingStore,
    TableMentionEmbedder,
    cosine_similarity,
    embed_mention,
    load_embeddings,
    load_mention_table,
    match_mention,
)

T1_VECTORS = {
    "f1": [1.0, 0.0, 0.0, 0.0],
    "f2": [0.0, 1.0, 0.0, 0.0],
    "f3": [0.0, 0.0, 1.0, 0.0],
    "f4": [0.0, 0.0, 0.0, 1.0],
}


def _store_json(vectors: dict, dim: int = 4) -> str:
    return json.dumps({"dim": dim, "vectors": vectors})


def _mention(surface: str) -> Mention:
    return Mention(surface=surface, start=0, end=len(surface), polarity=Polarity.AFFIRMED)


@pytest.fixture
def t1_store(t1: Codex) -> EmbeddingStore:
    return load_embeddings(_store_json(T1_VECTORS), t1)


def test_load_embeddings_happy_path(t1: Codex, t1_store: EmbeddingStore) -> None:
    assert t1_store.dim == 4
    assert set(t1_store.vectors) == {"f1", "f2", "f3", "f4"}


def test_load_embeddings_missing_feature(t1: Codex) -> None:
    vectors = {k: v for k, v in T1_VECTORS.items() if k != "f4"}
    with pytest.raises(EmbeddingsError, match="missing feature vector f4"):
        load_embeddings(_store_json(vectors), t1)


def test_load_embeddings_dimension_mismatch(t1: Codex) -> None:
    vectors = dict(T1_VECTORS, f2=[1.0, 0.0])
    with pytest.raises(EmbeddingsError, match="dimension mismatch"):
        load_embeddings(_store_json(vectors), t1)


def test_load_embeddings_zero_vector(t1: Codex) -> None:
    vectors = dict(T1_VECTORS, f3=[0.0, 0.0, 0.0, 0.0])
    with pytest.raises(EmbeddingsError, match="zero vector"):
        load_embeddings(_store_json(vectors), t1)


def test_cosine_examples() -> None:
    assert cosine_similarity((1.0, 0.0), (1.0, 0.0)) == 1.0
    assert cosine_similarity((1.0, 0.0), (0.0, 1.0)) == 0.0
    assert cosine_similarity((1.0, 0.0), (-1.0, 0.0)) == -1.0


def test_cosine_errors() -> None:
    with pytest.raises(ValueError):
        cosine_similarity((1.0, 0.0), (1.0, 0.0, 0.0))
    with pytest.raises(ValueError):
        cosine_similarity((0.0, 0.0), (1.0, 0.0))


coordinate = st.integers(min_value=-1000, max_value=1000).map(lambda i: i / 10.0)


@given(
    u=st.lists(coordinate, min_size=3, max_size=3),
    v=st.lists(coordinate, min_size=3, max_size=3),
    c=st.sampled_from([0.01, 0.5, 2.0, 10.0, 1000.0]),
)
def test_cosine_symmetry_and_scale_invariance(u: list[float], v: list[float], c: float) -> None:
    if all(x == 0 for x in u) or all(x == 0 for x in v):
        return
    assert cosine_similarity(u, v) == pytest.approx(cosine_similarity(v, u), abs=1e-12)
    scaled = [c * x for x in u]
    assert cosine_similarity(scaled, v) == pytest.approx(cosine_similarity(u, v), abs=1e-9)
    assert -1.0 <= cosine_similarity(u, v) <= 1.0


def test_embed_mention_lookup_and_determinism() -> None:
    table = load_mention_table(_store_json({"throbbing head": [0.9, 0.1, 0.0, 0.0]}))
    first = embed_mention(_mention("throbbing head"), table)
    second = embed_mention(_mention("Throbbing Head"), table)
    assert first == (0.9, 0.1, 0.0, 0.0)
    assert first == second
    with pytest.raises(UnembeddableMentionError):
        embed_mention(_mention("unseen phrase"), table)


def test_match_exact_name(t1: Codex, t1_store: EmbeddingStore) -> None:
    outcome = match_mention(_mention("Fever"), t1_store, t1)
    assert outcome.matched
    assert (outcome.feature_id, outcome.score, outcome.method) == ("f2", 1.0, "exact")


def test_match_exact_synonym_preempts_embedding(t1: Codex, t1_store: EmbeddingStore) -> None:
    class ExplodingEmbedder:
        def embed(self, surface: str) -> tuple[float, ...]:
            raise AssertionError("embedding path must not run on exact matches")

    outcome = match_mention(_mention("cephalalgia"), t1_store, t1, embedder=ExplodingEmbedder())
    assert (outcome.feature_id, outcome.method) == ("f1", "exact")


def test_match_identical_vector_scores_one(t1: Codex, t1_store: EmbeddingStore) -> None:
    embedder = TableMentionEmbedder(dim=4, vectors={"splitting head": (1.0, 0.0, 0.0, 0.0)})
    outcome = match_mention(_mention("splitting head"), t1_store, t1, threshold=0.8, embedder=embedder)
    assert outcome.matched
    assert (outcome.feature_id, outcome.method) == ("f1", "embedding")
    assert outcome.score == pytest.approx(1.0)


def test_match_below_threshold_is_unmatched(t1: Codex, t1_store: EmbeddingStore) -> None:
    # unit vector built so the best cosine against the one-hot store is 0.55
    import math

    embedder = TableMentionEmbedder(
        dim=4, vectors={"odd phrase": (0.55, 0.0, 0.0, -math.sqrt(1 - 0.55**2))}
    )
    outcome = match_mention(_mention("odd phrase"), t1_store, t1, threshold=0.8, embedder=embedder)
    assert not outcome.matched
    assert outcome.feature_id is None
    assert outcome.method is None
    assert outcome.score == pytest.approx(0.55, abs=1e-9)


def test_match_tie_breaks_to_lexicographic_feature(t1: Codex, t1_store: EmbeddingStore) -> None:
    # equidistant from f1 and f2
    embedder = TableMentionEmbedder(dim=4, vectors={"between": (1.0, 1.0, 0.0, 0.0)})
    outcome = match_mention(_mention("between"), t1_store, t1, threshold=0.5, embedder=embedder)
    assert outcome.feature_id == "f1"


def test_match_threshold_validation(t1: Codex, t1_store: EmbeddingStore) -> None:
    with pytest.raises(ValueError):
        match_mention(_mention("fever"), t1_store, t1, threshold=0.0)
    with pytest.raises(ValueError):
        match_mention(_mention("fever"), t1_store, t1, threshold=1.5)


def test_match_is_deterministic(t1: Codex, t1_store: EmbeddingStore) -> None:
    embedder = TableMentionEmbedder(dim=4, vectors={"between": (1.0, 1.0, 0.0, 0.0)})
    outcomes = {
        match_mention(_mention("between"), t1_store, t1, threshold=0.5, embedder=embedder)
        for _ in range(10)
    }
    assert len(outcomes) == 1


def test_outcome_type_cannot_name_a_hypothesis() -> None:
    from abductor.normalization import MatchOutcome

    assert set(MatchOutcome.__dataclass_fields__) == {"mention", "feature_id", "score", "method"}
