from __future__ import annotations

import random

import pytest

from abductor.codex import Codex, Feature, Hypothesis, load_codex, serialize_codex
from abductor.observation import (
    FindingStatus,
    ObservationVector,
    observation_from_findings,
)

T1_JSON = """
{
  "codex_version": "t1-1.0.0",
  "domain_label": "toy",
  "features": [
    {"id": "f1", "name": "Headache", "synonyms": ["cephalalgia"]},
    {"id": "f2", "name": "Fever", "synonyms": []},
    {"id": "f3", "name": "Cough", "synonyms": []},
    {"id": "f4", "name": "Rash", "synonyms": []}
  ],
  "hypotheses": [
    {"id": "h1", "name": "Migraine", "features": ["f1", "f2"]},
    {"id": "h2", "name": "Flu", "features": ["f2", "f3"]},
    {"id": "h3", "name": "Dermatitis", "features": ["f4"]}
  ]
}
"""


@pytest.fixture
def t1() -> Codex:
    return load_codex(T1_JSON)


@pytest.fixture
def t1_obs(t1: Codex) -> ObservationVector:
    """The worked scenario: f1 present, f2 present, f4 confirmed absent."""
    return observation_from_findings(
        t1,
        [
            ("f1", FindingStatus.PRESENT),
            ("f2", FindingStatus.PRESENT),
            ("f4", FindingStatus.ABSENT),
        ],
    )


def random_codex(rng: random.Random, n: int, m: int, version: str = "r-1.0.0") -> Codex:
    """Seeded random codex with nonempty signatures over m features."""
    features = tuple(Feature(id=f"f{i:03d}", name=f"Feature {i}", synonyms=()) for i in range(m))
    hypotheses = []
    for j in range(n):
        size = rng.randint(1, m)
        signature = frozenset(rng.sample([f.id for f in features], size))
        hypotheses.append(Hypothesis(id=f"h{j:03d}", name=f"Hypothesis {j}", feature_ids=signature))
    return Codex(
        version=version,
        domain_label="random",
        features=features,
        hypotheses=tuple(hypotheses),
    )


def random_observation(rng: random.Random, codex: Codex) -> ObservationVector:
    """Seeded random tri-state assignment (unknown weighted heaviest)."""
    findings = []
    for f in codex.features:
        roll = rng.random()
        if roll < 0.3:
            findings.append((f.id, FindingStatus.PRESENT))
        elif roll < 0.5:
            findings.append((f.id, FindingStatus.ABSENT))
    return observation_from_findings(codex, findings)


def codex_roundtrip(codex: Codex) -> Codex:
    return load_codex(serialize_codex(codex))


def recon_codex_json() -> str:
    """Six single-feature hypotheses whose tie-break order is h1 < ... < h6.

    With the single finding g1=present, h1 scores +1 and h2..h6 tie below it,
    so a case's reference choice pins its rank exactly: reference hr lands at
    rank r. This reconstructs any target rank multiset through the real
    pipeline.
    """
    import json as _json

    return _json.dumps(
        {
            "codex_version": "recon-1.0.0",
            "domain_label": "rank reconstruction",
            "features": [{"id": f"g{i}", "name": f"Sign {i}", "synonyms": []} for i in range(1, 7)],
            "hypotheses": [
                {"id": f"h{i}", "name": f"Candidate {i}", "features": [f"g{i}"]}
                for i in range(1, 7)
            ],
        }
    )


def recon_corpus_json() -> str:
    """42 cases whose ranks form the published multiset: Top-1/3/5 = 30/34/37."""
    import json as _json

    per_rank = {1: 30, 2: 2, 3: 2, 4: 2, 5: 1, 6: 5}
    cases = []
    counter = 0
    for rank, copies in per_rank.items():
        for _ in range(copies):
            counter += 1
            cases.append(
                {
                    "id": f"case-{counter:02d}",
                    "findings": [{"feature": "g1", "status": "present"}],
                    "reference": [f"h{rank}"],
                }
            )
    return _json.dumps(cases)
