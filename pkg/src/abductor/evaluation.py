"""Evaluation harness: case corpora, Top-k metrics, exact binomial intervals.

A case pairs validated findings with one or more acceptable reference
hypotheses; a run ranks every case, reads off the best reference rank, and
aggregates Top-k inclusion with exact (Clopper-Pearson) two-sided confidence
intervals. A seeded synthetic generator supports desk-scale studies when no
expert corpus is available.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from typing import IO, Callable, Union

from scipy.stats import beta as beta_dist

from .codex import Codex, EvokingMatrix, Feature, Hypothesis
from .errors import CorpusError
from .observation import FindingStatus, ObservationVector, observation_from_findings
from .reasoning import Differential, ScoringPolicy, rank_differential
from .serialization import dumps_canonical


@dataclass(frozen=True)
class Case:
    """One evaluation case: findings plus acceptable reference diagnoses."""

    id: str
    findings: tuple[tuple[str, FindingStatus], ...]
    reference: tuple[str, ...]
    text: str | None = None


@dataclass(frozen=True)
class TopK:
    count: int
    proportion: float
    ci_low: float
    ci_high: float


@dataclass(frozen=True)
class EvaluationReport:
    per_case: tuple[tuple[str, int | None], ...]
    topk: dict[int, TopK]
    n_cases: int
    config: dict


def percent_half_up(x: float) -> int:
    """Round a proportion to integer percent, halves away from zero."""
    return int(math.floor(x * 100.0 + 0.5))


# ---------------------------------------------------------------------------
# Corpus ingestion
# ---------------------------------------------------------------------------

_CASE_KEYS = {"id", "findings", "text", "reference"}
_FINDING_KEYS = {"feature", "status"}


def load_corpus(source: Union[str, bytes, IO], codex: Codex) -> list[Case]:
    """Parse a corpus file and validate every id against the codex."""
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    try:
        raw = json.loads(source)
    except json.JSONDecodeError as exc:
        raise CorpusError(f"malformed corpus JSON: {exc}") from exc
    if not isinstance(raw, list):
        raise CorpusError("corpus file must be a JSON array of cases")

    cases: list[Case] = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict):
            raise CorpusError(f"case #{i}: must be an object")
        unknown = sorted(set(entry) - _CASE_KEYS)
        if unknown:
            raise CorpusError(f"case #{i}: unknown keys {unknown}")
        case_id = entry.get("id")
        if not isinstance(case_id, str) or not case_id:
            raise CorpusError(f"case #{i}: 'id' must be a nonempty string")

        findings: list[tuple[str, FindingStatus]] = []
        for f in entry.get("findings", []):
            if not isinstance(f, dict) or set(f) - _FINDING_KEYS:
                raise CorpusError(f"case {case_id!r}: malformed finding entry")
            feature_id, status = f.get("feature"), f.get("status")
            if not codex.has_feature(feature_id):
                raise CorpusError(f"case {case_id!r}: unknown feature {feature_id!r}")
            if status not in ("present", "absent"):
                raise CorpusError(f"case {case_id!r}: status must be 'present' or 'absent'")
            findings.append((feature_id, FindingStatus(status)))

        reference = entry.get("reference")
        if not isinstance(reference, list) or not reference:
            raise CorpusError(f"case {case_id!r}: 'reference' must be a nonempty array")
        for hid in reference:
            if not codex.has_hypothesis(hid):
                raise CorpusError(f"case {case_id!r}: unknown reference hypothesis {hid!r}")

        text = entry.get("text")
        if text is not None and not isinstance(text, str):
            raise CorpusError(f"case {case_id!r}: 'text' must be a string")
        cases.append(Case(id=case_id, findings=tuple(findings), reference=tuple(reference), text=text))
    return cases


def serialize_corpus(cases: list[Case]) -> str:
    doc = []
    for case in cases:
        entry: dict = {
            "id": case.id,
            "findings": [{"feature": f, "status": s.value} for f, s in case.findings],
        }
        if case.text is not None:
            entry["text"] = case.text
        entry["reference"] = list(case.reference)
        doc.append(entry)
    return dumps_canonical(doc)


def case_observation(codex: Codex, case: Case) -> ObservationVector:
    return observation_from_findings(codex, case.findings)


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


def rank_position(d: Differential, reference: list[str] | tuple[str, ...]) -> int | None:
    """1-based rank of the best-ranked reference hypothesis, None if absent."""
    if not reference:
        raise ValueError("reference list must be nonempty")
    wanted = set(reference)
    for i, e in enumerate(d.entries, start=1):
        if e.hypothesis_id in wanted:
            return i
    return None


def top_k_inclusion(ranks: list[int], k: int) -> tuple[int, float]:
    """Count and proportion of ranks at or inside position k."""
    if not ranks:
        raise ValueError("ranks list must be nonempty")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    count = sum(1 for r in ranks if r <= k)
    return count, count / len(ranks)


def clopper_pearson(successes: int, n: int, level: float = 0.95) -> tuple[float, float]:
    """Exact two-sided binomial interval via the beta-quantile formulation.

    low = BetaInv(rho/2; s, n-s+1) and high = BetaInv(1-rho/2; s+1, n-s) with
    rho = 1 - level; the endpoints pin to 0 and 1 at s = 0 and s = n.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not (0 <= successes <= n):
        raise ValueError(f"successes must lie in [0, {n}], got {successes}")
    if not (0.0 < level < 1.0):
        raise ValueError(f"level must lie in (0, 1), got {level}")
    rho = 1.0 - level
    low = 0.0 if successes == 0 else float(beta_dist.ppf(rho / 2.0, successes, n - successes + 1))
    high = 1.0 if successes == n else float(beta_dist.ppf(1.0 - rho / 2.0, successes + 1, n - successes))
    return low, high


# ---------------------------------------------------------------------------
# Full runs
# ---------------------------------------------------------------------------

Ranker = Callable[[Codex, ObservationVector], Differential]


def run_evaluation(
    codex: Codex,
    corpus: list[Case],
    matrix: EvokingMatrix,
    policy: ScoringPolicy,
    ks: tuple[int, ...] | list[int] = (1, 3, 5),
    level: float = 0.95,
    ranker: Ranker | None = None,
    ranker_name: str = "engine",
) -> EvaluationReport:
    """Rank every case and aggregate Top-k inclusion with exact intervals.

    ``ranker`` defaults to the deterministic engine; pass an alternative
    (e.g. the naive-Bayes baseline) for comparison runs. Deterministic for
    fixed inputs; corpus order is preserved in the per-case listing.
    """
    if not corpus:
        raise ValueError("corpus must contain at least one case")
    for k in ks:
        if k < 1:
            raise ValueError(f"every k must be >= 1, got {k}")
    if ranker is None:
        def ranker(c: Codex, obs: ObservationVector) -> Differential:
            return rank_differential(c, obs, matrix, policy)

    per_case: list[tuple[str, int | None]] = []
    for case in corpus:
        d = ranker(codex, case_observation(codex, case))
        per_case.append((case.id, rank_position(d, case.reference)))

    ranks = [r for _, r in per_case if r is not None]
    topk: dict[int, TopK] = {}
    for k in ks:
        count = top_k_inclusion(ranks, k)[0] if ranks else 0
        low, high = clopper_pearson(count, len(corpus), level)
        topk[k] = TopK(count=count, proportion=count / len(corpus), ci_low=low, ci_high=high)

    config = {
        "codex_version": codex.version,
        "policy": policy.to_dict(),
        "ranker": ranker_name,
        "level": level,
        "ks": list(ks),
    }
    return EvaluationReport(
        per_case=tuple(per_case), topk=topk, n_cases=len(corpus), config=config
    )


def report_to_dict(report: EvaluationReport) -> dict:
    return {
        "config": report.config,
        "n_cases": report.n_cases,
        "per_case": [{"id": cid, "rank": rank} for cid, rank in report.per_case],
        "topk": {
            str(k): {
                "count": t.count,
                "proportion": t.proportion,
                "ci_low": t.ci_low,
                "ci_high": t.ci_high,
            }
            for k, t in report.topk.items()
        },
    }


def serialize_report(report: EvaluationReport) -> str:
    return dumps_canonical(report_to_dict(report))


def format_report_table(report: EvaluationReport) -> str:
    """Human-readable summary with half-up integer-percent rounding."""
    level_pct = percent_half_up(report.config["level"])
    lines = [
        f"Top-k inclusion over {report.n_cases} cases ({level_pct}% CI, {report.config['ranker']} ranker)",
        f"{'k':>4}  {'count':>9}  {'proportion':>10}  interval",
    ]
    for k, t in report.topk.items():
        lines.append(
            f"{k:>4}  {t.count:>5}/{report.n_cases:<3}  {percent_half_up(t.proportion):>9}%"
            f"  [{percent_half_up(t.ci_low)}%, {percent_half_up(t.ci_high)}%]"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Synthetic corpora
# ---------------------------------------------------------------------------


def synth_corpus(
    seed: int,
    n: int,
    m: int,
    features_per_hypothesis: int,
    findings_per_case: int,
    flip_noise: float,
    cases: int,
) -> tuple[Codex, list[Case]]:
    """Deterministic pseudo-random codex plus corpus from one seed.

    Each case draws a ground-truth hypothesis, samples findings from its
    signature as present, then flips each one to confirmed-absent with
    probability ``flip_noise``. The reference is the ground truth.
    """
    if n < 1 or m < 1 or cases < 1:
        raise ValueError("n, m, and cases must all be >= 1")
    if features_per_hypothesis < 1 or features_per_hypothesis > m:
        raise ValueError(
            f"features_per_hypothesis must lie in [1, m={m}], got {features_per_hypothesis}"
        )
    if findings_per_case < 1 or findings_per_case > features_per_hypothesis:
        raise ValueError(
            "findings_per_case must lie in [1, features_per_hypothesis="
            f"{features_per_hypothesis}], got {findings_per_case}"
        )
    if not (0.0 <= flip_noise < 0.5):
        raise ValueError(f"flip_noise must lie in [0, 0.5), got {flip_noise}")

    rng = random.Random(seed)
    features = tuple(Feature(id=f"f{i:03d}", name=f"Feature {i}", synonyms=()) for i in range(m))
    hypotheses = tuple(
        Hypothesis(
            id=f"h{j:03d}",
            name=f"Hypothesis {j}",
            feature_ids=frozenset(rng.sample([f.id for f in features], features_per_hypothesis)),
        )
        for j in range(n)
    )
    codex = Codex(
        version=f"synth-0.1.0-seed{seed}",
        domain_label="synthetic",
        features=features,
        hypotheses=hypotheses,
    )

    corpus: list[Case] = []
    for i in range(cases):
        truth = rng.choice(hypotheses)
        sampled = rng.sample(sorted(truth.feature_ids), findings_per_case)
        findings = tuple(
            (fid, FindingStatus.ABSENT if rng.random() < flip_noise else FindingStatus.PRESENT)
            for fid in sampled
        )
        corpus.append(Case(id=f"case-{i:04d}", findings=findings, reference=(truth.id,)))
    return codex, corpus
