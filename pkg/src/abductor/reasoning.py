"""Deterministic diagnostic core.

Every codex hypothesis is scored against the observation using
disease-conditioned evoking weights, through three structural evidence terms:

* support    — expected feature confirmed present: +support(h, f)
* missing    — expected feature confirmed absent:  -alpha * support(h, f)
* unexpected — present feature outside the signature: -beta per feature

Unknown features contribute nothing. The additive form keeps every score
traceable: a raw score is exactly the sum of its per-feature contributions,
and identical inputs always yield byte-identical ranked output.

A Bernoulli naive-Bayes ranker over the binary projection is included as the
probabilistic baseline for comparison runs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .codex import Codex, EvokingMatrix, derive_evoking_matrix
from .errors import UnknownHypothesisError, VersionMismatchError
from .observation import FindingStatus, ObservationVector, binary_projection
from .serialization import dumps_canonical, format_float

ABSENT_MODES = ("tri_state", "binary")


@dataclass(frozen=True)
class ScoringPolicy:
    """Complete parameterization of the scorer.

    ``weighting`` picks the support-weight derivation (uniform or idf),
    ``alpha`` scales the missing-expected penalty, ``beta`` is the flat
    unexpected-present penalty, and ``absent_mode`` selects the tri-state
    model or the strictly binary one (where unknown is treated as absent).
    """

    weighting: str = "uniform"
    alpha: float = 0.5
    beta: float = 0.25
    absent_mode: str = "tri_state"

    def __post_init__(self) -> None:
        if self.weighting not in ("uniform", "idf"):
            raise ValueError(f"unknown weighting policy: {self.weighting!r}")
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.beta < 0.0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if self.absent_mode not in ABSENT_MODES:
            raise ValueError(f"unknown absent_mode: {self.absent_mode!r}")

    def to_dict(self) -> dict:
        return {
            "weighting": self.weighting,
            "alpha": self.alpha,
            "beta": self.beta,
            "absent_mode": self.absent_mode,
        }


class ContributionTerm(enum.Enum):
    SUPPORT = "support"
    MISSING = "missing"
    UNEXPECTED = "unexpected"


@dataclass(frozen=True)
class Contribution:
    """One feature's signed effect on one hypothesis score."""

    feature_id: str
    term: ContributionTerm
    delta: float


@dataclass(frozen=True)
class DifferentialEntry:
    hypothesis_id: str
    raw_score: float
    confidence: float
    contributions: tuple[Contribution, ...]


@dataclass(frozen=True)
class Differential:
    """Ranked, weighted, traceable output over the full hypothesis space.

    Entries cover every codex hypothesis exactly once, ordered by raw score
    descending with lexicographic id as the tie-break.
    """

    codex_version: str
    policy: ScoringPolicy
    entries: tuple[DifferentialEntry, ...]

    def entry(self, hypothesis_id: str) -> DifferentialEntry:
        for e in self.entries:
            if e.hypothesis_id == hypothesis_id:
                return e
        raise UnknownHypothesisError(hypothesis_id)

    def rank_of(self, hypothesis_id: str) -> int:
        for i, e in enumerate(self.entries, start=1):
            if e.hypothesis_id == hypothesis_id:
                return i
        raise UnknownHypothesisError(hypothesis_id)


def matrix_for_policy(codex: Codex, policy: ScoringPolicy) -> EvokingMatrix:
    """Derive the evoking matrix a policy implies (overrides applied)."""
    return derive_evoking_matrix(
        codex,
        weighting=policy.weighting,
        missing_factor=policy.alpha,
        unexpected_penalty=policy.beta,
    )


def _check_version(codex: Codex, obs: ObservationVector) -> None:
    if obs.codex_version != codex.version:
        raise VersionMismatchError(
            f"observation built for codex {obs.codex_version!r}, not {codex.version!r}"
        )


def _effective_statuses(codex: Codex, obs: ObservationVector, policy: ScoringPolicy) -> dict[str, FindingStatus]:
    """Feature id -> status under the policy's absent mode.

    Binary mode collapses the tri-state vector through its binary projection
    first: 1 stays present, 0 becomes confirmed absent for every feature.
    """
    if policy.absent_mode == "binary":
        projection = binary_projection(codex, obs)
        return {
            f.id: FindingStatus.PRESENT if bit else FindingStatus.ABSENT
            for f, bit in zip(codex.features, projection)
        }
    return {f.id: obs.status(f.id) for f in codex.features}


def score_hypothesis(
    codex: Codex,
    hypothesis_id: str,
    obs: ObservationVector,
    matrix: EvokingMatrix,
    policy: ScoringPolicy,
) -> tuple[float, tuple[Contribution, ...]]:
    """Score one hypothesis; the raw score is the exact sum of the trace.

    Contributions appear in feature declaration order and only for features
    with a nonzero effect.
    """
    h = codex.hypothesis_by_id(hypothesis_id)
    if h is None:
        raise UnknownHypothesisError(hypothesis_id)
    _check_version(codex, obs)

    statuses = _effective_statuses(codex, obs, policy)
    contributions: list[Contribution] = []
    for f in codex.features:
        status = statuses[f.id]
        if status is FindingStatus.UNKNOWN:
            continue
        expected = f.id in h.feature_ids
        if expected:
            weight = matrix.support[(h.id, f.id)]
            if status is FindingStatus.PRESENT:
                contributions.append(Contribution(f.id, ContributionTerm.SUPPORT, weight))
            elif policy.alpha > 0.0:
                contributions.append(Contribution(f.id, ContributionTerm.MISSING, -policy.alpha * weight))
        elif status is FindingStatus.PRESENT and policy.beta > 0.0:
            contributions.append(Contribution(f.id, ContributionTerm.UNEXPECTED, -policy.beta))

    raw = math.fsum(c.delta for c in contributions)
    return raw, tuple(contributions)


def confidence_normalize(scores: list[float]) -> list[float]:
    """Min-max rescaling to [0, 1]; an all-tie input gets the flat 1/n.

    The output is a confidence factor, not a probability: any strictly
    monotone transform preserves the ranking, and min-max is the most
    auditable choice.
    """
    if not scores:
        raise ValueError("confidence_normalize requires at least one score")
    lo, hi = min(scores), max(scores)
    if hi > lo:
        return [(s - lo) / (hi - lo) for s in scores]
    return [1.0 / len(scores)] * len(scores)


def rank_differential(
    codex: Codex,
    obs: ObservationVector,
    matrix: EvokingMatrix,
    policy: ScoringPolicy,
) -> Differential:
    """Score and rank the entire hypothesis space.

    Deterministic by construction: raw-score descending, ties broken by
    lexicographic hypothesis id, confidences from min-max normalization.
    """
    _check_version(codex, obs)
    scored = [
        (h.id, *score_hypothesis(codex, h.id, obs, matrix, policy)) for h in codex.hypotheses
    ]
    scored.sort(key=lambda item: (-item[1], item[0]))
    confidences = confidence_normalize([raw for _, raw, _ in scored])
    entries = tuple(
        DifferentialEntry(hypothesis_id=hid, raw_score=raw, confidence=conf, contributions=contribs)
        for (hid, raw, contribs), conf in zip(scored, confidences)
    )
    return Differential(codex_version=codex.version, policy=policy, entries=entries)


# ---------------------------------------------------------------------------
# Bernoulli naive-Bayes baseline
# ---------------------------------------------------------------------------


def nb_rank(
    codex: Codex,
    obs: ObservationVector,
    epsilon: float = 0.01,
    priors: dict[str, float] | None = None,
) -> Differential:
    """Rank by Bernoulli naive-Bayes posterior over the binary projection.

    Each hypothesis is a Bernoulli product model: a feature in the signature
    is present with probability 1 - epsilon, any other with probability
    epsilon. Likelihoods are accumulated in log space; posteriors are the
    entry confidences and the ordering key (posterior descending, ties by id).

    The contribution trace is the per-feature log-likelihood ratio against
    the off-signature baseline, so raw scores stay exactly the sum of their
    contributions; with uniform priors that ordering coincides with the
    posterior ordering.
    """
    if not (0.0 < epsilon < 0.5):
        raise ValueError(f"epsilon must lie in (0, 0.5), got {epsilon}")
    _check_version(codex, obs)
    if priors is None:
        prior_of = {h.id: 1.0 / codex.n for h in codex.hypotheses}
    else:
        missing = [h.id for h in codex.hypotheses if h.id not in priors]
        if missing:
            raise ValueError(f"priors missing hypotheses: {missing}")
        total = math.fsum(priors[h.id] for h in codex.hypotheses)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"priors must sum to 1, got {total}")
        prior_of = {h.id: priors[h.id] for h in codex.hypotheses}

    x = binary_projection(codex, obs)
    log_in, log_out = math.log(1.0 - epsilon), math.log(epsilon)
    support_delta = log_in - log_out          # expected feature present
    missing_delta = log_out - log_in          # expected feature absent

    log_joint: dict[str, float] = {}
    traces: dict[str, tuple[Contribution, ...]] = {}
    raws: dict[str, float] = {}
    for h in codex.hypotheses:
        loglik = 0.0
        contributions: list[Contribution] = []
        for f, bit in zip(codex.features, x):
            expected = f.id in h.feature_ids
            theta_log = (log_in if bit else log_out) if expected else (log_out if bit else log_in)
            loglik += theta_log
            if expected and bit:
                contributions.append(Contribution(f.id, ContributionTerm.SUPPORT, support_delta))
            elif expected and not bit:
                contributions.append(Contribution(f.id, ContributionTerm.MISSING, missing_delta))
        log_joint[h.id] = math.log(prior_of[h.id]) + loglik
        traces[h.id] = tuple(contributions)
        raws[h.id] = math.fsum(c.delta for c in contributions)

    peak = max(log_joint.values())
    unnormalized = {hid: math.exp(v - peak) for hid, v in log_joint.items()}
    z = math.fsum(unnormalized.values())
    posteriors = {hid: u / z for hid, u in unnormalized.items()}

    order = sorted(codex.hypotheses, key=lambda h: (-posteriors[h.id], h.id))
    entries = tuple(
        DifferentialEntry(
            hypothesis_id=h.id,
            raw_score=raws[h.id],
            confidence=posteriors[h.id],
            contributions=traces[h.id],
        )
        for h in order
    )
    return Differential(codex_version=codex.version, policy=ScoringPolicy(), entries=entries)


# ---------------------------------------------------------------------------
# Serialization and templated rendering
# ---------------------------------------------------------------------------


def differential_to_dict(d: Differential, top_k: int | None = None) -> dict:
    entries = d.entries if top_k is None else d.entries[: max(top_k, 0)]
    return {
        "codex_version": d.codex_version,
        "policy": d.policy.to_dict(),
        "entries": [
            {
                "hypothesis": e.hypothesis_id,
                "raw_score": e.raw_score,
                "confidence": e.confidence,
                "contributions": [
                    {"feature": c.feature_id, "term": c.term.value, "delta": c.delta}
                    for c in e.contributions
                ],
            }
            for e in entries
        ],
    }


def serialize_differential(d: Differential, top_k: int | None = None) -> str:
    """Canonical JSON with entries in rank order; floats at 9 significant digits."""
    return dumps_canonical(differential_to_dict(d, top_k=top_k))


def _sorted_by_magnitude(contributions: tuple[Contribution, ...]) -> list[Contribution]:
    return sorted(contributions, key=lambda c: (-abs(c.delta), c.feature_id))


def _display_name(codex: Codex, feature_id: str) -> str:
    f = codex.feature_by_id(feature_id)
    return f.name if f is not None else feature_id


def _render_entry(codex: Codex, rank: int, e: DifferentialEntry) -> list[str]:
    h = codex.hypothesis_by_id(e.hypothesis_id)
    title = h.name if h is not None else e.hypothesis_id
    lines = [
        f"{rank}. {title} ({e.hypothesis_id}) — confidence {format_float(e.confidence)},"
        f" raw score {format_float(e.raw_score)}"
    ]
    supports = [c for c in _sorted_by_magnitude(e.contributions) if c.delta > 0]
    against = [c for c in _sorted_by_magnitude(e.contributions) if c.delta < 0]
    if supports:
        parts = ", ".join(
            f"{_display_name(codex, c.feature_id)} ({c.feature_id}) +{format_float(c.delta)}"
            for c in supports
        )
        lines.append(f"   for: {parts}")
    if against:
        parts = ", ".join(
            f"{_display_name(codex, c.feature_id)} ({c.feature_id}) {format_float(c.delta)}"
            f" [{c.term.value}]"
            for c in against
        )
        lines.append(f"   against: {parts}")
    if not supports and not against:
        lines.append("   no findings bear on this hypothesis")
    return lines


def render_explanation(d: Differential, codex: Codex, top_k: int) -> str:
    """Deterministic, non-generative rendering of the top-ranked entries.

    Only hypotheses inside the rendered slice and features inside their
    contribution traces are ever named; the template cannot introduce
    anything outside the differential.
    """
    if top_k < 1:
        raise ValueError(f"top_k must be >= 1, got {top_k}")
    count = min(top_k, len(d.entries))
    lines = [f"Top {count} of {len(d.entries)} hypotheses (codex {d.codex_version}):"]
    for rank, e in enumerate(d.entries[:count], start=1):
        lines.extend(_render_entry(codex, rank, e))
    return "\n".join(lines) + "\n"


def render_hypothesis_explanation(d: Differential, codex: Codex, hypothesis_id: str) -> str:
    """Single-hypothesis view of the same template."""
    rank = d.rank_of(hypothesis_id)
    lines = [f"Hypothesis {hypothesis_id} at rank {rank} of {len(d.entries)} (codex {d.codex_version}):"]
    lines.extend(_render_entry(codex, rank, d.entry(hypothesis_id)))
    return "\n".join(lines) + "\n"
