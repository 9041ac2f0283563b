from __future__ import annotations

import itertools
import random

import pytest

from abductor.codex import Codex, derive_evoking_matrix, load_codex
from abductor.errors import UnknownHypothesisError, VersionMismatchError
from abductor.observation import (
    FindingStatus,
    ObservationVector,
    assert_finding,
    new_observation,
    observation_from_findings,
)
from abductor.reasoning import (
    ContributionTerm,
    Differential,
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

from conftest import random_codex, random_observation
from oracles import nb_posteriors_oracle, score_oracle

UNIFORM = ScoringPolicy(weighting="uniform", alpha=0.5, beta=0.25)

# frozen hand-enumeration values for the T1 scenario
T1_EXPECTED_SCORES = {"h1": 1.0, "h2": 0.25, "h3": -1.0}
T1_EXPECTED_CONFIDENCES = [1.0, 0.625, 0.0]


def test_t1_scores_match_hand_enumeration(t1: Codex, t1_obs: ObservationVector) -> None:
    matrix = matrix_for_policy(t1, UNIFORM)
    for hid, expected in T1_EXPECTED_SCORES.items():
        raw, _ = score_hypothesis(t1, hid, t1_obs, matrix, UNIFORM)
        assert raw == pytest.approx(expected, abs=1e-9)
        assert raw == pytest.approx(
            score_oracle(t1, hid, t1_obs, "uniform", 0.5, 0.25), abs=1e-12
        )


def test_t1_contribution_traces(t1: Codex, t1_obs: ObservationVector) -> None:
    matrix = matrix_for_policy(t1, UNIFORM)
    _, h2_contribs = score_hypothesis(t1, "h2", t1_obs, matrix, UNIFORM)
    by_feature = {c.feature_id: c for c in h2_contribs}
    assert by_feature["f2"].delta == pytest.approx(0.5)
    assert by_feature["f2"].term is ContributionTerm.SUPPORT
    assert by_feature["f1"].delta == pytest.approx(-0.25)
    assert by_feature["f1"].term is ContributionTerm.UNEXPECTED
    assert set(by_feature) == {"f1", "f2"}

    _, h3_contribs = score_hypothesis(t1, "h3", t1_obs, matrix, UNIFORM)
    terms = {(c.feature_id, c.term) for c in h3_contribs}
    assert terms == {
        ("f4", ContributionTerm.MISSING),
        ("f1", ContributionTerm.UNEXPECTED),
        ("f2", ContributionTerm.UNEXPECTED),
    }


def test_contribution_sign_convention(t1: Codex, t1_obs: ObservationVector) -> None:
    matrix = matrix_for_policy(t1, UNIFORM)
    for h in t1.hypotheses:
        _, contribs = score_hypothesis(t1, h.id, t1_obs, matrix, UNIFORM)
        for c in contribs:
            if c.term is ContributionTerm.SUPPORT:
                assert c.delta > 0
            else:
                assert c.delta < 0


def test_zero_penalty_policies_emit_no_zero_deltas(t1: Codex, t1_obs: ObservationVector) -> None:
    policy = ScoringPolicy(weighting="uniform", alpha=0.0, beta=0.0)
    matrix = matrix_for_policy(t1, policy)
    for h in t1.hypotheses:
        _, contribs = score_hypothesis(t1, h.id, t1_obs, matrix, policy)
        assert all(c.delta != 0 for c in contribs)
        assert all(c.term is ContributionTerm.SUPPORT for c in contribs)


def test_score_errors(t1: Codex, t1_obs: ObservationVector) -> None:
    matrix = matrix_for_policy(t1, UNIFORM)
    with pytest.raises(UnknownHypothesisError):
        score_hypothesis(t1, "h9", t1_obs, matrix, UNIFORM)
    stale = ObservationVector(codex_version="other", statuses={})
    with pytest.raises(VersionMismatchError):
        score_hypothesis(t1, "h1", stale, matrix, UNIFORM)


def test_binary_mode_treats_unprojected_as_absent(t1: Codex) -> None:
    obs = observation_from_findings(t1, [("f1", "present")])
    tri = ScoringPolicy(absent_mode="tri_state")
    binary = ScoringPolicy(absent_mode="binary")
    matrix = matrix_for_policy(t1, tri)
    raw_tri, _ = score_hypothesis(t1, "h1", obs, matrix, tri)
    raw_bin, _ = score_hypothesis(t1, "h1", obs, matrix, binary)
    assert raw_tri == pytest.approx(0.5)
    assert raw_bin == pytest.approx(0.5 - 0.5 * 0.5)  # f2 now counts as missing
    assert raw_bin == pytest.approx(
        score_oracle(t1, "h1", obs, "uniform", 0.5, 0.25, absent_mode="binary"), abs=1e-12
    )


def test_rank_differential_t1(t1: Codex, t1_obs: ObservationVector) -> None:
    d = rank_differential(t1, t1_obs, matrix_for_policy(t1, UNIFORM), UNIFORM)
    assert [e.hypothesis_id for e in d.entries] == ["h1", "h2", "h3"]
    assert [e.raw_score for e in d.entries] == pytest.approx([1.0, 0.25, -1.0])
    assert [e.confidence for e in d.entries] == pytest.approx(T1_EXPECTED_CONFIDENCES)


def test_single_hypothesis_codex_always_rank_one() -> None:
    codex = load_codex(
        '{"codex_version": "0.1", "domain_label": "d",'
        ' "features": [{"id": "f1", "name": "F", "synonyms": []}],'
        ' "hypotheses": [{"id": "h1", "name": "H", "features": ["f1"]}]}'
    )
    obs = observation_from_findings(codex, [("f1", "absent")])
    d = rank_differential(codex, obs, matrix_for_policy(codex, UNIFORM), UNIFORM)
    assert [e.hypothesis_id for e in d.entries] == ["h1"]
    assert d.entries[0].confidence == pytest.approx(1.0)


def test_all_unknown_is_the_degenerate_tie(t1: Codex) -> None:
    d = rank_differential(t1, new_observation(t1), matrix_for_policy(t1, UNIFORM), UNIFORM)
    assert [e.hypothesis_id for e in d.entries] == ["h1", "h2", "h3"]
    assert all(e.raw_score == 0.0 for e in d.entries)
    assert all(e.confidence == pytest.approx(1 / 3) for e in d.entries)


def test_confidence_normalize_examples() -> None:
    assert confidence_normalize([1.0, 0.25, -1.0]) == pytest.approx([1.0, 0.625, 0.0])
    assert confidence_normalize([0.0, 0.0, 0.0]) == pytest.approx([1 / 3] * 3)
    assert confidence_normalize([5.0]) == pytest.approx([1.0])
    with pytest.raises(ValueError):
        confidence_normalize([])


def test_confidence_normalize_is_monotone() -> None:
    rng = random.Random(7)
    scores = [rng.uniform(-5, 5) for _ in range(50)]
    confidences = confidence_normalize(scores)
    for (s1, c1), (s2, c2) in itertools.combinations(zip(scores, confidences), 2):
        if s1 > s2:
            assert c1 > c2
        elif s1 < s2:
            assert c1 < c2
        else:
            assert c1 == c2


def test_support_monotonicity_and_absence_penalty() -> None:
    rng = random.Random(20240518)
    for _ in range(50):
        codex = random_codex(rng, n=rng.randint(2, 6), m=rng.randint(2, 8))
        policy = ScoringPolicy(
            weighting=rng.choice(["uniform", "idf"]),
            alpha=rng.uniform(0.05, 1.0),
            beta=rng.uniform(0.0, 1.0),
        )
        matrix = matrix_for_policy(codex, policy)
        obs = random_observation(rng, codex)
        unknown_features = [
            f.id for f in codex.features if obs.status(f.id) is FindingStatus.UNKNOWN
        ]
        if not unknown_features:
            continue
        flip = rng.choice(unknown_features)
        before = {
            h.id: score_hypothesis(codex, h.id, obs, matrix, policy)[0] for h in codex.hypotheses
        }

        as_present = assert_finding(codex, obs, flip, FindingStatus.PRESENT)
        for h in codex.hypotheses:
            after, _ = score_hypothesis(codex, h.id, as_present, matrix, policy)
            if flip in h.feature_ids:
                assert after - before[h.id] == pytest.approx(matrix.support[(h.id, flip)], abs=1e-9)
            else:
                assert after - before[h.id] == pytest.approx(-policy.beta, abs=1e-9)

        as_absent = assert_finding(codex, obs, flip, FindingStatus.ABSENT)
        for h in codex.hypotheses:
            after, _ = score_hypothesis(codex, h.id, as_absent, matrix, policy)
            if flip in h.feature_ids:
                assert after - before[h.id] == pytest.approx(
                    -policy.alpha * matrix.support[(h.id, flip)], abs=1e-9
                )
            else:
                assert after == pytest.approx(before[h.id], abs=1e-9)


def test_trace_completeness_on_random_runs() -> None:
    rng = random.Random(11)
    for _ in range(30):
        codex = random_codex(rng, n=rng.randint(1, 6), m=rng.randint(1, 8))
        policy = ScoringPolicy(weighting=rng.choice(["uniform", "idf"]))
        matrix = matrix_for_policy(codex, policy)
        d = rank_differential(codex, random_observation(rng, codex), matrix, policy)
        for e in d.entries:
            assert e.raw_score == pytest.approx(sum(c.delta for c in e.contributions), abs=1e-9)


def test_rank_invariance_under_confidence_normalization() -> None:
    rng = random.Random(12)
    for _ in range(20):
        codex = random_codex(rng, n=rng.randint(2, 8), m=rng.randint(2, 8))
        matrix = matrix_for_policy(codex, UNIFORM)
        d = rank_differential(codex, random_observation(rng, codex), matrix, UNIFORM)
        raws = [e.raw_score for e in d.entries]
        confs = [e.confidence for e in d.entries]
        assert raws == sorted(raws, reverse=True)
        assert confs == sorted(confs, reverse=True)


def test_permutation_equivariance(t1: Codex, t1_obs: ObservationVector) -> None:
    reversed_features = Codex(
        version=t1.version,
        domain_label=t1.domain_label,
        features=tuple(reversed(t1.features)),
        hypotheses=t1.hypotheses,
    )
    d1 = rank_differential(t1, t1_obs, matrix_for_policy(t1, UNIFORM), UNIFORM)
    obs2 = ObservationVector(codex_version=t1.version, statuses=dict(t1_obs.statuses))
    d2 = rank_differential(reversed_features, obs2, matrix_for_policy(reversed_features, UNIFORM), UNIFORM)
    assert [e.hypothesis_id for e in d1.entries] == [e.hypothesis_id for e in d2.entries]
    assert [e.raw_score for e in d1.entries] == pytest.approx([e.raw_score for e in d2.entries])


def test_differential_serialization_is_deterministic(t1: Codex, t1_obs: ObservationVector) -> None:
    matrix = matrix_for_policy(t1, UNIFORM)
    texts = {
        serialize_differential(rank_differential(t1, t1_obs, matrix, UNIFORM)) for _ in range(25)
    }
    assert len(texts) == 1
    text = texts.pop()
    assert '"hypothesis": "h1"' in text
    assert '"raw_score": 1' in text


# ---------------------------------------------------------------------------
# naive-Bayes baseline
# ---------------------------------------------------------------------------


NB_TOY = (
    '{"codex_version": "nb-0.1", "domain_label": "d",'
    ' "features": [{"id": "f1", "name": "F1", "synonyms": []},'
    ' {"id": "f2", "name": "F2", "synonyms": []}],'
    ' "hypotheses": [{"id": "h1", "name": "H1", "features": ["f1"]},'
    ' {"id": "h2", "name": "H2", "features": ["f2"]}]}'
)


def test_nb_hand_example() -> None:
    codex = load_codex(NB_TOY)
    obs = observation_from_findings(codex, [("f1", "present")])
    d = nb_rank(codex, obs, epsilon=0.01)
    assert [e.hypothesis_id for e in d.entries] == ["h1", "h2"]
    assert d.entries[0].confidence == pytest.approx(0.9801 / (0.9801 + 0.0001), abs=1e-9)
    assert d.entries[1].confidence == pytest.approx(0.0001 / (0.9801 + 0.0001), abs=1e-9)


def test_nb_single_hypothesis_posterior_is_one() -> None:
    codex = load_codex(
        '{"codex_version": "0.1", "domain_label": "d",'
        ' "features": [{"id": "f1", "name": "F", "synonyms": []}],'
        ' "hypotheses": [{"id": "h1", "name": "H", "features": ["f1"]}]}'
    )
    for findings in ([], [("f1", "present")]):
        d = nb_rank(codex, observation_from_findings(codex, findings), epsilon=0.1)
        assert d.entries[0].confidence == pytest.approx(1.0)


def test_nb_posteriors_sum_to_one_and_match_oracle() -> None:
    rng = random.Random(13)
    for _ in range(8):
        codex = random_codex(rng, n=rng.randint(1, 6), m=rng.randint(1, 6))
        epsilon = rng.uniform(0.01, 0.45)
        for bits in itertools.product((0, 1), repeat=codex.m):
            findings = [
                (f.id, FindingStatus.PRESENT) for f, bit in zip(codex.features, bits) if bit
            ]
            obs = observation_from_findings(codex, findings)
            d = nb_rank(codex, obs, epsilon=epsilon)
            posteriors = {e.hypothesis_id: e.confidence for e in d.entries}
            assert sum(posteriors.values()) == pytest.approx(1.0, abs=1e-9)
            oracle = nb_posteriors_oracle(codex, bits, epsilon)
            for hid, expected in oracle.items():
                assert posteriors[hid] == pytest.approx(expected, abs=1e-9)


def test_nb_trace_sums_to_raw_score() -> None:
    codex = load_codex(NB_TOY)
    obs = observation_from_findings(codex, [("f1", "present"), ("f2", "absent")])
    d = nb_rank(codex, obs, epsilon=0.05)
    for e in d.entries:
        assert e.raw_score == pytest.approx(sum(c.delta for c in e.contributions), abs=1e-9)
        for c in e.contributions:
            if c.term is ContributionTerm.SUPPORT:
                assert c.delta > 0
            else:
                assert c.delta < 0


def test_nb_respects_priors() -> None:
    codex = load_codex(NB_TOY)
    obs = new_observation(codex)
    d = nb_rank(codex, obs, epsilon=0.01, priors={"h1": 0.2, "h2": 0.8})
    assert d.entries[0].hypothesis_id == "h2"
    assert d.entries[0].confidence == pytest.approx(0.8, abs=1e-9)


def test_nb_parameter_validation() -> None:
    codex = load_codex(NB_TOY)
    obs = new_observation(codex)
    with pytest.raises(ValueError):
        nb_rank(codex, obs, epsilon=0.5)
    with pytest.raises(ValueError):
        nb_rank(codex, obs, epsilon=0.0)
    with pytest.raises(ValueError):
        nb_rank(codex, obs, priors={"h1": 0.9, "h2": 0.2})
    with pytest.raises(ValueError):
        nb_rank(codex, obs, priors={"h1": 1.0})


# ---------------------------------------------------------------------------
# templated rendering
# ---------------------------------------------------------------------------


def _t1_differential(t1: Codex, t1_obs: ObservationVector) -> Differential:
    return rank_differential(t1, t1_obs, matrix_for_policy(t1, UNIFORM), UNIFORM)


def test_render_top_one_names_only_the_leader(t1: Codex, t1_obs: ObservationVector) -> None:
    text = render_explanation(_t1_differential(t1, t1_obs), t1, top_k=1)
    assert "h1" in text
    assert "Headache (f1) +0.5" in text
    assert "Fever (f2) +0.5" in text
    assert "h3" not in text
    assert "h2" not in text


def test_render_clamps_top_k(t1: Codex, t1_obs: ObservationVector) -> None:
    text = render_explanation(_t1_differential(t1, t1_obs), t1, top_k=99)
    assert "h1" in text and "h2" in text and "h3" in text


def test_render_is_byte_identical(t1: Codex, t1_obs: ObservationVector) -> None:
    d = _t1_differential(t1, t1_obs)
    assert render_explanation(d, t1, top_k=2) == render_explanation(d, t1, top_k=2)
    with pytest.raises(ValueError):
        render_explanation(d, t1, top_k=0)


def test_render_single_hypothesis_view(t1: Codex, t1_obs: ObservationVector) -> None:
    d = _t1_differential(t1, t1_obs)
    text = render_hypothesis_explanation(d, t1, "h2")
    assert "rank 2 of 3" in text
    assert "Fever (f2) +0.5" in text
    assert "Headache (f1) -0.25 [unexpected]" in text
    assert "h1" not in text and "h3" not in text
