"""Expert-curated codex: hypotheses, features, and their binary incidence.

The codex is the closed world every other module operates in. Hypotheses and
features are declared once, membership of a feature in a hypothesis signature
is strictly binary, and nothing downstream may emit an id that is not declared
here. Loaded codices are immutable; derived structures (evoking matrices,
observations, differentials) reference them read-only.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from typing import IO, Union

from .errors import (
    CodexParseError,
    CodexValidationError,
    UnknownHypothesisError,
)
from .serialization import dumps_canonical

ID_PATTERN = re.compile(r"^[a-z0-9._-]+$")

WEIGHTING_POLICIES = ("uniform", "idf")


@dataclass(frozen=True)
class Feature:
    """One observable feature, with display name and lookup synonyms."""

    id: str
    name: str
    synonyms: tuple[str, ...] = ()


@dataclass(frozen=True)
class Hypothesis:
    """One candidate explanation and its feature signature."""

    id: str
    name: str
    feature_ids: frozenset[str]


@dataclass(frozen=True)
class EvokingOverride:
    """Expert-tuned support weight for a single (hypothesis, feature) pair."""

    hypothesis_id: str
    feature_id: str
    support: float


@dataclass(frozen=True)
class Codex:
    """Versioned hypothesis/feature space with binary incidence.

    Feature declaration order is part of the codex identity: incidence and
    observation vectors are indexed in that order. Interchange formats always
    carry identifiers, never positions.
    """

    version: str
    domain_label: str
    features: tuple[Feature, ...]
    hypotheses: tuple[Hypothesis, ...]
    evoking_overrides: tuple[EvokingOverride, ...] = ()

    @property
    def n(self) -> int:
        return len(self.hypotheses)

    @property
    def m(self) -> int:
        return len(self.features)

    def feature_index(self) -> dict[str, int]:
        return {f.id: i for i, f in enumerate(self.features)}

    def feature_by_id(self, feature_id: str) -> Feature | None:
        for f in self.features:
            if f.id == feature_id:
                return f
        return None

    def hypothesis_by_id(self, hypothesis_id: str) -> Hypothesis | None:
        for h in self.hypotheses:
            if h.id == hypothesis_id:
                return h
        return None

    def has_feature(self, feature_id: str) -> bool:
        return any(f.id == feature_id for f in self.features)

    def has_hypothesis(self, hypothesis_id: str) -> bool:
        return any(h.id == hypothesis_id for h in self.hypotheses)


@dataclass(frozen=True)
class Violation:
    """One violated codex invariant, locatable by rule and offending id."""

    rule: str
    subject_id: str
    message: str

    def __str__(self) -> str:
        return f"[{self.rule}] {self.subject_id}: {self.message}"


@dataclass(frozen=True)
class EvokingMatrix:
    """Per-(hypothesis, feature) support weights plus the two penalty scalars.

    ``support`` is defined for a pair iff the feature belongs to the
    hypothesis signature, and every hypothesis row sums to 1. ``missing_factor``
    scales the penalty for confirmed-absent expected features;
    ``unexpected_penalty`` is the flat per-feature penalty for present
    features outside the signature.
    """

    support: dict[tuple[str, str], float]
    missing_factor: float
    unexpected_penalty: float
    policy_name: str

    def row(self, hypothesis_id: str) -> dict[str, float]:
        return {f: w for (h, f), w in self.support.items() if h == hypothesis_id}


# ---------------------------------------------------------------------------
# Parsing and serialization
# ---------------------------------------------------------------------------

_CODEX_KEYS = {"codex_version", "domain_label", "features", "hypotheses", "evoking_overrides"}
_FEATURE_KEYS = {"id", "name", "synonyms"}
_HYPOTHESIS_KEYS = {"id", "name", "features"}
_OVERRIDE_KEYS = {"hypothesis", "feature", "support"}


def _require_str(obj: dict, key: str, where: str) -> str:
    value = obj.get(key)
    if not isinstance(value, str):
        raise CodexParseError(f"{where}: key {key!r} must be a string")
    return value


def _reject_unknown_keys(obj: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise CodexParseError(f"{where}: unknown keys {unknown}")


def parse_codex(source: Union[str, bytes, IO]) -> Codex:
    """Parse codex text into a structure without checking invariants.

    Raises :class:`CodexParseError` on malformed JSON, wrong shapes, or
    unknown keys. The result may still violate structural invariants; use
    :func:`load_codex` to get a guaranteed-valid codex, or run
    :func:`validate_codex` to collect violations as data.
    """
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    try:
        raw = json.loads(source)
    except json.JSONDecodeError as exc:
        raise CodexParseError(f"malformed codex JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise CodexParseError("codex file must be a JSON object")
    _reject_unknown_keys(raw, _CODEX_KEYS, "codex")

    version = _require_str(raw, "codex_version", "codex")
    domain_label = _require_str(raw, "domain_label", "codex")

    features_raw = raw.get("features")
    hypotheses_raw = raw.get("hypotheses")
    if not isinstance(features_raw, list) or not isinstance(hypotheses_raw, list):
        raise CodexParseError("codex: 'features' and 'hypotheses' must be arrays")

    features = []
    for entry in features_raw:
        if not isinstance(entry, dict):
            raise CodexParseError("codex: feature entries must be objects")
        _reject_unknown_keys(entry, _FEATURE_KEYS, "feature")
        synonyms = entry.get("synonyms", [])
        if not isinstance(synonyms, list) or any(not isinstance(s, str) for s in synonyms):
            raise CodexParseError("feature: 'synonyms' must be an array of strings")
        features.append(
            Feature(
                id=_require_str(entry, "id", "feature"),
                name=_require_str(entry, "name", "feature"),
                synonyms=tuple(synonyms),
            )
        )

    hypotheses = []
    for entry in hypotheses_raw:
        if not isinstance(entry, dict):
            raise CodexParseError("codex: hypothesis entries must be objects")
        _reject_unknown_keys(entry, _HYPOTHESIS_KEYS, "hypothesis")
        feature_ids = entry.get("features")
        if not isinstance(feature_ids, list) or any(not isinstance(f, str) for f in feature_ids):
            raise CodexParseError("hypothesis: 'features' must be an array of strings")
        hypotheses.append(
            Hypothesis(
                id=_require_str(entry, "id", "hypothesis"),
                name=_require_str(entry, "name", "hypothesis"),
                feature_ids=frozenset(feature_ids),
            )
        )

    overrides = []
    for entry in raw.get("evoking_overrides", []):
        if not isinstance(entry, dict):
            raise CodexParseError("codex: override entries must be objects")
        _reject_unknown_keys(entry, _OVERRIDE_KEYS, "override")
        support = entry.get("support")
        if not isinstance(support, (int, float)) or isinstance(support, bool):
            raise CodexParseError("override: 'support' must be a number")
        overrides.append(
            EvokingOverride(
                hypothesis_id=_require_str(entry, "hypothesis", "override"),
                feature_id=_require_str(entry, "feature", "override"),
                support=float(support),
            )
        )

    return Codex(
        version=version,
        domain_label=domain_label,
        features=tuple(features),
        hypotheses=tuple(hypotheses),
        evoking_overrides=tuple(overrides),
    )


def load_codex(source: Union[str, bytes, IO]) -> Codex:
    """Parse and validate a codex file.

    Accepts raw JSON text/bytes or a readable stream. Raises
    :class:`CodexParseError` on malformed text or schema violations and
    :class:`CodexValidationError` (carrying the full violation list) when any
    structural invariant fails. A codex returned from here is always valid.
    """
    codex = parse_codex(source)
    violations = validate_codex(codex)
    if violations:
        raise CodexValidationError(violations)
    return codex


def serialize_codex(codex: Codex) -> str:
    """Canonical codex text: fixed key order, declaration order, 2-space indent."""
    doc: dict = {
        "codex_version": codex.version,
        "domain_label": codex.domain_label,
        "features": [
            {"id": f.id, "name": f.name, "synonyms": list(f.synonyms)} for f in codex.features
        ],
        "hypotheses": [
            {"id": h.id, "name": h.name, "features": _signature_in_declaration_order(codex, h)}
            for h in codex.hypotheses
        ],
    }
    if codex.evoking_overrides:
        doc["evoking_overrides"] = [
            {"hypothesis": o.hypothesis_id, "feature": o.feature_id, "support": o.support}
            for o in codex.evoking_overrides
        ]
    return dumps_canonical(doc)


def _signature_in_declaration_order(codex: Codex, hypothesis: Hypothesis) -> list[str]:
    return [f.id for f in codex.features if f.id in hypothesis.feature_ids]


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def validate_codex(codex: Codex) -> list[Violation]:
    """Check every structural invariant; an empty report means valid.

    Violations are data, not failures: the report is deterministic, ordered by
    rule name then offending id.
    """
    violations: list[Violation] = []

    if codex.n < 1 or codex.m < 1:
        violations.append(
            Violation("empty codex", codex.version or "<codex>",
                      f"codex needs at least 1 hypothesis and 1 feature (n={codex.n}, m={codex.m})")
        )

    seen_features: set[str] = set()
    for f in codex.features:
        if not f.id or not ID_PATTERN.match(f.id):
            violations.append(Violation("invalid id", f.id or "<empty>", "feature id must match ^[a-z0-9._-]+$"))
        if f.id in seen_features:
            violations.append(Violation("duplicate id", f.id, "feature id declared more than once"))
        seen_features.add(f.id)
        if not f.name:
            violations.append(Violation("empty name", f.id, "feature name must be nonempty"))
        lowered = [s.lower() for s in f.synonyms]
        if len(set(lowered)) != len(lowered):
            violations.append(Violation("duplicate synonym", f.id, "synonyms repeat case-insensitively"))

    seen_hypotheses: set[str] = set()
    declared = {f.id for f in codex.features}
    for h in codex.hypotheses:
        if not h.id or not ID_PATTERN.match(h.id):
            violations.append(Violation("invalid id", h.id or "<empty>", "hypothesis id must match ^[a-z0-9._-]+$"))
        if h.id in seen_hypotheses:
            violations.append(Violation("duplicate id", h.id, "hypothesis id declared more than once"))
        seen_hypotheses.add(h.id)
        if not h.name:
            violations.append(Violation("empty name", h.id, "hypothesis name must be nonempty"))
        if not h.feature_ids:
            violations.append(Violation("empty feature set", h.id, "hypothesis must reference at least one feature"))
        for fid in sorted(h.feature_ids):
            if fid not in declared:
                violations.append(
                    Violation("unresolved feature reference", h.id, f"feature {fid!r} is not declared")
                )

    hypothesis_ids = {h.id for h in codex.hypotheses}
    for o in codex.evoking_overrides:
        subject = f"{o.hypothesis_id}/{o.feature_id}"
        if o.hypothesis_id not in hypothesis_ids:
            violations.append(Violation("override off incidence", subject, "override names an unknown hypothesis"))
            continue
        h = codex.hypothesis_by_id(o.hypothesis_id)
        if h is None or o.feature_id not in h.feature_ids:
            violations.append(
                Violation("override off incidence", subject, "override targets a pair outside the incidence relation")
            )
        if not (0.0 < o.support <= 1.0):
            violations.append(
                Violation("override out of range", subject, f"support must lie in (0, 1], got {o.support}")
            )

    violations.sort(key=lambda v: (v.rule, v.subject_id))
    return violations


# ---------------------------------------------------------------------------
# Incidence queries
# ---------------------------------------------------------------------------


def feature_set(codex: Codex, hypothesis_id: str) -> frozenset[str]:
    """The feature signature of one hypothesis (never empty in a valid codex)."""
    h = codex.hypothesis_by_id(hypothesis_id)
    if h is None:
        raise UnknownHypothesisError(hypothesis_id)
    return h.feature_ids


def incidence_vector(codex: Codex, hypothesis_id: str) -> tuple[int, ...]:
    """Binary incidence in feature declaration order: 1 iff the feature is in the signature."""
    signature = feature_set(codex, hypothesis_id)
    return tuple(1 if f.id in signature else 0 for f in codex.features)


def document_frequency(codex: Codex, feature_id: str) -> int:
    """Number of hypotheses whose signature includes the feature."""
    return sum(1 for h in codex.hypotheses if feature_id in h.feature_ids)


# ---------------------------------------------------------------------------
# Evoking-weight derivation
# ---------------------------------------------------------------------------


def derive_evoking_matrix(
    codex: Codex,
    weighting: str = "uniform",
    missing_factor: float = 0.5,
    unexpected_penalty: float = 0.25,
    apply_overrides: bool = True,
) -> EvokingMatrix:
    """Derive per-hypothesis support weights under a named weighting policy.

    ``uniform`` spreads a hypothesis's unit mass evenly over its signature.
    ``idf`` weights each feature by ln(n / df) + 1 before normalizing, so
    features shared by many hypotheses evoke each one less than features
    specific to few. Expert overrides from the codex replace the derived values
    and the whole row is renormalized proportionally, preserving the row-sum
    invariant.
    """
    if weighting not in WEIGHTING_POLICIES:
        raise ValueError(f"unknown weighting policy: {weighting!r} (expected one of {WEIGHTING_POLICIES})")
    if not (0.0 <= missing_factor <= 1.0):
        raise ValueError(f"missing_factor must lie in [0, 1], got {missing_factor}")
    if unexpected_penalty < 0.0:
        raise ValueError(f"unexpected_penalty must be >= 0, got {unexpected_penalty}")

    support: dict[tuple[str, str], float] = {}
    n = codex.n
    for h in codex.hypotheses:
        signature = sorted(h.feature_ids)
        if weighting == "uniform":
            row = {f: 1.0 / len(signature) for f in signature}
        else:
            weights = {f: math.log(n / document_frequency(codex, f)) + 1.0 for f in signature}
            total = sum(weights.values())
            row = {f: w / total for f, w in weights.items()}
        if apply_overrides:
            for o in codex.evoking_overrides:
                if o.hypothesis_id == h.id:
                    row[o.feature_id] = o.support
            total = sum(row.values())
            row = {f: w / total for f, w in row.items()}
        for f, w in row.items():
            support[(h.id, f)] = w

    return EvokingMatrix(
        support=support,
        missing_factor=missing_factor,
        unexpected_penalty=unexpected_penalty,
        policy_name=weighting,
    )
