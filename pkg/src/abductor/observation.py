"""Tri-state observation vectors over the codex feature space.

A finding is present, confirmed absent, or unknown. Unknown is the default
and carries no evidence; the sparse mapping stores only non-unknown statuses.
The binary projection (present -> 1, everything else -> 0) is the strict
two-valued view used by the probabilistic baseline and by binary scoring mode.

All values here are immutable; every mutation returns a new vector.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping, Union

from .codex import Codex
from .errors import UnknownFeatureError, VersionMismatchError


class FindingStatus(enum.Enum):
    PRESENT = "present"
    ABSENT = "absent"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class ObservationVector:
    """Sparse feature-status assignment bound to one codex version."""

    codex_version: str
    statuses: Mapping[str, FindingStatus]

    def status(self, feature_id: str) -> FindingStatus:
        return self.statuses.get(feature_id, FindingStatus.UNKNOWN)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ObservationVector):
            return NotImplemented
        return self.codex_version == other.codex_version and dict(self.statuses) == dict(other.statuses)

    def __hash__(self) -> int:
        return hash((self.codex_version, frozenset(self.statuses.items())))


def new_observation(codex: Codex) -> ObservationVector:
    """All-unknown observation for the given codex."""
    return ObservationVector(codex_version=codex.version, statuses=MappingProxyType({}))


def assert_finding(
    codex: Codex,
    obs: ObservationVector,
    feature_id: str,
    status: FindingStatus,
) -> ObservationVector:
    """Set one feature's status, returning a new vector.

    Re-assertion overwrites (last writer wins); asserting UNKNOWN clears the
    finding. The input vector is never modified.
    """
    if not codex.has_feature(feature_id):
        raise UnknownFeatureError(feature_id)
    if obs.codex_version != codex.version:
        raise VersionMismatchError(
            f"observation built for codex {obs.codex_version!r}, not {codex.version!r}"
        )
    updated = dict(obs.statuses)
    if status is FindingStatus.UNKNOWN:
        updated.pop(feature_id, None)
    else:
        updated[feature_id] = status
    return ObservationVector(codex_version=obs.codex_version, statuses=MappingProxyType(updated))


def observation_from_findings(
    codex: Codex,
    findings: Iterable[tuple[str, Union[FindingStatus, str]]],
) -> ObservationVector:
    """Fold (feature id, status) pairs into a vector, validating each one."""
    obs = new_observation(codex)
    for feature_id, status in findings:
        if isinstance(status, str):
            status = FindingStatus(status)
        obs = assert_finding(codex, obs, feature_id, status)
    return obs


def binary_projection(codex: Codex, obs: ObservationVector) -> tuple[int, ...]:
    """Two-valued view in feature declaration order: 1 iff present.

    Confirmed absence and unknown both project to 0; the distinction exists
    only in the tri-state engine model.
    """
    if obs.codex_version != codex.version:
        raise VersionMismatchError(
            f"observation built for codex {obs.codex_version!r}, not {codex.version!r}"
        )
    return tuple(
        1 if obs.status(f.id) is FindingStatus.PRESENT else 0 for f in codex.features
    )


def merge_observations(
    a: ObservationVector, b: ObservationVector
) -> Union[ObservationVector, list[str]]:
    """Combine two vectors; unknown yields, present vs absent conflicts.

    Returns the merged vector, or the sorted list of conflicting feature ids
    when the two sides disagree on any feature. Conflicts are reported, never
    silently resolved.
    """
    if a.codex_version != b.codex_version:
        raise VersionMismatchError(
            f"cannot merge observations for codex {a.codex_version!r} and {b.codex_version!r}"
        )
    conflicts = sorted(
        f for f, s in a.statuses.items() if f in b.statuses and b.statuses[f] is not s
    )
    if conflicts:
        return conflicts
    merged = dict(a.statuses)
    merged.update(b.statuses)
    return ObservationVector(codex_version=a.codex_version, statuses=MappingProxyType(merged))
