"""Free text to candidate feature mentions.

The default extractor is a pure lexicon matcher over codex feature names and
synonyms: case-insensitive, longest match wins at each position, mentions are
non-overlapping and scanned left to right. A negation cue earlier in the same
comma/period-delimited clause flips the mention to negated.

The external mode is a bounded remote-service slot for model-based
extraction. Its wire contract can only carry surface strings and spans: any
response element with extra fields (a "diagnosis" key, for instance) is
rejected outright, so the remote side can never inject hypotheses.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

import httpx

from .codex import Codex
from .errors import ExtractorContractError, ExtractorTimeoutError

DEFAULT_NEGATION_CUES = ("no", "denies", "without", "not")

ENV_EXTRACTOR_URL = "ABDUCTOR_EXTRACTOR_URL"


class Polarity(enum.Enum):
    AFFIRMED = "affirmed"
    NEGATED = "negated"


@dataclass(frozen=True)
class Mention:
    """A matched span of the input text; never carries a concept id."""

    surface: str
    start: int
    end: int
    polarity: Polarity


@dataclass(frozen=True)
class ExtractorConfig:
    mode: str = "lexicon"
    endpoint: str | None = None
    timeout: float = 5.0
    negation_cues: tuple[str, ...] = DEFAULT_NEGATION_CUES

    def __post_init__(self) -> None:
        if self.mode not in ("lexicon", "external"):
            raise ValueError(f"unknown extractor mode: {self.mode!r}")
        if self.mode == "external" and not self.endpoint:
            raise ValueError("external extractor mode requires an endpoint")
        if self.mode == "lexicon" and self.endpoint:
            raise ValueError("lexicon extractor mode takes no endpoint")
        if self.timeout <= 0:
            raise ValueError(f"timeout must be > 0, got {self.timeout}")


def _lexicon_terms(codex: Codex) -> list[str]:
    """All feature names and synonyms, lowercased, longest first."""
    terms = {f.name.lower() for f in codex.features}
    for f in codex.features:
        terms.update(s.lower() for s in f.synonyms)
    terms.discard("")
    return sorted(terms, key=lambda t: (-len(t), t))


def _clause_start(text: str, position: int) -> int:
    for i in range(position - 1, -1, -1):
        if text[i] in ",.":
            return i + 1
    return 0


def extract_mentions(text: str, codex: Codex, config: ExtractorConfig | None = None) -> list[Mention]:
    """Deterministic lexicon extraction; a pure function of its inputs."""
    if config is None:
        config = ExtractorConfig()
    if config.mode != "lexicon":
        raise ValueError("extract_mentions requires a lexicon-mode config")
    if not text:
        return []

    lowered = text.lower()
    terms = _lexicon_terms(codex)
    cue_pattern = re.compile(
        r"\b(?:" + "|".join(re.escape(c.lower()) for c in config.negation_cues) + r")\b"
    ) if config.negation_cues else None

    spans: list[tuple[int, int]] = []
    i = 0
    while i < len(lowered):
        matched = None
        for term in terms:  # longest first
            if lowered.startswith(term, i):
                matched = term
                break
        if matched is None:
            i += 1
            continue
        spans.append((i, i + len(matched)))
        i += len(matched)

    mentions: list[Mention] = []
    for start, end in spans:
        clause_from = _clause_start(lowered, start)
        negated = bool(cue_pattern and cue_pattern.search(lowered, clause_from, start))
        mentions.append(
            Mention(
                surface=text[start:end],
                start=start,
                end=end,
                polarity=Polarity.NEGATED if negated else Polarity.AFFIRMED,
            )
        )
    return mentions


# ---------------------------------------------------------------------------
# External extractor client
# ---------------------------------------------------------------------------

_MENTION_KEYS = {"surface", "start", "end", "polarity"}


def _parse_wire_mention(entry: object, text: str) -> Mention:
    if not isinstance(entry, dict):
        raise ExtractorContractError("mention entries must be objects")
    extra = sorted(set(entry) - _MENTION_KEYS)
    if extra:
        raise ExtractorContractError(
            f"mention entry carries non-mention fields {extra}; "
            "the extractor may only emit surfaces and spans"
        )
    missing = sorted(_MENTION_KEYS - set(entry))
    if missing:
        raise ExtractorContractError(f"mention entry missing fields {missing}")
    surface, start, end, polarity = entry["surface"], entry["start"], entry["end"], entry["polarity"]
    if not isinstance(surface, str) or not isinstance(start, int) or not isinstance(end, int):
        raise ExtractorContractError("mention fields have wrong types")
    if polarity not in ("affirmed", "negated"):
        raise ExtractorContractError(f"unknown polarity: {polarity!r}")
    if not (0 <= start < end <= len(text)):
        raise ExtractorContractError(f"span ({start}, {end}) outside the input text")
    if text[start:end] != surface:
        raise ExtractorContractError("surface does not equal the text slice at its span")
    return Mention(surface=surface, start=start, end=end, polarity=Polarity(polarity))


def fetch_external_mentions(
    text: str,
    config: ExtractorConfig,
    client: httpx.Client | None = None,
) -> list[Mention]:
    """Ask the configured external service for mentions.

    The response is validated strictly; on timeout no partial results are
    returned. ``client`` exists for injection in tests.
    """
    if config.mode != "external":
        raise ValueError("fetch_external_mentions requires an external-mode config")
    owns_client = client is None
    if owns_client:
        client = httpx.Client(timeout=config.timeout)
    try:
        try:
            response = client.post(config.endpoint, json={"text": text}, timeout=config.timeout)
        except httpx.TimeoutException as exc:
            raise ExtractorTimeoutError(
                f"extractor at {config.endpoint} timed out after {config.timeout}s"
            ) from exc
        except httpx.HTTPError as exc:
            raise ExtractorContractError(f"extractor request failed: {exc}") from exc
        if response.status_code != 200:
            raise ExtractorContractError(
                f"extractor answered HTTP {response.status_code}"
            )
        try:
            payload = response.json()
        except ValueError as exc:
            raise ExtractorContractError("extractor response is not JSON") from exc
    finally:
        if owns_client:
            client.close()

    if not isinstance(payload, dict) or set(payload) != {"mentions"} or not isinstance(payload["mentions"], list):
        raise ExtractorContractError('extractor response must be {"mentions": [...]}')
    mentions = [_parse_wire_mention(entry, text) for entry in payload["mentions"]]
    mentions.sort(key=lambda mention: mention.start)
    for previous, current in zip(mentions, mentions[1:]):
        if current.start < previous.end:
            raise ExtractorContractError("extractor returned overlapping mentions")
    return mentions
