"""Dated memory sections and keyword-rule extraction of proxy events.

Output proxies mark completion or delivery of a substantive artifact;
governance proxies mark verification, correction, protocol, safety, or
failure activity. Both come from the same dated memory sections via
word-boundary keyword families with exclusion predicates.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Iterable, Literal, Mapping, Sequence

ProxyKind = Literal["output", "governance"]
Granularity = Literal["section", "sentence"]

GOVERNANCE_CLASSES: tuple[str, ...] = (
    "verification",
    "correction",
    "protocol",
    "safety",
    "failure",
)

# A dated heading is a markdown heading carrying an ISO date; group 1 must
# capture the date.
DEFAULT_HEADING_PATTERN = r"^#{1,6}\s.*?(\d{4}-\d{2}-\d{2})"

_SENTENCE_BOUNDARY = re.compile(r"(?<=[.!?])\s+")
_WHITESPACE_RUN = re.compile(r"\s+")
_BULLET_PREFIX = re.compile(r"^[\s>*+-]+")
_ARTIFACT_TOKEN = re.compile(r"`([^`]+)`|\b([\w./-]+\.(?:md|py|ts|js|pdf|csv|html|tex|ipynb|docx|pptx|svg))\b")

REPEAT_BYPASS_TERMS: tuple[str, ...] = (
    "new version",
    "v2",
    "v3",
    "revised",
    "rewrote",
    "reworked",
    "major update",
)


@dataclass(frozen=True)
class DatedSection:
    date: date
    heading: str
    body: str
    source_path: str


@dataclass(frozen=True)
class ProxyEvent:
    date: date
    kind: ProxyKind
    matched_terms: tuple[str, ...]
    section_ref: tuple[str, str]  # (source_path, heading)
    governance_class: str | None = None
    family: str | None = None

    def to_mapping(self) -> dict:
        return {
            "date": self.date.isoformat(),
            "kind": self.kind,
            "governance_class": self.governance_class,
            "family": self.family,
            "matched_terms": list(self.matched_terms),
            "section_ref": list(self.section_ref),
        }

    @classmethod
    def from_mapping(cls, data: Mapping) -> "ProxyEvent":
        return cls(
            date=date.fromisoformat(data["date"]),
            kind=data["kind"],
            matched_terms=tuple(data["matched_terms"]),
            section_ref=(data["section_ref"][0], data["section_ref"][1]),
            governance_class=data.get("governance_class"),
            family=data.get("family"),
        )


@dataclass(frozen=True)
class KeywordRuleSet:
    """Named keyword families, optional per-family classes, and exclusions.

    Matching is word-boundary over whitespace-normalized sentences,
    case-insensitive unless configured otherwise. A sentence hit by any
    exclusion pattern contributes no matches at all.
    """

    families: Mapping[str, tuple[str, ...]]
    family_classes: Mapping[str, str] = field(default_factory=dict)
    exclusions: tuple[str, ...] = ()
    class_priority: tuple[str, ...] = GOVERNANCE_CLASSES
    match_mode: str = "word_boundary"
    case_sensitive: bool = False
    version: str = "ruleset/1"

    def __post_init__(self) -> None:
        for name, terms in self.families.items():
            if not terms:
                raise ValueError(f"keyword family {name!r} is empty")
        if self.match_mode != "word_boundary":
            raise ValueError(f"unsupported match mode: {self.match_mode!r}")

    @classmethod
    def from_mapping(cls, data: Mapping) -> "KeywordRuleSet":
        return cls(
            families={str(k): tuple(v) for k, v in data["families"].items()},
            family_classes={str(k): str(v) for k, v in data.get("family_classes", {}).items()},
            exclusions=tuple(data.get("exclusions", ())),
            class_priority=tuple(data.get("class_priority", GOVERNANCE_CLASSES)),
            match_mode=str(data.get("match_mode", "word_boundary")),
            case_sensitive=bool(data.get("case_sensitive", False)),
            version=str(data.get("version", "ruleset/1")),
        )

    def to_mapping(self) -> dict:
        return {
            "families": {k: list(v) for k, v in self.families.items()},
            "family_classes": dict(self.family_classes),
            "exclusions": list(self.exclusions),
            "class_priority": list(self.class_priority),
            "match_mode": self.match_mode,
            "case_sensitive": self.case_sensitive,
            "version": self.version,
        }

    def _flags(self) -> int:
        return 0 if self.case_sensitive else re.IGNORECASE

    def compiled_families(self) -> dict[str, tuple[tuple[str, re.Pattern], ...]]:
        compiled = {}
        for name, terms in self.families.items():
            patterns = []
            for term in terms:
                normalized = _WHITESPACE_RUN.sub(" ", term.strip())
                patterns.append(
                    (term, re.compile(rf"\b{re.escape(normalized)}\b", self._flags()))
                )
            compiled[name] = tuple(patterns)
        return compiled

    def compiled_exclusions(self) -> tuple[re.Pattern, ...]:
        return tuple(re.compile(pattern, self._flags()) for pattern in self.exclusions)


DEFAULT_OUTPUT_RULES = KeywordRuleSet(
    families={
        "authorship": ("created", "drafted", "wrote", "generated", "rendered"),
        "engineering": ("implemented", "fixed", "patched", "deployed", "pushed", "merged"),
        "verification": ("verified", "validated", "smoke test", "build passed"),
        "release": ("submitted", "published", "sent", "posted"),
        "artifact": ("artifact", "manuscript", "slides", "guide", "script", "dashboard", "app"),
    },
    exclusions=(
        r"auto-?generated",
        r"\bbuild (?:artifact|output|product)s?\b",
        r"\b(?:plan|plans|planned|planning) to\b",
        r"\bonly discussed\b",
        r"\bdiscussion only\b",
        r"\bno (?:new )?artifact\b",
        r"\bnothing (?:was )?delivered\b",
    ),
    version="output-families/1",
)

DEFAULT_GOVERNANCE_RULES = KeywordRuleSet(
    families={
        "verification": (
            "verified",
            "verification",
            "validated",
            "checked",
            "double-checked",
            "smoke test",
            "build passed",
            "tests passed",
            "doi check",
        ),
        "correction": (
            "corrected",
            "correction",
            "bug fix",
            "bugfix",
            "fixed wrong",
            "fixed incorrect",
            "citation fix",
        ),
        "protocol": ("protocol", "rule", "checklist", "policy", "lesson"),
        "safety": (
            "credential",
            "credentials",
            "secret",
            "api key",
            "unsafe",
            "safety",
            "redacted",
        ),
        "failure": (
            "failed",
            "failure",
            "broke",
            "broken",
            "duplicate send",
            "wrong result",
            "bad doi",
            "mistake",
        ),
    },
    family_classes={
        "verification": "verification",
        "correction": "correction",
        "protocol": "protocol",
        "safety": "safety",
        "failure": "failure",
    },
    exclusions=(
        r"auto-?generated",
        r"\bbuild (?:artifact|output|product)s?\b",
    ),
    version="governance-families/1",
)


def parse_memory_sections(
    files: Sequence[str | Path],
    heading_pattern: str = DEFAULT_HEADING_PATTERN,
    root: str | Path | None = None,
) -> tuple[list[DatedSection], list[str]]:
    """Split memory files into dated sections.

    Undated text attaches to the preceding dated section; text before the
    first dated heading is skipped. Unreadable files produce a warning and
    are skipped. Returns (sections, warnings).
    """
    pattern = re.compile(heading_pattern)
    sections: list[DatedSection] = []
    warnings: list[str] = []
    for file_path in files:
        full = Path(root) / file_path if root is not None else Path(file_path)
        label = str(file_path)
        try:
            text = full.read_text(encoding="utf-8", errors="replace")
        except OSError as exc:
            warnings.append(f"unreadable memory file: {label} ({exc.__class__.__name__})")
            continue
        heading: str | None = None
        section_date: date | None = None
        body: list[str] = []
        for line in text.splitlines():
            match = pattern.match(line)
            parsed_date = None
            if match:
                try:
                    parsed_date = date.fromisoformat(match.group(1))
                except ValueError:
                    parsed_date = None
            if parsed_date is not None:
                if heading is not None and section_date is not None:
                    sections.append(
                        DatedSection(section_date, heading, "\n".join(body), label)
                    )
                heading = line.strip()
                section_date = parsed_date
                body = []
            elif heading is not None:
                body.append(line)
        if heading is not None and section_date is not None:
            sections.append(DatedSection(section_date, heading, "\n".join(body), label))
    return sections, warnings


def split_sentences(body: str) -> list[str]:
    """Whitespace-normalized sentences; each line is split on terminal punctuation."""
    sentences: list[str] = []
    for line in body.splitlines():
        line = _BULLET_PREFIX.sub("", line).strip()
        if not line:
            continue
        for piece in _SENTENCE_BOUNDARY.split(line):
            piece = _WHITESPACE_RUN.sub(" ", piece).strip()
            if piece:
                sentences.append(piece)
    return sentences


def _sentence_matches(
    sentences: Sequence[str],
    compiled: Mapping[str, tuple[tuple[str, re.Pattern], ...]],
    exclusions: Sequence[re.Pattern],
) -> dict[str, list[tuple[int, list[str]]]]:
    """Per family: (sentence index, matched terms) for non-excluded sentences."""
    matches: dict[str, list[tuple[int, list[str]]]] = {name: [] for name in compiled}
    for index, sentence in enumerate(sentences):
        if any(pattern.search(sentence) for pattern in exclusions):
            continue
        for name, patterns in compiled.items():
            terms = [term for term, pattern in patterns if pattern.search(sentence)]
            if terms:
                matches[name].append((index, terms))
    return matches


def _clusters(
    hits: Sequence[tuple[int, list[str]]], granularity: Granularity
) -> list[tuple[tuple[int, ...], tuple[str, ...]]]:
    """Collapse hits to (member sentence indices, matched terms) clusters.

    Section granularity merges runs of consecutive matched sentences;
    sentence granularity keeps one cluster per matched sentence.
    """
    clusters: list[tuple[list[int], list[str]]] = []
    previous_index: int | None = None
    for index, terms in hits:
        merge = (
            granularity == "section"
            and previous_index is not None
            and index == previous_index + 1
        )
        if merge:
            clusters[-1][0].append(index)
            clusters[-1][1].extend(terms)
        else:
            clusters.append(([index], list(terms)))
        previous_index = index
    return [
        (tuple(members), tuple(dict.fromkeys(terms))) for members, terms in clusters
    ]


def _artifact_tokens(sentences: Sequence[str], indices: Iterable[int]) -> set[str]:
    tokens: set[str] = set()
    for index in indices:
        for match in _ARTIFACT_TOKEN.finditer(sentences[index]):
            tokens.add((match.group(1) or match.group(2)).lower())
    return tokens


def _section_sort_key(section: DatedSection) -> tuple:
    return (section.date, section.source_path, section.heading)


def extract_output_proxies(
    sections: Sequence[DatedSection],
    rules: KeywordRuleSet = DEFAULT_OUTPUT_RULES,
    granularity: Granularity = "section",
    repeat_horizon_days: int = 7,
) -> list[ProxyEvent]:
    """Output-proxy events, one per keyword-family match cluster.

    Repeated logs of a named artifact within the horizon are suppressed
    unless the sentence signals a materially new version. Artifacts are
    recognized by backticked names or filename-like tokens; this is an
    approximation of the repeat exclusion and is configurable off with
    ``repeat_horizon_days=0``.
    """
    compiled = rules.compiled_families()
    exclusions = rules.compiled_exclusions()
    bypass = tuple(
        re.compile(rf"\b{re.escape(term)}\b", re.IGNORECASE) for term in REPEAT_BYPASS_TERMS
    )
    last_logged: dict[tuple[str, str], date] = {}
    proxies: list[ProxyEvent] = []

    for section in sorted(sections, key=_section_sort_key):
        sentences = split_sentences(section.body)
        matches = _sentence_matches(sentences, compiled, exclusions)
        for family in rules.families:
            for members, terms in _clusters(matches[family], granularity):
                tokens = _artifact_tokens(sentences, members)
                suppressed = False
                if tokens and repeat_horizon_days > 0:
                    cluster_text = " ".join(sentences[i] for i in members)
                    is_new_version = any(p.search(cluster_text) for p in bypass)
                    recent = [
                        token
                        for token in tokens
                        if (family, token) in last_logged
                        and (section.date - last_logged[(family, token)]).days
                        <= repeat_horizon_days
                    ]
                    if len(recent) == len(tokens) and not is_new_version:
                        suppressed = True
                    for token in tokens:
                        last_logged[(family, token)] = section.date
                if not suppressed:
                    proxies.append(
                        ProxyEvent(
                            date=section.date,
                            kind="output",
                            matched_terms=terms,
                            section_ref=(section.source_path, section.heading),
                            family=family,
                        )
                    )
    return proxies


def extract_governance_events(
    sections: Sequence[DatedSection],
    rules: KeywordRuleSet = DEFAULT_GOVERNANCE_RULES,
    granularity: Granularity = "section",
) -> list[ProxyEvent]:
    """Governance events, one per match cluster across all governance families.

    A cluster matched by several class families takes the highest-priority
    class; matches from families without a class mapping leave the class
    absent.
    """
    compiled = rules.compiled_families()
    exclusions = rules.compiled_exclusions()
    proxies: list[ProxyEvent] = []

    for section in sorted(sections, key=_section_sort_key):
        sentences = split_sentences(section.body)
        matches = _sentence_matches(sentences, compiled, exclusions)
        per_sentence: dict[int, tuple[list[str], list[str]]] = {}
        for family, hits in matches.items():
            for index, terms in hits:
                families, all_terms = per_sentence.setdefault(index, ([], []))
                families.append(family)
                all_terms.extend(terms)
        hit_rows = [(index, per_sentence[index][1]) for index in sorted(per_sentence)]

        for members, terms in _clusters(hit_rows, granularity):
            cluster_families: list[str] = []
            for index in members:
                cluster_families.extend(per_sentence[index][0])
            proxies.append(
                ProxyEvent(
                    date=section.date,
                    kind="governance",
                    matched_terms=terms,
                    section_ref=(section.source_path, section.heading),
                    governance_class=_priority_class(cluster_families, rules),
                )
            )
    return proxies


def _priority_class(families: Sequence[str], rules: KeywordRuleSet) -> str | None:
    classes = {
        rules.family_classes[f] for f in families if f in rules.family_classes
    }
    for name in rules.class_priority:
        if name in classes:
            return name
    return None


def proxy_rates(
    proxies: Sequence[ProxyEvent], active_day_count: int
) -> tuple[float | None, float | None]:
    """(output rate, governance rate) per active day; None when no active days."""
    if active_day_count < 0:
        raise ValueError("active_day_count must be non-negative")
    if active_day_count == 0:
        return None, None
    outputs = sum(1 for p in proxies if p.kind == "output")
    governance = sum(1 for p in proxies if p.kind == "governance")
    return outputs / active_day_count, governance / active_day_count
