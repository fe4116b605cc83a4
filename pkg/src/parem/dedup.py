"""Stable event identity via a staged key cascade, and stream de-duplication.

Key tiers, in order: a verbatim explicit identifier when the record carries
one; otherwise a digest over the timestamp/role/type/content-prefix/tool
material; and for model-completed records that carry neither an identifier
nor message material, a digest over the trajectory fields (timestamp,
provider route, model, token counts).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

from .ingest import Event

KeyTier = Literal["explicit_id", "content_hash", "trajectory_hash"]

KEY_TIERS: tuple[KeyTier, ...] = ("explicit_id", "content_hash", "trajectory_hash")

# Absent fields encode as a byte that cannot occur in UTF-8 text, so absence
# never collides with any real value.
_ABSENT = b"\xff"
_SEPARATOR = b"\x00"


@dataclass(frozen=True, slots=True)
class DedupKey:
    tier: KeyTier
    value: str


@dataclass(frozen=True)
class DedupStats:
    input_count: int
    retained_count: int
    removed_by_tier: dict[KeyTier, int] = field(default_factory=dict)

    @property
    def removed_count(self) -> int:
        return self.input_count - self.retained_count

    def to_mapping(self) -> dict:
        return {
            "input_count": self.input_count,
            "retained_count": self.retained_count,
            "removed_by_tier": {tier: self.removed_by_tier.get(tier, 0) for tier in KEY_TIERS},
        }

    @classmethod
    def from_mapping(cls, data: dict) -> "DedupStats":
        return cls(
            input_count=int(data["input_count"]),
            retained_count=int(data["retained_count"]),
            removed_by_tier={
                tier: int(n) for tier, n in data.get("removed_by_tier", {}).items() if int(n)
            },
        )


def _encode(value: object) -> bytes:
    if value is None:
        return _ABSENT
    if isinstance(value, int):
        return str(value).encode("ascii")
    return str(value).encode("utf-8")


def _digest(fields: Sequence[object]) -> str:
    return hashlib.sha256(_SEPARATOR.join(_encode(f) for f in fields)).hexdigest()


def dedup_key(event: Event) -> DedupKey:
    """Assign the first available stable key in the cascade order.

    A model-completed record without message material (no content prefix, no
    tool name) is a trajectory record: its key hashes the trajectory fields,
    including the timestamp, so same-instant completions with different token
    counts stay distinct.
    """
    if event.event_id is not None:
        return DedupKey("explicit_id", event.event_id)
    lacks_message_material = not event.content_prefix and event.tool_name is None
    if event.role == "model_completed" and lacks_message_material:
        tokens = event.tokens
        token_counts = (
            f"{tokens.input},{tokens.output},{tokens.cache_read},{tokens.cache_write}"
            if tokens is not None
            else None
        )
        return DedupKey(
            "trajectory_hash",
            _digest(
                (event.timestamp_ms, event.provider_route, event.model, token_counts)
            ),
        )
    return DedupKey(
        "content_hash",
        _digest(
            (
                event.timestamp_ms,
                event.role,
                event.event_type,
                event.content_prefix or None,
                event.tool_name,
            )
        ),
    )


def deduplicate(events: Iterable[Event]) -> tuple[list[Event], DedupStats]:
    """Retain one event per key; the canonically first source (path, line) wins.

    The retained set and representatives are identical under any permutation
    of the input, and the output comes back in canonical order.
    """
    retained: dict[DedupKey, Event] = {}
    removed_by_tier: dict[KeyTier, int] = {}
    input_count = 0
    for event in events:
        input_count += 1
        key = dedup_key(event)
        existing = retained.get(key)
        if existing is None:
            retained[key] = event
            continue
        removed_by_tier[key.tier] = removed_by_tier.get(key.tier, 0) + 1
        if (event.source_path, event.line_number) < (
            existing.source_path,
            existing.line_number,
        ):
            retained[key] = event
    output = sorted(retained.values(), key=lambda e: (e.source_path, e.line_number))
    return output, DedupStats(input_count, len(output), removed_by_tier)


def exclude_untimed_for_time_analysis(
    events: Iterable[Event],
) -> tuple[list[Event], list[Event]]:
    """Split de-duplicated events into (timed, untimed).

    Untimed records stay out of active-time analysis but remain available for
    record and inventory counts.
    """
    timed: list[Event] = []
    untimed: list[Event] = []
    for event in events:
        (timed if event.timestamp_ms is not None else untimed).append(event)
    return timed, untimed


def ledger_rows(events: Iterable[Event]) -> list[tuple[str, str, str, int]]:
    """Audit rows (tier, key value, source path, line) in canonical order."""
    rows = []
    for event in events:
        key = dedup_key(event)
        rows.append((key.tier, key.value, event.source_path, event.line_number))
    rows.sort(key=lambda row: (row[2], row[3]))
    return rows
