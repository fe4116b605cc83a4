"""Active system time from capped inter-event gaps over unique timestamps."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

MS_PER_MINUTE = 60_000
MS_PER_HOUR = 3_600_000

DEFAULT_CAP_MINUTES = 30
SENSITIVITY_CAP_MINUTES = 60
DEFAULT_CAPS: tuple[int, ...] = (15, 30, 45, 60, 90)
DEFAULT_CLIP_MINUTES = 180


@dataclass(frozen=True)
class ActiveTimeEstimate:
    cap_minutes: int
    hours: float
    cluster_count: int
    event_count: int

    def to_mapping(self) -> dict:
        return {
            "cap_minutes": self.cap_minutes,
            "hours": self.hours,
            "cluster_count": self.cluster_count,
            "event_count": self.event_count,
        }

    @classmethod
    def from_mapping(cls, data: dict) -> "ActiveTimeEstimate":
        return cls(
            cap_minutes=int(data["cap_minutes"]),
            hours=float(data["hours"]),
            cluster_count=int(data["cluster_count"]),
            event_count=int(data["event_count"]),
        )


@dataclass(frozen=True)
class GapHistogram:
    """Left-closed bins over raw gaps in minutes; the last count is overflow.

    ``counts[i]`` covers ``[bin_edges[i], bin_edges[i+1])`` minutes for
    ``i < len(bin_edges) - 1``; ``counts[-1]`` accumulates gaps at or above
    the display clip.
    """

    bin_edges: tuple[int, ...]
    counts: tuple[int, ...]
    clip_minutes: int = DEFAULT_CLIP_MINUTES

    def to_mapping(self) -> dict:
        return {
            "bin_edges": list(self.bin_edges),
            "counts": list(self.counts),
            "clip_minutes": self.clip_minutes,
        }

    @classmethod
    def from_mapping(cls, data: dict) -> "GapHistogram":
        return cls(
            bin_edges=tuple(int(x) for x in data["bin_edges"]),
            counts=tuple(int(x) for x in data["counts"]),
            clip_minutes=int(data["clip_minutes"]),
        )


def active_time(timestamps: Iterable[int], cap_minutes: int) -> ActiveTimeEstimate:
    """Sum consecutive gaps capped at ``cap_minutes`` over unique timestamps.

    Clusters split at gaps strictly greater than the cap, so a gap exactly
    equal to the cap contributes fully and stays inside one cluster.
    """
    if cap_minutes <= 0:
        raise ValueError(f"cap_minutes must be positive, got {cap_minutes}")
    unique = sorted(set(timestamps))
    if not unique:
        return ActiveTimeEstimate(cap_minutes, 0.0, 0, 0)
    cap_ms = cap_minutes * MS_PER_MINUTE
    total_ms = 0
    clusters = 1
    previous = unique[0]
    for current in unique[1:]:
        gap = current - previous
        total_ms += gap if gap < cap_ms else cap_ms
        if gap > cap_ms:
            clusters += 1
        previous = current
    return ActiveTimeEstimate(cap_minutes, total_ms / MS_PER_HOUR, clusters, len(unique))


def cap_sensitivity(
    timestamps: Iterable[int], caps: Sequence[int] = DEFAULT_CAPS
) -> list[ActiveTimeEstimate]:
    """One estimate per cap; hours are non-decreasing and clusters non-increasing in cap."""
    if not caps:
        raise ValueError("caps must not be empty")
    unique = sorted(set(timestamps))
    return [active_time(unique, cap) for cap in caps]


def gap_histogram(
    timestamps: Iterable[int],
    bin_width_minutes: int,
    clip_minutes: int = DEFAULT_CLIP_MINUTES,
) -> GapHistogram:
    """Histogram of raw inter-event gaps, with gaps >= clip pooled in a final bin."""
    if bin_width_minutes <= 0:
        raise ValueError(f"bin_width_minutes must be positive, got {bin_width_minutes}")
    if clip_minutes <= 0:
        raise ValueError(f"clip_minutes must be positive, got {clip_minutes}")
    edges: list[int] = []
    edge = 0
    while edge < clip_minutes:
        edges.append(edge)
        edge += bin_width_minutes
    edges.append(clip_minutes)

    counts = [0] * len(edges)
    unique = sorted(set(timestamps))
    bin_ms = bin_width_minutes * MS_PER_MINUTE
    clip_ms = clip_minutes * MS_PER_MINUTE
    for previous, current in zip(unique, unique[1:]):
        gap = current - previous
        if gap >= clip_ms:
            counts[-1] += 1
        else:
            counts[gap // bin_ms] += 1
    return GapHistogram(tuple(edges), tuple(counts), clip_minutes)
