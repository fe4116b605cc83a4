"""Token telemetry accounting for model-completed events.

All counts accumulate as exact integers; per-route and per-day partitions
reconcile to the grand totals by construction. The cache/output association
statistics use natural-log Pearson and average-rank Spearman over events
with positive counts (zero-count events are excluded and counted, unless
log1p mode is enabled).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date
from typing import Iterable, Mapping, Sequence

from .ingest import Event
from .metrics import ObservationWindow, utc_date

UNKNOWN_ROUTE = "unknown"

REASON_TOO_FEW_EVENTS = "fewer_than_3_events"
REASON_ZERO_VARIANCE = "zero_variance"
REASON_NO_TOKENS = "no_recorded_tokens"


@dataclass(frozen=True)
class TokenTotals:
    input: int = 0
    output: int = 0
    cache_read: int = 0
    cache_write: int = 0

    @property
    def total(self) -> int:
        return self.input + self.output + self.cache_read + self.cache_write

    @property
    def cdr(self) -> float | None:
        """Cache-read share of all recorded tokens; None when nothing recorded."""
        total = self.total
        return self.cache_read / total if total > 0 else None

    def to_mapping(self) -> dict:
        return {
            "input": self.input,
            "output": self.output,
            "cache_read": self.cache_read,
            "cache_write": self.cache_write,
            "total": self.total,
            "cdr": self.cdr,
        }

    @classmethod
    def from_mapping(cls, data: Mapping) -> "TokenTotals":
        return cls(
            input=int(data["input"]),
            output=int(data["output"]),
            cache_read=int(data["cache_read"]),
            cache_write=int(data["cache_write"]),
        )


@dataclass(frozen=True)
class RouteTotals:
    provider_route: str
    totals: TokenTotals
    completions: int

    def to_mapping(self) -> dict:
        return {
            "provider_route": self.provider_route,
            "totals": self.totals.to_mapping(),
            "completions": self.completions,
        }

    @classmethod
    def from_mapping(cls, data: Mapping) -> "RouteTotals":
        return cls(
            provider_route=data["provider_route"],
            totals=TokenTotals.from_mapping(data["totals"]),
            completions=int(data["completions"]),
        )


@dataclass(frozen=True)
class DailyTokens:
    date: date
    input: int = 0
    output: int = 0
    cache_read: int = 0
    cache_write: int = 0
    completions: int = 0

    def to_mapping(self) -> dict:
        return {
            "date": self.date.isoformat(),
            "input": self.input,
            "output": self.output,
            "cache_read": self.cache_read,
            "cache_write": self.cache_write,
            "completions": self.completions,
        }

    @classmethod
    def from_mapping(cls, data: Mapping) -> "DailyTokens":
        return cls(
            date=date.fromisoformat(data["date"]),
            input=int(data["input"]),
            output=int(data["output"]),
            cache_read=int(data["cache_read"]),
            cache_write=int(data["cache_write"]),
            completions=int(data["completions"]),
        )


@dataclass(frozen=True)
class AssociationStats:
    pearson_r_log: float | None
    spearman_rho: float | None
    n_events: int
    excluded_zero_events: int
    reason: str | None = None

    def to_mapping(self) -> dict:
        return {
            "pearson_r_log": self.pearson_r_log,
            "spearman_rho": self.spearman_rho,
            "n_events": self.n_events,
            "excluded_zero_events": self.excluded_zero_events,
            "reason": self.reason,
        }

    @classmethod
    def from_mapping(cls, data: Mapping) -> "AssociationStats":
        return cls(
            pearson_r_log=data["pearson_r_log"],
            spearman_rho=data["spearman_rho"],
            n_events=int(data["n_events"]),
            excluded_zero_events=int(data["excluded_zero_events"]),
            reason=data.get("reason"),
        )


def _completions_in_window(
    events: Iterable[Event], window: ObservationWindow | None
) -> list[Event]:
    selected = []
    for event in events:
        if event.role != "model_completed":
            continue
        if window is not None:
            if event.timestamp_ms is None:
                continue
            if not window.contains(utc_date(event.timestamp_ms)):
                continue
        selected.append(event)
    return selected


def aggregate_tokens(
    events: Iterable[Event], window: ObservationWindow | None = None
) -> TokenTotals:
    """Exact integer token sums over model-completed events.

    With a window, only events whose UTC date falls inside it contribute;
    untimed events cannot be placed in a window and are left out.
    """
    input_sum = output_sum = cache_read_sum = cache_write_sum = 0
    for event in _completions_in_window(events, window):
        usage = event.tokens
        if usage is None:
            continue
        input_sum += usage.input
        output_sum += usage.output
        cache_read_sum += usage.cache_read
        cache_write_sum += usage.cache_write
    return TokenTotals(input_sum, output_sum, cache_read_sum, cache_write_sum)


def per_route(
    events: Iterable[Event], window: ObservationWindow | None = None
) -> list[RouteTotals]:
    """Token totals grouped by provider route; routeless events fall under "unknown"."""
    sums: dict[str, list[int]] = {}
    for event in _completions_in_window(events, window):
        route = event.provider_route or UNKNOWN_ROUTE
        bucket = sums.setdefault(route, [0, 0, 0, 0, 0])
        usage = event.tokens
        if usage is not None:
            bucket[0] += usage.input
            bucket[1] += usage.output
            bucket[2] += usage.cache_read
            bucket[3] += usage.cache_write
        bucket[4] += 1
    return [
        RouteTotals(route, TokenTotals(*sums[route][:4]), sums[route][4])
        for route in sorted(sums)
    ]


def daily_composition(
    events: Iterable[Event], window: ObservationWindow
) -> list[DailyTokens]:
    """One row per UTC date in the window, zero-filled where nothing happened."""
    rows: dict[date, list[int]] = {day: [0, 0, 0, 0, 0] for day in window.dates()}
    for event in _completions_in_window(events, window):
        assert event.timestamp_ms is not None
        bucket = rows[utc_date(event.timestamp_ms)]
        usage = event.tokens
        if usage is not None:
            bucket[0] += usage.input
            bucket[1] += usage.output
            bucket[2] += usage.cache_read
            bucket[3] += usage.cache_write
        bucket[4] += 1
    return [
        DailyTokens(day, *rows[day][:4], completions=rows[day][4])
        for day in sorted(rows)
    ]


def average_ranks(values: Sequence[float]) -> list[float]:
    """1-based ranks with ties averaged."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        average = (i + j + 2) / 2  # 1-based midpoint of the tie run
        for k in range(i, j + 1):
            ranks[order[k]] = average
        i = j + 1
    return ranks


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float | None:
    """Sample Pearson correlation; None when either side has zero variance."""
    n = len(xs)
    mean_x = math.fsum(xs) / n
    mean_y = math.fsum(ys) / n
    cov = math.fsum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    var_x = math.fsum((x - mean_x) ** 2 for x in xs)
    var_y = math.fsum((y - mean_y) ** 2 for y in ys)
    if var_x == 0.0 or var_y == 0.0:
        return None
    r = cov / math.sqrt(var_x * var_y)
    return max(-1.0, min(1.0, r))


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float | None:
    """Spearman rank correlation with average-rank tie handling."""
    return pearson(average_ranks(xs), average_ranks(ys))


def cache_output_association(
    events: Iterable[Event], log1p: bool = False
) -> AssociationStats:
    """Association between cache-read and output tokens per completion.

    Pearson runs on natural-log counts; Spearman on average ranks of the raw
    counts over the same included set. Events with a zero on either side are
    excluded and counted, unless ``log1p`` shifts the transform to ln(1+x)
    and keeps them.
    """
    pairs: list[tuple[int, int]] = []
    excluded = 0
    for event in events:
        if event.role != "model_completed" or event.tokens is None:
            continue
        cache_read, output = event.tokens.cache_read, event.tokens.output
        if not log1p and (cache_read == 0 or output == 0):
            excluded += 1
            continue
        pairs.append((cache_read, output))

    if len(pairs) < 3:
        return AssociationStats(None, None, len(pairs), excluded, REASON_TOO_FEW_EVENTS)

    if log1p:
        log_x = [math.log1p(x) for x, _ in pairs]
        log_y = [math.log1p(y) for _, y in pairs]
    else:
        log_x = [math.log(x) for x, _ in pairs]
        log_y = [math.log(y) for _, y in pairs]

    r = pearson(log_x, log_y)
    rho = spearman([x for x, _ in pairs], [y for _, y in pairs])
    reason = REASON_ZERO_VARIANCE if r is None or rho is None else None
    return AssociationStats(r, rho, len(pairs), excluded, reason)
