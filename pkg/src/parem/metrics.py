"""The PARE-M v0.1 metric suite.

Every metric is emitted with its numerator, denominator, time window, and a
versioned computation-rule identifier. Undefined metrics carry an explicit
reason code instead of a value; they are never reported as zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

from .activetime import DEFAULT_CAP_MINUTES, SENSITIVITY_CAP_MINUTES, active_time
from .ingest import Event, ROLES, WorkspaceInventory

if TYPE_CHECKING:
    from .extraction import ProxyEvent
    from .tokens import TokenTotals

METRIC_NAMES: tuple[str, ...] = ("ADF", "DRC", "ATE", "CDR", "OPR", "GER", "ASB")

RULE_IDS: dict[str, str] = {
    "ADF": "pare-m-0.1/adf/active-days-over-calendar-days",
    "DRC": "pare-m-0.1/drc/unique-records-after-key-cascade",
    "ATE": "pare-m-0.1/ate/capped-gap-sum-30min",
    "ATE_SENSITIVITY": "pare-m-0.1/ate/capped-gap-sum-60min",
    "CDR": "pare-m-0.1/cdr/cache-read-over-total-tokens",
    "OPR": "pare-m-0.1/opr/output-proxies-per-active-day",
    "GER": "pare-m-0.1/ger/governance-proxies-per-active-day",
    "ASB": "pare-m-0.1/asb/distinct-artifact-surfaces",
}

REASON_ZERO_DENOMINATOR = "zero_denominator"


@dataclass(frozen=True)
class ObservationWindow:
    start_date: date
    end_date: date

    def __post_init__(self) -> None:
        if self.end_date < self.start_date:
            raise ValueError(
                f"window end {self.end_date} precedes start {self.start_date}"
            )

    @property
    def calendar_days(self) -> int:
        return (self.end_date - self.start_date).days + 1

    def contains(self, day: date) -> bool:
        return self.start_date <= day <= self.end_date

    def dates(self) -> Iterable[date]:
        current = self.start_date
        while current <= self.end_date:
            yield current
            current += timedelta(days=1)

    def to_mapping(self) -> dict:
        return {"start_date": self.start_date.isoformat(), "end_date": self.end_date.isoformat()}

    @classmethod
    def from_mapping(cls, data: Mapping) -> "ObservationWindow":
        return cls(
            start_date=date.fromisoformat(data["start_date"]),
            end_date=date.fromisoformat(data["end_date"]),
        )


@dataclass(frozen=True)
class MetricValue:
    metric: str
    numerator: float
    denominator: float
    window: ObservationWindow
    rule_id: str
    value: float | None
    reason: str | None = None

    def to_mapping(self) -> dict:
        return {
            "metric": self.metric,
            "numerator": self.numerator,
            "denominator": self.denominator,
            "window": self.window.to_mapping(),
            "rule_id": self.rule_id,
            "value": self.value,
            "reason": self.reason,
        }

    @classmethod
    def from_mapping(cls, data: Mapping) -> "MetricValue":
        return cls(
            metric=data["metric"],
            numerator=data["numerator"],
            denominator=data["denominator"],
            window=ObservationWindow.from_mapping(data["window"]),
            rule_id=data["rule_id"],
            value=data["value"],
            reason=data.get("reason"),
        )


@dataclass(frozen=True)
class RoleCounts:
    user: int = 0
    assistant: int = 0
    tool_result: int = 0
    tool_call: int = 0
    model_completed: int = 0
    other: int = 0

    @property
    def total(self) -> int:
        return sum(getattr(self, role) for role in ROLES)

    def to_mapping(self) -> dict:
        return {role: getattr(self, role) for role in ROLES}

    @classmethod
    def from_mapping(cls, data: Mapping) -> "RoleCounts":
        return cls(**{role: int(data.get(role, 0)) for role in ROLES})


@dataclass(frozen=True)
class MetricReport:
    window: ObservationWindow
    values: dict[str, MetricValue]
    ate_sensitivity: MetricValue
    role_counts: RoleCounts
    active_day_count: int
    annotations: tuple[str, ...] = ()

    def to_mapping(self) -> dict:
        return {
            "window": self.window.to_mapping(),
            "values": {name: self.values[name].to_mapping() for name in METRIC_NAMES},
            "ate_sensitivity": self.ate_sensitivity.to_mapping(),
            "role_counts": self.role_counts.to_mapping(),
            "active_day_count": self.active_day_count,
            "annotations": list(self.annotations),
        }

    @classmethod
    def from_mapping(cls, data: Mapping) -> "MetricReport":
        return cls(
            window=ObservationWindow.from_mapping(data["window"]),
            values={
                name: MetricValue.from_mapping(value)
                for name, value in data["values"].items()
            },
            ate_sensitivity=MetricValue.from_mapping(data["ate_sensitivity"]),
            role_counts=RoleCounts.from_mapping(data["role_counts"]),
            active_day_count=int(data["active_day_count"]),
            annotations=tuple(data.get("annotations", ())),
        )


def utc_date(timestamp_ms: int) -> date:
    return datetime.fromtimestamp(timestamp_ms / 1000, tz=timezone.utc).date()


def calendar_days(window: ObservationWindow) -> int:
    """Inclusive day count of the observation window."""
    return window.calendar_days


def active_days(events: Iterable[Event], window: ObservationWindow) -> set[date]:
    """UTC dates with at least one timed event, intersected with the window."""
    days = set()
    for event in events:
        if event.timestamp_ms is None:
            continue
        day = utc_date(event.timestamp_ms)
        if window.contains(day):
            days.add(day)
    return days


def role_counts(events: Iterable[Event]) -> RoleCounts:
    counts = {role: 0 for role in ROLES}
    for event in events:
        counts[event.role] += 1
    return RoleCounts(**counts)


def ratio_metric(
    metric: str,
    numerator: float,
    denominator: float,
    window: ObservationWindow,
    rule_id: str | None = None,
) -> MetricValue:
    """A MetricValue whose value is numerator/denominator, or undefined."""
    rule = rule_id if rule_id is not None else RULE_IDS[metric]
    if denominator > 0:
        return MetricValue(metric, numerator, denominator, window, rule, numerator / denominator)
    return MetricValue(
        metric, numerator, denominator, window, rule, None, reason=REASON_ZERO_DENOMINATOR
    )


def round_proportion(value: float) -> float:
    return round(value, 3)


def round_rate(value: float) -> float:
    return round(value, 2)


def round_hours(value: float) -> float:
    return round(value, 1)


def compute_pare_m(
    events: Sequence[Event],
    proxies: Sequence["ProxyEvent"],
    inventory: WorkspaceInventory,
    window: ObservationWindow,
    token_totals: "TokenTotals",
    primary_cap: int = DEFAULT_CAP_MINUTES,
    sensitivity_cap: int = SENSITIVITY_CAP_MINUTES,
) -> MetricReport:
    """Assemble the full PARE-M report from de-duplicated analysis inputs.

    ``events`` must already be de-duplicated and scoped; OPR and GER are
    flagged undefined (never infinite) when there are no active days.
    """
    days = active_days(events, window)
    day_count = len(days)

    timestamps = sorted(
        {
            e.timestamp_ms
            for e in events
            if e.timestamp_ms is not None and window.contains(utc_date(e.timestamp_ms))
        }
    )
    primary = active_time(timestamps, primary_cap)
    sensitivity = active_time(timestamps, sensitivity_cap)

    output_count = sum(1 for p in proxies if p.kind == "output")
    governance_count = sum(1 for p in proxies if p.kind == "governance")

    values = {
        "ADF": ratio_metric("ADF", day_count, window.calendar_days, window),
        "DRC": ratio_metric("DRC", len(events), 1, window),
        "ATE": MetricValue(
            "ATE",
            primary.hours * 3600,
            3600,
            window,
            RULE_IDS["ATE"],
            primary.hours,
        ),
        "CDR": ratio_metric("CDR", token_totals.cache_read, token_totals.total, window),
        "OPR": ratio_metric("OPR", output_count, day_count, window),
        "GER": ratio_metric("GER", governance_count, day_count, window),
        "ASB": ratio_metric("ASB", inventory.surfaces.asb, 1, window),
    }
    ate_sensitivity = MetricValue(
        "ATE",
        sensitivity.hours * 3600,
        3600,
        window,
        RULE_IDS["ATE_SENSITIVITY"],
        sensitivity.hours,
    )

    annotations: list[str] = []
    if timestamps:
        earliest = utc_date(timestamps[0])
        if earliest > window.start_date:
            annotations.append(
                "active-day and record counts are lower bounds: earliest recoverable "
                f"event is {earliest.isoformat()}, after the window start "
                f"{window.start_date.isoformat()}"
            )

    return MetricReport(
        window=window,
        values=values,
        ate_sensitivity=ate_sensitivity,
        role_counts=role_counts(events),
        active_day_count=day_count,
        annotations=tuple(annotations),
    )
