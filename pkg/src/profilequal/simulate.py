"""Seeded synthetic service-profile logs with known outcomes.

Randomness comes from numpy's PCG64 bit generator seeded with the workload's
64-bit seed, so the same workload produces byte-identical logs on any platform.

Each request walks a fixed decision tree::

    available?  --no-->  library arranges it within expected_days
        |
    unserved? (unserved_prob)   --yes--> never delivered
        |
    late? (late_prob_given_available) --yes--> delivered tau days after the agreed day
        |
    delivered on or before the agreed day

The lateness draw applies to arranged content too, against the arranged day.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from datetime import date, datetime, time, timedelta, timezone

import numpy as np

from .credit_model import ServedCounts
from .ingest import ObservationWindow
from .profile_model import (
    KNOWN_CONTENT_TYPES,
    Arrangement,
    Availability,
    ContentType,
    NotificationStatus,
    OutcomeKind,
    ServiceOutcome,
    ServiceProfileRecord,
    UserAcceptance,
)

_NOT_DELIVERED_REASONS = (
    "out of print",
    "licence not available",
    "withdrawn by publisher",
    "request cancelled",
)


@dataclass(frozen=True)
class TauDistribution:
    """Late-delivery delay: ``geometric`` with a mean, or ``fixed`` days."""

    kind: str
    value: float

    def __post_init__(self):
        if self.kind == "geometric":
            if not self.value >= 1:
                raise ValueError("geometric mean delay must be >= 1 day")
        elif self.kind == "fixed":
            if int(self.value) != self.value or self.value < 1:
                raise ValueError("fixed delay must be a positive integer")
        else:
            raise ValueError(f"unknown tau distribution {self.kind!r}")

    @classmethod
    def geometric(cls, mean_days):
        return cls("geometric", float(mean_days))

    @classmethod
    def fixed(cls, days):
        return cls("fixed", int(days))

    def draw(self, rng):
        if self.kind == "fixed":
            return int(self.value)
        return int(rng.geometric(1.0 / self.value))


def _uniform_weights():
    return {ContentType(name): 1.0 for name in KNOWN_CONTENT_TYPES}


@dataclass(frozen=True)
class WorkloadSpec:
    seed: int
    n_requests: int
    availability_prob: float = 0.8
    late_prob_given_available: float = 0.2
    tau_distribution: TauDistribution = TauDistribution("geometric", 3.0)
    unserved_prob: float = 0.05
    content_type_weights: dict = field(default_factory=_uniform_weights)
    start: date = date(2024, 1, 1)
    window_days: int = 90
    n_contents: int = 200
    n_users: int = 500
    max_expected_days: int = 14
    record_excess_delay: bool = True

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.n_requests < 1:
            raise ValueError("n_requests must be positive")
        for name in ("availability_prob", "late_prob_given_available", "unserved_prob"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        weights = list(self.content_type_weights.values())
        if not weights or any(w < 0 for w in weights) or sum(weights) <= 0:
            raise ValueError("content type weights must be non-negative and not all zero")
        if self.window_days < 1 or self.n_contents < 1 or self.n_users < 1:
            raise ValueError("window_days, n_contents and n_users must be positive")
        if self.max_expected_days < 1:
            raise ValueError("max_expected_days must be positive")


@dataclass(frozen=True)
class SimulationResult:
    window: ObservationWindow
    outcomes: tuple[ServiceOutcome, ...]
    counts: ServedCounts
    unserved: int

    def truth_dict(self):
        return {
            "counts": {"h": self.counts.h, "l": self.counts.l, "unserved": self.unserved},
            "outcomes": [
                [rec.request_id, str(out)]
                for rec, out in zip(self.window.records, self.outcomes)
            ],
        }

    def truth_json(self):
        return json.dumps(self.truth_dict(), indent=2, sort_keys=True) + "\n"


def _at(day, seconds):
    return datetime.combine(day, time(), tzinfo=timezone.utc) + timedelta(seconds=int(seconds))


def generate(spec: WorkloadSpec) -> SimulationResult:
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    types = sorted(spec.content_type_weights)
    weights = np.array([spec.content_type_weights[t] for t in types], dtype=float)
    weights /= weights.sum()
    # content ids are bound to a type so hits stay per-type consistent
    content_types = rng.choice(len(types), size=spec.n_contents, p=weights)

    records, outcomes = [], []
    for i in range(spec.n_requests):
        content = int(rng.integers(spec.n_contents))
        user = int(rng.integers(spec.n_users))
        request_day = spec.start + timedelta(days=int(rng.integers(spec.window_days)))
        request_sec = int(rng.integers(86400))
        request_time = _at(request_day, request_sec)

        available = rng.random() < spec.availability_prob
        unserved = rng.random() < spec.unserved_prob
        late = rng.random() < spec.late_prob_given_available

        kw = {}
        if available:
            due = request_day
            kw.update(
                content_availability=Availability.Available,
                arrangement_status=Arrangement.not_needed(),
                notification_status=NotificationStatus.NotSent,
                user_acceptance=UserAcceptance.NotApplicable,
            )
        elif unserved:
            due = None
            kw.update(
                content_availability=Availability.NotAvailable,
                arrangement_status=Arrangement.will_not_arrange(),
                notification_status=NotificationStatus.NotSent,
                user_acceptance=UserAcceptance.NotApplicable,
            )
        else:
            expected = int(rng.integers(1, spec.max_expected_days + 1))
            due = request_day + timedelta(days=expected)
            notify = request_sec + int(rng.integers(86400 - request_sec))
            kw.update(
                content_availability=Availability.NotAvailable,
                arrangement_status=Arrangement.will_arrange(expected),
                notification_status=NotificationStatus.Sent,
                notification_time=_at(request_day, notify),
                user_acceptance=UserAcceptance.Accepted,
            )

        if unserved:
            outcome = ServiceOutcome.UNSERVED
            reason = _NOT_DELIVERED_REASONS[int(rng.integers(len(_NOT_DELIVERED_REASONS)))]
            kw["reasons_not_delivered"] = reason
        elif late:
            tau = spec.tau_distribution.draw(rng)
            outcome = ServiceOutcome.late(tau)
            kw["content_delivery_time"] = _at(due + timedelta(days=tau), rng.integers(86400))
            if spec.record_excess_delay:
                kw["excess_delay_days"] = tau
        else:
            outcome = ServiceOutcome.ON_TIME
            slack = (due - request_day).days
            day = request_day + timedelta(days=int(rng.integers(slack + 1)))
            if day == request_day:
                sec = request_sec + int(rng.integers(86400 - request_sec))
            else:
                sec = int(rng.integers(86400))
            kw["content_delivery_time"] = _at(day, sec)

        records.append(ServiceProfileRecord(
            request_id=f"R{i + 1:07d}",
            request_time=request_time,
            user_id=f"U{user:05d}",
            content_id=f"C{content:05d}",
            content_type=types[content_types[content]],
            content_hits=1,
            **kw,
        ))
        outcomes.append(outcome)

    hits = {}
    for rec in records:
        hits[rec.content_id] = hits.get(rec.content_id, 0) + 1
    records = [replace(rec, content_hits=hits[rec.content_id]) for rec in records]

    h = sum(o.kind is OutcomeKind.OnTime for o in outcomes)
    l = sum(o.kind is OutcomeKind.Late for o in outcomes)
    return SimulationResult(
        window=ObservationWindow.spanning(records),
        outcomes=tuple(outcomes),
        counts=ServedCounts(h, l),
        unserved=len(outcomes) - h - l,
    )
