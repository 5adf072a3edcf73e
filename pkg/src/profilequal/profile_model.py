"""Service-profile record schema, its enumerations, and validation.

A service profile is the per-request record an eLibrary keeps about how a
content request was handled.  Records are immutable; validation returns
violations as data instead of raising.

Variant values are written as their literal names.  Variants carrying a
payload use call syntax, e.g. ``WillArrange(7)`` or ``Other(audio book)``.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from datetime import date, datetime, timezone

__all__ = [
    "KNOWN_CONTENT_TYPES",
    "Arrangement",
    "ArrangementKind",
    "Availability",
    "ContentType",
    "NotificationStatus",
    "OutcomeKind",
    "ServiceOutcome",
    "ServiceProfileRecord",
    "UserAcceptance",
    "Violation",
    "ViolationCode",
    "utc_day",
    "validate_record",
]

_VARIANT = re.compile(r"^\s*([A-Za-z]+)\s*(?:\((.*)\))?\s*$", re.DOTALL)


def _split_variant(text):
    m = _VARIANT.match(text)
    if m is None:
        raise ValueError(f"malformed variant {text!r}")
    return m.group(1), m.group(2)


def utc_day(ts: datetime) -> date:
    """UTC calendar day of an aware timestamp."""
    if ts.tzinfo is None:
        raise ValueError("timestamp must be timezone-aware")
    return ts.astimezone(timezone.utc).date()


KNOWN_CONTENT_TYPES = (
    "PhysicalBook",
    "Ebook",
    "Video",
    "Slides",
    "Journal",
    "Tutorial",
    "Report",
    "Thesis",
)


@dataclass(frozen=True, order=True)
class ContentType:
    """Kind of content requested; ``Other`` carries a free label."""

    name: str
    label: str | None = None

    def __post_init__(self):
        if self.name == "Other":
            if not self.label or not self.label.strip():
                raise ValueError("Other content type needs a non-empty label")
        elif self.name in KNOWN_CONTENT_TYPES:
            if self.label is not None:
                raise ValueError(f"{self.name} takes no label")
        else:
            raise ValueError(f"unknown content type {self.name!r}")

    @classmethod
    def parse(cls, text: str) -> "ContentType":
        name, arg = _split_variant(text)
        if name == "Other":
            return cls(name, arg)
        if arg is not None:
            raise ValueError(f"{name} takes no label")
        return cls(name)

    def __str__(self):
        return f"Other({self.label})" if self.name == "Other" else self.name


class Availability(enum.Enum):
    Available = "Available"
    NotAvailable = "NotAvailable"


class NotificationStatus(enum.Enum):
    Sent = "Sent"
    NotSent = "NotSent"


class UserAcceptance(enum.Enum):
    Accepted = "Accepted"
    Rejected = "Rejected"
    NotApplicable = "NotApplicable"


class ArrangementKind(enum.Enum):
    NotNeeded = "NotNeeded"
    WillArrange = "WillArrange"
    WillNotArrange = "WillNotArrange"


@dataclass(frozen=True)
class Arrangement:
    """Procurement status; ``WillArrange`` carries the expected days."""

    kind: ArrangementKind
    expected_days: int | None = None

    def __post_init__(self):
        if self.kind is ArrangementKind.WillArrange:
            if self.expected_days is None:
                raise ValueError("WillArrange needs expected_days")
        elif self.expected_days is not None:
            raise ValueError(f"{self.kind.value} takes no expected_days")

    @classmethod
    def not_needed(cls):
        return cls(ArrangementKind.NotNeeded)

    @classmethod
    def will_arrange(cls, expected_days: int):
        return cls(ArrangementKind.WillArrange, int(expected_days))

    @classmethod
    def will_not_arrange(cls):
        return cls(ArrangementKind.WillNotArrange)

    @classmethod
    def parse(cls, text: str) -> "Arrangement":
        name, arg = _split_variant(text)
        kind = ArrangementKind(name)
        if kind is ArrangementKind.WillArrange:
            if arg is None or not re.fullmatch(r"\s*-?\d+\s*", arg):
                raise ValueError(f"WillArrange needs an integer day count, got {text!r}")
            return cls(kind, int(arg))
        if arg is not None:
            raise ValueError(f"{name} takes no argument")
        return cls(kind)

    def __str__(self):
        if self.kind is ArrangementKind.WillArrange:
            return f"WillArrange({self.expected_days})"
        return self.kind.value


class OutcomeKind(enum.Enum):
    OnTime = "OnTime"
    Late = "Late"
    Unserved = "Unserved"


@dataclass(frozen=True)
class ServiceOutcome:
    """How a request ended up: on time, late by ``tau_days``, or unserved."""

    kind: OutcomeKind
    tau_days: int | None = None

    def __post_init__(self):
        if self.kind is OutcomeKind.Late:
            if self.tau_days is None or self.tau_days < 1:
                raise ValueError("Late outcome needs tau_days >= 1")
        elif self.tau_days is not None:
            raise ValueError(f"{self.kind.value} carries no tau_days")

    @classmethod
    def late(cls, tau_days: int) -> "ServiceOutcome":
        return cls(OutcomeKind.Late, int(tau_days))

    @classmethod
    def parse(cls, text: str) -> "ServiceOutcome":
        name, arg = _split_variant(text)
        kind = OutcomeKind(name)
        if kind is OutcomeKind.Late:
            return cls.late(int(arg))
        return cls(kind)

    @property
    def is_late(self):
        return self.kind is OutcomeKind.Late

    def __str__(self):
        if self.kind is OutcomeKind.Late:
            return f"Late({self.tau_days})"
        return self.kind.value


ServiceOutcome.ON_TIME = ServiceOutcome(OutcomeKind.OnTime)
ServiceOutcome.UNSERVED = ServiceOutcome(OutcomeKind.Unserved)


@dataclass(frozen=True)
class ServiceProfileRecord:
    """One request as recorded in the library's service profile.

    ``extensions`` holds columns the schema does not know about; they are
    carried through serialization and ignored by scoring.
    """

    request_id: str
    request_time: datetime
    user_id: str
    content_id: str
    content_type: ContentType
    content_hits: int
    content_availability: Availability
    arrangement_status: Arrangement
    notification_status: NotificationStatus
    user_acceptance: UserAcceptance
    content_delivery_time: datetime | None = None
    notification_time: datetime | None = None
    reasons_not_delivered: str | None = None
    excess_delay_days: int | None = None
    extensions: dict = field(default_factory=dict, compare=True)

    @property
    def delivered(self):
        return self.content_delivery_time is not None


class ViolationCode(str, enum.Enum):
    DELIVERY_BEFORE_REQUEST = "delivery_before_request"
    NOTIFICATION_BEFORE_REQUEST = "notification_before_request"
    NOTIFICATION_NOT_SENT = "notification_time_without_sent"
    NOTIFICATION_TIME_MISSING = "sent_without_notification_time"
    NEGATIVE_EXCESS_DELAY = "negative_excess_delay"
    REASONS_WITH_DELIVERY = "reasons_with_delivery"
    NONPOSITIVE_HITS = "nonpositive_content_hits"
    NEGATIVE_EXPECTED_DAYS = "negative_expected_days"


@dataclass(frozen=True)
class Violation:
    code: ViolationCode
    field: str
    message: str

    def __str__(self):
        return f"{self.code.value}: {self.message}"


def validate_record(record: ServiceProfileRecord) -> list[Violation]:
    """Return every invariant the record breaks, in a fixed order."""
    out = []
    if (
        record.content_delivery_time is not None
        and record.content_delivery_time < record.request_time
    ):
        out.append(Violation(
            ViolationCode.DELIVERY_BEFORE_REQUEST,
            "content_delivery_time",
            "delivery precedes request (temporal ordering)",
        ))
    if record.notification_time is not None:
        if record.notification_time < record.request_time:
            out.append(Violation(
                ViolationCode.NOTIFICATION_BEFORE_REQUEST,
                "notification_time",
                "notification precedes request (temporal ordering)",
            ))
        if record.notification_status is not NotificationStatus.Sent:
            out.append(Violation(
                ViolationCode.NOTIFICATION_NOT_SENT,
                "notification_status",
                "notification_time set but status is not Sent",
            ))
    elif record.notification_status is NotificationStatus.Sent:
        out.append(Violation(
            ViolationCode.NOTIFICATION_TIME_MISSING,
            "notification_time",
            "status Sent but no notification_time",
        ))
    if record.excess_delay_days is not None and record.excess_delay_days < 0:
        out.append(Violation(
            ViolationCode.NEGATIVE_EXCESS_DELAY,
            "excess_delay_days",
            f"excess delay {record.excess_delay_days} < 0",
        ))
    if record.reasons_not_delivered is not None and record.content_delivery_time is not None:
        out.append(Violation(
            ViolationCode.REASONS_WITH_DELIVERY,
            "reasons_not_delivered",
            "reasons_not_delivered and content_delivery_time are mutually exclusive",
        ))
    if record.content_hits < 1:
        out.append(Violation(
            ViolationCode.NONPOSITIVE_HITS,
            "content_hits",
            f"content_hits {record.content_hits} < 1",
        ))
    arr = record.arrangement_status
    if arr.kind is ArrangementKind.WillArrange and arr.expected_days < 0:
        out.append(Violation(
            ViolationCode.NEGATIVE_EXPECTED_DAYS,
            "arrangement_status",
            f"expected_days {arr.expected_days} < 0",
        ))
    return out
