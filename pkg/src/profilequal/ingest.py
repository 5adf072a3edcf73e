"""Parsing service-profile logs and turning records into model inputs.

Two on-disk formats are supported, both using the snake_case record field
names:

* ``records``: one JSON object per line (``LogFormat.RecordPerLine``)
* ``rows``: comma-separated with a header row (``LogFormat.DelimitedRows``);
  an empty cell means the optional field is absent

Timestamps are RFC 3339 and are normalised to UTC at second resolution.
All on-time/late decisions compare UTC calendar days.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
import logging
import warnings
from collections import Counter
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from typing import IO, Iterable, Sequence

from .credit_model import ServedCounts
from .errors import ClassificationError, ParseError, ValidationError
from .profile_model import (
    Arrangement,
    ArrangementKind,
    Availability,
    ContentType,
    NotificationStatus,
    OutcomeKind,
    ServiceOutcome,
    ServiceProfileRecord,
    UserAcceptance,
    Violation,
    utc_day,
    validate_record,
)

log = logging.getLogger(__name__)

FIELDS = (
    "request_id",
    "request_time",
    "user_id",
    "content_id",
    "content_type",
    "content_hits",
    "content_availability",
    "content_delivery_time",
    "arrangement_status",
    "notification_status",
    "notification_time",
    "user_acceptance",
    "reasons_not_delivered",
    "excess_delay_days",
)
REQUIRED = (
    "request_id",
    "request_time",
    "user_id",
    "content_id",
    "content_type",
    "content_availability",
    "arrangement_status",
    "notification_status",
    "user_acceptance",
)
VIOLATIONS_FIELD = "violations"


class LogFormat(enum.Enum):
    DelimitedRows = "rows"
    RecordPerLine = "records"


class TauConflictWarning(UserWarning):
    """Stored excess delay disagrees with the one derived from timestamps."""


# -- timestamps ---------------------------------------------------------------

def parse_timestamp(text: str) -> datetime:
    s = text.strip()
    if s[-1:] in ("Z", "z"):
        s = s[:-1] + "+00:00"
    ts = datetime.fromisoformat(s)
    if ts.tzinfo is None:
        raise ValueError(f"timestamp {text!r} has no UTC offset")
    return ts.astimezone(timezone.utc).replace(microsecond=0)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


# -- windows ------------------------------------------------------------------

@dataclass(frozen=True)
class Reject:
    """A parsed record that failed validation, kept with its source line."""

    line: int
    record: ServiceProfileRecord
    violations: tuple[Violation, ...]


@dataclass(frozen=True)
class ObservationWindow:
    start: datetime | None
    end: datetime | None
    records: tuple[ServiceProfileRecord, ...]
    rejects: tuple[Reject, ...] = ()

    def __post_init__(self):
        if (self.start is None) != (self.end is None):
            raise ValueError("window bounds must both be set or both be empty")
        if self.start is None:
            if self.records:
                raise ValueError("a window with records needs bounds")
            return
        if self.start > self.end:
            raise ValueError("window start after end")
        for rec in self.records:
            if not self.start <= rec.request_time <= self.end:
                raise ValueError(f"request {rec.request_id} outside the window")

    @classmethod
    def spanning(cls, records, rejects=()):
        records = tuple(records)
        if not records:
            return cls(None, None, records, tuple(rejects))
        times = [r.request_time for r in records]
        return cls(min(times), max(times), records, tuple(rejects))


# -- parsing ------------------------------------------------------------------

def _read_text(source) -> str:
    if isinstance(source, (bytes, bytearray)):
        return bytes(source).decode("utf-8-sig")
    if isinstance(source, str):
        return source
    data = source.read()
    if isinstance(data, bytes):
        return data.decode("utf-8-sig")
    return data


def _absent(value):
    return value is None or (isinstance(value, str) and value.strip() == "")


def _as_int(value, name):
    if isinstance(value, bool):
        raise ValueError(f"{name} must be an integer")
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, str):
        return int(value.strip())
    raise ValueError(f"{name} must be an integer, got {value!r}")


def _as_str(value):
    return value if isinstance(value, str) else json.dumps(value, sort_keys=True)


_CONVERTERS = {
    "request_id": str,
    "user_id": str,
    "content_id": str,
    "request_time": parse_timestamp,
    "content_delivery_time": parse_timestamp,
    "notification_time": parse_timestamp,
    "content_type": ContentType.parse,
    "content_availability": Availability,
    "arrangement_status": Arrangement.parse,
    "notification_status": NotificationStatus,
    "user_acceptance": UserAcceptance,
    "reasons_not_delivered": str,
}


def record_from_mapping(row: dict, line: int, source=None) -> ServiceProfileRecord:
    """Build a record from field name -> raw value; unknown keys become extensions."""
    kwargs = {}
    for name in REQUIRED:
        if _absent(row.get(name)):
            raise ParseError(line, name, "required field missing", source)
    for name in FIELDS:
        raw = row.get(name)
        if _absent(raw):
            continue
        try:
            if name in ("content_hits", "excess_delay_days"):
                kwargs[name] = _as_int(raw, name)
            else:
                conv = _CONVERTERS[name]
                if conv in (str, parse_timestamp) and not isinstance(raw, str):
                    raise ValueError(f"expected a string, got {raw!r}")
                if isinstance(raw, str) and conv is not str:
                    raw = raw.strip()
                kwargs[name] = conv(raw)
        except (ValueError, TypeError) as exc:
            raise ParseError(line, name, str(exc), source) from None
    kwargs.setdefault("content_hits", 1)
    extensions = {
        k: _as_str(v) for k, v in row.items()
        if k not in FIELDS and k is not None and not _absent(v)
    }
    return ServiceProfileRecord(**kwargs, extensions=extensions)


def _iter_record_lines(text, source):
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(lineno, "<line>", f"invalid JSON: {exc.msg}", source) from None
        if not isinstance(obj, dict):
            raise ParseError(lineno, "<line>", "expected a JSON object", source)
        yield lineno, obj


def _iter_rows(text, source):
    reader = csv.DictReader(io.StringIO(text, newline=""))
    if reader.fieldnames is None:
        return
    header = [h.strip() for h in reader.fieldnames]
    if len(set(header)) != len(header):
        raise ParseError(1, "<header>", "duplicate column names", source)
    reader.fieldnames = header
    for row in reader:
        if None in row:
            raise ParseError(reader.line_num, "<row>", "more cells than header columns", source)
        yield reader.line_num, row


def parse_log(
    source,
    fmt: LogFormat = LogFormat.RecordPerLine,
    *,
    max_rejects: int | None = None,
    source_name: str | None = None,
) -> ObservationWindow:
    """Parse a whole log into an observation window.

    Structural problems (bad JSON, missing required fields, unparsable
    values) raise ``ParseError`` immediately.  Records that parse but break
    a record invariant are collected in ``window.rejects``; ``ValidationError``
    is raised only once more than ``max_rejects`` of them have accumulated.

    ``content_hits`` is recomputed as the number of records in the file that
    request the same content; any value in the input is ignored.
    """
    fmt = LogFormat(fmt)
    text = _read_text(source)
    rows = _iter_record_lines(text, source_name) if fmt is LogFormat.RecordPerLine \
        else _iter_rows(text, source_name)
    parsed = [(line, record_from_mapping(row, line, source_name)) for line, row in rows]

    hits = Counter(rec.content_id for _, rec in parsed)
    records, rejects = [], []
    for line, rec in parsed:
        rec = dataclasses.replace(rec, content_hits=hits[rec.content_id])
        violations = validate_record(rec)
        if violations:
            rejects.append(Reject(line, rec, tuple(violations)))
            if max_rejects is not None and len(rejects) > max_rejects:
                raise ValidationError(rejects, max_rejects)
        else:
            records.append(rec)
    if rejects:
        log.info("quarantined %d of %d records", len(rejects), len(parsed))
    return ObservationWindow.spanning(records, rejects)


# -- serialization ------------------------------------------------------------

def record_to_mapping(record: ServiceProfileRecord) -> dict:
    out = {}
    for name in FIELDS:
        value = getattr(record, name)
        if value is None:
            out[name] = None
        elif isinstance(value, datetime):
            out[name] = format_timestamp(value)
        elif isinstance(value, enum.Enum):
            out[name] = value.value
        elif isinstance(value, (ContentType, Arrangement)):
            out[name] = str(value)
        else:
            out[name] = value
    for key in sorted(record.extensions):
        out[key] = record.extensions[key]
    return out


def write_log(
    records: Iterable[ServiceProfileRecord],
    stream: IO[str],
    fmt: LogFormat = LogFormat.RecordPerLine,
    *,
    violations: Sequence[Sequence[Violation]] | None = None,
):
    """Serialise records; ``violations`` (one list per record) adds a trailing column."""
    fmt = LogFormat(fmt)
    rows = [record_to_mapping(r) for r in records]
    if violations is not None:
        for row, vs in zip(rows, violations, strict=True):
            row[VIOLATIONS_FIELD] = [str(v) for v in vs]
    if fmt is LogFormat.RecordPerLine:
        for row in rows:
            stream.write(json.dumps(row, ensure_ascii=False) + "\n")
        return
    extra = sorted({k for row in rows for k in row if k not in FIELDS and k != VIOLATIONS_FIELD})
    header = list(FIELDS) + extra + ([VIOLATIONS_FIELD] if violations is not None else [])
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        cells = []
        for name in header:
            value = row.get(name)
            if value is None:
                cells.append("")
            elif isinstance(value, list):
                cells.append("; ".join(value))
            else:
                cells.append(str(value))
        writer.writerow(cells)


def dumps_log(records, fmt=LogFormat.RecordPerLine, **kwargs) -> str:
    buf = io.StringIO()
    write_log(records, buf, fmt, **kwargs)
    return buf.getvalue()


def write_rejects(rejects: Sequence[Reject], stream: IO[str], fmt=LogFormat.RecordPerLine):
    write_log([r.record for r in rejects], stream, fmt, violations=[r.violations for r in rejects])


# -- classification -----------------------------------------------------------

def agreed_day(record: ServiceProfileRecord) -> date | None:
    """Day the delivery was promised for, or None when nothing was agreed.

    Available content is due on the request day.  Content the library
    arranges is due ``expected_days`` later, but only once the user has
    accepted that timeline.
    """
    request_day = utc_day(record.request_time)
    if record.content_availability is Availability.Available:
        return request_day
    arr = record.arrangement_status
    if arr.kind is ArrangementKind.WillArrange and record.user_acceptance is UserAcceptance.Accepted:
        return date.fromordinal(request_day.toordinal() + arr.expected_days)
    return None


def classify(record: ServiceProfileRecord) -> ServiceOutcome:
    if record.reasons_not_delivered is not None or record.content_delivery_time is None:
        return ServiceOutcome.UNSERVED
    due = agreed_day(record)
    if due is None:
        raise ClassificationError(
            f"request {record.request_id}: delivered but no agreed day is derivable "
            f"(availability={record.content_availability.value}, "
            f"arrangement={record.arrangement_status}, "
            f"acceptance={record.user_acceptance.value})"
        )
    slip = (utc_day(record.content_delivery_time) - due).days
    if slip <= 0:
        return ServiceOutcome.ON_TIME
    return ServiceOutcome.late(slip)


def _derive_tau(record, outcome):
    if outcome is None:
        outcome = classify(record)
    computed = None
    if outcome.kind is OutcomeKind.Late:
        computed = outcome.tau_days
    elif outcome.kind is OutcomeKind.OnTime:
        computed = 0
    stored = record.excess_delay_days
    if stored is None:
        if computed is None:
            raise ClassificationError(
                f"request {record.request_id}: no excess delay recorded and none derivable"
            )
        return float(computed), None
    message = None
    if computed is not None and computed != stored:
        message = (
            f"request {record.request_id}: stored excess delay {stored} "
            f"differs from derived {computed}; using stored value"
        )
    return float(stored), message


def derive_tau(record: ServiceProfileRecord, outcome: ServiceOutcome | None = None) -> float:
    """Excess delay in days.

    The stored ``excess_delay_days`` column wins over the value derived from
    the timestamps; a disagreement emits ``TauConflictWarning``.
    """
    tau, message = _derive_tau(record, outcome)
    if message:
        warnings.warn(message, TauConflictWarning, stacklevel=2)
    return tau


# -- counting -----------------------------------------------------------------

class PolicyKind(enum.Enum):
    EXCLUDE = "exclude"
    LATE = "late"
    HORIZON = "horizon"


@dataclass(frozen=True)
class UnservedPolicy:
    """Where never-delivered requests go when scoring.

    ``exclude`` drops them, ``late`` counts all of them as late, and
    ``horizon`` counts only those older than ``horizon_days`` as late.
    """

    kind: PolicyKind = PolicyKind.HORIZON
    horizon_days: int = 90

    def __post_init__(self):
        if self.horizon_days < 0:
            raise ValueError("horizon must be >= 0 days")

    @classmethod
    def parse(cls, text: str) -> "UnservedPolicy":
        name, _, arg = text.strip().partition(":")
        kind = PolicyKind(name)
        if kind is PolicyKind.HORIZON:
            return cls(kind, int(arg)) if arg else cls(kind)
        if arg:
            raise ValueError(f"policy {name!r} takes no argument")
        return cls(kind)

    def counts_as_late(self, record: ServiceProfileRecord, as_of: date) -> bool:
        if self.kind is PolicyKind.LATE:
            return True
        if self.kind is PolicyKind.EXCLUDE:
            return False
        return (as_of - utc_day(record.request_time)).days > self.horizon_days

    def __str__(self):
        if self.kind is PolicyKind.HORIZON:
            return f"horizon:{self.horizon_days}"
        return self.kind.value


@dataclass(frozen=True)
class ScoredRequest:
    """A request that enters both models, with its delay for the delay model."""

    record: ServiceProfileRecord
    outcome: ServiceOutcome
    late: bool
    tau: float


@dataclass(frozen=True)
class ClassifiedWindow:
    window: ObservationWindow
    outcomes: tuple[tuple[ServiceProfileRecord, ServiceOutcome], ...]
    counts: ServedCounts
    unserved: int
    unserved_as_late: int
    scored: tuple[ScoredRequest, ...]
    excluded: tuple[ServiceProfileRecord, ...] = ()
    unclassifiable: tuple[tuple[ServiceProfileRecord, str], ...] = ()
    warnings: tuple[str, ...] = ()
    policy: UnservedPolicy = field(default_factory=UnservedPolicy)

    @property
    def residual_unserved(self):
        return self.unserved - self.unserved_as_late


def _is_rejected_timeline(record):
    return (
        record.arrangement_status.kind is ArrangementKind.WillArrange
        and record.user_acceptance is UserAcceptance.Rejected
    )


def build_counts(
    outcomes: Iterable[tuple[ServiceProfileRecord, ServiceOutcome]],
    policy: UnservedPolicy,
    as_of: date | None,
) -> ServedCounts:
    """(H, L) for the credit model under ``policy``."""
    h = l = 0
    for record, outcome in outcomes:
        if outcome.kind is OutcomeKind.OnTime:
            h += 1
        elif outcome.kind is OutcomeKind.Late:
            l += 1
        elif as_of is not None and policy.counts_as_late(record, as_of):
            l += 1
    return ServedCounts(h, l)


def classify_window(
    window: ObservationWindow,
    policy: UnservedPolicy | None = None,
    *,
    include_rejected: bool = False,
    as_of: date | None = None,
) -> ClassifiedWindow:
    """Classify every record and assemble the inputs of both models.

    Requests whose user rejected the procurement timeline are left out
    unless ``include_rejected`` is set, in which case they count as
    unserved.  Delivered records with no derivable agreed day are set aside
    in ``unclassifiable``.  ``as_of`` (default: the window end) is the day
    unserved ages are measured against.
    """
    policy = policy or UnservedPolicy()
    if as_of is None and window.end is not None:
        as_of = utc_day(window.end)
    outcomes, excluded, unclassifiable = [], [], []
    for record in window.records:
        if _is_rejected_timeline(record):
            if not include_rejected:
                excluded.append(record)
                continue
            outcomes.append((record, ServiceOutcome.UNSERVED))
            continue
        try:
            outcomes.append((record, classify(record)))
        except ClassificationError as exc:
            unclassifiable.append((record, str(exc)))
            log.warning("%s", exc)

    scored, notes = [], []
    unserved = unserved_as_late = 0
    for record, outcome in outcomes:
        if outcome.kind is OutcomeKind.Unserved:
            unserved += 1
            if not policy.counts_as_late(record, as_of):
                continue
            unserved_as_late += 1
            if record.excess_delay_days is not None:
                tau = float(record.excess_delay_days)
            else:
                due = agreed_day(record) or utc_day(record.request_time)
                tau = float(max(0, (as_of - due).days))
            scored.append(ScoredRequest(record, outcome, True, tau))
            continue
        tau, message = _derive_tau(record, outcome)
        if message:
            notes.append(message)
            log.warning("%s", message)
        scored.append(ScoredRequest(record, outcome, outcome.is_late, tau))

    return ClassifiedWindow(
        window=window,
        outcomes=tuple(outcomes),
        counts=build_counts(outcomes, policy, as_of),
        unserved=unserved,
        unserved_as_late=unserved_as_late,
        scored=tuple(scored),
        excluded=tuple(excluded),
        unclassifiable=tuple(unclassifiable),
        warnings=tuple(notes),
        policy=policy,
    )
