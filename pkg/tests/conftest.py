from datetime import datetime, timezone

import pytest

from profilequal.profile_model import (
    Arrangement,
    Availability,
    ContentType,
    NotificationStatus,
    ServiceProfileRecord,
    UserAcceptance,
)


def ts(text):
    return datetime.fromisoformat(text).replace(tzinfo=timezone.utc)


def make_record(**overrides):
    """A valid, delivered-on-time record; override any field."""
    fields = dict(
        request_id="R1",
        request_time=ts("2024-01-10T09:00:00"),
        user_id="U1",
        content_id="C1",
        content_type=ContentType("Ebook"),
        content_hits=1,
        content_availability=Availability.Available,
        arrangement_status=Arrangement.not_needed(),
        notification_status=NotificationStatus.NotSent,
        user_acceptance=UserAcceptance.NotApplicable,
        content_delivery_time=ts("2024-01-10T10:00:00"),
    )
    fields.update(overrides)
    return ServiceProfileRecord(**fields)


def arranged(expected_days, delivered, request="2024-01-10T09:00:00", **overrides):
    fields = dict(
        request_time=ts(request),
        content_availability=Availability.NotAvailable,
        arrangement_status=Arrangement.will_arrange(expected_days),
        notification_status=NotificationStatus.Sent,
        notification_time=ts(request),
        user_acceptance=UserAcceptance.Accepted,
        content_delivery_time=ts(delivered) if delivered else None,
    )
    fields.update(overrides)
    return make_record(**fields)


@pytest.fixture
def record():
    return make_record()


_ACCEPTANCE = {}


def pytest_configure(config):
    config._acceptance_results = _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE):
        status, title = _ACCEPTANCE[key]
        terminalreporter.write_line(f"{status}  criterion {key:>2}: {title}")
