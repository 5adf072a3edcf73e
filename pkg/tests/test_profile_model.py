import pytest

from conftest import make_record, ts
from profilequal.profile_model import (
    Arrangement,
    ContentType,
    NotificationStatus,
    OutcomeKind,
    ServiceOutcome,
    ViolationCode,
    validate_record,
)


def test_valid_delivered_record_has_no_violations(record):
    assert validate_record(record) == []


def test_delivery_before_request():
    rec = make_record(content_delivery_time=ts("2024-01-10T08:59:59"))
    [v] = validate_record(rec)
    assert v.code is ViolationCode.DELIVERY_BEFORE_REQUEST
    assert "temporal ordering" in v.message


def test_reasons_and_delivery_are_exclusive():
    rec = make_record(reasons_not_delivered="out of print")
    [v] = validate_record(rec)
    assert v.code is ViolationCode.REASONS_WITH_DELIVERY
    assert "mutually exclusive" in v.message


# each case breaks exactly one invariant
SINGLE_VIOLATIONS = [
    (dict(content_delivery_time=ts("2024-01-09T23:00:00")), ViolationCode.DELIVERY_BEFORE_REQUEST),
    (dict(notification_status=NotificationStatus.Sent,
          notification_time=ts("2024-01-10T08:00:00")), ViolationCode.NOTIFICATION_BEFORE_REQUEST),
    (dict(notification_time=ts("2024-01-10T09:30:00")), ViolationCode.NOTIFICATION_NOT_SENT),
    (dict(notification_status=NotificationStatus.Sent), ViolationCode.NOTIFICATION_TIME_MISSING),
    (dict(excess_delay_days=-1), ViolationCode.NEGATIVE_EXCESS_DELAY),
    (dict(reasons_not_delivered="lost"), ViolationCode.REASONS_WITH_DELIVERY),
    (dict(content_hits=0), ViolationCode.NONPOSITIVE_HITS),
    (dict(arrangement_status=Arrangement.will_arrange(-2)), ViolationCode.NEGATIVE_EXPECTED_DAYS),
]


@pytest.mark.parametrize("overrides,code", SINGLE_VIOLATIONS, ids=lambda x: getattr(x, "value", None))
def test_each_invariant_maps_to_one_code(overrides, code):
    assert [v.code for v in validate_record(make_record(**overrides))] == [code]


def test_every_code_is_covered():
    assert {code for _, code in SINGLE_VIOLATIONS} == set(ViolationCode)


def test_validation_is_deterministic():
    rec = make_record(content_hits=0, excess_delay_days=-3)
    assert validate_record(rec) == validate_record(rec)
    assert len(validate_record(rec)) == 2


def test_undelivered_with_reason_is_valid():
    assert validate_record(make_record(content_delivery_time=None, reasons_not_delivered="lost")) == []


@pytest.mark.parametrize("text", ["Ebook", "PhysicalBook", "Other(audio book)", "Thesis"])
def test_content_type_round_trip(text):
    assert str(ContentType.parse(text)) == text


@pytest.mark.parametrize("text", ["Other", "Other()", "Other(  )", "Magazine", "Ebook(x)"])
def test_content_type_rejects(text):
    with pytest.raises(ValueError):
        ContentType.parse(text)


@pytest.mark.parametrize("text", ["NotNeeded", "WillArrange(7)", "WillNotArrange", "WillArrange(0)"])
def test_arrangement_round_trip(text):
    assert str(Arrangement.parse(text)) == text


@pytest.mark.parametrize("text", ["WillArrange", "WillArrange(x)", "NotNeeded(3)", "Soon"])
def test_arrangement_rejects(text):
    with pytest.raises(ValueError):
        Arrangement.parse(text)


def test_outcome_late_needs_positive_tau():
    with pytest.raises(ValueError):
        ServiceOutcome.late(0)
    assert ServiceOutcome.parse("Late(3)") == ServiceOutcome.late(3)
    assert ServiceOutcome.parse("OnTime").kind is OutcomeKind.OnTime
    assert str(ServiceOutcome.UNSERVED) == "Unserved"


def test_records_are_immutable(record):
    with pytest.raises(AttributeError):
        record.request_id = "other"
