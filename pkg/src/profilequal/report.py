"""Aggregate quality reports and alerting.

A report is serialised as indented JSON with a ``schema_version`` field.
Key order is fixed and floats are written with ``repr`` precision, so the
same input and flags always give the same bytes.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field

import numpy as np

from .credit_model import CreditParams, ServedCounts, credit_quality, credit_sensitivity
from .delay_model import average_quality, delay_phi
from .errors import NoScorableRequestsError
from .ingest import ClassifiedWindow, format_timestamp
from .profile_model import OutcomeKind

SCHEMA_VERSION = 1
MODELS = ("delay", "credit", "both")


@dataclass(frozen=True)
class RecordCounts:
    total: int
    h: int
    l: int
    unserved: int
    unserved_as_late: int
    excluded: int = 0
    unclassifiable: int = 0
    rejected: int = 0


@dataclass(frozen=True)
class DelaySummary:
    p: float
    n: int
    mean: float
    min: float
    max: float
    phi_max: float
    phi_min: float = 1.0


@dataclass(frozen=True)
class CreditSummary:
    c: float
    p: float
    h: int
    l: int
    phi: float
    phi_min: float
    phi_max: float
    d_phi_d_h: float
    d_phi_d_l: float


@dataclass(frozen=True)
class Alert:
    code: str
    message: str
    phi: float
    threshold: float
    h: int
    l: int


@dataclass(frozen=True)
class Breakdown:
    counts: RecordCounts
    delay: DelaySummary | None = None
    credit: CreditSummary | None = None


@dataclass
class QualityReport:
    window_start: str | None
    window_end: str | None
    counts: RecordCounts
    policy: str
    delay: DelaySummary | None = None
    credit: CreditSummary | None = None
    breakdown: dict[str, Breakdown] = field(default_factory=dict)
    content_hits: list[tuple[str, int]] = field(default_factory=list)
    alerts: list[Alert] = field(default_factory=list)
    rejects: list[dict] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    def to_dict(self):
        return {
            "schema_version": self.schema_version,
            "window": {"start": self.window_start, "end": self.window_end},
            "unserved_policy": self.policy,
            "counts": asdict(self.counts),
            "delay": asdict(self.delay) if self.delay else None,
            "credit": asdict(self.credit) if self.credit else None,
            "breakdown": {
                name: {
                    "counts": asdict(b.counts),
                    "delay": asdict(b.delay) if b.delay else None,
                    "credit": asdict(b.credit) if b.credit else None,
                }
                for name, b in self.breakdown.items()
            },
            "content_hits": [{"content_id": cid, "hits": n} for cid, n in self.content_hits],
            "alerts": [asdict(a) for a in self.alerts],
            "rejects": self.rejects,
            "warnings": self.warnings,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"


def summarize_delay(taus, p) -> DelaySummary:
    phis = np.atleast_1d(delay_phi(p, np.asarray(taus, dtype=float)))
    return DelaySummary(
        p=float(p),
        n=int(phis.size),
        mean=average_quality(phis),
        min=float(phis.min()),
        max=float(phis.max()),
        phi_max=1.0 + p,
    )


def summarize_credit(counts: ServedCounts, params: CreditParams) -> CreditSummary:
    q = credit_quality(params, counts)
    s = credit_sensitivity(counts)
    return CreditSummary(
        c=float(params.c), p=float(params.p), h=counts.h, l=counts.l,
        phi=q.phi, phi_min=q.phi_min, phi_max=q.phi_max,
        d_phi_d_h=s.d_phi_d_h, d_phi_d_l=s.d_phi_d_l,
    )


def alert_evaluation(report: QualityReport, threshold: float = 0.0) -> list[Alert]:
    """Alerts for a credit score below ``threshold`` (default: negative quality)."""
    credit = report.credit
    if credit is None or not credit.phi < threshold:
        return []
    if credit.phi < 0:
        code, message = "quality_negative", "quality negative"
    else:
        code, message = "quality_below_threshold", "quality below threshold"
    return [Alert(
        code=code,
        message=f"{message}: phi={credit.phi!r} < {threshold!r} (H={credit.h}, L={credit.l})",
        phi=credit.phi,
        threshold=float(threshold),
        h=credit.h,
        l=credit.l,
    )]


def _tally(outcomes, scored):
    c = Counter(o.kind for _, o in outcomes)
    unserved_late = sum(1 for s in scored if s.outcome.kind is OutcomeKind.Unserved)
    return c[OutcomeKind.OnTime], c[OutcomeKind.Late], c[OutcomeKind.Unserved], unserved_late


def build_report(
    classified: ClassifiedWindow,
    *,
    model: str = "both",
    penalty_per_day: float = 1.0,
    credit_params: CreditParams | None = None,
    threshold: float = 0.0,
) -> QualityReport:
    """Score a classified window under the selected model(s).

    Raises ``NoScorableRequestsError`` when nothing enters the scores.
    Content-type breakdowns are scored on their own partition of records;
    a partition with nothing to score reports ``None`` for that model.
    """
    if model not in MODELS:
        raise ValueError(f"model must be one of {MODELS}, got {model!r}")
    credit_params = credit_params or CreditParams(1.0, 1.0)
    want_delay = model in ("delay", "both")
    want_credit = model in ("credit", "both")
    window = classified.window
    if not classified.scored:
        raise NoScorableRequestsError()

    _, _, unserved, unserved_late = _tally(classified.outcomes, classified.scored)
    counts = RecordCounts(
        total=len(window.records),
        h=classified.counts.h,
        l=classified.counts.l,
        unserved=unserved,
        unserved_as_late=unserved_late,
        excluded=len(classified.excluded),
        unclassifiable=len(classified.unclassifiable),
        rejected=len(window.rejects),
    )

    report = QualityReport(
        window_start=format_timestamp(window.start) if window.start else None,
        window_end=format_timestamp(window.end) if window.end else None,
        counts=counts,
        policy=str(classified.policy),
    )
    if want_delay:
        report.delay = summarize_delay([s.tau for s in classified.scored], penalty_per_day)
    if want_credit:
        report.credit = summarize_credit(classified.counts, credit_params)

    outcomes_by_type = defaultdict(list)
    for rec, out in classified.outcomes:
        outcomes_by_type[str(rec.content_type)].append((rec, out))
    scored_by_type = defaultdict(list)
    for s in classified.scored:
        scored_by_type[str(s.record.content_type)].append(s)
    records_by_type = Counter(str(r.content_type) for r in window.records)
    excluded_by_type = Counter(str(r.content_type) for r in classified.excluded)
    unclass_by_type = Counter(str(r.content_type) for r, _ in classified.unclassifiable)

    for name in sorted(records_by_type):
        scored = scored_by_type[name]
        h_t, l_t, u_t, ul_t = _tally(outcomes_by_type[name], scored)
        sub = ServedCounts(h_t, l_t + ul_t)
        report.breakdown[name] = Breakdown(
            counts=RecordCounts(
                total=records_by_type[name], h=sub.h, l=sub.l,
                unserved=u_t, unserved_as_late=ul_t,
                excluded=excluded_by_type[name], unclassifiable=unclass_by_type[name],
            ),
            delay=summarize_delay([s.tau for s in scored], penalty_per_day)
            if want_delay and scored else None,
            credit=summarize_credit(sub, credit_params) if want_credit and sub.total else None,
        )

    hits = {}
    for rec in window.records:
        hits[rec.content_id] = rec.content_hits
    report.content_hits = sorted(hits.items(), key=lambda kv: (-kv[1], kv[0]))
    report.rejects = [
        {"line": r.line, "request_id": r.record.request_id,
         "violations": [v.code.value for v in r.violations]}
        for r in window.rejects
    ] + [
        {"line": None, "request_id": rec.request_id, "violations": ["unclassifiable"]}
        for rec, _ in classified.unclassifiable
    ]
    report.warnings = list(classified.warnings)
    report.alerts = alert_evaluation(report, threshold)
    return report
