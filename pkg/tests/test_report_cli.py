import json

import pytest

from conftest import make_record
from profilequal.cli import main, score_command
from profilequal.ingest import LogFormat, dumps_log
from profilequal.report import CreditSummary, QualityReport, RecordCounts, alert_evaluation
from profilequal.simulate import WorkloadSpec, generate


def _write_sim(path, fmt=LogFormat.RecordPerLine, **kwargs):
    spec = dict(seed=42, n_requests=400)
    spec.update(kwargs)
    result = generate(WorkloadSpec(**spec))
    path.write_text(dumps_log(result.window.records, fmt), encoding="utf-8")
    return result


def _report(phi, h=5, l=5):
    return QualityReport(
        window_start=None, window_end=None, policy="exclude",
        counts=RecordCounts(total=h + l, h=h, l=l, unserved=0, unserved_as_late=0),
        credit=CreditSummary(c=1, p=1, h=h, l=l, phi=phi, phi_min=-0.5, phi_max=0.5,
                             d_phi_d_h=0.0, d_phi_d_l=0.0),
    )


# -- alerts -------------------------------------------------------------------

def test_negative_quality_alert():
    [alert] = alert_evaluation(_report(-0.1, h=9, l=11))
    assert alert.code == "quality_negative"
    assert "quality negative" in alert.message
    assert (alert.h, alert.l) == (9, 11)


def test_no_alert_above_threshold():
    assert alert_evaluation(_report(0.4)) == []


def test_configurable_threshold():
    [alert] = alert_evaluation(_report(0.4), threshold=0.45)
    assert alert.code == "quality_below_threshold" and alert.threshold == 0.45


# -- score --------------------------------------------------------------------

def test_score_no_late(tmp_path):
    log = tmp_path / "log.jsonl"
    _write_sim(log, late_prob_given_available=0.0, unserved_prob=0.0)
    report = score_command(log, credit=1, penalty=1)
    assert report.credit.phi == 0.5
    assert report.delay.mean == 2.0
    assert report.alerts == []


def test_score_reports_are_consistent(tmp_path):
    log = tmp_path / "log.csv"
    result = _write_sim(log, LogFormat.DelimitedRows, unserved_prob=0.1, availability_prob=0.5)
    report = score_command(log, policy="late", penalty_per_day=1.5, credit=2, penalty=1)
    assert report.counts.total == 400
    assert report.counts.h == result.counts.h
    assert report.counts.l == result.counts.l + result.unserved
    assert report.delay.min <= report.delay.mean <= report.delay.max
    assert report.credit.phi_min <= report.credit.phi <= report.credit.phi_max
    assert sum(b.counts.h for b in report.breakdown.values()) == report.counts.h
    assert sum(b.counts.l for b in report.breakdown.values()) == report.counts.l
    assert sum(b.counts.total for b in report.breakdown.values()) == report.counts.total
    assert sum(b.delay.n for b in report.breakdown.values() if b.delay) == report.delay.n
    hits = report.content_hits
    assert hits == sorted(hits, key=lambda kv: (-kv[1], kv[0]))
    assert sum(n for _, n in hits) >= len(hits)


def test_breakdown_is_scored_per_partition(tmp_path):
    log = tmp_path / "log.jsonl"
    _write_sim(log, late_prob_given_available=0.3, unserved_prob=0.0)
    report = score_command(log, model="credit")
    for b in report.breakdown.values():
        assert b.credit.phi == pytest.approx((b.counts.h - b.counts.l) / (2 * (b.counts.h + b.counts.l)))
    assert report.delay is None


def test_report_json_schema(tmp_path):
    log = tmp_path / "log.jsonl"
    _write_sim(log)
    doc = json.loads(score_command(log).to_json())
    assert doc["schema_version"] == 1
    assert set(doc) >= {"window", "counts", "delay", "credit", "breakdown", "alerts", "content_hits"}


def test_rejected_records_are_listed(tmp_path):
    log = tmp_path / "log.jsonl"
    bad = make_record(request_id="BAD", excess_delay_days=-1)
    log.write_text(dumps_log([make_record(), bad]), encoding="utf-8")
    rejects = tmp_path / "rejects.jsonl"
    report = score_command(log, rejects_path=rejects)
    assert report.counts.rejected == 1
    assert report.rejects[0]["request_id"] == "BAD"
    assert json.loads(rejects.read_text())["violations"]


# -- cli ----------------------------------------------------------------------

def test_cli_score_and_determinism(tmp_path):
    log = tmp_path / "log.jsonl"
    _write_sim(log)
    outs = []
    for i in range(2):
        out = tmp_path / f"r{i}.json"
        assert main(["score", str(log), "--out", str(out), "--unserved-policy", "late"]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_cli_empty_input(tmp_path, capsys):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    assert main(["score", str(empty)]) == 2
    assert "no scorable requests" in capsys.readouterr().err


def test_cli_parse_failure(tmp_path, capsys):
    log = tmp_path / "bad.jsonl"
    log.write_text('{"request_id": "R1"}\n')
    assert main(["score", str(log)]) == 1
    assert "bad.jsonl:1" in capsys.readouterr().err


def test_cli_reject_cap_is_a_validation_failure(tmp_path):
    log = tmp_path / "log.jsonl"
    log.write_text(dumps_log([make_record(excess_delay_days=-1)]))
    assert main(["score", str(log), "--max-rejects", "0"]) == 1


@pytest.mark.parametrize("extra", [
    ["--credit", "0", "--penalty", "0"],
    ["--penalty-per-day", "-1"],
    ["--unserved-policy", "sometimes"],
    ["--model", "quantum"],
])
def test_cli_invalid_parameters(tmp_path, extra):
    log = tmp_path / "log.jsonl"
    _write_sim(log, n_requests=20)
    assert main(["score", str(log), *extra]) == 3


def test_cli_alert_on_negative_quality(tmp_path, caplog):
    log = tmp_path / "log.jsonl"
    _write_sim(log, late_prob_given_available=0.9, unserved_prob=0.0)
    out = tmp_path / "r.json"
    assert main(["score", str(log), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["credit"]["phi"] < 0
    assert doc["alerts"][0]["code"] == "quality_negative"


def test_cli_simulate(tmp_path):
    out = tmp_path / "sim.csv"
    assert main(["simulate", "--seed", "5", "--n", "50", "--format", "rows", "--out", str(out)]) == 0
    truth = json.loads((tmp_path / "sim.csv.truth.json").read_text())
    assert truth["counts"]["h"] + truth["counts"]["l"] + truth["counts"]["unserved"] == 50
    assert main(["score", str(out), "--unserved-policy", "exclude", "--out", str(tmp_path / "r.json")]) == 0
    doc = json.loads((tmp_path / "r.json").read_text())
    assert (doc["counts"]["h"], doc["counts"]["l"]) == (truth["counts"]["h"], truth["counts"]["l"])


def test_cli_simulate_weights_and_fixed_tau(tmp_path):
    out = tmp_path / "sim.jsonl"
    assert main(["simulate", "--n", "30", "--tau-fixed", "2", "--weights", "Video=2,Other(podcast)=1",
                 "--out", str(out)]) == 0
    types = {json.loads(line)["content_type"] for line in out.read_text().splitlines()}
    assert types <= {"Video", "Other(podcast)"}


def test_cli_curves(tmp_path):
    out = tmp_path / "fig3.tsv"
    assert main(["curves", "fig3", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("#") and len(lines) == 1 + 2 * 41
    assert main(["curves", "fig1", "--tau-step", "0.3"]) == 3
    assert main(["curves", "fig2", "--series", "0.5", "--format", "records",
                 "--out", str(tmp_path / "f2.jsonl")]) == 0


def test_cli_validate(tmp_path, capsys):
    log = tmp_path / "log.jsonl"
    log.write_text(dumps_log([make_record(), make_record(request_id="R2", content_hits=1,
                                                        excess_delay_days=-4)]))
    rejects = tmp_path / "rej.jsonl"
    assert main(["validate", str(log), "--rejects", str(rejects)]) == 1
    out = capsys.readouterr().out
    assert "negative_excess_delay" in out and "2 records, 1 invalid" in out
    good = tmp_path / "good.jsonl"
    good.write_text(dumps_log([make_record()]))
    assert main(["validate", str(good)]) == 0


def test_cli_bad_usage_exit_code():
    assert main(["score"]) == 3
    assert main(["--version"]) == 0
