import pytest

from profilequal.credit_model import CreditParams, credit_quality
from profilequal.ingest import LogFormat, classify, derive_tau, dumps_log, parse_log
from profilequal.profile_model import ContentType, OutcomeKind, validate_record
from profilequal.simulate import TauDistribution, WorkloadSpec, generate

# exact binomial(10000, 0.3) 99% central interval, computed with scipy.stats.binom.interval
LATE_SHARE_99 = (0.2882, 0.3118)


def test_same_seed_same_bytes():
    spec = WorkloadSpec(seed=42, n_requests=500)
    a, b = generate(spec), generate(spec)
    for fmt in LogFormat:
        assert dumps_log(a.window.records, fmt) == dumps_log(b.window.records, fmt)
    assert a.truth_json() == b.truth_json()


def test_different_seeds_differ():
    a = generate(WorkloadSpec(seed=1, n_requests=50))
    b = generate(WorkloadSpec(seed=2, n_requests=50))
    assert dumps_log(a.window.records) != dumps_log(b.window.records)


def test_records_are_valid():
    result = generate(WorkloadSpec(seed=7, n_requests=2000, availability_prob=0.5, unserved_prob=0.1))
    assert all(validate_record(r) == [] for r in result.window.records)


def test_no_late_no_unserved_reaches_the_maximum():
    result = generate(WorkloadSpec(seed=3, n_requests=300, late_prob_given_available=0.0, unserved_prob=0.0))
    assert result.counts.l == 0 and result.unserved == 0
    q = credit_quality(CreditParams(2, 1), result.counts)
    assert q.phi == q.phi_max == 2 / 3


def test_late_share_is_binomial():
    result = generate(WorkloadSpec(seed=2024, n_requests=10_000, late_prob_given_available=0.3,
                                   unserved_prob=0.0))
    share = result.counts.l / result.counts.total
    assert LATE_SHARE_99[0] <= share <= LATE_SHARE_99[1]


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("record_delay", [True, False])
def test_classify_recovers_ground_truth(seed, record_delay):
    spec = WorkloadSpec(seed=seed, n_requests=400, availability_prob=0.6, unserved_prob=0.1,
                        late_prob_given_available=0.4, record_excess_delay=record_delay)
    result = generate(spec)
    reparsed = parse_log(dumps_log(result.window.records))
    assert reparsed.rejects == ()
    assert tuple(classify(r) for r in reparsed.records) == result.outcomes


@pytest.mark.parametrize("record_delay", [True, False])
def test_fixed_delay(record_delay):
    result = generate(WorkloadSpec(seed=11, n_requests=500, late_prob_given_available=0.5,
                                   tau_distribution=TauDistribution.fixed(4),
                                   record_excess_delay=record_delay))
    late = [(r, o) for r, o in zip(result.window.records, result.outcomes) if o.kind is OutcomeKind.Late]
    assert late
    assert all(derive_tau(r, o) == 4 for r, o in late)


def test_geometric_mean_delay():
    result = generate(WorkloadSpec(seed=5, n_requests=20_000, late_prob_given_available=1.0,
                                   unserved_prob=0.0, tau_distribution=TauDistribution.geometric(3)))
    taus = [o.tau_days for o in result.outcomes]
    assert min(taus) >= 1
    assert sum(taus) / len(taus) == pytest.approx(3.0, abs=0.1)


def test_content_type_weights():
    spec = WorkloadSpec(seed=9, n_requests=200, n_contents=50,
                        content_type_weights={ContentType("Video"): 1.0, ContentType("Thesis"): 0.0})
    assert {r.content_type for r in generate(spec).window.records} == {ContentType("Video")}


@pytest.mark.parametrize("kwargs", [
    dict(seed=-1), dict(seed=2**64), dict(n_requests=0), dict(unserved_prob=1.5),
    dict(availability_prob=-0.1), dict(content_type_weights={ContentType("Video"): 0.0}),
])
def test_spec_validation(kwargs):
    base = dict(seed=0, n_requests=10)
    base.update(kwargs)
    with pytest.raises(ValueError):
        WorkloadSpec(**base)


@pytest.mark.parametrize("kind,value", [("geometric", 0.5), ("fixed", 0), ("fixed", 2.5), ("poisson", 3)])
def test_tau_distribution_validation(kind, value):
    with pytest.raises(ValueError):
        TauDistribution(kind, value)
