import io
import math

import numpy as np
import pytest

import dvspy.metrics
from dvspy.errors import ConfigError, NumericalFailure
from dvspy.glm import GAUSSIAN
from dvspy.metrics import (COLUMNS, ReplicationReport, compute_metrics,
                           resolve_methods, run_campaign,
                           run_partition_study)
from dvspy.screen import DvsOptions, run_dvs
from dvspy.simulate import ScenarioSpec, pooled
from helper import make_shards, strong_beta


def test_hand_example():
    truth = {0, 1, 2, 3, 4}
    r = compute_metrics([truth, set(), truth | {99}], truth)
    assert r.T == 3
    assert r.sc == 2 / 3
    assert r.psr == 2 / 3
    assert r.fdr == 1 / 18
    assert r.ams == 11 / 3
    assert r.cf == 1 / 3
    assert r.failures == 0
    assert r.selections is None


def test_perfect_selection():
    truth = {3, 7}
    r = compute_metrics([{3, 7}] * 4, truth, retain=True)
    assert (r.sc, r.cf, r.ams, r.psr, r.fdr) == (1.0, 1.0, 2.0, 1.0, 0.0)
    assert r.to_dict()['selections'] == [[4, 8]] * 4


def test_selecting_everything():
    truth = set(range(5))
    r = compute_metrics([set(range(6000))], truth)
    assert r.sc == 1.0
    assert r.psr == 1.0
    assert r.cf == 0.0
    assert r.ams == 6000.0
    assert r.fdr == 5995 / 6000


def test_invalid_input():
    with pytest.raises(ConfigError):
        compute_metrics([{1}], set())
    with pytest.raises(ConfigError):
        compute_metrics([], {1})


def test_failed_report():
    r = ReplicationReport.failed('dvs', 3)
    assert r.T == 0
    assert r.failures == 3
    assert all(math.isnan(v) for v in r.values())


def test_resolve_methods():
    assert resolve_methods([' DVS', 'Pearson', 'dvs']) == ['dvs', 'pearson']
    with pytest.raises(ConfigError) as e:
        resolve_methods(['dvs', 'pearsn'])
    assert 'dvs' in str(e.value)
    assert 'pearsn' in str(e.value)
    with pytest.raises(ConfigError):
        resolve_methods([])


SPEC = ScenarioSpec('1.2', N=200, p=20, m=4, seed=3)
OPTIONS = DvsOptions(k_max=6)


def test_campaign_rows_and_invariants():
    table = run_campaign(SPEC, ['dvs', 'pearson'], 3, options=OPTIONS)
    assert [r.method for r in table.reports] == \
        ['dvs', 'pearson', 'pearson@dvs']
    assert table.baseline_d == 20
    pearson = table.report('pearson')
    # d equals p, so the whole covariate set is kept
    assert pearson.sc == 1.0
    assert pearson.ams == 20.0
    for r in table.reports:
        assert r.T == 3
        assert r.cf <= r.sc
        assert r.psr >= r.cf
        assert 0.0 <= r.fdr <= 1.0
    with pytest.raises(KeyError):
        table.report('kendall')


def test_campaign_is_deterministic():
    a = run_campaign(SPEC, ['dvs', 'pearson'], 3, options=OPTIONS,
                     baseline_d=5)
    b = run_campaign(SPEC, ['dvs', 'pearson'], 3, options=OPTIONS,
                     baseline_d=5, parallel=3)
    assert a.to_dict() == b.to_dict()


def test_campaign_generates_once_per_replication(monkeypatch):
    seeds = []
    real = dvspy.metrics.generate

    def counting(spec):
        seeds.append(spec.seed)
        return real(spec)

    monkeypatch.setattr(dvspy.metrics, 'generate', counting)
    table = run_campaign(SPEC, ['pearson'], 3, baseline_d=5)
    assert sorted(seeds) == [SPEC.seed + t for t in (1, 2, 3)]
    assert table.report('pearson').T == 3


def test_campaign_csv():
    table = run_campaign(SPEC, ['pearson'], 2, baseline_d=6)
    f = io.StringIO()
    table.write_csv(f)
    lines = f.getvalue().splitlines()
    assert lines[0] == ','.join(('scenario', 'method', 'T') + COLUMNS
                                + ('failures',))
    assert len(lines) == 2
    assert lines[1].startswith('1.2,pearson,2,')


def test_failures_are_excluded(monkeypatch):
    calls = []

    def flaky(cluster, family, options):
        calls.append(1)
        if len(calls) == 2:
            raise NumericalFailure('step-size ceiling reached', k=1)
        return run_dvs(cluster, family, options)

    monkeypatch.setattr(dvspy.metrics, 'run_dvs', flaky)
    table = run_campaign(SPEC, ['dvs', 'pearson'], 3, options=OPTIONS,
                         baseline_d=5)
    assert table.report('dvs').failures == 1
    assert table.report('dvs').T == 2
    assert table.report('pearson@dvs').failures == 1
    assert table.report('pearson').failures == 0
    assert table.report('pearson').T == 3


def test_campaign_where_every_replication_fails(monkeypatch):
    def broken(cluster, family, options):
        raise NumericalFailure('step-size ceiling reached')

    monkeypatch.setattr(dvspy.metrics, 'run_dvs', broken)
    table = run_campaign(SPEC, ['dvs'], 2, options=OPTIONS)
    r = table.report('dvs')
    assert r.failures == 2
    assert math.isnan(r.sc)


def test_campaign_validation():
    with pytest.raises(ConfigError):
        run_campaign(SPEC, ['dvs'], 0)
    with pytest.raises(ConfigError):
        run_campaign(SPEC, ['pearson'], 1, baseline_d=21)


def test_partition_study():
    shards = make_shards(GAUSSIAN, 40, 10, 3, strong_beta(10), seed=8)
    X, y = pooled(shards)
    study = run_partition_study(X, y, GAUSSIAN, 3, 4, seed=1,
                                options=DvsOptions(k=3))
    assert study.sizes == [3, 3, 3, 3]
    assert study.ams == 3.0
    assert np.array_equal(study.frequency[:3], np.ones(3))
    assert not np.any(study.frequency[3:])
    f = io.StringIO()
    study.write_csv(f)
    assert f.getvalue().splitlines() == \
        ['covariate,frequency', '1,1.0', '2,1.0', '3,1.0']
    assert study.to_dict()['frequency'] == {'1': 1.0, '2': 1.0, '3': 1.0}
