""" Monte Carlo checks at reduced campaign scale, run with DVS_SLOW=1

DVS_SLOW=full also runs the full size Case 2.1 campaign.
"""
import os
from dataclasses import replace

import numpy as np
import pytest

from dvspy.cluster import ClusterSpec
from dvspy.glm import GAUSSIAN
from dvspy.lasso import lasso_fit
from dvspy.marginal import aggregate_and_rank
from dvspy.metrics import compute_metrics, run_campaign
from dvspy.screen import run_dvs
from dvspy.simulate import ScenarioSpec, generate
from helper import make_cluster, strong_beta

SLOW = os.environ.get('DVS_SLOW', '')

slow = pytest.mark.skipif(SLOW not in ('1', 'full'),
                          reason='set DVS_SLOW=1 for Monte Carlo checks')
full = pytest.mark.skipif(SLOW != 'full',
                          reason='set DVS_SLOW=full for full size runs')


@slow
def test_logistic_campaign():
    spec = ScenarioSpec('2.1', N=1000, p=500, m=10, seed=0)
    table = run_campaign(spec, ['dvs', 'pearson', 'kendall', 'sirs', 'dcor'],
                         20, parallel=os.cpu_count() or 1)
    dvs = table.report('dvs')
    assert dvs.failures == 0
    assert dvs.sc >= 0.9
    assert dvs.fdr <= 0.2
    others = [r.fdr for r in table.reports
              if r.method != 'dvs' and '@' not in r.method]
    assert dvs.fdr < min(others)


@slow
def test_joint_effect_is_found():
    spec = ScenarioSpec('1.1', N=600, p=300, m=5, seed=0)
    selected = []
    buried = 0
    for t in range(1, 21):
        data = generate(replace(spec, seed=spec.seed + t))
        cluster = ClusterSpec(data.shards)
        selected.append(set(int(j) for j in
                            run_dvs(cluster, data.family).support))
        utility, _ = aggregate_and_rank(cluster, 'pearson', 20)
        buried += utility.rank_of(0) > 20
    assert compute_metrics(selected, range(5)).sc >= 0.9
    assert buried >= 10


@slow
def test_ebic_picks_the_true_size():
    hits = 0
    for t in range(20):
        cluster = make_cluster(GAUSSIAN, 500, 50, 1, strong_beta(50),
                               seed=t)
        hits += run_dvs(cluster, GAUSSIAN).k == 3
    assert hits >= 18


@slow
def test_lasso_error_shrinks_with_n():
    medians = []
    for n in (200, 800, 3200):
        errors = []
        for t in range(20):
            data = generate(ScenarioSpec('2.1', N=n, p=200, m=1, seed=t))
            fit = lasso_fit(data.shards[0], data.family)
            errors.append(np.abs(fit.coef.values - data.truth.values).sum())
        medians.append(np.median(errors))
    assert medians[0] > medians[1] > medians[2]


@full
def test_logistic_campaign_full_size():
    spec = ScenarioSpec('2.1', N=3000, p=6000, m=10, seed=0)
    dvs = run_campaign(spec, ['dvs'], 100, parallel=os.cpu_count() or 1
                       ).report('dvs')
    assert dvs.sc >= 0.98
    assert dvs.fdr <= 0.15
    assert dvs.ams <= 6
