import io
import itertools

import numpy as np
import pytest

from dvspy.cluster import ClusterSpec
from dvspy.errors import ConfigError
from dvspy.glm import BERNOULLI, GAUSSIAN, DataShard
from dvspy.marginal import (Method, SCORERS, aggregate_and_rank,
                            dcor_utility, distance_correlation, kendall,
                            kendall_utility, pearson, pearson_utility,
                            rank_by_magnitude, resolve_method, sirs,
                            sirs_utility)
from helper import make_cluster, make_shards, strong_beta

UTILITIES = (pearson_utility, kendall_utility, sirs_utility, dcor_utility)


def _kendall_pairs(x, y):
    n = len(x)
    net = sum(np.sign(x[i] - x[j]) * np.sign(y[i] - y[j])
              for i, j in itertools.combinations(range(n), 2))
    return net / (n * (n - 1) / 2)


def _sirs_direct(x, y):
    xs = (x - x.mean()) / x.std()
    n = len(y)
    return np.mean([(np.sum(xs * (y < yk)) / n) ** 2 for yk in y])


def _dcor_direct(x, y):
    def centred(v):
        d = np.abs(v[:, None] - v[None, :])
        return d - d.mean(axis=0) - d.mean(axis=1)[:, None] + d.mean()
    A, B = centred(x), centred(y)
    v_xy = (A * B).mean()
    return np.sqrt(v_xy / np.sqrt((A * A).mean() * (B * B).mean()))


def test_pearson():
    rng = np.random.default_rng(0)
    x, y = rng.standard_normal(30), rng.standard_normal(30)
    assert pearson(x, y) == pytest.approx(np.corrcoef(x, y)[0, 1])
    assert pearson(np.ones(5), y[:5]) == 0.0


def test_kendall_tau_a_with_ties():
    rng = np.random.default_rng(1)
    x = rng.integers(0, 4, size=25).astype(float)
    y = rng.integers(0, 3, size=25).astype(float)
    assert kendall(x, y) == pytest.approx(_kendall_pairs(x, y), abs=1e-12)
    x, y = rng.standard_normal(20), rng.standard_normal(20)
    assert kendall(x, y) == pytest.approx(_kendall_pairs(x, y), abs=1e-12)
    assert kendall(np.ones(6), y[:6]) == 0.0


def test_sirs_matches_definition():
    rng = np.random.default_rng(2)
    x = rng.standard_normal(40)
    y = np.round(rng.standard_normal(40), 1)
    assert sirs(x, y) == pytest.approx(_sirs_direct(x, y), rel=1e-12)
    assert sirs(np.ones(5), y[:5]) == 0.0


def test_distance_correlation():
    rng = np.random.default_rng(3)
    x = rng.standard_normal(30)
    y = x ** 2 + 0.1 * rng.standard_normal(30)
    assert distance_correlation(x, y) == \
        pytest.approx(_dcor_direct(x, y), rel=1e-9)
    assert distance_correlation(x, 2 * x + 1) == pytest.approx(1.0)
    assert distance_correlation(np.zeros(4), x[:4]) == 0.0


def test_vectorized_scores_match_columns():
    shard = make_shards(BERNOULLI, 50, 6, 1, strong_beta(6), seed=4)[0]
    for method, per_column in ((Method.PEARSON, pearson_utility),
                               (Method.KENDALL, kendall_utility),
                               (Method.SIRS, sirs_utility),
                               (Method.DCOR, dcor_utility)):
        want = [per_column(shard, j) for j in range(6)]
        assert np.allclose(SCORERS[method](shard), want, rtol=1e-10,
                           atol=1e-12)
    with pytest.raises(ConfigError):
        pearson_utility(shard, 6)


def test_rank_by_magnitude():
    assert rank_by_magnitude(np.array([0.1, -0.5, 0.5, 0.2])).tolist() == \
        [1, 2, 3, 0]


def test_aggregate_is_machine_mean():
    cluster = make_cluster(GAUSSIAN, 40, 10, 3, strong_beta(10), seed=5)
    utility, top = aggregate_and_rank(cluster, 'pearson', 3)
    want = np.mean([[pearson_utility(s, j) for j in range(10)]
                    for s in cluster.shards], axis=0)
    assert np.allclose(utility.scores, want)
    assert top == [int(j) for j in utility.ranking[:3]]
    assert set(top) == {0, 1, 2}
    assert utility.rank_of(top[0]) == 1


def test_parallel_aggregation_is_identical():
    cluster = make_cluster(GAUSSIAN, 40, 10, 4, strong_beta(10), seed=6)
    a, _ = aggregate_and_rank(cluster, Method.KENDALL, 5)
    b, _ = aggregate_and_rank(cluster, Method.KENDALL, 5, jobs=4)
    assert np.array_equal(a.scores, b.scores)


def test_degenerate_columns_flagged():
    X = np.column_stack([np.ones(10), np.arange(10.0)])
    shards = (DataShard(0, X, np.arange(10.0)),
              DataShard(1, np.arange(20.0).reshape(10, 2), np.arange(10.0)))
    utility, top = aggregate_and_rank(ClusterSpec(shards), 'sirs', 1)
    assert utility.degenerate.tolist() == [True, False]
    assert top == [1]


def test_scores_csv():
    cluster = make_cluster(GAUSSIAN, 30, 4, 2, strong_beta(4), seed=7)
    utility, _ = aggregate_and_rank(cluster, 'dcor', 2)
    out = io.StringIO()
    utility.write_csv(out)
    lines = out.getvalue().splitlines()
    assert lines[0] == 'method,covariate,score,rank'
    assert len(lines) == 5
    assert sorted(int(line.split(',')[3]) for line in lines[1:]) == \
        [1, 2, 3, 4]
    assert [line.split(',')[1] for line in lines[1:]] == ['1', '2', '3', '4']


def test_method_names():
    assert resolve_method('SIRS') is Method.SIRS
    with pytest.raises(ConfigError) as e:
        resolve_method('spearman')
    assert 'kendall' in str(e.value)
    cluster = make_cluster(GAUSSIAN, 10, 4, 1, seed=8)
    with pytest.raises(ConfigError):
        aggregate_and_rank(cluster, 'pearson', 5)


def test_utilities_ignore_row_order():
    shard = make_shards(BERNOULLI, 40, 4, 1, strong_beta(4), seed=41)[0]
    rng = np.random.default_rng(42)
    base = [f(shard, j) for f in UTILITIES for j in range(4)]
    for _ in range(20):
        order = rng.permutation(shard.n)
        moved = DataShard(0, shard.X[order], shard.y[order])
        for j in range(4):
            assert kendall_utility(moved, j) == kendall_utility(shard, j)
        got = [f(moved, j) for f in UTILITIES for j in range(4)]
        assert np.allclose(got, base, rtol=1e-12, atol=1e-14)


def test_kendall_ignores_increasing_transforms():
    rng = np.random.default_rng(43)
    for _ in range(10):
        x = rng.standard_normal(30)
        y = x + rng.standard_normal(30)
        assert kendall(np.exp(x), y) == kendall(x, y)


def test_utility_ranges():
    for seed in range(5):
        shard = make_shards(GAUSSIAN, 50, 6, 1, strong_beta(6), seed=seed)[0]
        for j in range(6):
            assert -1.0 <= pearson_utility(shard, j) <= 1.0
            assert -1.0 <= kendall_utility(shard, j) <= 1.0
            assert 0.0 <= dcor_utility(shard, j) <= 1.0
            assert sirs_utility(shard, j) >= 0.0
