""" aggregated marginal screening baselines

Each machine scores every covariate against the response on its own
shard; the scores are averaged over machines and ranked by magnitude.
"""
import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, TextIO, Tuple

import dcor
import numpy as np
from scipy.stats import kendalltau

from .cluster import ClusterSpec
from .errors import ConfigError
from .glm import DataShard

log = logging.getLogger(__name__)


class Method(Enum):
    PEARSON = 'pearson'
    KENDALL = 'kendall'
    SIRS = 'sirs'
    DCOR = 'dcor'


def _column(shard: DataShard, j: int) -> np.ndarray:
    if not 0 <= j < shard.p:
        raise ConfigError('covariate {} out of range 0..{}'.format(
            j, shard.p - 1))
    return shard.X[:, j]


def _standardize(x: np.ndarray) -> Optional[np.ndarray]:
    sd = x.std()
    if sd == 0.0:
        return None
    return (x - x.mean()) / sd


def pearson(x: np.ndarray, y: np.ndarray) -> float:
    """ sample correlation, 0 for a constant input

    >>> x = np.array([1.0, 2.0, 4.0])
    >>> round(pearson(x, -2 * x), 12)
    -1.0
    """
    xc = x - x.mean()
    yc = y - y.mean()
    denom = np.sqrt((xc @ xc) * (yc @ yc))
    if denom == 0.0:
        return 0.0
    return float(np.clip((xc @ yc) / denom, -1.0, 1.0))


def kendall(x: np.ndarray, y: np.ndarray) -> float:
    """ tau-a: (concordant - discordant) / (n (n - 1) / 2)

    scipy gives tau-b; tau-a follows from the same pair count.

    >>> kendall(np.array([1.0, 2.0, 3.0]), np.array([3.0, 2.0, 1.0]))
    -1.0
    """
    n = x.shape[0]
    pairs = n * (n - 1) // 2
    if pairs == 0:
        return 0.0
    x_ties = _tied_pairs(x)
    y_ties = _tied_pairs(y)
    if x_ties == pairs or y_ties == pairs:
        return 0.0
    tau_b = kendalltau(x, y)[0]
    net = int(np.rint(tau_b * np.sqrt(float(pairs - x_ties))
                      * np.sqrt(float(pairs - y_ties))))
    return net / pairs


def _tied_pairs(v: np.ndarray) -> int:
    _, counts = np.unique(v, return_counts=True)
    return int((counts * (counts - 1) // 2).sum())


def sirs(x: np.ndarray, y: np.ndarray) -> float:
    """ n^-1 sum_k [ n^-1 sum_i x_i 1(y_i < y_k) ]^2 with x standardized """
    xs = _standardize(x)
    if xs is None:
        return 0.0
    return float(_sirs_matrix(xs[:, None], y)[0])


def _sirs_matrix(Xs: np.ndarray, y: np.ndarray) -> np.ndarray:
    n = y.shape[0]
    order = np.argsort(y, kind='stable')
    # below[k] = number of i with y_i < y_k
    below = np.searchsorted(y[order], y, side='left')
    cum = np.vstack([np.zeros((1, Xs.shape[1])),
                     np.cumsum(Xs[order], axis=0)])
    inner = cum[below] / n
    return (inner * inner).mean(axis=0)


def distance_correlation(x: np.ndarray, y: np.ndarray) -> float:
    """ V-statistic sample distance correlation, 0 for a constant input """
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        return 0.0
    return float(dcor.distance_correlation(x, y))


def pearson_utility(shard: DataShard, j: int) -> float:
    """ marginal utility of covariate j on one shard

    Parameters
    ----------
    shard : DataShard
        local data
    j : int
        0-based covariate index

    Returns
    -------
    float
        signed correlation of column j with y, in [-1, 1]
    """
    return pearson(_column(shard, j), shard.y)


def kendall_utility(shard: DataShard, j: int) -> float:
    """ tau-a of column j against y

    Parameters
    ----------
    shard : DataShard
    j : int

    Returns
    -------
    float
        in [-1, 1], invariant under increasing transforms
    """
    return kendall(_column(shard, j), shard.y)


def sirs_utility(shard: DataShard, j: int) -> float:
    """ SIRS utility of column j

    Parameters
    ----------
    shard : DataShard
    j : int

    Returns
    -------
    float
        non-negative
    """
    return sirs(_column(shard, j), shard.y)


def dcor_utility(shard: DataShard, j: int) -> float:
    """ distance correlation of column j with y

    Parameters
    ----------
    shard : DataShard
    j : int

    Returns
    -------
    float
        in [0, 1]
    """
    return distance_correlation(_column(shard, j), shard.y)


def pearson_scores(shard: DataShard) -> np.ndarray:
    Xc = shard.X - shard.X.mean(axis=0)
    yc = shard.y - shard.y.mean()
    denom = np.sqrt(np.einsum('ij,ij->j', Xc, Xc) * (yc @ yc))
    with np.errstate(invalid='ignore', divide='ignore'):
        r = (Xc.T @ yc) / denom
    return np.clip(np.where(denom > 0, r, 0.0), -1.0, 1.0)


def sirs_scores(shard: DataShard) -> np.ndarray:
    sd = shard.X.std(axis=0)
    live = sd > 0
    out = np.zeros(shard.p)
    if live.any():
        Xs = (shard.X[:, live] - shard.X[:, live].mean(axis=0)) / sd[live]
        out[live] = _sirs_matrix(Xs, shard.y)
    return out


def _columnwise(fn: Callable[[np.ndarray, np.ndarray], float]):
    def scores(shard: DataShard) -> np.ndarray:
        return np.array([fn(shard.X[:, j], shard.y)
                         for j in range(shard.p)])
    return scores


SCORERS: Dict[Method, Callable[[DataShard], np.ndarray]] = {
    Method.PEARSON: pearson_scores,
    Method.KENDALL: _columnwise(kendall),
    Method.SIRS: sirs_scores,
    Method.DCOR: _columnwise(distance_correlation),
}


def resolve_method(name) -> Method:
    if isinstance(name, Method):
        return name
    try:
        return Method(str(name).lower())
    except ValueError:
        raise ConfigError('unknown marginal method {!r}, expected one of '
                          '{}'.format(name, ', '.join(m.value for m in Method))
                          ) from None


@dataclass(frozen=True)
class MarginalUtility:
    method: Method
    scores: np.ndarray
    ranking: np.ndarray  # covariates by descending |score|, 0-based
    degenerate: np.ndarray  # constant covariate on some machine

    def rank_of(self, j: int) -> int:
        """ 1-based rank of covariate j """
        return int(np.flatnonzero(self.ranking == j)[0]) + 1

    def write_csv(self, f: TextIO) -> None:
        ranks = np.empty_like(self.ranking)
        ranks[self.ranking] = np.arange(1, self.ranking.shape[0] + 1)
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(['method', 'covariate', 'score', 'rank'])
        for j, score in enumerate(self.scores):
            writer.writerow([self.method.value, j + 1, repr(float(score)),
                             int(ranks[j])])


def rank_by_magnitude(scores: np.ndarray) -> np.ndarray:
    """ descending |score|, ties to the smaller index

    >>> rank_by_magnitude(np.array([0.1, -0.5, 0.5, 0.2])).tolist()
    [1, 2, 3, 0]
    """
    return np.argsort(-np.abs(scores), kind='stable')


def aggregate_and_rank(cluster: ClusterSpec, method, d: int,
                       jobs: int = 1) -> Tuple[MarginalUtility, List[int]]:
    """ mean of per-machine utilities, ranked; returns the top d covariates
    (0-based) """
    method = resolve_method(method)
    if not 1 <= d <= cluster.p:
        raise ConfigError('d={} out of range 1..{}'.format(d, cluster.p))
    scorer = SCORERS[method]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            per_machine = list(pool.map(scorer, cluster.shards))
    else:
        per_machine = [scorer(s) for s in cluster.shards]
    total = np.zeros(cluster.p)
    for scores in per_machine:
        total += scores
    scores = total / cluster.m
    degenerate = np.zeros(cluster.p, dtype=bool)
    for shard in cluster.shards:
        degenerate |= np.ptp(shard.X, axis=0) == 0
    if degenerate.any():
        log.debug('%s: %d covariates constant on some machine', method.value,
                  int(degenerate.sum()))
    ranking = rank_by_magnitude(scores)
    return (MarginalUtility(method, scores, ranking, degenerate),
            [int(j) for j in ranking[:d]])
