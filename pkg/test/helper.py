import numpy as np

from dvspy.cluster import ClusterSpec
from dvspy.glm import BERNOULLI, GAUSSIAN, POISSON, DataShard


class TestRecord:
    def __init__(self, stream):
        self.footprint = []
        if stream() is not None:
            self.footprint.append(stream())
        stream.hook = self.footprint.append


def record(s):
    return TestRecord(s)


def make_shards(family, n, p, m, beta=None, seed=0, scale=1.0):
    """ m shards of n rows from a GLM with coefficients beta (zeros by
    default), covariates iid N(0, scale^2) """
    rng = np.random.default_rng(seed)
    beta = np.zeros(p) if beta is None else np.asarray(beta, dtype=float)
    shards = []
    for i in range(m):
        X = scale * rng.standard_normal((n, p))
        eta = X @ beta
        if family is GAUSSIAN:
            y = eta + rng.standard_normal(n)
        elif family is BERNOULLI:
            y = (rng.uniform(size=n) < family.mean(eta)).astype(float)
        elif family is POISSON:
            y = rng.poisson(family.mean(eta)).astype(float)
        else:
            raise ValueError(family)
        shards.append(DataShard(i, X, y))
    return shards


def strong_beta(p, support=(0, 1, 2), values=(3.0, -3.0, 2.5)):
    beta = np.zeros(p)
    beta[list(support)] = values
    return beta


def make_cluster(family, n, p, m, beta=None, seed=0, **kwargs):
    return ClusterSpec(tuple(make_shards(family, n, p, m, beta, seed)),
                       **kwargs)
