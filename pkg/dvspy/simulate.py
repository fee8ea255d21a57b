""" seeded synthetic scenarios with known truth, generated pre-sharded

Random numbers come from numpy's PCG64. The scenario seed feeds a
SeedSequence which is spawned into one child per machine, so shard i
always uses substream i whatever the parallelism; normals are drawn with
numpy's ziggurat `standard_normal`.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import FrozenSet, List, Tuple

import numpy as np

from .errors import ConfigError, InvalidArgumentError
from .glm import BERNOULLI, GAUSSIAN, POISSON, CoefVector, DataShard, \
    GlmFamily

LEADING = 6  # every truth lives in the first six covariates


class Scenario(Enum):
    LINEAR11 = '1.1'
    LINEAR12 = '1.2'
    LOGISTIC21 = '2.1'
    LOGISTIC22 = '2.2'
    POISSON21 = '3.1'
    POISSON22 = '3.2'


_TRUTH = {
    Scenario.LINEAR11: (2.0, 4.0, 6.0, 8.0, 10.0),
    Scenario.LINEAR12: (0.25, -0.5, 1.0, 0.3, -0.2),
    Scenario.LOGISTIC21: (0.0, 1.5, 0.0, 2.0, 0.0, -0.6),
    Scenario.LOGISTIC22: (0.0, 1.5, 0.0, 2.0, 0.0, -0.6),
    Scenario.POISSON21: (0.0, 0.8, -0.6, 0.0, 0.5),
    Scenario.POISSON22: (0.0, 0.8, -0.6, 0.0, 0.5),
}

_FAMILY = {
    Scenario.LINEAR11: GAUSSIAN, Scenario.LINEAR12: GAUSSIAN,
    Scenario.LOGISTIC21: BERNOULLI, Scenario.LOGISTIC22: BERNOULLI,
    Scenario.POISSON21: POISSON, Scenario.POISSON22: POISSON,
}

# scenarios whose covariates are AR(1) with a machine specific coefficient
_AR1 = {Scenario.LINEAR12, Scenario.LOGISTIC22, Scenario.POISSON22}


def resolve_scenario(name) -> Scenario:
    if isinstance(name, Scenario):
        return name
    text = str(name)
    for s in Scenario:
        if text in (s.value, s.name, s.name.lower()):
            return s
    raise ConfigError('unknown scenario {!r}, expected one of {}'.format(
        name, ', '.join(s.value for s in Scenario)))


def truth_vector(scenario: Scenario, p: int) -> np.ndarray:
    beta = np.zeros(p)
    lead = _TRUTH[scenario]
    beta[:len(lead)] = lead
    return beta


@dataclass(frozen=True)
class ScenarioSpec:
    example: Scenario
    N: int
    p: int
    m: int
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'example', resolve_scenario(self.example))
        if self.m < 1 or self.N < 1:
            raise ConfigError('N and m must be positive')
        if self.N % self.m:
            raise ConfigError('N must be divisible by m')
        if self.p < LEADING:
            raise ConfigError('p must be at least {}'.format(LEADING))
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError('seed must fit in 64 unsigned bits')

    @property
    def n(self) -> int:
        return self.N // self.m

    @property
    def family(self) -> GlmFamily:
        return _FAMILY[self.example]


@dataclass(frozen=True)
class GeneratedDataset:
    spec: ScenarioSpec
    shards: Tuple[DataShard, ...]
    truth: CoefVector

    @property
    def support(self) -> FrozenSet[int]:
        return frozenset(int(j) for j in self.truth.support)

    @property
    def family(self) -> GlmFamily:
        return self.spec.family


def ar1_cholesky(p: int, upsilon: float) -> np.ndarray:
    """ lower triangular L with L L' = (upsilon^|s-t|)

    The factor of an AR(1) correlation is explicit: row t is
    sqrt(1 - u^2) u^(t-s) for s >= 1, and u^t in column 0.

    >>> ar1_cholesky(3, 0.0).tolist()
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    """
    if not abs(upsilon) < 1:
        raise InvalidArgumentError('AR(1) coefficient must satisfy |u| < 1, '
                                   'got {}'.format(upsilon))
    lags = np.arange(p)[:, None] - np.arange(p)[None, :]
    L = np.where(lags >= 0, float(upsilon) ** np.maximum(lags, 0), 0.0)
    L[:, 1:] *= np.sqrt(1.0 - upsilon * upsilon)
    return L


def ar1_sample(rng: np.random.Generator, n: int, p: int,
               upsilon: float) -> np.ndarray:
    """ n rows of N(0, (upsilon^|s-t|)) by the O(p) recursion
    x_t = u x_{t-1} + sqrt(1 - u^2) z_t """
    Z = rng.standard_normal((n, p))
    X = np.empty_like(Z)
    X[:, 0] = Z[:, 0]
    scale = np.sqrt(1.0 - upsilon * upsilon)
    for t in range(1, p):
        X[:, t] = upsilon * X[:, t - 1] + scale * Z[:, t]
    return X


def _covariates(spec: ScenarioSpec, rng: np.random.Generator) -> np.ndarray:
    n, p = spec.n, spec.p
    if spec.example is Scenario.LINEAR11:
        Z = rng.standard_normal((n, p))
        W = rng.standard_normal((n, 5))
        X = np.empty((n, p))
        X[:, :5] = (Z[:, :5] + W) / np.sqrt(2.0)
        X[:, 5:] = (Z[:, 5:] + Z[:, :5].sum(axis=1, keepdims=True)) / 2.0
        return X
    if spec.example in _AR1:
        upsilon = rng.uniform(0.2, 0.3)
        return ar1_sample(rng, n, p, upsilon)
    return rng.standard_normal((n, p))


def _response(spec: ScenarioSpec, rng: np.random.Generator, X: np.ndarray,
              beta: np.ndarray) -> np.ndarray:
    eta = X @ beta
    family = spec.family
    if family is GAUSSIAN:
        return eta + rng.standard_normal(eta.shape[0])
    if family is BERNOULLI:
        return (rng.uniform(size=eta.shape[0]) < family.mean(eta)).astype(
            float)
    return rng.poisson(family.mean(eta)).astype(float)


def _shard(spec: ScenarioSpec, machine_id: int, seq: np.random.SeedSequence,
           beta: np.ndarray) -> DataShard:
    rng = np.random.Generator(np.random.PCG64(seq))
    X = _covariates(spec, rng)
    return DataShard(machine_id, X, _response(spec, rng, X, beta))


def generate(spec: ScenarioSpec, jobs: int = 1) -> GeneratedDataset:
    """ the m shards of a scenario, bit-identical for a given seed """
    beta = truth_vector(spec.example, spec.p)
    children = np.random.SeedSequence(spec.seed).spawn(spec.m)
    args = [(spec, i, seq, beta) for i, seq in enumerate(children)]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            shards = list(pool.map(lambda a: _shard(*a), args))
    else:
        shards = [_shard(*a) for a in args]
    return GeneratedDataset(spec, tuple(shards), CoefVector(beta))


def pooled(shards) -> Tuple[np.ndarray, np.ndarray]:
    """ stack shards in machine order """
    ordered: List[DataShard] = sorted(shards, key=lambda s: s.machine_id)
    return (np.vstack([s.X for s in ordered]),
            np.concatenate([s.y for s in ordered]))
