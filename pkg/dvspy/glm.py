""" exponential-family models under the canonical link

Every loss is 1/n normalized: for a shard (X, y) with n rows,

    L(beta) = n^-1 sum_j [ b(x_j'beta) - (x_j'beta) y_j ]

where b is the cumulant of the family. All functions here are pure.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Union

import numpy as np
from scipy.special import expit

from .errors import (GlmOverflowError, InvalidArgumentError, ShapeError,
                     DataValidationError, ConfigError)

POISSON_THETA_GUARD = 30.0


class Kind(Enum):
    GAUSSIAN = 'gaussian'
    BERNOULLI = 'bernoulli'
    POISSON = 'poisson'


@dataclass(frozen=True)
class GlmFamily:
    """ cumulant b, mean b', variance b'' and the curvature bound mu

    >>> round(BERNOULLI.cumulant(0.0), 7)
    0.6931472
    >>> BERNOULLI.curvature_bound()
    0.25
    """
    kind: Kind

    @property
    def name(self) -> str:
        return self.kind.value

    def check_theta(self, theta: np.ndarray) -> None:
        if not np.all(np.isfinite(theta)):
            raise InvalidArgumentError('natural parameter is not finite')
        if self.kind is Kind.POISSON:
            top = np.max(theta) if np.ndim(theta) else theta
            if top > POISSON_THETA_GUARD:
                raise GlmOverflowError(float(top), POISSON_THETA_GUARD)

    def cumulant(self, theta):
        """ b(theta) """
        t = np.asarray(theta, dtype=float)
        self.check_theta(t)
        if self.kind is Kind.GAUSSIAN:
            out = 0.5 * t * t
        elif self.kind is Kind.BERNOULLI:
            out = np.logaddexp(0.0, t)
        else:
            out = np.exp(t)
        return float(out) if out.ndim == 0 else out

    def mean(self, theta):
        """ b'(theta) """
        t = np.asarray(theta, dtype=float)
        self.check_theta(t)
        if self.kind is Kind.GAUSSIAN:
            out = t.copy()
        elif self.kind is Kind.BERNOULLI:
            out = expit(t)
        else:
            out = np.exp(t)
        return float(out) if out.ndim == 0 else out

    def variance(self, theta):
        """ b''(theta) """
        t = np.asarray(theta, dtype=float)
        self.check_theta(t)
        if self.kind is Kind.GAUSSIAN:
            out = np.ones_like(t)
        elif self.kind is Kind.BERNOULLI:
            mu = expit(t)
            out = mu * (1.0 - mu)
        else:
            out = np.exp(t)
        return float(out) if out.ndim == 0 else out

    def curvature_bound(self, theta=None) -> float:
        """ mu, the sup of b'' over the working range

        Poisson has no global bound; it is taken over the supplied
        natural parameters, i.e. the current iterate.
        """
        if self.kind is Kind.GAUSSIAN:
            return 1.0
        if self.kind is Kind.BERNOULLI:
            return 0.25
        if theta is None or np.size(theta) == 0:
            raise InvalidArgumentError(
                'the poisson curvature bound needs natural parameters')
        return float(np.max(self.variance(theta)))

    def check_response(self, y: np.ndarray) -> None:
        """ raise DataValidationError at the first invalid entry, the row
        is reported 1-based """
        y = np.asarray(y, dtype=float)
        bad = ~np.isfinite(y)
        if self.kind is Kind.BERNOULLI:
            bad |= (y != 0.0) & (y != 1.0)
            what = 'response must be 0 or 1 for the bernoulli family'
        elif self.kind is Kind.POISSON:
            bad |= (y < 0.0) | (y != np.floor(y))
            what = 'response must be a nonnegative integer for the ' \
                'poisson family'
        else:
            what = 'response must be finite'
        if bad.any():
            row = int(np.flatnonzero(bad)[0])
            raise DataValidationError('{} (got {!r})'.format(
                what, float(y[row])), row=row + 1)


GAUSSIAN = GlmFamily(Kind.GAUSSIAN)
BERNOULLI = GlmFamily(Kind.BERNOULLI)
POISSON = GlmFamily(Kind.POISSON)

_ALIASES = {
    'gaussian': GAUSSIAN, 'linear': GAUSSIAN, 'normal': GAUSSIAN,
    'bernoulli': BERNOULLI, 'logistic': BERNOULLI, 'binomial': BERNOULLI,
    'poisson': POISSON,
}


def resolve_family(name: Union[str, GlmFamily]) -> GlmFamily:
    """ map a user facing name to a family

    >>> resolve_family('logistic').name
    'bernoulli'
    """
    if isinstance(name, GlmFamily):
        return name
    try:
        return _ALIASES[str(name).lower()]
    except KeyError:
        raise ConfigError('unknown family {!r}, expected one of {}'.format(
            name, ', '.join(sorted(_ALIASES)))) from None


def cumulant(family: GlmFamily, theta: float) -> float:
    """ b(theta) of the family

    >>> cumulant(GAUSSIAN, 0.0)
    0.0
    >>> round(cumulant(POISSON, 1.0), 7)
    2.7182818
    """
    return family.cumulant(theta)


@dataclass(frozen=True)
class CoefVector:
    """ dense coefficient vector; the support is recomputed on access

    >>> beta = CoefVector([0.0, 1.5, 0.0, -2.0])
    >>> beta.support.tolist()
    [1, 3]
    """
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @classmethod
    def zeros(cls, p: int) -> 'CoefVector':
        return cls(np.zeros(p))

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.values)

    @property
    def p(self) -> int:
        return self.values.shape[0]

    def __len__(self) -> int:
        return self.p


CoefLike = Union[CoefVector, np.ndarray, Sequence[float]]


def as_values(beta: CoefLike) -> np.ndarray:
    if isinstance(beta, CoefVector):
        return beta.values
    return np.asarray(beta, dtype=float).reshape(-1)


@dataclass(frozen=True)
class DataShard:
    """ the (X, y) block stored on one machine, rows are observations """
    machine_id: int
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        y = np.array(self.y, dtype=float).reshape(-1)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2:
            raise ShapeError('X must be a matrix, got {} dimensions'.format(
                X.ndim))
        n, p = X.shape
        if n < 1 or p < 1:
            raise ShapeError('shard {} is empty ({}x{})'.format(
                self.machine_id, n, p))
        if y.shape[0] != n:
            raise ShapeError('shard {}: X has {} rows but y has {}'.format(
                self.machine_id, n, y.shape[0]))
        if not np.all(np.isfinite(X)):
            raise DataValidationError('covariates must be finite')
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, 'X', X)
        object.__setattr__(self, 'y', y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def validate(self, family: GlmFamily) -> None:
        family.check_response(self.y)


def _natural(shard: DataShard, beta: CoefLike,
             family: GlmFamily) -> np.ndarray:
    b = as_values(beta)
    if b.shape[0] != shard.p:
        raise ShapeError('coefficient length {} does not match p={}'.format(
            b.shape[0], shard.p))
    theta = shard.X @ b
    family.check_theta(theta)
    return theta


def local_loss(shard: DataShard, beta: CoefLike, family: GlmFamily) -> float:
    """ n^-1 sum_j [b(x_j'beta) - (x_j'beta) y_j]

    >>> shard = DataShard(0, [[1.0]], [2.0])
    >>> local_loss(shard, [2.0], GAUSSIAN)
    -2.0
    """
    theta = _natural(shard, beta, family)
    return float(np.mean(family.cumulant(theta) - theta * shard.y))


def local_gradient(shard: DataShard, beta: CoefLike,
                   family: GlmFamily) -> np.ndarray:
    """ n^-1 sum_j x_j (b'(x_j'beta) - y_j) """
    theta = _natural(shard, beta, family)
    return shard.X.T @ (family.mean(theta) - shard.y) / shard.n


def local_hessian_quadform(shard: DataShard, beta: CoefLike, v: CoefLike,
                           family: GlmFamily) -> float:
    """ v' [n^-1 sum_j x_j b''(x_j'beta) x_j'] v, never negative """
    theta = _natural(shard, beta, family)
    v = as_values(v)
    if v.shape[0] != shard.p:
        raise ShapeError('direction length {} does not match p={}'.format(
            v.shape[0], shard.p))
    xv = shard.X @ v
    return float(np.mean(family.variance(theta) * xv * xv))
