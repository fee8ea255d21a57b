""" surrogate likelihood and distributed iterative hard thresholding

With beta_tilde the initial estimator and grad L(beta_tilde) the
aggregated gradient of one round, the coordinator minimizes

    l(beta) = L_1(beta) - <beta, grad L_1(beta_tilde) - grad L(beta_tilde)>

subject to |beta|_0 <= k by the projected step

    beta <- H_k(beta - grad l(beta) / vartheta)

doubling vartheta whenever a step would increase l.
"""
import json
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import eigvalsh
from scipy.sparse.linalg import LinearOperator, eigsh

from .cluster import ClusterSpec, RoundStats, aggregate_round
from .errors import ConfigError, GlmOverflowError, NumericalFailure, \
    ShapeError
from .glm import (CoefLike, CoefVector, DataShard, GlmFamily, as_values,
                  local_gradient, local_loss)

log = logging.getLogger(__name__)

DESCENT_TOL = 1e-12
MAX_DOUBLINGS = 60


@dataclass(frozen=True)
class SurrogateState:
    """ everything the coordinator keeps after the single round """
    shard0: DataShard
    correction: np.ndarray
    beta_tilde: CoefVector
    aggregate: np.ndarray
    n_total: int
    comm: RoundStats = field(default_factory=RoundStats)

    def __post_init__(self):
        if not np.all(np.isfinite(self.correction)):
            raise NumericalFailure('surrogate correction is not finite')

    @property
    def p(self) -> int:
        return self.shard0.p


def build_surrogate(cluster: ClusterSpec, beta_tilde: CoefLike,
                    family: GlmFamily) -> SurrogateState:
    """ run the one communication round and cache its outcome """
    beta_tilde = beta_tilde if isinstance(beta_tilde, CoefVector) \
        else CoefVector(beta_tilde)
    result = aggregate_round(cluster, beta_tilde, family)
    return SurrogateState(shard0=cluster.coordinator,
                          correction=result.local - result.gradient,
                          beta_tilde=beta_tilde,
                          aggregate=result.gradient,
                          n_total=cluster.n_total,
                          comm=result.stats)


def _check(state: SurrogateState, beta: np.ndarray) -> None:
    if beta.shape[0] != state.p:
        raise ShapeError('coefficient length {} does not match p={}'.format(
            beta.shape[0], state.p))


def surrogate_loss(state: SurrogateState, beta: CoefLike,
                   family: GlmFamily) -> float:
    """ surrogate loss: the coordinator loss shifted by the gradient
    correction gathered in the single round

    Parameters
    ----------
    state : SurrogateState
        outcome of build_surrogate
    beta : CoefLike
        coefficients of length p
    family : GlmFamily
        family the shards were screened under

    Returns
    -------
    float
        L_0(beta) - <beta, grad L_0(beta_tilde) - grad L_N(beta_tilde)>
    """
    b = as_values(beta)
    _check(state, b)
    return local_loss(state.shard0, b, family) - float(b @ state.correction)


def surrogate_gradient(state: SurrogateState, beta: CoefLike,
                       family: GlmFamily) -> np.ndarray:
    """ gradient of surrogate_loss, equal to the global gradient at
    beta_tilde

    Parameters
    ----------
    state : SurrogateState
    beta : CoefLike
    family : GlmFamily

    Returns
    -------
    np.ndarray
        vector of length p
    """
    b = as_values(beta)
    _check(state, b)
    return local_gradient(state.shard0, b, family) - state.correction


def hard_threshold(gamma: CoefLike, k: int) -> CoefVector:
    """ keep the k entries of largest magnitude, ties to the smaller index

    >>> hard_threshold([3.0, -1.0, 2.0, 0.5], 2).values.tolist()
    [3.0, 0.0, 2.0, 0.0]
    >>> hard_threshold([1.0, 1.0, 0.0], 1).values.tolist()
    [1.0, 0.0, 0.0]
    """
    g = as_values(gamma)
    if not 1 <= k <= g.shape[0]:
        raise ConfigError('k={} out of range 1..{}'.format(k, g.shape[0]))
    keep = np.argsort(-np.abs(g), kind='stable')[:k]
    out = np.zeros_like(g)
    out[keep] = g[keep]
    return CoefVector(out)


def diht_step(state: SurrogateState, beta_t: CoefLike, vartheta: float,
              k: int, family: GlmFamily) -> CoefVector:
    """ one iteration: a gradient step of length 1/vartheta on the
    surrogate, then hard thresholding to k entries

    Parameters
    ----------
    state : SurrogateState
        outcome of build_surrogate
    beta_t : CoefLike
        current iterate
    vartheta : float
        inverse step length, must be positive
    k : int
        sparsity, 1 <= k <= p
    family : GlmFamily

    Returns
    -------
    CoefVector
        next iterate with at most k nonzero entries
    """
    if not vartheta > 0:
        raise ConfigError('vartheta must be > 0, got {}'.format(vartheta))
    b = as_values(beta_t)
    return hard_threshold(b - surrogate_gradient(state, b, family) / vartheta,
                          k)


def largest_gram_eigenvalue(X: np.ndarray, method: str = 'lanczos',
                            max_iter: int = 200, tol: float = 1e-9,
                            seed: int = 0) -> float:
    """ rho_1, the largest eigenvalue of X'X

    >>> X = np.array([[3.0, 0.0], [0.0, 1.0]])
    >>> round(largest_gram_eigenvalue(X), 10)
    9.0
    >>> round(largest_gram_eigenvalue(X, method='power'), 6)
    9.0
    """
    n, p = X.shape
    dim = min(n, p)
    if method == 'power':
        v = np.random.default_rng(seed).standard_normal(p)
        v /= np.linalg.norm(v)
        rho = 0.0
        for _ in range(max_iter):
            w = X.T @ (X @ v)
            new = float(v @ w)
            norm = np.linalg.norm(w)
            if norm == 0.0:
                return 0.0
            v = w / norm
            if abs(new - rho) <= tol * max(abs(new), 1.0):
                return new
            rho = new
        return rho
    if method != 'lanczos':
        raise ConfigError('unknown eigenvalue method {!r}'.format(method))
    if dim <= 64:
        gram = X.T @ X if p <= n else X @ X.T
        return float(eigvalsh(gram, subset_by_index=[dim - 1, dim - 1])[0])
    if p <= n:
        op = LinearOperator((p, p), matvec=lambda v: X.T @ (X @ v),
                            dtype=float)
    else:
        op = LinearOperator((n, n), matvec=lambda v: X @ (X.T @ v),
                            dtype=float)
    v0 = np.ones(op.shape[0])
    return float(eigsh(op, k=1, which='LA', v0=v0,
                       return_eigenvectors=False)[0])


def static_step_size(shard: DataShard, family: GlmFamily,
                     beta: CoefLike) -> float:
    """ rho_1 mu / n, the step scale under which every step descends """
    theta = shard.X @ as_values(beta)
    mu = family.curvature_bound(theta)
    return largest_gram_eigenvalue(shard.X) * mu / shard.n


@dataclass(frozen=True)
class DihtConfig:
    k: int
    vartheta0: float = 1.0
    epsilon: float = 1e-6
    max_iter: int = 500
    static_step: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError('k must be >= 1, got {}'.format(self.k))
        if not self.vartheta0 > 0:
            raise ConfigError('vartheta0 must be > 0')
        if not self.epsilon > 0:
            raise ConfigError('epsilon must be > 0')
        if self.max_iter < 0:
            raise ConfigError('max_iter must be >= 0')


@dataclass(frozen=True)
class IterationRecord:
    t: int
    surrogate_loss: float
    vartheta: float
    support: Tuple[int, ...]
    step_norm: float

    def to_dict(self) -> Dict[str, object]:
        return {'t': self.t, 'surrogate_loss': self.surrogate_loss,
                'vartheta': self.vartheta, 'support': list(self.support),
                'step_norm': self.step_norm}


@dataclass(frozen=True)
class DoublingEvent:
    t: int
    vartheta: float  # value after doubling


@dataclass
class IterationLog:
    records: List[IterationRecord] = field(default_factory=list)
    doublings: List[DoublingEvent] = field(default_factory=list)

    def losses(self) -> List[float]:
        return [r.surrogate_loss for r in self.records]

    def to_json_lines(self, one_based: bool = True) -> str:
        shift = 1 if one_based else 0
        lines = []
        for r in self.records:
            row = r.to_dict()
            row['support'] = [j + shift for j in r.support]
            lines.append(json.dumps(row))
        return '\n'.join(lines) + ('\n' if lines else '')


@dataclass
class ScreeningRun:
    """ outcome of one DVS run at sparsity k """
    k: int
    coef: CoefVector
    loss: float
    converged: bool
    n_iter: int
    log: IterationLog
    comm: RoundStats
    ebic: Optional['EbicTrace'] = None  # noqa: F821
    timings: Dict[str, float] = field(default_factory=dict)
    lam: Optional[float] = None  # lasso penalty behind beta_tilde

    @property
    def support(self) -> np.ndarray:
        return self.coef.support


def _evaluate(state: SurrogateState, beta: np.ndarray,
              family: GlmFamily) -> float:
    try:
        return surrogate_loss(state, beta, family)
    except GlmOverflowError:
        return math.inf


def diht_run(state: SurrogateState, cfg: DihtConfig, family: GlmFamily,
             beta0: Optional[CoefLike] = None) -> ScreeningRun:
    """ iterate diht_step from beta0 (beta_tilde by default) until the step
    norm drops to epsilon or max_iter steps were accepted """
    if cfg.k > state.p:
        raise ConfigError('k={} exceeds p={}'.format(cfg.k, state.p))
    beta = np.array(as_values(state.beta_tilde if beta0 is None else beta0),
                    dtype=float)
    _check(state, beta)
    if cfg.static_step:
        vartheta = static_step_size(state.shard0, family, beta)
        if not vartheta > 0:
            vartheta = cfg.vartheta0
    else:
        vartheta = cfg.vartheta0
    ceiling = vartheta * 2.0 ** MAX_DOUBLINGS
    loss = surrogate_loss(state, beta, family)
    trace = IterationLog()
    converged = False

    t = 0
    while t < cfg.max_iter:
        grad = surrogate_gradient(state, beta, family)
        # descent is only owed from a k-sparse point; the projection of a
        # denser start is accepted as long as it is finite
        feasible = np.count_nonzero(beta) <= cfg.k
        while True:
            cand = hard_threshold(beta - grad / vartheta, cfg.k).values
            cand_loss = _evaluate(state, cand, family)
            if cand_loss <= loss + DESCENT_TOL or \
                    (not feasible and math.isfinite(cand_loss)):
                break
            vartheta *= 2.0
            if vartheta > ceiling:
                raise NumericalFailure(
                    'vartheta exceeded 2^{} times its start without '
                    'descent'.format(MAX_DOUBLINGS), k=cfg.k)
            trace.doublings.append(DoublingEvent(t + 1, vartheta))
            log.debug('k=%d t=%d: descent violated, vartheta -> %g',
                      cfg.k, t + 1, vartheta)
        t += 1
        step_norm = float(np.linalg.norm(cand - beta))
        beta, loss = cand, cand_loss
        trace.records.append(IterationRecord(
            t, loss, vartheta, tuple(int(j) for j in np.flatnonzero(beta)),
            step_norm))
        if step_norm <= cfg.epsilon:
            converged = True
            break

    if not converged:
        log.warning('diht at k=%d stopped after %d iterations without '
                    'reaching epsilon=%g', cfg.k, t, cfg.epsilon)
    return ScreeningRun(k=cfg.k, coef=CoefVector(beta), loss=loss,
                        converged=converged, n_iter=t, log=trace,
                        comm=replace(state.comm))


def communication_rounds(run: ScreeningRun) -> int:
    """ broadcast/aggregate rounds behind a run, 1 for any DVS run """
    return run.comm.rounds
