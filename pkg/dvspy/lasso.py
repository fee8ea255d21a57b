""" l1-penalized local likelihood on the coordinator's shard

Minimizes L_1(beta) + lambda |beta|_1 without intercept: exact cyclic
coordinate descent for the gaussian family, proximal gradient with
backtracking otherwise. Both never increase the penalized objective.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Union

import numpy as np

from .errors import ConfigError, GlmOverflowError, NumericalFailure
from .glm import (GAUSSIAN, CoefVector, DataShard, GlmFamily, Kind,
                  local_gradient, local_loss)

log = logging.getLogger(__name__)


def soft_threshold(z, lam: float):
    """ sign(z) max(|z| - lam, 0)

    >>> soft_threshold(np.array([3.0, -0.5, -2.0]), 1.0).tolist()
    [2.0, -0.0, -1.0]
    """
    return np.sign(z) * np.maximum(np.abs(z) - lam, 0.0)


def lambda_rate(n: float, p: float, c: float = 1.0) -> float:
    """ c sqrt(ln p / n), falling back to c sqrt(1 / n) when p < 2

    >>> lambda_rate(1, math.e)
    1.0
    >>> round(lambda_rate(300, 6000), 4)
    0.1703
    """
    if p < 2:
        log.warning('p=%s < 2, using lambda = c sqrt(1/n)', p)
        return c * math.sqrt(1.0 / n)
    return c * math.sqrt(math.log(p) / n)


def auto_lambda(shard: DataShard, c: float = 1.0) -> float:
    """ lambda_rate sized by the shard the lasso runs on

    Parameters
    ----------
    shard : DataShard
        local data, n rows and p covariates
    c : float
        multiplier of sqrt(log p / n)

    Returns
    -------
    float
        penalty level, positive
    """
    return lambda_rate(shard.n, shard.p, c)


@dataclass(frozen=True)
class LassoConfig:
    lam: Union[float, str] = 'auto'
    max_iter: int = 1000
    tol: float = 1e-7
    standardize: bool = False
    c: float = 1.0

    def __post_init__(self):
        if isinstance(self.lam, str):
            if self.lam != 'auto':
                raise ConfigError('lambda must be a number or "auto", got '
                                  '{!r}'.format(self.lam))
        elif not (self.lam >= 0 and math.isfinite(self.lam)):
            raise ConfigError('lambda must be >= 0, got {}'.format(self.lam))
        if self.max_iter < 0:
            raise ConfigError('max_iter must be >= 0')
        if not self.tol > 0:
            raise ConfigError('tol must be > 0')
        if not self.c > 0:
            raise ConfigError('c must be > 0')

    def resolve_lambda(self, shard: DataShard) -> float:
        if self.lam == 'auto':
            return auto_lambda(shard, self.c)
        return float(self.lam)


@dataclass
class LassoFit:
    coef: CoefVector
    lam: float
    n_iter: int
    converged: bool
    objective: List[float] = field(default_factory=list)


def penalized_objective(shard: DataShard, beta: np.ndarray,
                        family: GlmFamily, lam: float) -> float:
    return local_loss(shard, beta, family) + lam * float(np.abs(beta).sum())


def _coordinate_descent(shard: DataShard, lam: float, cfg: LassoConfig,
                        objective: List[float]):
    X = np.asfortranarray(shard.X)
    y = shard.y
    n, p = X.shape
    col_sq = np.einsum('ij,ij->j', X, X) / n
    beta = np.zeros(p)
    resid = y.copy()
    for it in range(1, cfg.max_iter + 1):
        max_change = 0.0
        for j in range(p):
            if col_sq[j] == 0.0:
                continue
            old = beta[j]
            z = X[:, j] @ resid / n + col_sq[j] * old
            new = float(soft_threshold(z, lam)) / col_sq[j]
            if new != old:
                resid -= X[:, j] * (new - old)
                beta[j] = new
                max_change = max(max_change, abs(new - old))
        objective.append(penalized_objective(shard, beta, GAUSSIAN, lam))
        if max_change <= cfg.tol:
            return beta, it, True
    return beta, cfg.max_iter, False


def _proximal_gradient(shard: DataShard, family: GlmFamily, lam: float,
                       cfg: LassoConfig, objective: List[float]):
    p = shard.p
    beta = np.zeros(p)
    step_scale = 1.0
    f = local_loss(shard, beta, family)
    total = f
    for it in range(1, cfg.max_iter + 1):
        grad = local_gradient(shard, beta, family)
        while True:
            cand = soft_threshold(beta - grad / step_scale, lam / step_scale)
            d = cand - beta
            try:
                f_cand = local_loss(shard, cand, family)
            except GlmOverflowError:
                f_cand = math.inf
            total_cand = f_cand + lam * float(np.abs(cand).sum())
            majorant = f + grad @ d + 0.5 * step_scale * (d @ d)
            if f_cand <= majorant and total_cand <= total:
                break
            step_scale *= 2.0
            if step_scale > 1e300:
                raise NumericalFailure('lasso backtracking diverged')
        beta, f, total = cand, f_cand, total_cand
        objective.append(total)
        if np.max(np.abs(d)) <= cfg.tol:
            return beta, it, True
    return beta, cfg.max_iter, False


def lasso_fit(shard: DataShard, family: GlmFamily,
              cfg: LassoConfig = LassoConfig()) -> LassoFit:
    """ initial estimator of the coordinator: argmin L_1(b) + lam |b|_1

    Returns exactly zero whenever lam >= |grad L_1(0)|_inf.
    """
    lam = cfg.resolve_lambda(shard)
    scale = np.ones(shard.p)
    work = shard
    if cfg.standardize:
        sd = shard.X.std(axis=0)
        scale = np.where(sd > 0, sd, 1.0)
        work = DataShard(shard.machine_id, shard.X / scale, shard.y)

    objective = [penalized_objective(work, np.zeros(shard.p), family, lam)]
    g0 = local_gradient(work, np.zeros(shard.p), family)
    if np.max(np.abs(g0)) <= lam:
        return LassoFit(CoefVector.zeros(shard.p), lam, 0, True, objective)

    if family.kind is Kind.GAUSSIAN:
        beta, n_iter, converged = _coordinate_descent(work, lam, cfg,
                                                      objective)
    else:
        beta, n_iter, converged = _proximal_gradient(work, family, lam, cfg,
                                                     objective)
    if not converged:
        log.warning('lasso did not converge in %d iterations (lambda=%g)',
                    cfg.max_iter, lam)
    return LassoFit(CoefVector(beta / scale), lam, n_iter, converged,
                    objective)

