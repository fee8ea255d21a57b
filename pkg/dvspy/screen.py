""" the whole DVS procedure on a cluster

1. lasso on the coordinator's shard gives beta_tilde
2. one broadcast/aggregate round gives grad L(beta_tilde)
3. DIHT at a fixed k, or for every k up to K with the EBIC choice
"""
import logging
import time
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

from .cluster import ClusterSpec
from .diht import DihtConfig, ScreeningRun, build_surrogate, diht_run
from .ebic import default_k_max, select_k
from .errors import ConfigError
from .glm import GlmFamily
from .lasso import LassoConfig, lasso_fit

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DvsOptions:
    lasso: LassoConfig = field(default_factory=LassoConfig)
    k: Optional[int] = None  # fixed sparsity, otherwise the EBIC scan
    k_max: Optional[int] = None  # None: min(p, 50)
    vartheta0: float = 1.0
    epsilon: float = 1e-6
    max_iter: int = 500
    static_step: bool = False
    jobs: int = 1

    def __post_init__(self):
        if self.k is not None and self.k < 1:
            raise ConfigError('k must be >= 1')
        if self.k_max is not None and self.k_max < 1:
            raise ConfigError('k_max must be >= 1')
        if self.jobs < 1:
            raise ConfigError('jobs must be >= 1')

    def diht_config(self, k: int) -> DihtConfig:
        return DihtConfig(k=k, vartheta0=self.vartheta0,
                          epsilon=self.epsilon, max_iter=self.max_iter,
                          static_step=self.static_step)


def run_dvs(cluster: ClusterSpec, family: GlmFamily,
            options: DvsOptions = DvsOptions()) -> ScreeningRun:
    timings = {}
    started = time.perf_counter()
    fit = lasso_fit(cluster.coordinator, family, options.lasso)
    timings['lasso'] = time.perf_counter() - started
    log.info('lasso: lambda=%g, %d nonzero, %d iterations', fit.lam,
             fit.coef.support.size, fit.n_iter)

    started = time.perf_counter()
    state = build_surrogate(cluster, fit.coef, family)
    timings['aggregate'] = time.perf_counter() - started

    started = time.perf_counter()
    if options.k is not None:
        if options.k > cluster.p:
            raise ConfigError('k={} exceeds p={}'.format(options.k,
                                                         cluster.p))
        run = diht_run(state, options.diht_config(options.k), family)
    else:
        K = options.k_max or default_k_max(cluster.p)
        if K > cluster.p:
            raise ConfigError('k_max={} exceeds p={}'.format(K, cluster.p))
        run, _ = select_k(state, family, K, options.diht_config(1),
                          jobs=options.jobs)
    timings['diht'] = time.perf_counter() - started
    run.timings = timings
    run.lam = fit.lam
    log.info('dvs: k=%d, %d iterations, %d doublings, converged=%s', run.k,
             run.n_iter, len(run.log.doublings), run.converged)
    return run


def summarize(run: ScreeningRun, one_based: bool = True) -> Dict[str, Any]:
    """ the JSON view of a run, covariate indices 1-based by default """
    shift = 1 if one_based else 0
    support = [int(j) for j in run.support]
    return {
        'lambda': run.lam,
        'k_star': run.k,
        'support': [j + shift for j in support],
        'beta': [{'index': j + shift, 'value': float(run.coef.values[j])}
                 for j in support],
        'loss': run.loss,
        'ebic': None if run.ebic is None else run.ebic.to_list(one_based),
        'iterations': run.n_iter,
        'converged': run.converged,
        'doublings': [{'t': d.t, 'vartheta': d.vartheta}
                      for d in run.log.doublings],
        'timings': dict(run.timings),
        'communication': run.comm.to_dict(),
    }
