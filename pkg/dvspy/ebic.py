""" extended BIC and the scan over sparsity levels """
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

from .diht import DihtConfig, ScreeningRun, SurrogateState, diht_run
from .errors import ConfigError, NumericalFailure
from .glm import GlmFamily

log = logging.getLogger(__name__)


def ebic(loss_val: float, k: int, N: float, p: float) -> float:
    """ l(beta_k) + k (ln N + 0.5 ln p) / N

    >>> ebic(0.0, 0, 10, 10)
    0.0
    >>> round(ebic(1.0, 2, 100, 50), 7)
    1.1312236
    >>> round(ebic(0.0, math.e, math.e, math.e), 12)
    1.5
    """
    if not N >= 1 or not p >= 1:
        raise ConfigError('ebic needs N >= 1 and p >= 1, got N={}, '
                          'p={}'.format(N, p))
    if k < 0:
        raise ConfigError('ebic needs k >= 0, got {}'.format(k))
    return loss_val + k * (math.log(N) + 0.5 * math.log(p)) / N


@dataclass(frozen=True)
class EbicRecord:
    k: int
    loss: float
    ebic: float
    support: Tuple[int, ...]

    def to_dict(self, one_based: bool = True) -> Dict[str, object]:
        shift = 1 if one_based else 0
        return {'k': self.k, 'loss': self.loss, 'ebic': self.ebic,
                'support': [j + shift for j in self.support]}


@dataclass
class EbicTrace:
    records: List[EbicRecord] = field(default_factory=list)
    k_star: Optional[int] = None

    def to_list(self, one_based: bool = True) -> List[Dict[str, object]]:
        return [r.to_dict(one_based) for r in self.records]


def default_k_max(p: int) -> int:
    return min(p, 50)


def select_k(state: SurrogateState, family: GlmFamily, K: int,
             cfg: DihtConfig,
             jobs: int = 1) -> Tuple[ScreeningRun, EbicTrace]:
    """ run DIHT for k = 1..K from beta_tilde and keep the EBIC minimizer

    Every run shares the cached aggregate, so the scan adds no
    communication. Ties go to the smallest k.
    """
    if not 1 <= K <= state.p:
        raise ConfigError('K={} out of range 1..{}'.format(K, state.p))

    def run(k: int) -> ScreeningRun:
        try:
            return diht_run(state, replace(cfg, k=k), family)
        except NumericalFailure as e:
            raise NumericalFailure('ebic scan aborted: {}'.format(e),
                                   k=k) from e

    ks = range(1, K + 1)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(run, ks))
    else:
        runs = [run(k) for k in ks]

    trace = EbicTrace()
    best = None
    for r in runs:
        value = ebic(r.loss, r.k, state.n_total, state.p)
        trace.records.append(EbicRecord(
            r.k, r.loss, value, tuple(int(j) for j in r.support)))
        log.debug('ebic k=%d loss=%.10g ebic=%.10g', r.k, r.loss, value)
        if best is None or value < best[0]:
            best = (value, r)
    chosen = best[1]
    trace.k_star = chosen.k
    chosen.ebic = trace
    return chosen, trace
