""" selection accuracy over Monte Carlo replications

For selections S(1..T) and the true support S*:

    SC   share of replications with S* contained in S(t)
    PSR  mean of |S* & S(t)| / |S*|
    FDR  mean of |S(t) - S*| / |S(t)|, an empty S(t) counts 0
    AMS  mean of |S(t)|
    CF   share of replications with S(t) == S*

Sums are exact fractions, so a report does not depend on the order in
which replications finish.
"""
import csv
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import (AbstractSet, Dict, FrozenSet, Iterable, List, Optional,
                    Sequence, TextIO)

import numpy as np

from .cluster import ClusterSpec
from .dataio import partition
from .errors import ConfigError, DvsError
from .glm import GlmFamily
from .marginal import Method, aggregate_and_rank, resolve_method
from .screen import DvsOptions, run_dvs
from .simulate import ScenarioSpec, generate, truth_vector

log = logging.getLogger(__name__)

DVS = 'dvs'
COLUMNS = ('SC', 'CF', 'AMS', 'PSR', 'FDR')


@dataclass(frozen=True)
class ReplicationReport:
    method: str
    T: int
    sc: float
    psr: float
    fdr: float
    ams: float
    cf: float
    failures: int = 0
    selections: Optional[List[FrozenSet[int]]] = None

    @classmethod
    def failed(cls, method: str, failures: int) -> 'ReplicationReport':
        """ report of a method that failed in every replication """
        nan = math.nan
        return cls(method, 0, nan, nan, nan, nan, nan, failures)

    def values(self) -> List[float]:
        """ metrics in table order: SC, CF, AMS, PSR, FDR """
        return [self.sc, self.cf, self.ams, self.psr, self.fdr]

    def to_dict(self, one_based: bool = True) -> Dict[str, object]:
        out: Dict[str, object] = {'method': self.method, 'T': self.T}
        out.update(zip(COLUMNS, self.values()))
        out['failures'] = self.failures
        if self.selections is not None:
            shift = 1 if one_based else 0
            out['selections'] = [sorted(j + shift for j in s)
                                 for s in self.selections]
        return out


def compute_metrics(selected: Sequence[AbstractSet[int]],
                    truth: AbstractSet[int], method: str = DVS,
                    retain: bool = False,
                    failures: int = 0) -> ReplicationReport:
    """ SC, PSR, FDR, AMS and CF of T selections against the truth

    >>> r = compute_metrics([{0, 1}, set(), {0, 1, 99}], {0, 1})
    >>> r.sc, r.cf, r.ams
    (0.6666666666666666, 0.3333333333333333, 1.6666666666666667)
    >>> r.fdr == 1 / 9
    True
    """
    truth = frozenset(truth)
    if not truth:
        raise ConfigError('the true support must not be empty')
    T = len(selected)
    if T < 1:
        raise ConfigError('need at least one replication')
    sc = cf = size = 0
    psr = fdr = Fraction(0)
    for s in selected:
        s = frozenset(s)
        hits = len(s & truth)
        sc += truth <= s
        cf += s == truth
        size += len(s)
        psr += Fraction(hits, len(truth))
        if s:
            fdr += Fraction(len(s) - hits, len(s))
    return ReplicationReport(
        method=method, T=T,
        sc=float(Fraction(sc, T)), psr=float(psr / T), fdr=float(fdr / T),
        ams=float(Fraction(size, T)), cf=float(Fraction(cf, T)),
        failures=failures,
        selections=[frozenset(s) for s in selected] if retain else None)


def default_baseline_d(N: int, p: int) -> int:
    """ ceil(N / ln N), at most p

    >>> default_baseline_d(1000, 500)
    145
    >>> default_baseline_d(1000, 100)
    100
    """
    return max(1, min(p, math.ceil(N / math.log(N))))


def resolve_methods(names: Iterable[str]) -> List[str]:
    """ validated method names, in the order given """
    valid = [DVS] + [m.value for m in Method]
    out = []
    for name in names:
        name = str(name).strip().lower()
        if name not in valid:
            raise ConfigError('unknown method {!r}, expected one of '
                              '{}'.format(name, ', '.join(valid)))
        if name not in out:
            out.append(name)
    if not out:
        raise ConfigError('no methods given')
    return out


@dataclass
class CampaignTable:
    """ one report per method row; baselines also get a row at the size
    DVS selected in the same replication """
    spec: ScenarioSpec
    T: int
    baseline_d: int
    reports: List[ReplicationReport] = field(default_factory=list)

    def write_csv(self, f: TextIO) -> None:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(['scenario', 'method', 'T'] + list(COLUMNS)
                        + ['failures'])
        for r in self.reports:
            writer.writerow([self.spec.example.value, r.method, r.T]
                            + [repr(v) for v in r.values()] + [r.failures])

    def to_dict(self) -> Dict[str, object]:
        return {
            'scenario': self.spec.example.value,
            'N': self.spec.N, 'p': self.spec.p, 'm': self.spec.m,
            'base_seed': self.spec.seed, 'T': self.T,
            'baseline_d': self.baseline_d,
            'reports': [r.to_dict() for r in self.reports],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def report(self, method: str) -> ReplicationReport:
        for r in self.reports:
            if r.method == method:
                return r
        raise KeyError(method)


def _replication(spec: ScenarioSpec, t: int, methods: List[str],
                 options: DvsOptions,
                 baseline_d: int) -> Dict[str, Optional[FrozenSet[int]]]:
    data = generate(replace(spec, seed=spec.seed + t))
    cluster = ClusterSpec(data.shards)
    out: Dict[str, Optional[FrozenSet[int]]] = {}
    dvs_size = None
    if DVS in methods:
        try:
            run = run_dvs(cluster, data.family, options)
            out[DVS] = frozenset(int(j) for j in run.support)
            dvs_size = len(out[DVS])
        except DvsError as e:
            log.warning('replication %d: dvs failed: %s', t, e)
            out[DVS] = None
    for name in methods:
        if name == DVS:
            continue
        method: Method = resolve_method(name)
        try:
            utility, top = aggregate_and_rank(cluster, method, baseline_d)
        except DvsError as e:
            log.warning('replication %d: %s failed: %s', t, name, e)
            out[name] = None
            if DVS in methods:
                out[name + '@dvs'] = None
            continue
        out[name] = frozenset(top)
        if DVS in methods:
            out[name + '@dvs'] = None if dvs_size is None else \
                frozenset(int(j) for j in utility.ranking[:dvs_size])
    return out


def run_campaign(spec: ScenarioSpec, methods: Iterable[str], T: int,
                 parallel: int = 1, options: Optional[DvsOptions] = None,
                 baseline_d: Optional[int] = None,
                 retain: bool = False) -> CampaignTable:
    """ T replications of a scenario, replication t seeded spec.seed + t

    Every method sees the same dataset in a replication. A method that
    raises in a replication is excluded from that replication's metrics and
    counted in ``failures``.
    """
    if T < 1:
        raise ConfigError('T must be >= 1, got {}'.format(T))
    if parallel < 1:
        raise ConfigError('parallel must be >= 1')
    methods = resolve_methods(methods)
    options = options or DvsOptions()
    d = baseline_d if baseline_d is not None else \
        default_baseline_d(spec.N, spec.p)
    if not 1 <= d <= spec.p:
        raise ConfigError('baseline d={} out of range 1..{}'.format(
            d, spec.p))
    truth = frozenset(
        int(j) for j in np.flatnonzero(truth_vector(spec.example, spec.p)))

    def one(t: int):
        return _replication(spec, t, methods, options, d)

    ts = range(1, T + 1)
    if parallel > 1:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            outcomes = list(pool.map(one, ts))
    else:
        outcomes = [one(t) for t in ts]

    table = CampaignTable(spec, T, d)
    rows = [name for name in outcomes[0]]
    for name in rows:
        selected = [o[name] for o in outcomes if o[name] is not None]
        failures = T - len(selected)
        if failures:
            log.warning('%s: %d of %d replications failed and are '
                        'excluded', name, failures, T)
        if selected:
            table.reports.append(compute_metrics(selected, truth, name,
                                                 retain, failures))
        else:
            table.reports.append(ReplicationReport.failed(name, failures))
    return table


@dataclass
class PartitionStudy:
    """ selection frequency of every covariate over random partitions """
    m: int
    T: int
    sizes: List[int]
    frequency: np.ndarray
    failures: int = 0

    @property
    def ams(self) -> float:
        return float(np.mean(self.sizes)) if self.sizes else math.nan

    def write_csv(self, f: TextIO) -> None:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(['covariate', 'frequency'])
        for j in np.argsort(-self.frequency, kind='stable'):
            if self.frequency[j] > 0:
                writer.writerow([int(j) + 1, repr(float(self.frequency[j]))])

    def to_dict(self) -> Dict[str, object]:
        selected = np.flatnonzero(self.frequency)
        return {'m': self.m, 'T': self.T, 'failures': self.failures,
                'AMS': self.ams, 'sizes': list(self.sizes),
                'frequency': {str(int(j) + 1): float(self.frequency[j])
                              for j in selected}}


def run_partition_study(X: np.ndarray, y: np.ndarray, family: GlmFamily,
                        m: int, T: int, seed: int = 0,
                        options: Optional[DvsOptions] = None
                        ) -> PartitionStudy:
    """ DVS on T random partitions of one dataset into m equal machines

    Partition t shuffles the rows with seed + t and drops the N mod m
    remainder.
    """
    if T < 1:
        raise ConfigError('T must be >= 1, got {}'.format(T))
    options = options or DvsOptions()
    counts = np.zeros(X.shape[1], dtype=np.int64)
    sizes = []
    failures = 0
    for t in range(1, T + 1):
        shards = partition(X, y, m, shuffle_seed=seed + t,
                           drop_remainder=True)
        try:
            run = run_dvs(ClusterSpec(shards), family, options)
        except DvsError as e:
            log.warning('partition %d: dvs failed: %s', t, e)
            failures += 1
            continue
        counts[run.support] += 1
        sizes.append(int(run.support.size))
    done = T - failures
    if failures:
        log.warning('%d of %d partitions failed and are excluded',
                    failures, T)
    frequency = counts / done if done else np.zeros(X.shape[1])
    return PartitionStudy(m, T, sizes, frequency, failures)
