""" the ``dvs`` command line

    dvs simulate  --example 2.1 --N 1000 --p 500 --m 10 --seed 7 --out d/
    dvs screen    --data d/ --family logistic --k-max 20
    dvs bench     --scenario 2.1 --N 1000 --p 500 --m 10 --T 20
    dvs stability --data real.csv --family logistic --m 5 --T 50

Exit codes: 0 success, 2 usage or configuration, 3 unreadable data,
4 invalid data, 1 any other dvspy failure.
"""
import argparse
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional, Sequence, Union

from .cluster import ClusterSpec, Transport
from .config import RESULT_SCHEMA, RunConfig, resolve
from .dataio import (CACHE_NAME, TRUTH_NAME, ensure_dir, load_shards,
                     shard_file_name, write_cache, write_csv_shard,
                     write_truth)
from .errors import DataIOError, DvsError, UsageError
from .glm import resolve_family
from .lasso import LassoConfig
from .marginal import aggregate_and_rank
from .metrics import resolve_methods, run_campaign, run_partition_study
from .screen import DvsOptions, run_dvs, summarize
from .simulate import ScenarioSpec, generate, pooled

log = logging.getLogger(__name__)

SIMULATE_DEFAULTS = {
    'example': None, 'N': None, 'p': None, 'm': None, 'seed': 0,
    'out': None, 'format': 'csv', 'jobs': None,
}

_DVS_DEFAULTS = {
    'family': None, 'lambda': 'auto', 'lambda_c': 1.0, 'k': None,
    'k_max': None, 'epsilon': 1e-6, 'max_iter': 500, 'vartheta0': 1.0,
    'static_step': False, 'lasso_max_iter': 1000, 'jobs': None,
}

SCREEN_DEFAULTS = dict(_DVS_DEFAULTS, **{
    'data': None, 'm': None, 'header': False, 'shuffle_seed': None,
    'standardize': True, 'transport': Transport.IN_PROCESS.value,
    'baseline': None, 'baseline_d': None, 'scores': None, 'trace': None,
    'out': None,
})

BENCH_DEFAULTS = dict(_DVS_DEFAULTS, **{
    'scenario': None, 'N': 3000, 'p': 6000, 'm': 10, 'seed': 0, 'T': 100,
    'methods': 'dvs,pearson,kendall,sirs,dcor', 'baseline_d': None,
    'out': None, 'json': None,
})

STABILITY_DEFAULTS = dict(_DVS_DEFAULTS, **{
    'data': None, 'm': None, 'T': 50, 'seed': 0, 'header': False,
    'standardize': True, 'out': None, 'csv': None,
})


def parse_lambdas(text: str) -> List[Union[float, str]]:
    """ '--lambda' value: 'auto' or a comma separated list of numbers

    >>> parse_lambdas('auto')
    ['auto']
    >>> parse_lambdas('0.1, 0.05,auto')
    [0.1, 0.05, 'auto']
    """
    out: List[Union[float, str]] = []
    for item in str(text).split(','):
        item = item.strip().lower()
        if item == 'auto':
            out.append(item)
            continue
        try:
            out.append(float(item))
        except ValueError:
            raise UsageError('--lambda takes "auto" or numbers, got '
                             '{!r}'.format(item)) from None
    return out


def _single_lambda(params: Dict[str, Any]) -> Union[float, str]:
    lambdas = parse_lambdas(params['lambda'])
    if len(lambdas) != 1:
        raise UsageError('--lambda takes a single value here')
    return lambdas[0]


def _jobs(params: Dict[str, Any]) -> int:
    jobs = params.get('jobs')
    if jobs is None:
        return os.cpu_count() or 1
    if jobs < 1:
        raise UsageError('--jobs must be >= 1')
    return jobs


def _options(params: Dict[str, Any], lam: Union[float, str],
             jobs: int) -> DvsOptions:
    if params['k'] is not None and params['k_max'] is not None:
        raise UsageError('--k and --k-max are mutually exclusive')
    lasso = LassoConfig(lam=lam, c=params['lambda_c'],
                        max_iter=params['lasso_max_iter'])
    return DvsOptions(lasso=lasso, k=params['k'], k_max=params['k_max'],
                      vartheta0=params['vartheta0'],
                      epsilon=params['epsilon'],
                      max_iter=params['max_iter'],
                      static_step=params['static_step'], jobs=jobs)


def _emit(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, 'w', encoding='utf-8') as f:
            f.write(text)
    except OSError as e:
        raise DataIOError('cannot write {}: {}'.format(path, e)) from e


def _dump(doc: Dict[str, Any]) -> str:
    return json.dumps(doc, indent=2) + '\n'


def _family(params: Dict[str, Any]):
    if params['family'] is None:
        raise UsageError('--family is required')
    return resolve_family(params['family'])


def cmd_simulate(cfg: RunConfig) -> int:
    params = cfg.params
    missing = [k for k in ('example', 'N', 'p', 'm', 'out')
               if params[k] is None]
    if missing:
        raise UsageError('simulate needs --{}'.format(', --'.join(missing)))
    spec = ScenarioSpec(params['example'], params['N'], params['p'],
                        params['m'], params['seed'])
    data = generate(spec, jobs=_jobs(params))
    out = ensure_dir(params['out'])
    try:
        if params['format'] == 'cache':
            write_cache(out / CACHE_NAME, data.shards, spec.family)
        else:
            for shard in data.shards:
                write_csv_shard(out / shard_file_name(shard.machine_id),
                                shard)
        write_truth(out / TRUTH_NAME, spec, data.truth.values,
                    cfg.to_dict())
    except OSError as e:
        raise DataIOError('cannot write to {}: {}'.format(out, e)) from e
    log.info('wrote scenario %s (N=%d, p=%d, m=%d) to %s',
             spec.example.value, spec.N, spec.p, spec.m, out)
    return 0


def cmd_screen(cfg: RunConfig) -> int:
    params = cfg.params
    if params['data'] is None:
        raise UsageError('screen needs --data')
    family = _family(params)
    jobs = _jobs(params)
    shards = load_shards(params['data'], family, m=params['m'],
                         header=params['header'],
                         shuffle_seed=params['shuffle_seed'],
                         standardize=params['standardize'])
    try:
        transport = Transport(params['transport'])
    except ValueError:
        raise UsageError('unknown transport {!r}'.format(
            params['transport'])) from None
    cluster = ClusterSpec(tuple(shards), transport=transport, jobs=jobs)
    lambdas = parse_lambdas(params['lambda'])
    runs = []
    traces = []
    for lam in lambdas:
        run = run_dvs(cluster, family, _options(params, lam, jobs))
        runs.append(summarize(run))
        traces.append(run.log.to_json_lines())

    doc: Dict[str, Any] = {
        'schema': RESULT_SCHEMA,
        'family': family.name,
        'N': cluster.n_total, 'p': cluster.p, 'm': cluster.m,
    }
    if len(runs) == 1:
        doc.update(runs[0])
    else:
        doc['runs'] = runs

    if params['baseline'] is not None:
        d = params['baseline_d'] or (runs[0]['k_star'] if runs else 1)
        utility, top = aggregate_and_rank(cluster, params['baseline'], d,
                                          jobs=jobs)
        doc['baseline'] = {'method': utility.method.value, 'd': d,
                           'support': sorted(j + 1 for j in top)}
        if params['scores'] is not None:
            try:
                with open(params['scores'], 'w', encoding='utf-8',
                          newline='') as f:
                    utility.write_csv(f)
            except OSError as e:
                raise DataIOError('cannot write {}: {}'.format(
                    params['scores'], e)) from e

    if params['trace'] is not None:
        _emit(''.join(traces), params['trace'])
    doc['config'] = cfg.to_dict()
    _emit(_dump(doc), params['out'])
    return 0


def cmd_bench(cfg: RunConfig) -> int:
    params = cfg.params
    if params['scenario'] is None:
        raise UsageError('bench needs --scenario')
    methods = params['methods']
    if isinstance(methods, str):
        methods = methods.split(',')
    methods = resolve_methods(methods)
    spec = ScenarioSpec(params['scenario'], params['N'], params['p'],
                        params['m'], params['seed'])
    # replications run side by side, each one single threaded inside
    table = run_campaign(spec, methods, params['T'], parallel=_jobs(params),
                         options=_options(params, _single_lambda(params), 1),
                         baseline_d=params['baseline_d'])
    if params['json'] is not None:
        doc = dict(table.to_dict(), schema=RESULT_SCHEMA,
                   config=cfg.to_dict())
        _emit(_dump(doc), params['json'])
    if params['out'] is None:
        table.write_csv(sys.stdout)
    else:
        try:
            with open(params['out'], 'w', encoding='utf-8', newline='') as f:
                table.write_csv(f)
        except OSError as e:
            raise DataIOError('cannot write {}: {}'.format(
                params['out'], e)) from e
    return 0


def cmd_stability(cfg: RunConfig) -> int:
    params = cfg.params
    if params['data'] is None or params['m'] is None:
        raise UsageError('stability needs --data and --m')
    family = _family(params)
    # pooled rows; partitions are drawn afresh for every repetition
    single = not os.path.isdir(params['data'])
    shards = load_shards(params['data'], family, m=1 if single else None,
                         header=params['header'],
                         standardize=params['standardize'])
    X, y = pooled(shards)
    options = _options(params, _single_lambda(params), _jobs(params))
    study = run_partition_study(X, y, family, params['m'], params['T'],
                                seed=params['seed'], options=options)
    if params['csv'] is not None:
        try:
            with open(params['csv'], 'w', encoding='utf-8', newline='') as f:
                study.write_csv(f)
        except OSError as e:
            raise DataIOError('cannot write {}: {}'.format(
                params['csv'], e)) from e
    doc = dict(study.to_dict(), schema=RESULT_SCHEMA, family=family.name,
               N=int(X.shape[0]), p=int(X.shape[1]), config=cfg.to_dict())
    _emit(_dump(doc), params['out'])
    return 0


COMMANDS = {
    'simulate': (cmd_simulate, SIMULATE_DEFAULTS),
    'screen': (cmd_screen, SCREEN_DEFAULTS),
    'bench': (cmd_bench, BENCH_DEFAULTS),
    'stability': (cmd_stability, STABILITY_DEFAULTS),
}


def _add_dvs_flags(p: argparse.ArgumentParser, family: bool = True) -> None:
    if family:
        p.add_argument('--family',
                       help='gaussian, logistic or poisson')
    p.add_argument('--lambda', dest='lambda',
                   help='lasso penalty: "auto" (c sqrt(ln p / n)), a '
                        'number, or a comma separated list (screen)')
    p.add_argument('--lambda-c', dest='lambda_c', type=float,
                   help='constant c of the automatic penalty')
    group = p.add_mutually_exclusive_group()
    group.add_argument('--k', type=int, help='fixed sparsity level')
    group.add_argument('--k-max', dest='k_max', type=int,
                       help='EBIC scan over k = 1..K (default min(p, 50))')
    p.add_argument('--epsilon', type=float, help='DIHT step tolerance')
    p.add_argument('--max-iter', dest='max_iter', type=int,
                   help='DIHT iteration cap')
    p.add_argument('--vartheta0', type=float,
                   help='initial step scale')
    p.add_argument('--static-step', dest='static_step', action='store_true',
                   default=None,
                   help='start from the eigenvalue bound rho_1 mu / n')
    p.add_argument('--lasso-max-iter', dest='lasso_max_iter', type=int)
    p.add_argument('--jobs', type=int,
                   help='worker threads (default: logical cores)')
    p.add_argument('--config', help='JSON config or a previous result')


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument('--data', help='shard directory, .dvs cache or one CSV')
    p.add_argument('--m', type=int,
                   help='machines to split a single CSV into')
    p.add_argument('--header', action='store_true', default=None,
                   help='skip the first line of every CSV')
    p.add_argument('--no-standardize', dest='standardize',
                   action='store_false', default=None,
                   help='keep covariates as read')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='dvs', description='distributed variable screening for GLMs')
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true',
                           help='debug logging')
    verbosity.add_argument('-q', '--quiet', action='store_true',
                           help='warnings and errors only')
    sub = parser.add_subparsers(dest='command', metavar='COMMAND')
    sub.required = True

    p = sub.add_parser('simulate', help='write a synthetic scenario')
    p.add_argument('--example', help='1.1, 1.2, 2.1, 2.2, 3.1 or 3.2')
    p.add_argument('--N', type=int)
    p.add_argument('--p', type=int)
    p.add_argument('--m', type=int)
    p.add_argument('--seed', type=int)
    p.add_argument('--out', help='output directory')
    p.add_argument('--format', choices=['csv', 'cache'])
    p.add_argument('--jobs', type=int)
    p.add_argument('--config')

    p = sub.add_parser('screen', help='screen one dataset')
    _add_data_flags(p)
    _add_dvs_flags(p)
    p.add_argument('--shuffle-seed', dest='shuffle_seed', type=int,
                   help='shuffle rows before splitting a single CSV')
    p.add_argument('--transport',
                   choices=[t.value for t in Transport])
    p.add_argument('--baseline', help='also rank by a marginal utility: '
                                      'pearson, kendall, sirs or dcor')
    p.add_argument('--baseline-d', dest='baseline_d', type=int,
                   help='baseline model size (default k*)')
    p.add_argument('--scores', help='CSV of the baseline scores')
    p.add_argument('--trace', help='JSON lines of every DIHT iteration')
    p.add_argument('--out', help='result JSON (default stdout)')

    p = sub.add_parser('bench', help='Monte Carlo campaign on a scenario')
    _add_dvs_flags(p, family=False)
    p.add_argument('--scenario', help='1.1, 1.2, 2.1, 2.2, 3.1 or 3.2')
    p.add_argument('--N', type=int)
    p.add_argument('--p', type=int)
    p.add_argument('--m', type=int)
    p.add_argument('--seed', type=int, help='base seed')
    p.add_argument('--T', type=int, help='replications')
    p.add_argument('--methods',
                   help='comma separated: dvs, pearson, kendall, sirs, dcor')
    p.add_argument('--baseline-d', dest='baseline_d', type=int,
                   help='baseline model size (default ceil(N / ln N))')
    p.add_argument('--out', help='CSV table (default stdout)')
    p.add_argument('--json', help='JSON report')

    p = sub.add_parser('stability',
                       help='selection frequencies over random partitions')
    _add_data_flags(p)
    _add_dvs_flags(p)
    p.add_argument('--T', type=int, help='partitions')
    p.add_argument('--seed', type=int)
    p.add_argument('--csv', help='CSV of selection frequencies')
    p.add_argument('--out', help='result JSON (default stdout)')
    return parser


def _configure_logging(verbose: bool, quiet: bool) -> None:
    level = logging.DEBUG if verbose else \
        logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        stream=sys.stderr, level=level,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    logging.getLogger().setLevel(level)


def run(args: argparse.Namespace) -> int:
    command, defaults = COMMANDS[args.command]
    flags = {k: v for k, v in vars(args).items() if k in defaults}
    file_config = RunConfig.load(args.config) \
        if getattr(args, 'config', None) else None
    cfg = resolve(args.command, flags, defaults, file_config)
    log.debug('%s config: %s', args.command, cfg.params)
    return command(cfg)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose, args.quiet)
    try:
        return run(args)
    except DvsError as e:
        print('dvs: error: {}'.format(e), file=sys.stderr)
        return e.exit_code


if __name__ == '__main__':
    sys.exit(main())
