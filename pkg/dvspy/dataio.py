""" data files: CSV shards, the binary cache and truth.json

CSV: one file per machine, column 1 the response, columns 2..p+1 the
covariates, ',' separated, '.' decimals, no header unless asked.

Binary cache: b'DVS1', then family tag, N, p, m as 8-byte little-endian
integers, then N rows of [y, x_1..x_p] as little-endian doubles, machine
after machine (each machine holds N/m rows).
"""
import json
import logging
import os
import struct
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, DataIOError, DataValidationError
from .glm import BERNOULLI, GAUSSIAN, POISSON, DataShard, GlmFamily

log = logging.getLogger(__name__)

MAGIC = b'DVS1'
_CACHE_HEADER = struct.Struct('<qqqq')
FAMILY_TAGS = {GAUSSIAN: 0, BERNOULLI: 1, POISSON: 2}
CACHE_NAME = 'data.dvs'
TRUTH_NAME = 'truth.json'


def shard_file_name(machine_id: int) -> str:
    return 'shard_{:03d}.csv'.format(machine_id)


def write_csv_shard(path, shard: DataShard) -> None:
    rows = np.column_stack([shard.y, shard.X])
    np.savetxt(path, rows, fmt='%.17g', delimiter=',')


def read_csv(path, header: bool = False) -> Tuple[np.ndarray, np.ndarray]:
    """ (X, y) of one CSV file """
    try:
        data = np.loadtxt(path, delimiter=',', ndmin=2,
                          skiprows=1 if header else 0, encoding='utf-8')
    except OSError as e:
        raise DataIOError('cannot read {}: {}'.format(path, e)) from e
    except ValueError as e:
        raise DataIOError('{} is not a numeric CSV: {}'.format(path, e)) from e
    if data.shape[0] == 0 or data.shape[1] < 2:
        raise DataValidationError('needs a response and at least one '
                                  'covariate column', path=str(path))
    return data[:, 1:], data[:, 0]


def write_cache(path, shards: Sequence[DataShard],
                family: GlmFamily) -> None:
    ordered = sorted(shards, key=lambda s: s.machine_id)
    N = sum(s.n for s in ordered)
    p = ordered[0].p
    with open(path, 'wb') as f:
        f.write(MAGIC)
        f.write(_CACHE_HEADER.pack(FAMILY_TAGS[family], N, p, len(ordered)))
        for s in ordered:
            rows = np.column_stack([s.y, s.X]).astype('<f8')
            f.write(rows.tobytes(order='C'))


def read_cache(path) -> Tuple[List[DataShard], GlmFamily]:
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise DataIOError('cannot read {}: {}'.format(path, e)) from e
    head = len(MAGIC) + _CACHE_HEADER.size
    if len(raw) < head or raw[:len(MAGIC)] != MAGIC:
        raise DataIOError('{} is not a dvs cache'.format(path))
    tag, N, p, m = _CACHE_HEADER.unpack_from(raw, len(MAGIC))
    families = {v: k for k, v in FAMILY_TAGS.items()}
    if tag not in families or m < 1 or N % m or p < 1:
        raise DataIOError('{} has a corrupt header'.format(path))
    if len(raw) != head + N * (p + 1) * 8:
        raise DataIOError('{} is truncated'.format(path))
    rows = np.frombuffer(raw, dtype='<f8', offset=head).reshape(N, p + 1)
    n = N // m
    shards = [DataShard(i, rows[i * n:(i + 1) * n, 1:].astype(float),
                        rows[i * n:(i + 1) * n, 0].astype(float))
              for i in range(m)]
    return shards, families[tag]


def standardize_columns(X: np.ndarray) -> np.ndarray:
    """ center and scale to unit variance (ddof=0), constant columns to 0

    >>> standardize_columns(np.array([[1.0, 5.0], [3.0, 5.0]])).tolist()
    [[-1.0, 0.0], [1.0, 0.0]]
    """
    mean = X.mean(axis=0)
    sd = X.std(axis=0)
    out = X - mean
    live = sd > 0
    out[:, live] /= sd[live]
    out[:, ~live] = 0.0
    return out


def partition(X: np.ndarray, y: np.ndarray, m: int,
              shuffle_seed: Optional[int] = None,
              drop_remainder: bool = False) -> List[DataShard]:
    """ split rows into m contiguous blocks, after an optional seeded
    shuffle; leading blocks get the extra rows unless dropped """
    N = X.shape[0]
    if not 1 <= m <= N:
        raise ConfigError('m={} must be between 1 and N={}'.format(m, N))
    order = np.arange(N)
    if shuffle_seed is not None:
        order = np.random.default_rng(shuffle_seed).permutation(N)
    if drop_remainder:
        order = order[:N - N % m]
    blocks = np.array_split(order, m)
    return [DataShard(i, X[idx], y[idx]) for i, idx in enumerate(blocks)]


def _relocate(e: DataValidationError, path: str,
              header: bool) -> DataValidationError:
    row = None if e.row is None else e.row + (1 if header else 0)
    return DataValidationError(e.message, row=row, path=path)


def _validate(shards: Sequence[DataShard], family: GlmFamily,
              paths: Sequence[str], header: bool) -> None:
    for shard, path in zip(shards, paths):
        try:
            shard.validate(family)
        except DataValidationError as e:
            raise _relocate(e, path, header) from None


def load_shards(path, family: GlmFamily, m: Optional[int] = None,
                header: bool = False, shuffle_seed: Optional[int] = None,
                standardize: bool = True) -> List[DataShard]:
    """ shards from a directory of CSV shards, a cache, or one CSV split
    into m machines """
    path = Path(path)
    if path.is_dir():
        cache = path / CACHE_NAME
        if cache.exists():
            shards, _ = read_cache(cache)
            sources = [str(cache)] * len(shards)
        else:
            files = sorted(path.glob('*.csv'))
            if not files:
                raise DataIOError('no CSV shards in {}'.format(path))
            if m is not None and m != len(files):
                log.warning('--m %d ignored: %s holds %d shard files', m,
                            path, len(files))
            shards = []
            for i, f in enumerate(files):
                X, y = read_csv(f, header)
                shards.append(DataShard(i, X, y))
            sources = [str(f) for f in files]
    elif path.suffix == '.dvs':
        shards, _ = read_cache(path)
        sources = [str(path)] * len(shards)
    elif path.exists():
        if m is None:
            raise ConfigError('a single CSV needs --m')
        X, y = read_csv(path, header)
        try:
            family.check_response(y)
        except DataValidationError as e:
            raise _relocate(e, str(path), header) from None
        shards = partition(X, y, m, shuffle_seed)
        sources = [str(path)] * len(shards)
    else:
        raise DataIOError('{} does not exist'.format(path))

    if len({s.p for s in shards}) != 1:
        raise DataValidationError('shards disagree on the number of '
                                  'covariates', path=str(path))
    _validate(shards, family, sources, header)
    if standardize:
        X = standardize_columns(np.vstack([s.X for s in shards]))
        bounds = np.cumsum([0] + [s.n for s in shards])
        shards = [DataShard(s.machine_id, X[lo:hi], s.y)
                  for s, lo, hi in zip(shards, bounds[:-1], bounds[1:])]
    return shards


def write_truth(path, spec, truth: np.ndarray,
                config: Optional[dict] = None) -> None:
    """ truth.json of a simulated dataset, indices 1-based """
    support = [int(j) for j in np.flatnonzero(truth)]
    doc = {
        'scenario': spec.example.value,
        'family': spec.family.name,
        'N': spec.N, 'p': spec.p, 'm': spec.m, 'seed': spec.seed,
        'support': [j + 1 for j in support],
        'beta': [{'index': j + 1, 'value': float(truth[j])}
                 for j in support],
    }
    if config is not None:
        doc['config'] = config
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(doc, f, indent=2)
        f.write('\n')


def ensure_dir(path) -> Path:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as e:
        raise DataIOError('cannot create {}: {}'.format(path, e)) from e
    return Path(path)
