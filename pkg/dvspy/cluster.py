""" coordinator, workers and the single broadcast/aggregate round

Machine 0 is the coordinator and holds the first shard. One round sends
beta to the m-1 workers, each answers with its local gradient, and the
coordinator averages the m gradients in ascending machine order:

    grad L(beta) = m^-1 sum_i grad L_i(beta)

Worker replies travel over a clocked stream: transports push them from
their own threads, the coordinator ticks the clock and sees them in its
thread only. The worker deadline is the `timeout` operator on that clock.
"""
import logging
import socket
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Optional, Tuple, Union

import numpy as np

from .config import worker_timeout_ms
from .errors import AggregationError, ConfigError, DvsError, ShapeError
from .glm import CoefLike, DataShard, GlmFamily, as_values, local_gradient
from .operators import each, fmap, merge, scan, timeout, where
from .stream import Clock, Stream
from .wire import Tag, read_frame, write_frame

log = logging.getLogger(__name__)

Address = Tuple[str, int]


class Transport(Enum):
    IN_PROCESS = 'inprocess'
    TCP = 'tcp'


@dataclass(frozen=True)
class GradientReply:
    machine_id: int
    grad: np.ndarray
    n_local: int

    def __post_init__(self):
        if not np.all(np.isfinite(self.grad)):
            raise AggregationError(self.machine_id,
                                   'gradient has non-finite entries')


@dataclass(frozen=True)
class WorkerFailure:
    machine_id: int
    reason: str


@dataclass
class RoundStats:
    """ messages exchanged by the rounds of one run; with m = 1 a round
    sends nothing but still counts as one logical round """
    rounds: int = 0
    broadcasts: int = 0
    replies: int = 0
    seconds: float = 0.0

    def to_dict(self) -> Dict[str, Union[int, float]]:
        return {'rounds': self.rounds, 'broadcasts': self.broadcasts,
                'replies': self.replies, 'seconds': self.seconds}


@dataclass(frozen=True)
class ClusterSpec:
    """ m machines, machine 0 the coordinator, one shard per machine """
    shards: Tuple[DataShard, ...]
    transport: Transport = Transport.IN_PROCESS
    timeout_ms: int = field(default_factory=worker_timeout_ms)
    jobs: Optional[int] = None

    def __post_init__(self):
        shards = tuple(sorted(self.shards, key=lambda s: s.machine_id))
        if not shards:
            raise ConfigError('a cluster needs at least one machine')
        ids = [s.machine_id for s in shards]
        if ids != list(range(len(shards))):
            raise ConfigError('machine ids must be 0..m-1 with one shard '
                              'each, got {}'.format(ids))
        ps = {s.p for s in shards}
        if len(ps) != 1:
            raise ShapeError('shards disagree on p: {}'.format(sorted(ps)))
        if self.timeout_ms <= 0:
            raise ConfigError('timeout_ms must be positive')
        if len({s.n for s in shards}) != 1:
            log.warning('unequal shard sizes %s: the aggregate stays the '
                        'unweighted mean of local gradients and is not the '
                        'pooled gradient', [s.n for s in shards])
        object.__setattr__(self, 'shards', shards)
        object.__setattr__(self, 'transport', Transport(self.transport))

    @property
    def m(self) -> int:
        return len(self.shards)

    @property
    def p(self) -> int:
        return self.shards[0].p

    @property
    def n_total(self) -> int:
        return sum(s.n for s in self.shards)

    @property
    def coordinator(self) -> DataShard:
        return self.shards[0]

    @property
    def workers(self) -> Tuple[DataShard, ...]:
        return self.shards[1:]


class _RoundBus:
    """ streams of one round, all driven by one clock """

    def __init__(self, pending: List[int], p: int, timeout_s: float):
        self.p = p
        self.clock = Clock()
        self.requests: Stream[int] = Stream(self.clock)
        self.replies: Stream[object] = Stream(self.clock)
        self.arrived = threading.Event()

        received = where(lambda r: isinstance(r, GradientReply),
                         self.replies)
        self.failures = where(lambda r: isinstance(r, WorkerFailure),
                              self.replies)
        self.collected = scan(self._collect, {}, received)
        self.complete = where(lambda acc: len(acc) == len(pending),
                              self.collected)
        self.expired = timeout(timeout_s, self.complete, self.requests)
        self.aborted = merge([
            fmap(lambda f: AggregationError(f.machine_id, f.reason),
                 self.failures),
            fmap(lambda now: AggregationError(
                self._missing(pending)[0],
                'no reply before the worker timeout'), self.expired),
        ])
        each(lambda r: log.debug('reply from machine %d', r.machine_id),
             received)

    def _collect(self, acc, reply):
        if reply.machine_id in acc:
            # a second answer is a protocol violation, not a retry
            self.failures(WorkerFailure(reply.machine_id, 'duplicate reply'))
            return acc
        return {**acc, reply.machine_id: reply}

    def _missing(self, pending: List[int]) -> List[int]:
        got = self.collected() or {}
        return [i for i in pending if i not in got]

    def post(self, reply) -> None:
        """ thread-safe: called by transports from any thread """
        if isinstance(reply, GradientReply) and reply.grad.shape != (self.p,):
            reply = WorkerFailure(reply.machine_id, 'gradient of length {}, '
                                  'expected {}'.format(reply.grad.shape[0],
                                                       self.p))
        self.replies(reply)
        self.arrived.set()

    def wait(self, poll: float = 0.05) -> Dict[int, GradientReply]:
        while True:
            self.clock.tick()
            if self.aborted() is not None:
                raise self.aborted()
            if self.complete() is not None:
                return self.complete()
            self.arrived.wait(poll)
            self.arrived.clear()


class InProcessWorkers:
    """ workers evaluated on a thread pool sharing the coordinator's
    memory """

    def __init__(self, shards: Tuple[DataShard, ...], family: GlmFamily,
                 jobs: Optional[int] = None):
        self.shards = shards
        self.family = family
        self.pool = ThreadPoolExecutor(max_workers=jobs or None)

    def dispatch(self, beta: np.ndarray, post) -> None:
        for shard in self.shards:
            self.pool.submit(self._serve, shard, beta, post)

    def _serve(self, shard: DataShard, beta: np.ndarray, post) -> None:
        try:
            grad = local_gradient(shard, beta, self.family)
            reply = GradientReply(shard.machine_id, grad, shard.n)
        except (DvsError, ArithmeticError, ValueError) as e:
            reply = WorkerFailure(shard.machine_id, str(e))
        post(reply)

    def close(self) -> None:
        self.pool.shutdown(wait=False)


class WorkerServer:
    """ serves one shard's local gradient over tcp

    Each connection carries one broadcast frame and gets one reply frame.
    """

    def __init__(self, shard: DataShard, family: GlmFamily,
                 host: str = '127.0.0.1', port: int = 0):
        self.shard = shard
        self.family = family
        self.sock = socket.create_server((host, port))
        self.address: Address = self.sock.getsockname()[:2]
        self._thread = threading.Thread(target=self._serve_forever,
                                        daemon=True)
        self._closed = False

    def start(self) -> 'WorkerServer':
        self._thread.start()
        return self

    def _serve_forever(self) -> None:
        while not self._closed:
            try:
                conn, _ = self.sock.accept()
            except OSError:
                return
            with conn:
                try:
                    self._handle(conn)
                except (DvsError, OSError) as e:
                    log.warning('machine %d dropped a request: %s',
                                self.shard.machine_id, e)

    def _handle(self, conn: socket.socket) -> None:
        frame = read_frame(conn)
        if frame.tag is not Tag.BROADCAST_BETA:
            log.warning('machine %d ignored a frame tagged %s',
                        self.shard.machine_id, frame.tag.name)
            return
        grad = local_gradient(self.shard, frame.values, self.family)
        write_frame(conn, Tag.GRADIENT_REPLY, self.shard.machine_id, grad)

    def close(self) -> None:
        self._closed = True
        self.sock.close()


def request_gradient(address: Address, machine_id: int, beta: np.ndarray,
                     timeout_s: float) -> np.ndarray:
    """ one round trip with a worker: send beta, read its gradient """
    with socket.create_connection(address, timeout=timeout_s) as sock:
        write_frame(sock, Tag.BROADCAST_BETA, machine_id, beta)
        frame = read_frame(sock)
    if frame.tag is not Tag.GRADIENT_REPLY:
        raise AggregationError(machine_id, 'expected a gradient reply, got '
                               '{}'.format(frame.tag.name))
    if frame.machine_id != machine_id:
        raise AggregationError(machine_id, 'reply claims to come from '
                               'machine {}'.format(frame.machine_id))
    return frame.values


class TcpWorkers:
    """ workers behind sockets; by default each shard is served by a
    loopback WorkerServer started here """

    def __init__(self, shards: Tuple[DataShard, ...], family: GlmFamily,
                 timeout_s: float, jobs: Optional[int] = None,
                 addresses: Optional[Dict[int, Address]] = None):
        self.shards = shards
        self.timeout_s = timeout_s
        self.servers: List[WorkerServer] = []
        if addresses is None:
            self.servers = [WorkerServer(s, family).start() for s in shards]
            addresses = {srv.shard.machine_id: srv.address
                         for srv in self.servers}
        self.addresses = addresses
        self.pool = ThreadPoolExecutor(max_workers=jobs or len(shards) or 1)

    def dispatch(self, beta: np.ndarray, post) -> None:
        for shard in self.shards:
            self.pool.submit(self._serve, shard, beta, post)

    def _serve(self, shard: DataShard, beta: np.ndarray, post) -> None:
        mid = shard.machine_id
        try:
            grad = request_gradient(self.addresses[mid], mid, beta,
                                    self.timeout_s)
            reply = GradientReply(mid, grad, shard.n)
        except (DvsError, OSError) as e:
            reply = WorkerFailure(mid, str(e))
        post(reply)

    def close(self) -> None:
        self.pool.shutdown(wait=False)
        for srv in self.servers:
            srv.close()


@contextmanager
def open_workers(cluster: ClusterSpec,
                 family: GlmFamily) -> Iterator[Union[InProcessWorkers,
                                                      TcpWorkers]]:
    if cluster.transport is Transport.TCP:
        workers = TcpWorkers(cluster.workers, family,
                             cluster.timeout_ms / 1000.0, cluster.jobs)
    else:
        workers = InProcessWorkers(cluster.workers, family, cluster.jobs)
    try:
        yield workers
    finally:
        workers.close()


@dataclass(frozen=True)
class RoundResult:
    gradient: np.ndarray
    local: np.ndarray  # the coordinator's own gradient at the same beta
    stats: RoundStats


def aggregate_round(cluster: ClusterSpec, beta_tilde: CoefLike,
                    family: GlmFamily) -> RoundResult:
    """ broadcast beta, gather every local gradient, average them """
    beta = np.array(as_values(beta_tilde), dtype=float)
    if beta.shape[0] != cluster.p:
        raise ShapeError('coefficient length {} does not match p={}'.format(
            beta.shape[0], cluster.p))
    started = time.perf_counter()
    if cluster.m == 1:
        own = local_gradient(cluster.coordinator, beta, family)
        stats = RoundStats(rounds=1, seconds=time.perf_counter() - started)
        return RoundResult(own.copy(), own, stats)

    pending = [s.machine_id for s in cluster.workers]
    bus = _RoundBus(pending, cluster.p, cluster.timeout_ms / 1000.0)
    with open_workers(cluster, family) as workers:
        bus.requests(len(pending))
        workers.dispatch(beta, bus.post)
        # the coordinator computes its own share, no message to itself
        own = local_gradient(cluster.coordinator, beta, family)
        replies = bus.wait()

    total = own.copy()
    for machine_id in sorted(replies):
        total += replies[machine_id].grad
    gradient = total / cluster.m
    stats = RoundStats(rounds=1, broadcasts=len(pending),
                       replies=len(replies),
                       seconds=time.perf_counter() - started)
    log.debug('round: %d broadcasts, %d replies in %.3fs', stats.broadcasts,
              stats.replies, stats.seconds)
    return RoundResult(gradient, own, stats)


def broadcast_and_aggregate(cluster: ClusterSpec, beta_tilde: CoefLike,
                            family: GlmFamily) -> np.ndarray:
    """ m^-1 sum_i grad L_i(beta_tilde) over one round """
    return aggregate_round(cluster, beta_tilde, family).gradient
