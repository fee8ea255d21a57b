import logging
import socket

import numpy as np
import pytest

from dvspy.cluster import (ClusterSpec, GradientReply, Transport,
                           WorkerServer, _RoundBus, aggregate_round,
                           broadcast_and_aggregate, request_gradient)
from dvspy.errors import (AggregationError, ConfigError, ProtocolError,
                          ShapeError)
from dvspy.glm import BERNOULLI, GAUSSIAN, POISSON, DataShard, local_gradient
from dvspy.simulate import pooled
from dvspy.wire import Tag, decode_payload, encode_frame, read_frame, \
    write_frame
from helper import make_shards


def _pooled_gradient(shards, beta, family):
    X, y = pooled(shards)
    return local_gradient(DataShard(0, X, y), beta, family)


@pytest.mark.parametrize('transport', [Transport.IN_PROCESS, Transport.TCP])
def test_aggregate_equals_pooled_gradient(transport):
    rng = np.random.default_rng(0)
    for trial, family in enumerate([GAUSSIAN, BERNOULLI, POISSON] * 3):
        m = int(rng.integers(2, 6))
        shards = make_shards(family, 30, 8, m, 0.2 * np.ones(8), seed=trial,
                             scale=0.5)
        cluster = ClusterSpec(tuple(shards), transport=transport)
        beta = 0.3 * rng.standard_normal(8)
        got = broadcast_and_aggregate(cluster, beta, family)
        want = _pooled_gradient(shards, beta, family)
        assert np.allclose(got, want, rtol=1e-12, atol=1e-14)


def test_round_statistics():
    cluster = ClusterSpec(tuple(make_shards(GAUSSIAN, 20, 4, 4, seed=1)))
    result = aggregate_round(cluster, np.zeros(4), GAUSSIAN)
    assert result.stats.rounds == 1
    assert result.stats.broadcasts == 3
    assert result.stats.replies == 3
    assert np.array_equal(result.local,
                          local_gradient(cluster.coordinator, np.zeros(4),
                                         GAUSSIAN))


def test_single_machine_sends_nothing():
    cluster = ClusterSpec(tuple(make_shards(GAUSSIAN, 20, 4, 1, seed=1)))
    result = aggregate_round(cluster, np.ones(4), GAUSSIAN)
    assert result.stats.rounds == 1
    assert result.stats.broadcasts == 0
    assert np.array_equal(result.gradient, result.local)


def _overflowing_cluster(transport):
    good = make_shards(POISSON, 10, 2, 1, seed=0)[0]
    bad = DataShard(1, 100.0 * np.ones((10, 2)), np.zeros(10))
    return ClusterSpec((good, bad), transport=transport)


@pytest.mark.parametrize('transport', [Transport.IN_PROCESS, Transport.TCP])
def test_worker_failure_names_machine(transport):
    cluster = _overflowing_cluster(transport)
    with pytest.raises(AggregationError) as e:
        aggregate_round(cluster, np.ones(2), POISSON)
    assert e.value.machine_id == 1


def test_timeout_names_missing_machine():
    bus = _RoundBus([1, 2], p=3, timeout_s=0.05)
    bus.requests(2)
    bus.post(GradientReply(1, np.zeros(3), 5))
    with pytest.raises(AggregationError) as e:
        bus.wait(poll=0.01)
    assert e.value.machine_id == 2
    assert 'timeout' in str(e.value)


def test_duplicate_reply_is_fatal():
    bus = _RoundBus([1, 2], p=3, timeout_s=5.0)
    bus.requests(2)
    bus.post(GradientReply(1, np.zeros(3), 5))
    bus.post(GradientReply(1, np.ones(3), 5))
    with pytest.raises(AggregationError) as e:
        bus.wait(poll=0.01)
    assert e.value.machine_id == 1
    assert 'duplicate' in e.value.reason


def test_wrong_length_reply_is_fatal():
    bus = _RoundBus([1], p=3, timeout_s=5.0)
    bus.requests(1)
    bus.post(GradientReply(1, np.zeros(2), 5))
    with pytest.raises(AggregationError) as e:
        bus.wait(poll=0.01)
    assert e.value.machine_id == 1


def test_complete_round_returns_replies():
    bus = _RoundBus([1, 2], p=2, timeout_s=5.0)
    bus.requests(2)
    bus.post(GradientReply(2, np.ones(2), 5))
    bus.post(GradientReply(1, np.zeros(2), 5))
    replies = bus.wait(poll=0.01)
    assert sorted(replies) == [1, 2]


def test_replies_queued_before_the_first_tick():
    bus = _RoundBus(list(range(1, 8)), p=2, timeout_s=0.5)
    bus.requests(7)
    for i in (4, 2, 7, 1, 6, 3, 5):
        bus.post(GradientReply(i, float(i) * np.ones(2), 5))
    replies = bus.wait(poll=0.01)
    assert sorted(replies) == list(range(1, 8))
    assert replies[6].grad.tolist() == [6.0, 6.0]


def test_non_finite_reply_rejected():
    with pytest.raises(AggregationError):
        GradientReply(3, np.array([0.0, np.nan]), 5)


def test_cluster_validation(caplog):
    a, b = make_shards(GAUSSIAN, 10, 3, 2, seed=0)
    with pytest.raises(ConfigError):
        ClusterSpec((a, DataShard(5, b.X, b.y)))
    with pytest.raises(ShapeError):
        ClusterSpec((a, DataShard(1, np.ones((10, 2)), np.zeros(10))))
    with pytest.raises(ConfigError):
        ClusterSpec(())
    with caplog.at_level(logging.WARNING):
        cluster = ClusterSpec((DataShard(1, b.X[:5], b.y[:5]), a))
    assert 'unequal shard sizes' in caplog.text
    assert cluster.coordinator is a
    assert cluster.n_total == 15


def test_timeout_from_environment(monkeypatch):
    shards = tuple(make_shards(GAUSSIAN, 5, 2, 1))
    monkeypatch.setenv('DVS_WORKER_TIMEOUT_MS', '250')
    assert ClusterSpec(shards).timeout_ms == 250
    monkeypatch.setenv('DVS_WORKER_TIMEOUT_MS', 'soon')
    with pytest.raises(ConfigError):
        ClusterSpec(shards)
    monkeypatch.setenv('DVS_WORKER_TIMEOUT_MS', '0')
    with pytest.raises(ConfigError):
        ClusterSpec(shards)


def test_frame_over_socket():
    left, right = socket.socketpair()
    with left, right:
        write_frame(left, Tag.BROADCAST_BETA, 7, [1.0, 2.5, -3.0])
        frame = read_frame(right)
    assert frame.tag is Tag.BROADCAST_BETA
    assert frame.machine_id == 7
    assert frame.values.tolist() == [1.0, 2.5, -3.0]


def test_malformed_frames():
    payload = encode_frame(Tag.GRADIENT_REPLY, 1, [1.0, 2.0])[4:]
    with pytest.raises(ProtocolError):
        decode_payload(payload[:5])
    with pytest.raises(ProtocolError):
        decode_payload(payload[:-1])
    with pytest.raises(ProtocolError):
        decode_payload(b'\x09' + payload[1:])
    left, right = socket.socketpair()
    with left, right:
        left.sendall(b'\x00\x00\x00\x20\x01')
        left.close()
        with pytest.raises(ProtocolError):
            read_frame(right)


def test_worker_server_round_trip():
    shard = make_shards(BERNOULLI, 25, 4, 2, seed=4)[1]
    server = WorkerServer(shard, BERNOULLI).start()
    try:
        beta = np.array([0.1, -0.2, 0.3, 0.0])
        grad = request_gradient(server.address, 1, beta, 5.0)
    finally:
        server.close()
    assert np.allclose(grad, local_gradient(shard, beta, BERNOULLI),
                       rtol=0, atol=0)
