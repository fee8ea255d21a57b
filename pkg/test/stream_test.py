import threading

from dvspy.operators import each, fmap, merge, scan, timeout, where
from dvspy.stream import Clock, Stream, combine
from helper import record


def test_event_order():
    """ event of streams """
    trace = []
    clk = Clock()
    s1 = Stream(clk)
    s2 = Stream(clk)
    s3 = Stream(clk, trace.append)
    clk.listeners.append(lambda _, t: s1(t))
    s1.listeners.append(lambda _, x1: s2(x1 + 10))
    s1.listeners.append(lambda _, x1: s3(x1))
    s2.listeners.append(lambda _, x2: s3(x2))
    clk.tick(1)
    assert trace == [1, 11]


def test_combine_deps():
    # Sum two stream values when either changes
    s1 = Stream()
    s2 = Stream()

    def sum_upstreams(deps, s, src, value):
        return sum(dep() for dep in deps if dep() is not None)

    # existing value will also be pushed
    s1(1)
    s = record(combine(sum_upstreams, [s1, s2]))
    s2(3)
    s1(2)
    s1(5)
    s2(6)
    assert s.footprint == [1, 4, 5, 8, 11]


def test_combine_inherits_unique_clock():
    clk = Clock()
    other = Clock()
    assert combine(lambda *a: None, [Stream(clk), Stream(clk)]).clock is clk
    assert combine(lambda *a: None, [Stream(clk), Stream(other)]).clock \
        is None


def test_clocked_push_waits_for_tick():
    clk = Clock()
    s = Stream(clk)
    r = record(s)
    s('a')
    s('b')
    assert r.footprint == []
    clk.tick(0)
    assert r.footprint == ['a', 'b']


def test_scan_folds_every_update_of_a_tick():
    clk = Clock()
    src = Stream(clk)
    acc = scan(lambda a, x: a + [x], [], src)
    r = record(acc)
    src(1)
    src(2)
    src(3)
    clk.tick(0)
    assert r.footprint == [[1], [1, 2], [1, 2, 3]]
    assert acc() == [1, 2, 3]


def test_pushes_from_threads_arrive_in_one_tick():
    clk = Clock()
    replies = Stream(clk)
    seen = record(scan(lambda acc, r: acc + [r], [], replies))
    threads = [threading.Thread(target=replies, args=(i,))
               for i in range(1, 9)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert seen.footprint == []
    clk.tick(0)
    assert sorted(seen.footprint[-1]) == list(range(1, 9))


def test_fmap():
    src = Stream()
    s = record(fmap(lambda x: x + 3, src))
    src(1)
    src(9)
    assert s.footprint == [4, 12]


def test_where_scan_each():
    src = Stream()
    evens = where(lambda x: x % 2 == 0, src)
    total = record(scan(lambda acc, x: acc + x, 0, evens))
    seen = []
    each(seen.append, evens)
    for x in range(1, 7):
        src(x)
    assert total.footprint == [2, 6, 12]
    assert seen == [2, 4, 6]


def test_scan_no_init():
    src = Stream()
    s = record(scan(lambda acc, x: acc * x, None, src))
    src(2)
    src(3)
    src(4)
    assert s.footprint == [2, 6, 24]


def test_merge():
    s1 = Stream()
    s2 = Stream()
    s = record(merge([s1, s2]))
    s1(1)
    s1(5)
    s2(7)
    s1(1)
    s2(8)
    assert s.footprint == [1, 5, 7, 1, 8]


def test_timeout_fires_once_per_request():
    clk = Clock()
    requests = Stream(clk)
    responds = Stream(clk)
    expired = record(timeout(1.0, responds, requests))
    requests('round')
    clk.tick(0.0)
    clk.tick(0.5)
    clk.tick(1.5)
    clk.tick(3.0)
    assert expired.footprint == [1.5]


def test_timeout_cancelled_by_response():
    clk = Clock()
    requests = Stream(clk)
    responds = Stream(clk)
    expired = record(timeout(1.0, responds, requests))
    requests('round')
    clk.tick(0.0)
    responds('done')
    clk.tick(0.5)
    clk.tick(5.0)
    assert expired.footprint == []
