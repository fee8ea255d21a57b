from typing import Any, Callable, List, Optional, TypeVar
from .stream import Stream, combine

T = TypeVar('T')
S = TypeVar('S')
R = TypeVar('R')


def fmap(fn: Callable[[T], S], s: Stream[T]) -> Stream[S]:
    """ apply function to every event of a stream

    >>> # gradient norms of the replies
    >>> src = Stream()
    >>> s = fmap(lambda grad: sum(g * g for g in grad), src)
    >>> s.hook = print
    >>> src([3.0, 4.0])
    25.0

    Parameters
    ----------
    fn : Callable[[T], S]
        function to process a single event
    s : Stream[T]
        source stream

    Returns
    -------
    Stream[S]
    """

    def g(deps, this, src, value):
        return fn(value)

    return combine(g, [s])


def where(fn: Callable[[T], bool], s: Stream[T]) -> Stream[T]:
    """ preserve events making fn true

    >>> # keep only replies from odd machines
    >>> src = Stream()
    >>> s = where(lambda machine: machine % 2 == 1, src)
    >>> s.hook = print
    >>> src(2)
    >>> src(3)
    3

    Parameters
    ----------
    fn : Callable[[T], bool]
        when fn is true the event is preserved
    s : Stream[T]
        source stream

    Returns
    -------
    Stream[T]
    """

    def g(deps, this, src, value):
        if fn(value):
            return value

    return combine(g, [s])


def scan(fn: Callable[[S, T], S], init: Optional[S],
         s: Stream[T]) -> Stream[S]:
    """ accumulate events, every event of the result is the accumulation
    of the previous accumulation and the arrived event

    >>> # count the machines that have answered
    >>> src = Stream()
    >>> s = scan(lambda acc, machine: acc | {machine}, frozenset(), src)
    >>> s.hook = lambda acc: print(sorted(acc))
    >>> src(3)
    [3]
    >>> src(1)
    [1, 3]

    Parameters
    ----------
    fn : Callable[[S, T], S]
        accumulate function
    init : S
        initial accumulation, if None the first event is the initial one
    s : Stream[T]
        source stream

    Returns
    -------
    Stream[S]
    """

    # the accumulation lives here: on a clocked stream this() lags behind
    # the updates still queued in the same tick
    acc = [init]

    def g(deps, this, src, value):
        acc[0] = value if acc[0] is None else fn(acc[0], value)
        return acc[0]

    return combine(g, [s])


def each(fn: Callable[[T], None], s: Stream[T]) -> None:
    """ perform an unpure action for each event

    >>> s = Stream()
    >>> each(print, s)
    >>> s('machine 4 answered')
    machine 4 answered
    """

    def g(deps, this, src, value):
        fn(value)

    combine(g, [s])


def timeout(t: float, responds: Stream[T], s: Stream[S]) -> Stream[float]:
    """ emit the clock time once t seconds pass after the last event of
    the request stream without any event on the responding stream

    Both streams must share a clock, whose values are seconds.

    >>> from dvspy.stream import Clock
    >>> clk = Clock()
    >>> requests = Stream(clk)
    >>> responds = Stream(clk)
    >>> s = timeout(2, responds, requests)
    >>> s.hook = print
    >>> requests('round 1')
    >>> clk.tick(0)
    >>> clk.tick(1)
    >>> responds('all replies')
    >>> clk.tick(2)
    >>> requests('round 2')
    >>> clk.tick(4)
    >>> clk.tick(6)
    >>> clk.tick(7)
    7

    Parameters
    ----------
    t : float
        limit of elapsed time
    responds : Stream[T]
        responding stream to s
    s : Stream[S]
        source (request) stream

    Returns
    -------
    Stream[float]
        clock times at which the deadline expired
    """
    started = [None]
    res: Stream[float] = Stream(s.clock)

    def on_request(src, value):
        started[0] = res.clock()

    def on_respond(src, value):
        started[0] = None

    def on_clock(clock, now):
        if started[0] is not None and now - started[0] > t:
            started[0] = None
            res(now)

    responds.listeners.append(on_respond)
    s.clock.listeners.append(on_clock)
    s.listeners.append(on_request)

    return res


def merge(ss: List[Stream[Any]]) -> Stream[Any]:
    """ merge multiple streams

    >>> t = []
    >>> failed = Stream()
    >>> late = Stream()
    >>> ms = merge([failed, late])
    >>> ms.hook = t.append
    >>> failed('machine 2 crashed')
    >>> late('machine 5 timed out')
    >>> t
    ['machine 2 crashed', 'machine 5 timed out']
    """

    def g(deps, this, src, value):
        return value

    return combine(g, ss)
