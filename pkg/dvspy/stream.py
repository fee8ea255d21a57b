from typing import TypeVar, Generic, List, Callable, Optional, Any, Deque
from collections import deque
from functools import partial
import time

T = TypeVar('T')


class Stream(Generic[T]):
    """ Stream: a sequence of events, the message bus of a round

    two operations are used:

    * s() to get the latest event
    * s(event) to push an event

    >>> s = Stream()
    >>> s.hook = print
    >>> s('beta broadcast')
    beta broadcast
    >>> s()
    'beta broadcast'
    >>> s.listeners.append(lambda _, e: print('seen', e))
    >>> s('gradient reply')
    gradient reply
    seen gradient reply
    """
    def __init__(self, clock: Optional['Clock'] = None, hook=None):
        self.value: Optional[T] = None
        self.listeners: List[Callable[['Stream[T]', T], None]] = []
        self.clock = clock
        self.hook = hook  # called with every event before the listeners

    def __call__(self, value=None):
        """
        when called without parameter, get, otherwise push

        A stream owned by a clock never updates in the caller's thread: the
        update is queued on the clock and delivered when the clock ticks.
        Worker threads may therefore push replies at any time while the
        coordinator sees them only inside its own tick, in arrival order.
        """
        if value is None:
            return self.value
        if self.clock is None or self.clock is self:
            self._update(value)
        else:
            self.clock.schedule(partial(self._update, value))

    def _update(self, value):
        if self.hook is not None:
            self.hook(value)
        self.value = value
        for f in list(self.listeners):
            f(self, value)


class Clock(Stream[float]):
    """ a stream whose clock is itself, ticked by its owner

    >>> clk = Clock()
    >>> s = Stream(clk)
    >>> s.hook = print
    >>> s('reply from machine 1')
    >>> s() is None
    True
    >>> clk.tick(0.0)
    reply from machine 1
    """
    def __init__(self):
        super().__init__()
        self.clock = self
        self._pending: Deque[Callable[[], None]] = deque()

    def schedule(self, update: Callable[[], None]) -> None:
        # deque.append is atomic, so producers need no lock
        self._pending.append(update)

    def tick(self, now: Optional[float] = None) -> None:
        """ advance to `now` (monotonic seconds by default), notify the
        clock's own listeners, then deliver every queued update including
        those queued while delivering """
        self._update(time.monotonic() if now is None else now)
        while self._pending:
            self._pending.popleft()()


def combine(fn: Callable[[List[Stream[Any]], Stream[T], Stream[Any], Any],
                         Optional[T]],
            deps: List[Stream[Any]]) -> Stream[T]:
    """ derive a stream from upstream streams

    Parameters
    ----------
    fn : Callable[[List[Stream[Any]], Stream[T], Stream[Any], Any], T]
        combining function: (dependents, self, src, event) -> event,
        returning None drops the event
    deps : List[Stream[Any]]
        dependent streams

    Returns
    -------
    Stream[T]
    """
    s: Stream[T] = Stream()
    # inherit the upstream clock only if it is unique, otherwise orphan
    clocks = {id(dep.clock): dep.clock for dep in deps
              if dep.clock is not None}
    if len(clocks) == 1:
        s.clock = next(iter(clocks.values()))

    def notify(src, value):
        s(fn(deps, s, src, value))

    for dep in deps:
        if dep() is not None:
            notify(dep, dep())
        dep.listeners.append(notify)

    return s
