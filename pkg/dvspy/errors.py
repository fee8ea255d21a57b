""" error hierarchy shared by every dvspy module

Each class also derives from the closest builtin so that callers may catch
either, and carries the exit code the command line maps it to.
"""
from typing import Optional


class DvsError(Exception):
    """ base error of dvspy """
    exit_code = 1


class ConfigError(DvsError, ValueError):
    """ invalid configuration: out of range parameters, bad sizes """
    exit_code = 2


class UsageError(ConfigError):
    """ invalid command line usage """


class ShapeError(DvsError, ValueError):
    """ dimension mismatch between vectors, matrices and shards """


class InvalidArgumentError(DvsError, ValueError):
    """ argument outside the mathematical domain of an operation """


class GlmOverflowError(DvsError, OverflowError):
    """ natural parameter beyond the overflow guard of the family """

    def __init__(self, theta: float, limit: float):
        super().__init__(
            'natural parameter {:.6g} exceeds the overflow guard {:g}'.format(
                theta, limit))
        self.theta = theta
        self.limit = limit


class ProtocolError(DvsError):
    """ malformed wire frame """


class AggregationError(DvsError):
    """ a worker failed to deliver its gradient within the round """

    def __init__(self, machine_id: int, reason: str):
        super().__init__('machine {}: {}'.format(machine_id, reason))
        self.machine_id = machine_id
        self.reason = reason


class NumericalFailure(DvsError, ArithmeticError):
    """ the step-size safeguard gave up """

    def __init__(self, message: str, k: Optional[int] = None):
        super().__init__(message if k is None else
                         'k={}: {}'.format(k, message))
        self.k = k


class DataIOError(DvsError, OSError):
    """ data file missing or unreadable """
    exit_code = 3


class DataValidationError(DvsError, ValueError):
    """ response values not valid for the declared family """
    exit_code = 4

    def __init__(self, message: str, row: Optional[int] = None,
                 path: Optional[str] = None):
        where = []
        if path is not None:
            where.append(str(path))
        if row is not None:
            where.append('row {}'.format(row))
        super().__init__(
            '{}: {}'.format(', '.join(where), message) if where else message)
        self.message = message
        self.row = row
        self.path = path
