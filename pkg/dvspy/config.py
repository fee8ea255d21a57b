""" run configuration: environment, JSON config files and flag merging """
import json
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional

from .errors import ConfigError, DataIOError

TIMEOUT_ENV = 'DVS_WORKER_TIMEOUT_MS'
DEFAULT_TIMEOUT_MS = 30000
RESULT_SCHEMA = 'dvs-result-v1'


def worker_timeout_ms() -> int:
    """ worker reply deadline in milliseconds, from the environment

    >>> import os
    >>> os.environ.pop(TIMEOUT_ENV, None) and None
    >>> worker_timeout_ms()
    30000
    """
    raw = os.environ.get(TIMEOUT_ENV)
    if raw is None or raw.strip() == '':
        return DEFAULT_TIMEOUT_MS
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError('{} must be an integer, got {!r}'.format(
            TIMEOUT_ENV, raw)) from None
    if value <= 0:
        raise ConfigError('{} must be positive, got {}'.format(
            TIMEOUT_ENV, value))
    return value


@dataclass
class RunConfig:
    """ fully resolved parameters of one CLI command

    Serializes to a flat JSON object; a result JSON is accepted as well,
    in which case its ``config`` entry is used.
    """
    command: str
    params: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {'command': self.command, 'params': dict(self.params)}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'RunConfig':
        if 'schema' in data and 'config' in data:
            data = data['config']
        if 'command' not in data:
            raise ConfigError('config has no "command" entry')
        params = data.get('params', {})
        if not isinstance(params, Mapping):
            raise ConfigError('config "params" must be an object')
        return cls(str(data['command']), dict(params))

    @classmethod
    def load(cls, path: str) -> 'RunConfig':
        try:
            with open(path, encoding='utf-8') as f:
                data = json.load(f)
        except OSError as e:
            raise DataIOError('cannot read config {}: {}'.format(
                path, e)) from e
        except json.JSONDecodeError as e:
            raise ConfigError('config {} is not valid JSON: {}'.format(
                path, e)) from e
        return cls.from_dict(data)


def resolve(command: str, flags: Mapping[str, Any],
            defaults: Mapping[str, Any],
            file_config: Optional[RunConfig] = None) -> RunConfig:
    """ merge parameters: explicit flags over config file over defaults

    A flag counts as explicit when its value is not None.

    >>> cfg = resolve('screen', {'k': None, 'epsilon': 1e-4},
    ...               {'k': None, 'epsilon': 1e-6, 'k_max': 50},
    ...               RunConfig('screen', {'k_max': 20}))
    >>> sorted(cfg.params.items())
    [('epsilon', 0.0001), ('k', None), ('k_max', 20)]
    """
    if file_config is not None and file_config.command != command:
        raise ConfigError('config was written for "{}", not "{}"'.format(
            file_config.command, command))
    params = dict(defaults)
    if file_config is not None:
        unknown = set(file_config.params) - set(defaults)
        if unknown:
            raise ConfigError('unknown config entries: {}'.format(
                ', '.join(sorted(unknown))))
        params.update(file_config.params)
    params.update({k: v for k, v in flags.items()
                   if v is not None and k in defaults})
    return RunConfig(command, params)
