"""
Solver configuration read from an ini file and RSRP_ environment variables.
"""
import os
import logging
from collections import OrderedDict
from configparser import ConfigParser

logger = logging.getLogger('rsrptools')

DEFAULT_CONFIG_FILE = os.path.join('~', '.rsrp-config')
SECTION = 'rsrp'
ENV_PREFIX = 'RSRP_'
MODES = ('dual', 'lp')
LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL')


class ConfigError(ValueError):
    pass


def _to_bool(value):
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ('1', 'true', 'yes', 'on'):
        return True
    if text in ('0', 'false', 'no', 'off'):
        return False
    raise ValueError('not a boolean: %r' % value)


# name -> (converter, default)
FIELDS = OrderedDict([
    ('k', (int, 2)),
    ('max_iterations', (int, 6)),
    ('time_limit', (float, 600.0)),
    ('mode', (str, 'dual')),
    ('solver', (str, 'cbc')),
    ('seed', (int, 0)),
    ('gap_abs', (float, 1e-9)),
    ('gap_rel', (float, 1e-6)),
    ('tiny_model_size', (int, 5000)),
    ('tolerance', (float, 1e-9)),
    ('ceeg_cap', (int, 100000)),
    ('alignment_samples', (int, 1000)),
    ('strict_alignment', (_to_bool, False)),
    ('log_level', (str, 'ERROR')),
])


class Config(object):
    '''Settings shared by every client of an Interface.

    Attribute names follow FIELDS. Instances are treated as read-only; use
    updated() to derive a modified copy.
    '''

    def __init__(self, **values):
        for name, (convert, default) in FIELDS.items():
            raw = values.pop(name, default)
            try:
                setattr(self, name, convert(raw))
            except (TypeError, ValueError):
                raise ConfigError('Invalid value for %s: %r' % (name, raw))
        if values:
            raise ConfigError('Unknown configuration keys: %s' % ', '.join(sorted(values)))
        self.validate()

    def validate(self):
        if self.k < 2:
            raise ConfigError('k must be at least 2, got %d' % self.k)
        if self.max_iterations < 1:
            raise ConfigError('max_iterations must be at least 1, got %d' % self.max_iterations)
        if not self.time_limit > 0:
            raise ConfigError('time_limit must be positive, got %s' % self.time_limit)
        if self.mode not in MODES:
            raise ConfigError('mode must be one of %s, got %r' % ('|'.join(MODES), self.mode))
        if self.gap_abs < 0 or self.gap_rel < 0 or self.tolerance < 0:
            raise ConfigError('gap_abs, gap_rel and tolerance must be nonnegative')
        if self.ceeg_cap < 1:
            raise ConfigError('ceeg_cap must be positive, got %d' % self.ceeg_cap)
        if self.alignment_samples < 0:
            raise ConfigError('alignment_samples must be nonnegative')
        self.log_level = self.log_level.upper()
        if self.log_level not in LOG_LEVELS:
            raise ConfigError('log_level must be one of %s, got %r' % (', '.join(LOG_LEVELS), self.log_level))

    def as_dict(self):
        return OrderedDict((name, getattr(self, name)) for name in FIELDS)

    def updated(self, **overrides):
        '''Return a copy with the given fields replaced. None values are skipped
        so that unset command-line flags keep the configured value.
        '''
        values = self.as_dict()
        values.update((key, value) for key, value in overrides.items() if value is not None)
        return Config(**values)

    def __eq__(self, other):
        return isinstance(other, Config) and self.as_dict() == other.as_dict()

    def __repr__(self):
        return 'Config(%s)' % ', '.join('%s=%r' % item for item in self.as_dict().items())


def load_config(config_file=None, environ=None):
    '''Build a Config from an ini file and RSRP_ environment overrides.

    Args:
        config_file (str): Path to the ini file. Defaults to ~/.rsrp-config.
            A missing file is not an error.
        environ (dict): Environment mapping. Defaults to os.environ.

    Returns:
        A validated Config.
    '''
    if environ is None:
        environ = os.environ
    values = {}

    path = os.path.expanduser(config_file or DEFAULT_CONFIG_FILE)
    if os.path.isfile(path):
        parser = ConfigParser()
        parser.read(path)
        if parser.has_section(SECTION):
            for key, value in parser.items(SECTION):
                if key in FIELDS:
                    values[key] = value
                else:
                    logger.warning('Ignoring unknown configuration key %s in %s', key, path)
        else:
            logger.warning('No [%s] section in %s', SECTION, path)
    elif config_file:
        logger.warning('Configuration file %s not found, using defaults', path)

    for name in FIELDS:
        env_name = ENV_PREFIX + name.upper()
        if env_name in environ:
            values[name] = environ[env_name]

    return Config(**values)
