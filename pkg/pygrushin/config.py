# -*- coding: utf-8 -*-
"""
    pygrushin.config
    ~~~~~~~~~~~~~~~~

    Utility module for configuration: the layered YAML configuration
    (system, user and current directory files) and the line-oriented
    ``key = value`` run files it supplies defaults and ranges for.
"""

import os
import sys

import yaml


CFG_FILE = os.environ.get("PYGRUSHIN_CONFIG_FILE", "config.yaml")

SCENARIOS = ('spectrum', 'evolve1d', 'evolve2d', 'hardy', 'carleman',
             'control', 'extension-check', 'uc-certificate')


def _home_dir():
    if sys.platform == 'win32':
        dir = os.getenv('APPDATA', '')
    else:
        dir = os.path.join(os.environ['HOME'], '.config')
    return os.path.abspath(dir)


def _load_cfg(cfgdir):
    cfgpath = ''
    cfg = {}
    if cfgdir:
        if os.path.isdir(cfgdir):
            cfgpath = os.path.join(cfgdir, CFG_FILE)
        elif os.path.isfile(cfgdir):
            cfgpath = cfgdir
        if os.path.exists(cfgpath):
            with open(cfgpath) as f:
                cfg = yaml.safe_load(f) or {}
    return cfg


class Config(dict):
    "A configuration dictionary"

    def __init__(self, sys_only=False):
        self.update(_load_cfg(
            os.environ.get("PYGRUSHIN_SYS_CONFIG", os.path.abspath(
                os.path.dirname(__file__)))))
        if sys_only:
            return
        self.merge(_load_cfg(os.environ.get(
            "PYGRUSHIN_USER_CONFIG", os.path.join(_home_dir(), 'pygrushin'))))
        self.merge(_load_cfg(os.getcwd()))

    def merge(self, cfg):
        """Merge extra configuration

        :param cfg: extra configuration (dict)
        """
        for key, val in list(cfg.items()):
            if key in self and isinstance(self[key], dict):
                self[key].update(val)
            else:
                self[key] = val

    @property
    def defaults(self):
        return self.get('defaults', {})

    @property
    def ranges(self):
        return self.get('ranges', {})

    @property
    def extensions(self):
        return self.get('extensions') or {}


class ConfigError(ValueError):
    "An invalid run file entry"

    def __init__(self, message, lineno=0):
        self.lineno = lineno
        super(ConfigError, self).__init__("line %d: %s" % (lineno, message))


def _floats(text):
    return [float(item) for item in text.split(',') if item.strip()]


def _rectangles(text):
    rects = []
    for part in text.split(';'):
        vals = _floats(part)
        if len(vals) != 4:
            raise ValueError("a rectangle needs x0, x1, y0, y1")
        rects.append(vals)
    return rects


PARAM_TYPES = {
    'scenario': str, 'spec': str, 'nu': float, 'gamma': float, 'n': int,
    'n_modes': int, 'cells': int, 'grading': float, 'T': float, 'k': int,
    'times': _floats, 'dt': float, 'beta': _floats, 'omega': _rectangles,
    'alpha': _floats, 'R': _floats, 'samples': int, 'family_size': int,
    'degree': int, 'n_steps': int, 'cg_tol': float, 'cg_maxiter': int,
    'coarse_dim': int, 'y_modes': int, 'seed': int, 'trials': int,
    'x_points': int, 'y_points': int}


def _check_range(key, value, bounds, lineno):
    if bounds is None:
        return
    lo, hi = bounds
    values = value if isinstance(value, list) else [value]
    if key == 'omega':
        return
    for val in values:
        if (lo is not None and val < lo) or (hi is not None and val > hi):
            raise ConfigError("%s = %g outside supported range [%s, %s]" % (
                key, val, '-inf' if lo is None else '%g' % lo,
                'inf' if hi is None else '%g' % hi), lineno)


class RunConfig(dict):
    """A validated run configuration

    Values given in the run file override the ``defaults`` section of
    the layered configuration; ``lines`` maps each given key to its
    line number.
    """

    def __init__(self, params, lines=None):
        super(RunConfig, self).__init__(params)
        self.lines = lines or {}

    @property
    def scenario(self):
        return self['scenario']

    def to_map(self):
        return dict(sorted(self.items()))


def parse_config(text, scenario=None, cfg=None):
    """Parse a run file

    :param text: lines of ``key = value``, ``#`` starting a comment
    :param scenario: scenario given outside the file (command line)
    :param cfg: layered Config, created if not given
    :return: RunConfig
    """
    cfg = Config() if cfg is None else cfg
    ranges = cfg.ranges
    given, lines = {}, {}
    lineno = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError("expected 'key = value', got %r" % line,
                              lineno)
        key, val = [part.strip() for part in line.split('=', 1)]
        if key not in PARAM_TYPES:
            raise ConfigError("unknown key %r" % key, lineno)
        if key in given:
            raise ConfigError("duplicate key %r" % key, lineno)
        try:
            value = PARAM_TYPES[key](val)
        except ValueError as exc:
            raise ConfigError("invalid value %r for %s: %s" % (val, key, exc),
                              lineno)
        _check_range(key, value, ranges.get(key), lineno)
        given[key], lines[key] = value, lineno
    if scenario is not None:
        if 'scenario' in given and given['scenario'] != scenario:
            raise ConfigError("file scenario %s conflicts with %s" % (
                given['scenario'], scenario), lines['scenario'])
        given['scenario'] = scenario
    if 'scenario' not in given:
        raise ConfigError("missing scenario", lineno)
    if given['scenario'] not in SCENARIOS:
        raise ConfigError("unknown scenario %r" % given['scenario'],
                          lines.get('scenario', 0))
    spec = given.get('spec')
    if spec is not None and spec not in ('designed', 'decoupled') and \
            spec not in cfg.extensions:
        raise ConfigError("unknown extension %r" % spec, lines['spec'])
    if given.get('cells', 2) % 2:
        raise ConfigError("cells must be even: %d" % given['cells'],
                          lines['cells'])
    params = {}
    for key, val in cfg.defaults.items():
        params[key] = list(val) if isinstance(val, list) else val
    params.update(given)
    return RunConfig(params, lines)
