# -*- coding: utf-8 -*-
"""Utility module for command line argument parsing"""

import logging
import os
from argparse import ArgumentParser, FileType

from pygrushin.config import SCENARIOS, Config

_cfg = None

HELP_TEXT = {
    'spectrum': "lowest eigenvalues of one mode operator",
    'evolve1d': "heat semigroup of one mode operator",
    'evolve2d': "heat semigroup on the rectangle, mode by mode",
    'hardy': "weighted Hardy inequalities on random polynomials",
    'carleman': "empirical Carleman constants over a test family",
    'control': "penalized approximate control for a list of penalties",
    'extension-check': "self-adjointness of the extension specifications",
    'uc-certificate': "coarse Gramian spectrum of a control region"
}


def cmd_parser(description, version):
    """Create command line argument parser with one subcommand per scenario

    :param description: text to display before the argument help
    :param version: version of the caller
    :return: the created parser
    """
    global _cfg

    if _cfg is None:
        _cfg = Config()
    parent = ArgumentParser(add_help=False)
    parent.add_argument('-c', '--config', type=FileType('r'),
                        help="run file of 'key = value' lines")
    parent.add_argument('-o', '--out', default=os.getcwd(),
                        help="output directory (default %(default)s)")
    parent.add_argument('--seed', type=int,
                        help="random seed (overrides the run file)")
    parent.add_argument('--threads', type=int, default=1,
                        help="worker threads (default %(default)s)")
    group = parent.add_mutually_exclusive_group()
    group.add_argument('-v', '--verbose', action='count', default=0,
                       help="more log output (repeat for debug)")
    group.add_argument('-q', '--quiet', action='store_true',
                       help="log errors only")
    parser = ArgumentParser(description=description)
    parser.add_argument('--version', action='version',
                        version='%(prog)s ' + '%s' % version)
    subparsers = parser.add_subparsers(dest='scenario', metavar='scenario')
    subparsers.required = True
    for name in SCENARIOS:
        subparsers.add_parser(name, parents=[parent], help=HELP_TEXT[name],
                              description=HELP_TEXT[name])
    return parser


def parse_args(parser, argv=None):
    """Parse command line arguments and return configuration object

    :param parser: ArgumentParser created by cmd_parser
    :param argv: argument list, sys.argv by default
    :return: a Configuration object
    """
    global _cfg

    if _cfg is None:
        _cfg = Config()
    arg_opts = parser.parse_args(argv)
    if arg_opts.threads < 1:
        parser.error("--threads must be positive: %d" % arg_opts.threads)
    _cfg['files'] = {'config': arg_opts.config, 'out': arg_opts.out}
    level = logging.WARNING
    if arg_opts.quiet:
        level = logging.ERROR
    elif arg_opts.verbose:
        level = logging.INFO if arg_opts.verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level,
                        format="%(levelname)s %(name)s: %(message)s")
    _cfg['options'] = arg_opts
    return _cfg
