# -*- coding: utf-8 -*-
"""Utility functions and classes for testing Pygrushin"""

import json
import os
import shutil
import subprocess
import sys
import tempfile
from functools import lru_cache
from unittest import TestCase

import yaml

from pygrushin.config import Config, parse_config
from pygrushin.funcspace import build_grid
from pygrushin.operator1d import ExtensionDict, assemble_family, eigensolve
from pygrushin.runner import run

TEST_CELLS = int(os.environ.get("PYGRUSHIN_TEST_CELLS", 48))
TEST_DIR = os.path.join(tempfile.gettempdir(),
                        os.environ.get("PYGRUSHIN_TEST_DIR", 'pygrushin_test'))


@lru_cache(maxsize=None)
def standard_grid(nu, cells=TEST_CELLS, grading=2.0):
    "Graded grid with Gauss-Jacobi cells at the origin, shared by tests"
    return build_grid(cells, grading, nu=nu)


def extension(nu, label='designed'):
    return ExtensionDict(nu).get_spec(label)


@lru_cache(maxsize=None)
def operator_family(nu, gamma=1.0, label='designed', ns=(0, 1),
                    cells=TEST_CELLS):
    "Operators A_n for the given modes, assembled once per session"
    return tuple(assemble_family(ns, nu, gamma, standard_grid(nu, cells),
                                 extension(nu, label)))


@lru_cache(maxsize=None)
def eigen_system(nu, n=1, gamma=1.0, label='designed', cells=TEST_CELLS):
    op = operator_family(nu, gamma, label, (n, ), cells)[0]
    return op, eigensolve(op)


class PygrushinTestCase(TestCase):
    """Base class for most test cases"""

    nu = 0.5
    gamma = 1.0
    label = 'designed'

    def setUp(self):
        self.cfg = Config(sys_only=True)

    @property
    def grid(self):
        return standard_grid(self.nu)

    @property
    def spec(self):
        return extension(self.nu, self.label)

    def operator(self, n=1):
        return operator_family(self.nu, self.gamma, self.label, (n, ))[0]

    def eigen(self, n=1):
        return eigen_system(self.nu, n, self.gamma, self.label)


class ScenarioTestCase(TestCase):
    """Base class for test cases running scenarios into a directory"""

    @classmethod
    def setUpClass(cls):
        cls.tmpdir = TEST_DIR
        if not os.path.exists(cls.tmpdir):
            os.makedirs(cls.tmpdir)

    @classmethod
    def remove_tempfiles(cls, subdir):
        path = os.path.join(cls.tmpdir, subdir)
        if os.path.isdir(path):
            shutil.rmtree(path)

    def out_path(self, subdir, filename=None):
        path = os.path.join(self.tmpdir, subdir)
        return path if filename is None else os.path.join(path, filename)

    def run_scenario(self, text, subdir, scenario=None, threads=1):
        """Parse a run file and execute it

        :return: tuple (exit status, summary map)
        """
        cfg = Config(sys_only=True)
        config = parse_config(text, scenario, cfg)
        status = run(config, self.out_path(subdir), threads, cfg)
        with open(self.out_path(subdir, 'summary.json')) as f:
            return status, json.load(f)

    def lines(self, the_file):
        with open(the_file) as fd:
            return fd.readlines()

    def write_run_file(self, subdir, text):
        path = self.out_path(subdir)
        if not os.path.isdir(path):
            os.makedirs(path)
        path = os.path.join(path, 'run.cfg')
        with open(path, 'w') as f:
            f.write(text)
        return path

    def invoke(self, args):
        """Run the scenario runner in a separate interpreter

        :param args: command line arguments after the program name
        :return: CompletedProcess with captured output
        """
        args = [sys.executable, '-m', 'pygrushin.runner'] + args
        root = os.path.join(os.path.dirname(__file__), '..')
        path = [os.path.abspath(root)]
        path.append(os.path.abspath(os.path.join(os.path.dirname(
                    yaml.__file__), '..')))
        env = os.environ.copy()
        env.update({'PYTHONPATH': os.pathsep.join(path),
                    'PYGRUSHIN_USER_CONFIG': ''})
        return subprocess.run(args, env=env, capture_output=True,
                              universal_newlines=True)
