#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Pygrushin - Numerical experiments on the Grushin operator with an
inverse-square singularity.
"""
import sys

from setuptools import setup
from setuptools.command.test import test as TestCommand


class PyTest(TestCommand):

    def finalize_options(self):
        TestCommand.finalize_options(self)
        self.test_args = []
        self.test_suite = True

    def run_tests(self):
        import pytest
        errno = pytest.main(self.test_args)
        sys.exit(errno)


setup(
    name='Pygrushin',
    version='0.1.0',
    packages=['pygrushin', 'pygrushin.lib'],
    package_data={'pygrushin': ['config.yaml']},
    entry_points={
        'console_scripts': [
            'pygrushin = pygrushin.runner:main']},

    install_requires=[
        'numpy >= 1.20',
        'scipy >= 1.7',
        'PyYAML >= 5.3'],

    tests_require=['pytest'],
    cmdclass={'test': PyTest},

    description='Self-adjoint extensions, heat semigroups and approximate '
    'control for a singular Grushin operator',
    long_description=open('README.rst').read(),
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Environment :: Console',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: BSD License',
        'Natural Language :: English',
        'Operating System :: OS Independent',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.9',
        'Topic :: Scientific/Engineering :: Mathematics'],
    platforms='OS-independent',
    license='BSD')
