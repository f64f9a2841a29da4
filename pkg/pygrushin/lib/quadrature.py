# -*- coding: utf-8 -*-
"""
    pygrushin.lib.quadrature
    ~~~~~~~~~~~~~~~~~~~~~~~~

    Gauss rules mapped to intervals.  Besides plain Gauss-Legendre
    there are rules for integrands carrying a power singularity
    ``x**p`` at the left end of an interval: a Gauss-Jacobi rule and a
    geometrically graded composite rule that falls back on it for the
    innermost piece.
"""
import numpy as np
from scipy.special import roots_jacobi


def gauss_legendre(a, b, npts):
    """Return the nodes and weights of the Gauss-Legendre rule on [a, b]

    :param a: left end
    :param b: right end
    :param npts: number of points
    :return: tuple (nodes, weights)
    """
    s, w = np.polynomial.legendre.leggauss(npts)
    half = 0.5 * (b - a)
    return a + half * (s + 1.0), half * w


def gauss_jacobi_left(h, exponent, npts):
    """Return a rule on [0, h] exact for ``x**exponent * poly(x)``

    :param h: right end of the interval
    :param exponent: power of the left-end singularity, > -1
    :param npts: number of points
    :return: tuple (nodes, weights)

    The weights are divided by the weight function, so the rule is
    applied to the full integrand: ``sum(w * f(x))``.
    """
    if exponent <= -1.0:
        raise ValueError("Jacobi exponent %g is not integrable" % exponent)
    s, omega = roots_jacobi(npts, 0.0, exponent)
    x = 0.5 * h * (1.0 + s)
    w = (0.5 * h) ** (exponent + 1.0) * omega * x ** (-exponent)
    return x, w


def graded_left_rule(h, npts, exponent=0.0, ratio=0.25, levels=200):
    """Return a composite rule on [0, h] graded geometrically toward 0

    :param h: right end of the interval
    :param npts: Gauss points per piece
    :param exponent: Jacobi exponent used on the innermost piece
    :param ratio: length ratio between consecutive pieces
    :param levels: number of geometric pieces
    :return: tuple (nodes, weights), nodes ascending
    """
    edges = h * ratio ** np.arange(levels + 1)
    xs, ws = [], []
    inner = edges[-1]
    if exponent == 0.0:
        x, w = gauss_legendre(0.0, inner, npts)
    else:
        x, w = gauss_jacobi_left(inner, exponent, npts)
    xs.append(x)
    ws.append(w)
    for hi, lo in zip(edges[-2::-1], edges[:0:-1]):
        x, w = gauss_legendre(lo, hi, npts)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def jacobi_unit_rule(exponent, npts):
    """Return a rule on [0, 1] exact for ``x**exponent * poly(x)``

    Unlike :func:`gauss_jacobi_left` the weights still contain the
    weight function: ``sum(w * g(x)) == integral of x**exponent * g``.
    """
    s, omega = roots_jacobi(npts, 0.0, exponent)
    return 0.5 * (1.0 + s), 0.5 ** (exponent + 1.0) * omega
