# -*- coding: utf-8 -*-
"""
    pygrushin.inequalities
    ~~~~~~~~~~~~~~~~~~~~~~

    This module verifies numerically the weighted Hardy inequalities
    and the Carleman estimate for the one-dimensional operators on
    (0, 1), on families of polynomial test functions.
"""
import hashlib
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from pygrushin.funcspace import build_grid, check_nu
from pygrushin.lib.export import write_json
from pygrushin.lib.quadrature import gauss_legendre, graded_left_rule
from pygrushin.lib.quadrature import jacobi_unit_rule
from pygrushin.operator1d import c_of_nu

logger = logging.getLogger(__name__)

UNDERFLOW_EXPONENT = -700.0


class HypothesisError(ValueError):
    "A test function violates the hypotheses of an inequality"


class CarlemanViolation(RuntimeError):
    "The empirical Carleman constant is not positive"


def select_b(nu):
    """Exponent of the Carleman weight

    :param nu: real in (0, 1)
    :return: 2 - 2 nu when nu > 1/2, else 1/2
    """
    check_nu(nu)
    return 2.0 - 2.0 * nu if nu > 0.5 else 0.5


def singular_balance(nu, b):
    "Return ``(1 - b)(3 - b) - 4 c``, zero when b = 2 - 2 nu"
    return (1.0 - b) * (3.0 - b) - 4.0 * c_of_nu(nu)


@dataclass(frozen=True)
class CarlemanWeight(object):
    """The weight ``exp(-2 R theta(t) x^b)`` with ``theta = 1/(t(T-t))``"""
    T: float
    R: float
    b: float

    def __post_init__(self):
        if not 0.0 < self.b < 1.0:
            raise ValueError("Weight exponent must lie in (0, 1): %g" %
                             self.b)
        if self.R <= 0 or self.T <= 0:
            raise ValueError("Weight strength and horizon must be "
                             "positive: %g, %g" % (self.R, self.T))

    def theta(self, t):
        return 1.0 / (t * (self.T - t))

    def exponent(self, t, x):
        "Return ``-2 R sigma(t, x)`` on the tensor grid t by x"
        return self.exponent_at(self.theta(np.asarray(t, dtype=float)), x)

    def exponent_at(self, theta, x):
        "Same as :meth:`exponent` from precomputed values of theta"
        x = np.asarray(x, dtype=float)
        return -2.0 * self.R * np.multiply.outer(theta, x ** self.b)

    def __call__(self, t, x):
        return self._exp(self.exponent(t, x))

    def at_theta(self, theta, x):
        "Weight on the grid theta by x"
        return self._exp(self.exponent_at(np.asarray(theta, dtype=float), x))

    def _exp(self, expo):
        out = np.zeros_like(expo)
        keep = expo >= UNDERFLOW_EXPONENT
        out[keep] = np.exp(expo[keep])
        return out

    def bound(self, x):
        "Return ``exp(-8 R x^b / T²)``, the maximum over t"
        return np.exp(-8.0 * self.R * np.asarray(x) ** self.b / self.T ** 2)


def weight_bound_check(weight, t, x):
    """Largest excess of the weight over its bound at t = T/2

    :return: float, <= 0 when the bound holds
    """
    return float((weight(t, x) - weight.bound(x)[None, :]).max())


def _check_boundary(z, interval_start=0.0, slope=True, right=True):
    scale = max(1.0, np.abs(z.coef).max())
    bad = []
    if abs(z(interval_start)) > 1e-12 * scale:
        bad.append('z(0) = %g' % z(interval_start))
    if slope and abs(z.deriv()(0.0)) > 1e-12 * scale:
        bad.append("z'(0) = %g" % z.deriv()(0.0))
    if right and abs(z(1.0)) > 1e-12 * scale:
        bad.append('z(1) = %g' % z(1.0))
    if bad:
        raise HypothesisError("Test function violates %s" % ', '.join(bad))


def _quotient(z, k):
    "z divided by x^k, assuming a zero of order k at the origin"
    coef = np.asarray(z.coef, dtype=float)
    if len(coef) <= k:
        return Polynomial([0.0])
    return Polynomial(coef[k:])


@dataclass
class HardyReport(object):
    "Both sides of a Hardy-type inequality"
    lhs: float
    rhs: float
    constant: float

    @property
    def satisfied(self):
        return self.lhs <= self.rhs * (1.0 + 1e-10) + 1e-300

    @property
    def ratio(self):
        return self.rhs / self.lhs if self.lhs > 0 else np.inf

    def __iter__(self):
        return iter((self.lhs, self.rhs, self.satisfied))


def _jacobi_integral(poly, exponent):
    "Integral over (0, 1) of ``x^exponent * poly(x)``, exact"
    npts = max(poly.degree() // 2 + 2, 2)
    x, w = jacobi_unit_rule(exponent, npts)
    return float(np.dot(w, poly(x)))


def hardy_check(z, alpha):
    """Check ``(1-alpha)²/4 int x^(alpha-2) z² <= int x^alpha z'²``

    :param z: numpy Polynomial with z(0) = z'(0) = z(1) = 0
    :param alpha: real in [-2, 2)
    :return: HardyReport
    """
    if not -2.0 <= alpha < 2.0:
        raise ValueError("alpha = %g outside [-2, 2)" % alpha)
    _check_boundary(z)
    const = (1.0 - alpha) ** 2 / 4.0
    w = _quotient(z, 2)
    dz = _quotient(z.deriv(), 1)
    lhs = _jacobi_integral(w * w, alpha + 2.0)
    rhs = _jacobi_integral(dz * dz, alpha + 2.0)
    if not (np.isfinite(lhs) and np.isfinite(rhs)):
        raise HypothesisError("Non-integrable Hardy integrand")
    return HardyReport(const * lhs, rhs, const)


def hardy_derivative_check(z, alpha):
    """Check ``(alpha+1)²/4 int x^alpha z'² <= int x^(alpha+2) z''²``

    Without a condition on z'(1) this holds only for alpha <= -1.

    :param z: numpy Polynomial with z(0) = z'(0) = 0
    :param alpha: real in [-2, -1]
    :return: HardyReport
    """
    if not -2.0 <= alpha <= -1.0:
        raise ValueError("alpha = %g outside [-2, -1]" % alpha)
    _check_boundary(z, right=False)
    const = (alpha + 1.0) ** 2 / 4.0
    dz = _quotient(z.deriv(), 1)
    d2z = z.deriv(2)
    lhs = _jacobi_integral(dz * dz, alpha + 2.0)
    rhs = _jacobi_integral(d2z * d2z, alpha + 2.0)
    return HardyReport(const * lhs, rhs, const)


def hardy_interval_check(z, interval=(0.0, 1.0)):
    """Check ``int z²/x² <= 4 int z'²`` on (0, 1) or (-1, 1)

    :param z: numpy Polynomial with z(0) = 0
    :param interval: (0, 1) or (-1, 1)
    :return: HardyReport
    """
    lo, hi = (float(end) for end in interval)
    if (lo, hi) not in ((0.0, 1.0), (-1.0, 1.0)):
        raise ValueError("Hardy interval must be (0, 1) or (-1, 1): "
                         "(%g, %g)" % (lo, hi))
    _check_boundary(z, slope=False, right=False)
    q = _quotient(z, 1)
    npts = max(z.degree() + 2, 2)
    x, w = gauss_legendre(lo, hi, npts)
    lhs = float(np.dot(w, q(x) ** 2))
    rhs = float(np.dot(w, z.deriv()(x) ** 2))
    return HardyReport(lhs, 4.0 * rhs, 4.0)


def random_hardy_family(size, seed=0, degree=4):
    """Random polynomials ``x²(1-x) q(x)`` with q of the given degree"""
    rng = np.random.default_rng(seed)
    base = Polynomial([0.0, 0.0, 1.0, -1.0])
    return [base * Polynomial(rng.uniform(-1.0, 1.0, degree + 1))
            for _ in range(size)]


@dataclass(frozen=True, eq=False)
class TestFunction1Plus1(object):
    """Separable test function ``g(t, x) = p(t) x²(1 - x) q(x)``

    The factor ``x²(1 - x)`` makes g and its x-derivative vanish at 0
    and g vanish at 1 for all t.
    """
    __test__ = False

    p: Polynomial
    q: Polynomial
    T: float = 1.0

    @property
    def z(self):
        return Polynomial([0.0, 0.0, 1.0, -1.0]) * self.q

    def is_zero(self):
        return not (np.any(self.p.coef) and np.any(self.q.coef))

    def check_hypotheses(self):
        _check_boundary(self.z)

    def coefficients(self):
        return np.concatenate([[self.T], self.p.coef, [np.nan], self.q.coef])

    def __mul__(self, scalar):
        return TestFunction1Plus1(self.p * scalar, self.q, self.T)


def standard_family(T=1.0, size=10, seed=0):
    """The polynomial family used for Carleman scans

    The first member is ``t(T-t) x²(1-x)``; the others multiply
    ``t(T-t)`` by a random linear factor and use a random cubic q.
    """
    rng = np.random.default_rng(seed)
    bubble = Polynomial([0.0, T, -1.0])
    family = [TestFunction1Plus1(bubble, Polynomial([1.0]), T)]
    for _ in range(size - 1):
        lin = Polynomial([1.0, rng.uniform(-0.5, 0.5) / T])
        q = Polynomial(np.concatenate([[1.0], rng.uniform(-1.0, 1.0, 3)]))
        family.append(TestFunction1Plus1(bubble * lin, q, T))
    return family


def family_hash(family):
    "SHA-1 of the coefficients of a test family"
    digest = hashlib.sha1()
    for g in family:
        digest.update(np.ascontiguousarray(g.coefficients()).tobytes())
    return digest.hexdigest()


class CarlemanQuadrature(object):
    """Tensor rule on (0, T) x (0, 1) for Carleman integrals

    x uses the graded half of a grid; t uses a graded rule mirrored
    about T/2 so both time ends are resolved.  Nodes closer to an end
    than ``T * eps`` would round onto it, so ``dist`` keeps the exact
    distance to the nearer end and ``theta`` is computed from it.
    """

    def __init__(self, T, x_cells=64, t_levels=40, t_points=16):
        if T <= 0:
            raise ValueError("Horizon must be positive: %g" % T)
        grid = build_grid(2 * x_cells, 2.0)
        self.x, self.wx, _ = grid.restricted_rule(0.0, 1.0)
        half = 0.5 * T
        s, ws = graded_left_rule(half, t_points, ratio=0.25, levels=t_levels)
        self.dist = np.concatenate([s, s[::-1]])
        self.t = np.concatenate([s, T - s[::-1]])
        self.wt = np.concatenate([ws, ws[::-1]])
        self.theta = 1.0 / (self.dist * (T - self.dist))
        self.T = T


def carleman_sides(g, n, nu, gamma, R, T, quadrature=None):
    """Both sides of the Carleman estimate for one test function

    ``lhs = int int theta³ e^{-2 R sigma} g²`` and
    ``rhs = int int |P g|² e^{-2 R sigma}`` with
    ``P g = g_t - g_xx + (c/x² + (n pi)² x^(2 gamma)) g``.

    :param g: TestFunction1Plus1
    :param n: Fourier index
    :param nu: singularity parameter
    :param gamma: degeneracy exponent
    :param R: weight strength
    :param T: horizon
    :param quadrature: optional CarlemanQuadrature
    :return: tuple (lhs, rhs)
    """
    weight = CarlemanWeight(T, R, select_b(nu))
    quad = quadrature or CarlemanQuadrature(T)
    if quad.T != T:
        raise ValueError("Quadrature built for T = %g, not %g" % (quad.T, T))
    if g.is_zero():
        return 0.0, 0.0
    t, x = quad.t, quad.x
    c = c_of_nu(nu)
    z = g.z
    pt, dpt = g.p(t), g.p.deriv()(t)
    zx, d2z = z(x), z.deriv(2)(x)
    zx2 = _quotient(z, 2)(x)
    gvals = np.multiply.outer(pt, zx)
    pg = (np.multiply.outer(dpt, zx) +
          np.multiply.outer(pt, -d2z + c * zx2 +
                            (n * np.pi) ** 2 * x ** (2.0 * gamma) * zx))
    w = weight.at_theta(quad.theta, x)
    dens = np.multiply.outer(quad.wt, quad.wx) * w
    lhs_dens = np.where(w > 0.0, dens * (quad.theta ** 3)[:, None], 0.0)
    lhs = float(np.sum(lhs_dens * gvals ** 2))
    rhs = float(np.sum(dens * pg ** 2))
    if not (np.isfinite(lhs) and np.isfinite(rhs)):
        raise HypothesisError("Non-finite Carleman integrand; check the "
                              "test function")
    return lhs, rhs


@dataclass
class ScanReport(object):
    "Empirical Carleman constants over a family and a range of R"
    R_grid: list
    min_ratio: list
    median_ratio: list
    R0: float
    C0: float
    b: float
    family_hash: str
    params: dict

    def to_map(self):
        return {'R_grid': list(self.R_grid),
                'table': [{'R': r, 'min_ratio': mn, 'median_ratio': md}
                          for r, mn, md in zip(self.R_grid, self.min_ratio,
                                               self.median_ratio)],
                'R0': self.R0, 'C0': self.C0, 'b': self.b,
                'family_hash': self.family_hash, 'params': dict(self.params)}

    def write_json(self, path):
        write_json(path, self.to_map())


def carleman_scan(family, nu, gamma, n, T, R_grid, threads=1):
    """Empirical constants of the Carleman estimate

    For each R the constant is the minimum over the family of
    ``rhs / (R³ lhs)``; R0 is the smallest grid value from which all
    later constants are positive, and C0 their minimum.

    :param family: list of TestFunction1Plus1
    :param R_grid: increasing weight strengths
    :param threads: worker threads over (g, R) pairs
    :return: ScanReport
    """
    R_grid = [float(r) for r in R_grid]
    if any(b <= a for a, b in zip(R_grid, R_grid[1:])):
        raise ValueError("R grid must be increasing: %s" % R_grid)
    for g in family:
        g.check_hypotheses()
    members = [g for g in family if not g.is_zero()]
    if not members:
        raise ValueError("Test family has no nonzero member")
    quad = CarlemanQuadrature(T)
    pairs = [(g, r) for r in R_grid for g in members]

    def sides(pair):
        return carleman_sides(pair[0], n, nu, gamma, pair[1], T, quad)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            results = list(executor.map(sides, pairs))
    else:
        results = [sides(pair) for pair in pairs]
    ratios = np.array([rhs / (r ** 3 * lhs) for (g, r), (lhs, rhs)
                       in zip(pairs, results)]).reshape(len(R_grid), -1)
    mins = ratios.min(axis=1)
    start = len(R_grid)
    while start > 0 and mins[start - 1] > 0:
        start -= 1
    if start == len(R_grid):
        raise CarlemanViolation("No positive empirical constant at R = %g"
                                % R_grid[-1])
    report = ScanReport(R_grid, mins.tolist(),
                        np.median(ratios, axis=1).tolist(), R_grid[start],
                        float(mins[start:].min()), select_b(nu),
                        family_hash(family),
                        {'nu': nu, 'gamma': gamma, 'n': n, 'T': T,
                         'family_size': len(family)})
    logger.info("Carleman scan nu = %g: R0 = %g, C0 = %.6g", nu, report.R0,
                report.C0)
    return report
