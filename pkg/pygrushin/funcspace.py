# -*- coding: utf-8 -*-
"""
    pygrushin.funcspace
    ~~~~~~~~~~~~~~~~~~~

    This module defines the graded grids, their quadrature rules and
    the regular-plus-singular representation of functions in the
    domain of the extended operator: Grid1D, Cutoff, SingularCoeffs
    and Function1D.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from pygrushin.lib.export import write_csv
from pygrushin.lib.quadrature import gauss_legendre, graded_left_rule

logger = logging.getLogger(__name__)

SUPPORTED_NU = (0.05, 0.95)
GAUSS_POINTS = 12
CUTOFF_BREAKS = (-0.75, -0.5, 0.5, 0.75)


class GridError(ValueError):
    "Invalid grid parameters"


class UnboundedValueError(ValueError):
    "Evaluation of an unbounded singular profile at the origin"


def check_nu(nu, bounds=(0.0, 1.0), closed=False):
    """Reject a singularity parameter outside the given bounds

    :param nu: value to check
    :param bounds: pair (low, high)
    :param closed: bounds are included in the admissible set
    :return: nu as a float
    """
    low, high = bounds
    inside = (low <= nu <= high) if closed else (low < nu < high)
    if not inside:
        if closed:
            raise ValueError("nu = %g outside supported range [%g, %g]" % (
                nu, low, high))
        raise ValueError("nu = %g outside open interval (%g, %g)" % (
            nu, low, high))
    return float(nu)


def profile_exponents(nu):
    "Return the exponents (nu + 1/2, 1/2 - nu) of the singular profiles"
    return (nu + 0.5, 0.5 - nu)


def power_abs(x, expo, order=0):
    """Derivatives of ``|x|**expo`` for x != 0

    :param x: array of abscissas, none of them zero
    :param expo: real exponent
    :param order: 0, 1 or 2
    :return: array of values
    """
    ax = np.abs(x)
    if order == 0:
        return ax ** expo
    if order == 1:
        return expo * ax ** (expo - 1.0) * np.sign(x)
    if order == 2:
        return expo * (expo - 1.0) * ax ** (expo - 2.0)
    raise ValueError("Unsupported derivative order: %d" % order)


class Cutoff(object):
    """Quintic smoothstep cutoff equal to 1 near 0 and 0 near the ends

    The function is C² and monotone on each side, with
    ``chi(x) = 1 - S((|x| - inner) / (outer - inner))`` on the
    transition band and ``S(t) = 10t³ - 15t⁴ + 6t⁵``.
    """

    def __init__(self, inner=0.5, outer=0.75):
        self.inner = inner
        self.outer = outer

    def __call__(self, x, order=0):
        x = np.asarray(x, dtype=float)
        width = self.outer - self.inner
        t = np.clip((np.abs(x) - self.inner) / width, 0.0, 1.0)
        if order == 0:
            return 1.0 - t ** 3 * (10.0 - 15.0 * t + 6.0 * t * t)
        if order == 1:
            return -30.0 * t * t * (1.0 - t) ** 2 / width * np.sign(x)
        if order == 2:
            return -60.0 * t * (1.0 - t) * (1.0 - 2.0 * t) / width ** 2
        raise ValueError("Unsupported derivative order: %d" % order)

    def to_map(self):
        return {'kind': 'quintic-smoothstep', 'inner': self.inner,
                'outer': self.outer}


CUTOFF = Cutoff()


@dataclass(frozen=True, eq=False)
class Grid1D(object):
    """A symmetric graded partition of [-1, 1] with its quadrature rule

    Cells touching the origin carry a geometrically graded rule whose
    innermost piece is Gauss-Jacobi, so that integrands behaving like
    ``|x|**p`` with p > -1 are integrated to near machine precision.
    """
    nodes: np.ndarray
    quad_nodes: np.ndarray
    quad_weights: np.ndarray
    quad_cells: np.ndarray
    grading_exponent: float
    jacobi_exponent: float = 0.0

    @property
    def n_cells(self):
        return len(self.nodes) - 1

    @property
    def widths(self):
        return np.diff(self.nodes)

    @property
    def zero_index(self):
        "Index of the node at the origin"
        return self.n_cells // 2

    def locate(self, x):
        """Return the index of the cell holding each abscissa

        Points on an interior node go to the cell on their right; +1
        belongs to the last cell.
        """
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.nodes, x, side='right') - 1
        return np.clip(idx, 0, self.n_cells - 1)

    def cell_rule(self, k, a=None, b=None):
        """Quadrature rule on cell k, optionally clipped to [a, b]

        :param k: cell index
        :param a: optional left clip
        :param b: optional right clip
        :return: tuple (nodes, weights), possibly empty
        """
        xl, xr = self.nodes[k], self.nodes[k + 1]
        lo = xl if a is None else max(xl, a)
        hi = xr if b is None else min(xr, b)
        if hi <= lo:
            return np.empty(0), np.empty(0)
        if lo == 0.0:
            return graded_left_rule(hi, GAUSS_POINTS, self.jacobi_exponent)
        if hi == 0.0:
            x, w = graded_left_rule(-lo, GAUSS_POINTS, self.jacobi_exponent)
            return -x[::-1], w[::-1]
        cuts = [lo] + [c for c in CUTOFF_BREAKS if lo < c < hi] + [hi]
        xs, ws = [], []
        for left, right in zip(cuts[:-1], cuts[1:]):
            x, w = gauss_legendre(left, right, GAUSS_POINTS)
            xs.append(x)
            ws.append(w)
        return np.concatenate(xs), np.concatenate(ws)

    def restricted_rule(self, a, b):
        """Quadrature rule on the sub-interval [a, b] of [-1, 1]

        :return: tuple (nodes, weights, cells)
        """
        if b < a:
            raise GridError("Empty interval [%g, %g]" % (a, b))
        xs, ws, cs = [], [], []
        for k in range(self.n_cells):
            x, w = self.cell_rule(k, a, b)
            if len(x):
                xs.append(x)
                ws.append(w)
                cs.append(np.full(len(x), k))
        if not xs:
            return np.empty(0), np.empty(0), np.empty(0, dtype=int)
        return np.concatenate(xs), np.concatenate(ws), np.concatenate(cs)

    def integrate(self, values):
        "Apply the quadrature rule to values at ``quad_nodes``"
        return float(np.dot(self.quad_weights, values))

    def to_map(self):
        return {'n_cells': self.n_cells,
                'grading_exponent': self.grading_exponent,
                'quad_points': len(self.quad_nodes)}


def build_grid(n_cells, grading_exponent=2.0, nu=None):
    """Build a symmetric grid graded toward the origin

    :param n_cells: even number of cells
    :param grading_exponent: real >= 1; node k on the right sits at
        ``(k/m)**grading_exponent`` with ``m = n_cells/2``
    :param nu: optional singularity parameter; when given, the
        innermost quadrature piece uses the Jacobi weight x**(1-2nu)
    :return: Grid1D
    """
    if int(n_cells) != n_cells or n_cells < 2 or n_cells % 2:
        raise GridError("Number of cells must be a positive even integer: "
                        "%r" % (n_cells,))
    if grading_exponent < 1:
        raise GridError("Grading exponent must be at least 1: %g" %
                        grading_exponent)
    m = int(n_cells) // 2
    half = (np.arange(m + 1) / m) ** grading_exponent
    half[-1] = 1.0
    nodes = np.concatenate([-half[::-1], half[1:]])
    nodes[m] = 0.0
    jexp = 0.0 if nu is None else 1.0 - 2.0 * nu
    grid = Grid1D(nodes, np.empty(0), np.empty(0), np.empty(0, dtype=int),
                  float(grading_exponent), jexp)
    xs, ws, cs = grid.restricted_rule(-1.0, 1.0)
    grid = Grid1D(nodes, xs, ws, cs, float(grading_exponent), jexp)
    logger.debug("grid with %d cells, %d quadrature points", n_cells,
                 len(xs))
    return grid


def hermite_shapes(x, xl, xr, order=0):
    """Cubic Hermite shape functions on [xl, xr]

    Both local coordinates are measured from their own end so that
    values near either end keep full relative accuracy.

    :return: tuple (H00, H10, H01, H11) of arrays; H10 and H11 carry
        the cell width factor and multiply nodal slopes
    """
    h = xr - xl
    t = (x - xl) / h
    s = (xr - x) / h
    if order == 0:
        return (s * s * (3.0 - 2.0 * s), h * t * s * s,
                t * t * (3.0 - 2.0 * t), -h * t * t * s)
    if order == 1:
        return (-6.0 * t * s / h, s * (1.0 - 3.0 * t),
                6.0 * t * s / h, t * (3.0 * t - 2.0))
    if order == 2:
        return (6.0 * (t - s) / (h * h), (2.0 * t - 4.0 * s) / h,
                6.0 * (s - t) / (h * h), (4.0 * t - 2.0 * s) / h)
    raise ValueError("Unsupported derivative order: %d" % order)


def hermite_eval(grid, dofs, x, order=0, cells=None):
    """Evaluate a C¹ Hermite spline from its nodal (value, slope) pairs

    :param grid: Grid1D
    :param dofs: array of length 2*(n_cells+1), interleaved value/slope
    :param x: abscissas
    :param order: derivative order
    :param cells: optional cell indices matching x
    :return: array of values
    """
    x = np.asarray(x, dtype=float)
    k = grid.locate(x) if cells is None else np.asarray(cells)
    xl, xr = grid.nodes[k], grid.nodes[k + 1]
    h00, h10, h01, h11 = hermite_shapes(x, xl, xr, order)
    return (h00 * dofs[2 * k] + h10 * dofs[2 * k + 1] +
            h01 * dofs[2 * k + 2] + h11 * dofs[2 * k + 3])


@dataclass(frozen=True)
class SingularCoeffs(object):
    """Coefficients of ``|x|**(nu+1/2)`` and ``|x|**(1/2-nu)``

    ``c1m``/``c2m`` act on (-1, 0), ``c1p``/``c2p`` on (0, 1).
    """
    c1m: float = 0.0
    c2m: float = 0.0
    c1p: float = 0.0
    c2p: float = 0.0

    @classmethod
    def from_array(cls, arr):
        return cls(*[float(c) for c in arr])

    def as_array(self):
        return np.array([self.c1m, self.c2m, self.c1p, self.c2p])

    def mirrored(self):
        "Coefficients of x -> f(-x)"
        return SingularCoeffs(self.c1p, self.c2p, self.c1m, self.c2m)

    def is_zero(self):
        return not np.any(self.as_array())


def profile_value(coeffs, nu, x, order=0):
    """Evaluate the singular part (without cutoff) at nonzero x

    :param coeffs: SingularCoeffs
    :param nu: singularity parameter
    :param x: array of nonzero abscissas
    :param order: derivative order
    """
    x = np.asarray(x, dtype=float)
    a, b = profile_exponents(nu)
    c = coeffs.as_array()
    c1 = np.where(x < 0, c[0], c[2])
    c2 = np.where(x < 0, c[1], c[3])
    with np.errstate(divide='ignore', invalid='ignore'):
        return c1 * power_abs(x, a, order) + c2 * power_abs(x, b, order)


@dataclass(frozen=True, eq=False)
class Function1D(object):
    """A function ``f_r + chi * f_s`` in the extension domain

    The regular part is a C¹ Hermite spline given by its nodal
    (value, slope) pairs; the singular part by four profile
    coefficients.
    """
    nu: float
    grid: Grid1D
    regular: np.ndarray
    sing: SingularCoeffs = field(default_factory=SingularCoeffs)
    cutoff: Cutoff = CUTOFF

    def __post_init__(self):
        check_nu(self.nu)
        expected = 2 * (self.grid.n_cells + 1)
        if len(self.regular) != expected:
            raise ValueError("Regular part has %d coefficients, expected %d"
                             % (len(self.regular), expected))

    @classmethod
    def zero(cls, nu, grid):
        return cls(nu, grid, np.zeros(2 * (grid.n_cells + 1)))

    def regular_value(self, x, order=0, cells=None):
        return hermite_eval(self.grid, self.regular, x, order, cells)

    def singular_value(self, x, order=0):
        """Value or derivative of ``chi * f_s`` at nonzero x"""
        x = np.asarray(x, dtype=float)
        if self.sing.is_zero():
            return np.zeros_like(x)
        chi = self.cutoff
        if order == 0:
            return chi(x) * profile_value(self.sing, self.nu, x)
        if order == 1:
            return (chi(x, 1) * profile_value(self.sing, self.nu, x) +
                    chi(x) * profile_value(self.sing, self.nu, x, 1))
        return (chi(x, 2) * profile_value(self.sing, self.nu, x) +
                2.0 * chi(x, 1) * profile_value(self.sing, self.nu, x, 1) +
                chi(x) * profile_value(self.sing, self.nu, x, 2))

    def __call__(self, x, order=0):
        x = np.asarray(x, dtype=float)
        return self.regular_value(x, order) + self.singular_value(x, order)

    def regular_part(self, x, order=0):
        """Value of ``f - f_s``, the regular part of the decomposition

        Away from the origin this differs from the spline by
        ``(chi - 1) * f_s``.
        """
        x = np.asarray(x, dtype=float)
        val = self.regular_value(x, order)
        if self.sing.is_zero():
            return val
        chi = self.cutoff
        fs = [profile_value(self.sing, self.nu, x, j)
              for j in range(order + 1)]
        if order == 0:
            return val + (chi(x) - 1.0) * fs[0]
        if order == 1:
            return val + chi(x, 1) * fs[0] + (chi(x) - 1.0) * fs[1]
        return val + (chi(x, 2) * fs[0] + 2.0 * chi(x, 1) * fs[1] +
                      (chi(x) - 1.0) * fs[2])

    def mirrored(self):
        "The function x -> f(-x)"
        reg = self.regular.reshape(-1, 2)[::-1].copy()
        reg[:, 1] *= -1.0
        return Function1D(self.nu, self.grid, reg.ravel(),
                          self.sing.mirrored(), self.cutoff)

    def write_csv(self, path, x=None):
        """Write samples with columns x, value, regular_value, singular_value

        :param path: output file
        :param x: abscissas; by default the grid nodes without the origin
        """
        if x is None:
            x = self.grid.nodes[self.grid.nodes != 0.0]
        x = np.asarray(x, dtype=float)
        reg = self.regular_value(x)
        sing = self.singular_value(x)
        write_csv(path, ['x', 'value', 'regular_value', 'singular_value'],
                  zip(x, reg + sing, reg, sing))


def eval(f, x):
    """Pointwise value of f at a single abscissa

    :param f: Function1D
    :param x: real in [-1, 1]
    :return: float
    """
    if not -1.0 <= x <= 1.0:
        raise ValueError("Abscissa %g outside [-1, 1]" % x)
    if x == 0.0:
        if f.sing.c2m or f.sing.c2p:
            raise UnboundedValueError(
                "Singular profile |x|^%g has no value at 0" % (0.5 - f.nu))
        return float(f.regular_value(0.0))
    return float(f(x))


def derivative(f, x):
    "Pointwise first derivative of f at a nonzero abscissa"
    if x == 0.0 and not f.sing.is_zero():
        raise UnboundedValueError("Derivative of a singular profile at 0")
    return float(f(x, 1))


def inner_product(f, g, grid):
    """L² pairing of two functions by the grid quadrature

    :param f: Function1D
    :param g: Function1D
    :param grid: Grid1D both functions live on
    :return: float
    """
    if f.nu != g.nu:
        raise ValueError("Functions have different nu: %g, %g" % (
            f.nu, g.nu))
    for func in (f, g):
        if func.grid is not grid and not np.array_equal(func.grid.nodes,
                                                          grid.nodes):
            raise ValueError("Function does not live on the given grid")
    x = grid.quad_nodes
    return grid.integrate(f(x) * g(x))


@dataclass
class DomainReport(object):
    "Residuals of the domain conditions of an extension"
    residuals: dict
    tol: float

    @property
    def member(self):
        return all(val <= self.tol for val in self.residuals.values())

    def to_map(self):
        return {'residuals': dict(self.residuals), 'tol': self.tol,
                'member': self.member}


def domain_check(f, spec, tol=1e-10):
    """Check that f satisfies the conditions of an extension

    :param f: Function1D
    :param spec: ExtensionSpec
    :param tol: acceptance threshold for every residual
    :return: DomainReport
    """
    if tol <= 0:
        raise ValueError("Tolerance must be positive: %g" % tol)
    res = {}
    for label, x, flag in (('left', -1.0, spec.dirichlet_at_pm1[0]),
                           ('right', 1.0, spec.dirichlet_at_pm1[1])):
        if flag:
            res['dirichlet_' + label] = abs(float(f(x)))
        else:
            res['neumann_' + label] = abs(float(f(x, 1)))
    cons = spec.constraint_matrix().dot(f.sing.as_array())
    res['transmission_1'] = abs(float(cons[0]))
    res['transmission_2'] = abs(float(cons[1]))
    zk = 2 * f.grid.zero_index
    res['regular_value_0'] = abs(float(f.regular[zk]))
    res['regular_slope_0'] = abs(float(f.regular[zk + 1]))
    return DomainReport(res, tol)


def fit_singular(x, values, nu, grid):
    """Least-squares estimate of the singular coefficients from samples

    Uses the samples lying in the two cells on each side of the
    origin, fitting both profiles together with ``x**2`` and ``x**3``
    to absorb the regular part.

    :param x: sample abscissas
    :param values: sample values
    :param nu: singularity parameter
    :param grid: Grid1D
    :return: SingularCoeffs
    """
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=float)
    a, b = profile_exponents(nu)
    zi = grid.zero_index
    coeffs = []
    for lo, hi in ((grid.nodes[zi - 2], 0.0), (0.0, grid.nodes[zi + 2])):
        sel = (x > lo) & (x < hi) if lo < 0 else (x > lo) & (x <= hi)
        sel &= x != 0.0
        if np.count_nonzero(sel) < 4:
            raise ValueError("Need at least 4 samples near 0 on each side, "
                             "got %d" % np.count_nonzero(sel))
        ax = np.abs(x[sel])
        design = np.column_stack([ax ** a, ax ** b, ax ** 2, ax ** 3])
        sol = np.linalg.lstsq(design, values[sel], rcond=None)[0]
        coeffs.extend(sol[:2])
    return SingularCoeffs.from_array(coeffs)
