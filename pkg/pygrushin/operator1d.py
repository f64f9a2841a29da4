# -*- coding: utf-8 -*-
"""
    pygrushin.operator1d
    ~~~~~~~~~~~~~~~~~~~~

    This module defines the extension specifications of the singular
    operator on (-1, 1), their validation, the transmission-constrained
    Galerkin basis, and the assembly and eigendecomposition of the
    one-dimensional operators

        A_n f = -f'' + c/x² f + (n pi)² |x|^(2 gamma) f.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import linalg, sparse

from pygrushin.funcspace import SUPPORTED_NU, CUTOFF, Function1D
from pygrushin.funcspace import SingularCoeffs, check_nu, hermite_shapes
from pygrushin.funcspace import profile_exponents, profile_value
from pygrushin.lib.export import write_csv, write_json

logger = logging.getLogger(__name__)

DECOUPLED = 'decoupled'
SYMMETRY_TOL = 1e-8
RESIDUAL_TOL = 1e-8
ORTHO_TOL = 1e-10
ENERGY_SHIFT = 1.0
E = np.array([[0.0, -1.0], [1.0, 0.0]])


class ExtensionError(ValueError):
    "Inconsistent or unusable extension specification"


class AssemblyError(RuntimeError):
    "Galerkin assembly failed its consistency checks"


class EigenSolveError(RuntimeError):
    "Generalized eigensolve failed or produced inaccurate pairs"


def c_of_nu(nu):
    """Coefficient of the inverse-square potential

    :param nu: real in (0, 1)
    :return: nu² - 1/4
    """
    check_nu(nu)
    return nu * nu - 0.25


def coercivity_constant(nu):
    "Return min(1, 4 nu²)"
    check_nu(nu)
    return min(1.0, 4.0 * nu * nu)


def side_matrices(nu):
    """Bracket matrices of the singular profiles at 0- and 0+

    Row 0 maps (c1, c2) to [f, u], row 1 to [f, v].
    """
    a, b = profile_exponents(nu)
    return (np.array([[1.0, 1.0], [-a, -b]]),
            np.array([[1.0, 1.0], [a, b]]))


@dataclass(frozen=True, eq=False)
class ExtensionSpec(object):
    """Interior and end conditions defining a self-adjoint extension

    The reduced matrices act on the brackets ``([f,u], [f,v])`` at 0-
    (``m2_tilde``) and 0+ (``m3_tilde``).  An end flag set to False
    replaces the Dirichlet condition by ``f'(±1) = 0``.
    """
    nu: float
    m2_tilde: np.ndarray
    m3_tilde: np.ndarray
    dirichlet_at_pm1: tuple = (True, True)
    label: str = 'custom'

    def __post_init__(self):
        check_nu(self.nu)
        for name in ('m2_tilde', 'm3_tilde'):
            mat = np.asarray(getattr(self, name), dtype=float)
            if mat.shape != (2, 2):
                raise ExtensionError("%s must be 2x2, got shape %s" % (
                    name, mat.shape))
            object.__setattr__(self, name, mat)
        object.__setattr__(self, 'dirichlet_at_pm1',
                           tuple(bool(f) for f in self.dirichlet_at_pm1))

    def reduced(self):
        "Return the matrices acting on (c1m, c2m) and (c1p, c2p)"
        wm, wp = side_matrices(self.nu)
        return self.m2_tilde.dot(wm), self.m3_tilde.dot(wp)

    def constraint_matrix(self):
        "Return the 2x4 matrix C with C (c1m, c2m, c1p, c2p) = 0"
        h2, h3 = self.reduced()
        return np.hstack([h2, h3])

    def boundary_matrices(self):
        "Return the 4x2 matrices M1, M2, M3, M4 of the full condition"
        mats = [np.zeros((4, 2)) for _ in range(4)]
        mats[0][0] = (1.0, 0.0) if self.dirichlet_at_pm1[0] else (0.0, 1.0)
        mats[1][1:3] = self.m2_tilde
        mats[2][1:3] = self.m3_tilde
        mats[3][3] = (1.0, 0.0) if self.dirichlet_at_pm1[1] else (0.0, 1.0)
        return mats

    def admits(self, coeffs, tol=1e-12):
        "Return True if the singular coefficients satisfy the conditions"
        arr = coeffs.as_array() if isinstance(coeffs, SingularCoeffs) \
            else np.asarray(coeffs, dtype=float)
        scale = max(1.0, np.abs(arr).max())
        return bool(np.abs(self.constraint_matrix().dot(arr)).max()
                    <= tol * scale)

    @classmethod
    def from_map(cls, label, inmap, nu):
        """Build a spec from a configuration map

        :param label: name of the spec
        :param inmap: dictionary with m2_tilde, m3_tilde and optional
            dirichlet_at_pm1
        :param nu: singularity parameter
        """
        for key in ('m2_tilde', 'm3_tilde'):
            if key not in inmap:
                raise KeyError("Extension %s lacks %s" % (label, key))
        return cls(nu, np.array(inmap['m2_tilde'], dtype=float),
                   np.array(inmap['m3_tilde'], dtype=float),
                   tuple(inmap.get('dirichlet_at_pm1', (True, True))), label)

    def to_map(self):
        return {'label': self.label, 'nu': self.nu,
                'm2_tilde': self.m2_tilde.tolist(),
                'm3_tilde': self.m3_tilde.tolist(),
                'dirichlet_at_pm1': list(self.dirichlet_at_pm1)}

    def write_json(self, path):
        write_json(path, self.to_map())


def designed_extension(nu):
    """Extension coupling both sides of the singularity

    The conditions are ``c1m + c2m + c1p + c2p = 0`` and
    ``(nu+1/2) c1m + (1/2-nu) c2m = (nu+1/2) c1p + (1/2-nu) c2p``.
    """
    return ExtensionSpec(nu, np.eye(2), np.eye(2), label='designed')


def decoupled_extension(nu):
    """Extension with no transmission across the singularity

    The conditions are ``c1p = -c2p`` and
    ``(nu+1/2) c1m + (1/2-nu) c2m = 0``.
    """
    return ExtensionSpec(nu, np.diag([0.0, 1.0]), np.diag([1.0, 0.0]),
                         label='decoupled')


class ExtensionDict(dict):
    """The named extension specifications available for one nu

    The built-in ``designed`` and ``decoupled`` specs are always
    present; others come from the ``extensions`` configuration section.
    """

    cls = ExtensionSpec

    def __init__(self, nu):
        dict.__init__(self)
        self.nu = nu
        self['designed'] = designed_extension(nu)
        self['decoupled'] = decoupled_extension(nu)

    def from_map(self, inmap):
        """Add specs from a map of label to matrices

        :param inmap: dictionary, e.g., from the configuration file
        """
        for label in sorted(inmap or {}):
            if label in ('designed', 'decoupled'):
                raise KeyError("Built-in extension cannot be redefined: %s"
                               % label)
            self[label] = self.cls.from_map(label, inmap[label], self.nu)
        return self

    def to_map(self):
        return {label: self[label].to_map() for label in sorted(self)}

    def get_spec(self, label):
        if label not in self:
            raise KeyError("Unrecognized extension: %s" % label)
        return self[label]


@dataclass
class ValidationReport(object):
    "Result of checking the conditions characterizing self-adjointness"
    label: str
    rank: int
    residual: float
    reduced_rank: int
    det_m2: float
    det_m3: float

    @property
    def valid(self):
        return self.rank == 4 and self.residual <= 1e-12

    def to_map(self):
        return {'label': self.label, 'rank': self.rank,
                'residual': self.residual, 'reduced_rank': self.reduced_rank,
                'det_m2': self.det_m2, 'det_m3': self.det_m3,
                'valid': self.valid}


def validate_extension(spec):
    """Check rank and the symplectic identity of the boundary matrices

    :param spec: ExtensionSpec
    :return: ValidationReport
    """
    m1, m2, m3, m4 = spec.boundary_matrices()
    block = np.hstack([m1, m2, m3, m4])
    ident = (m1.dot(E).dot(m1.T) - m2.dot(E).dot(m2.T) +
             m3.dot(E).dot(m3.T) - m4.dot(E).dot(m4.T))
    report = ValidationReport(
        spec.label, int(np.linalg.matrix_rank(block)),
        float(np.abs(ident).max()),
        int(np.linalg.matrix_rank(np.hstack([spec.m2_tilde, spec.m3_tilde]))),
        float(np.linalg.det(spec.m2_tilde)),
        float(np.linalg.det(spec.m3_tilde)))
    logger.debug("extension %s: rank %d, residual %.3g", spec.label,
                 report.rank, report.residual)
    return report


def _invertible(mat, tol=1e-10):
    return abs(np.linalg.det(mat)) > tol * max(1.0, np.abs(mat).max()) ** 2


def transmission_map(spec):
    """Matrix T with (c1p, c2p) = T (c1m, c2m), or DECOUPLED

    :param spec: ExtensionSpec
    :return: 2x2 array or the string DECOUPLED
    """
    h2, h3 = spec.reduced()
    if np.linalg.matrix_rank(spec.constraint_matrix()) < 2:
        raise ExtensionError("Extension %s imposes fewer than two "
                             "independent conditions" % spec.label)
    if _invertible(h3):
        return -np.linalg.solve(h3, h2)
    if _invertible(h2):
        raise ExtensionError("Extension %s transmits in one direction only"
                             % spec.label)
    left = linalg.null_space(h2)
    right = linalg.null_space(h3)
    if left.shape[1] + right.shape[1] != 2:
        raise ExtensionError("Extension %s couples the sides without a "
                             "transmission map" % spec.label)
    return DECOUPLED


def coupling_kind(spec):
    """Classify the reduced matrices of a spec

    :return: 'both-invertible', 'both-singular' or 'one-sided'
    """
    h2, h3 = spec.reduced()
    inv2, inv3 = _invertible(h2), _invertible(h3)
    if inv2 and inv3:
        return 'both-invertible'
    if not inv2 and not inv3:
        return 'both-singular'
    return 'one-sided'


@dataclass
class SearchCertificate(object):
    "Outcome of a randomized search for one-sided transmission"
    trials: int
    valid_specs: int
    max_det_mismatch: float
    one_sided: int
    both_invertible: int
    both_singular: int
    seed: int

    def to_map(self):
        return dict(self.__dict__)


def nonsymmetric_transmission_search(trials, seed=0):
    """Look for valid specs whose transmission works one way only

    Random valid specs are drawn by rescaling one row of a random
    ``m3_tilde`` so its determinant matches that of ``m2_tilde``; every
    fourth draw uses a singular ``m2_tilde``.

    :param trials: number of random specs
    :param seed: random seed
    :return: SearchCertificate
    """
    if trials < 1:
        raise ValueError("Number of trials must be positive: %d" % trials)
    rng = np.random.default_rng(seed)
    cert = SearchCertificate(trials, 0, 0.0, 0, 0, 0, seed)
    for k in range(trials):
        nu = rng.uniform(*SUPPORTED_NU)
        m2 = rng.standard_normal((2, 2))
        if k % 4 == 3:
            m2[1] = rng.standard_normal() * m2[0]
        m3 = rng.standard_normal((2, 2))
        while abs(np.linalg.det(m3)) < 1e-3:
            m3 = rng.standard_normal((2, 2))
        m3[0] *= np.linalg.det(m2) / np.linalg.det(m3)
        spec = ExtensionSpec(nu, m2, m3, label='random-%d' % k)
        if not validate_extension(spec).valid:
            continue
        cert.valid_specs += 1
        h2, h3 = spec.reduced()
        cert.max_det_mismatch = max(cert.max_det_mismatch, abs(
            abs(np.linalg.det(h2)) - abs(np.linalg.det(h3))))
        kind = coupling_kind(spec)
        if kind == 'one-sided':
            cert.one_sided += 1
        elif kind == 'both-invertible':
            cert.both_invertible += 1
        else:
            cert.both_singular += 1
    logger.info("transmission search: %d valid specs, %d one-sided",
                cert.valid_specs, cert.one_sided)
    return cert


def boundary_functions(nu):
    """The solutions u, v of -f'' + c/x² f = 0 normalizing the brackets

    On (0, 1), ``u(1) = 0, u'(1) = 1`` and ``v(1) = -1, v'(1) = 0``;
    both are mirrored to (-1, 0) so that ``[u, v] = 1`` on each side.

    :return: tuple (u, v) of SingularCoeffs
    """
    check_nu(nu)
    k = 1.0 / (2.0 * nu)
    vcoef = (-(nu - 0.5) * k, -(nu + 0.5) * k)
    return (SingularCoeffs(-k, k, k, -k), SingularCoeffs(*(vcoef + vcoef)))


def profile_bracket(f, g, nu, x):
    """Wronskian-type bracket ``f g' - f' g`` of two profile combinations

    :param f: SingularCoeffs
    :param g: SingularCoeffs
    :param x: nonzero abscissas
    """
    return (profile_value(f, nu, x) * profile_value(g, nu, x, 1) -
            profile_value(f, nu, x, 1) * profile_value(g, nu, x))


def boundary_term_balance(coeffs, nu):
    """Defect of the cancellation of the boundary terms at the origin

    Returns ``(c1m + c2m)((nu+1/2) c1m + (1/2-nu) c2m)`` plus the same
    expression for the right coefficients; it vanishes on the domain of
    both the designed and the decoupled extension.
    """
    a, b = profile_exponents(nu)
    c = coeffs.as_array()
    return float((c[0] + c[1]) * (a * c[0] + b * c[1]) +
                 (c[2] + c[3]) * (a * c[2] + b * c[3]))


def singular_directions(spec):
    """Return a 4x2 matrix whose columns span the admissible coefficients

    Coupled specs use ``(e_k, T e_k)``; decoupled specs use one
    direction supported on each side.
    """
    tmap = transmission_map(spec)
    if isinstance(tmap, str):
        h2, h3 = spec.reduced()
        left = linalg.null_space(h2)[:, 0]
        right = linalg.null_space(h3)[:, 0]
        dirs = np.zeros((4, 2))
        dirs[:2, 0] = left * np.sign(left[np.argmax(np.abs(left))])
        dirs[2:, 1] = right * np.sign(right[np.argmax(np.abs(right))])
        return dirs
    return np.vstack([np.eye(2), tmap])


class ConstrainedBasis(object):
    """Galerkin basis of the domain of an extension

    The regular part is the C¹ cubic Hermite space on the grid with
    value and slope clamped at the origin and value (or slope, for a
    Neumann end) clamped at ±1.  Slope functions are divided by the
    local cell width.  Two further elements are the cutoff times the
    singular profiles spanning the admissible coefficients, minus
    their projection on the regular space; they vanish near ±1
    because the cutoff does.

    For nu <= 1/2 the projection is orthogonal in L².  Above 1/2 the
    L² projection of ``x^(1/2 - nu)`` on the clamped space has an
    energy growing like ``h^(-2 nu)`` in the first cell, so the
    projection is taken in the form ``<(A_0 + 1) f, g>`` instead,
    which leaves the Laplace block free of that scale.
    """

    def __init__(self, grid, spec):
        self.grid = grid
        self.spec = spec
        self.nu = spec.nu
        self.cutoff = CUTOFF
        nnodes = grid.n_cells + 1
        zi = grid.zero_index
        clamped = {2 * zi, 2 * zi + 1}
        clamped.add(0 if spec.dirichlet_at_pm1[0] else 1)
        clamped.add(2 * (nnodes - 1) if spec.dirichlet_at_pm1[1]
                    else 2 * nnodes - 1)
        self.free = np.array([i for i in range(2 * nnodes)
                              if i not in clamped])
        self.index = np.full(2 * nnodes, -1)
        self.index[self.free] = np.arange(len(self.free))
        widths = grid.widths
        node_h = np.empty(nnodes)
        node_h[0], node_h[-1] = widths[0], widths[-1]
        node_h[1:-1] = 0.5 * (widths[:-1] + widths[1:])
        self.scales = np.ones(2 * nnodes)
        self.scales[1::2] = 1.0 / node_h
        self.directions = singular_directions(spec)
        self.n_regular = len(self.free)
        self.dim = self.n_regular + 2
        x, w, cells = grid.quad_nodes, grid.quad_weights, grid.quad_cells
        reg = self._regular(x, 0, cells)
        sing = self._singular(x, 0)
        if self.energy_projection:
            right = self._regular_strong(x, cells) + ENERGY_SHIFT * reg
            grr = self.gram(reg, right, w)
            grr = 0.5 * (grr + grr.T)
            grs = reg.T.dot(w[:, None] * (self._singular_strong(x) +
                                          ENERGY_SHIFT * sing))
        else:
            grr = self.gram(reg, reg, w)
            grs = reg.T.dot(w[:, None] * sing)
        self.correction = linalg.cho_solve(linalg.cho_factor(grr), grs)

    @property
    def energy_projection(self):
        return self.nu > 0.5

    def _regular(self, x, order, cells):
        k = self.grid.locate(x) if cells is None else np.asarray(cells)
        xl, xr = self.grid.nodes[k], self.grid.nodes[k + 1]
        shapes = hermite_shapes(x, xl, xr, order)
        rows, cols, vals = [], [], []
        allrows = np.arange(len(x))
        for j, shape in enumerate(shapes):
            dof = 2 * k + j
            col = self.index[dof]
            keep = col >= 0
            rows.append(allrows[keep])
            cols.append(col[keep])
            vals.append(shape[keep] * self.scales[dof[keep]])
        return sparse.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows),
                                    np.concatenate(cols))),
            shape=(len(x), self.n_regular))

    def _profiles(self, x, order):
        return np.column_stack([
            profile_value(SingularCoeffs.from_array(d), self.nu, x, order)
            for d in self.directions.T])

    def _singular(self, x, order):
        chi = self.cutoff
        s = [self._profiles(x, j) for j in range(order + 1)]
        if order == 0:
            return chi(x)[:, None] * s[0]
        if order == 1:
            return chi(x, 1)[:, None] * s[0] + chi(x)[:, None] * s[1]
        return (chi(x, 2)[:, None] * s[0] + 2.0 * chi(x, 1)[:, None] * s[1]
                + chi(x)[:, None] * s[2])

    def _combine(self, reg, sing):
        sing = sing - reg.dot(self.correction)
        return sparse.hstack([reg, sparse.csr_matrix(sing)], format='csr')

    def values(self, x, order=0, cells=None):
        """Sparse matrix of basis values (or derivatives) at nonzero x"""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return self._combine(self._regular(x, order, cells),
                             self._singular(x, order))

    def strong_values(self, x, cells=None):
        """Sparse matrix of ``-phi'' + c/x² phi`` at nonzero x

        On the cutoff profiles only the commutator
        ``-chi'' s - 2 chi' s'`` remains.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return self._combine(self._regular_strong(x, cells),
                             self._singular_strong(x))

    def _regular_strong(self, x, cells):
        c = self.nu * self.nu - 0.25
        reg = (-self._regular(x, 2, cells) +
               sparse.diags(c / (x * x)).dot(self._regular(x, 0, cells)))
        return reg.tocsr()

    def _singular_strong(self, x):
        chi = self.cutoff
        return -(chi(x, 2)[:, None] * self._profiles(x, 0) +
                 2.0 * chi(x, 1)[:, None] * self._profiles(x, 1))

    def regular_gradient_values(self, x, cells=None):
        """Sparse matrix of the derivative of ``phi - f_s``"""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        chi = self.cutoff
        sing = (chi(x, 1)[:, None] * self._profiles(x, 0) +
                (chi(x) - 1.0)[:, None] * self._profiles(x, 1))
        return self._combine(self._regular(x, 1, cells), sing)

    def gram(self, left, right, weights):
        "Dense ``left^T diag(weights) right``"
        return left.T.dot(sparse.diags(weights).dot(right)).toarray()

    @cached_property
    def quad_values(self):
        grid = self.grid
        return self.values(grid.quad_nodes, cells=grid.quad_cells)

    @cached_property
    def mass(self):
        "L² Gram matrix over (-1, 1)"
        phi = self.quad_values
        mass = self.gram(phi, phi, self.grid.quad_weights)
        return 0.5 * (mass + mass.T)

    @cached_property
    def mass_factor(self):
        return linalg.cho_factor(self.mass)

    def mass_on(self, a, b):
        "L² Gram matrix over the sub-interval (a, b)"
        x, w, cells = self.grid.restricted_rule(a, b)
        if not len(x):
            return np.zeros((self.dim, self.dim))
        phi = self.values(x, cells=cells)
        mass = self.gram(phi, phi, w)
        return 0.5 * (mass + mass.T)

    def project(self, func):
        """L² projection of a callable onto the basis

        :param func: vectorized callable of x
        :return: coefficient vector
        """
        x = self.grid.quad_nodes
        rhs = self.quad_values.T.dot(self.grid.quad_weights * func(x))
        return linalg.cho_solve(self.mass_factor, rhs)

    def evaluate(self, coeffs, x, order=0):
        "Values at nonzero x of the function(s) with the given coefficients"
        return self.values(x, order).dot(coeffs)

    def function(self, coeffs):
        "Function1D with the given basis coefficients"
        coeffs = np.asarray(coeffs, dtype=float)
        csing = coeffs[self.n_regular:]
        reg = np.zeros(len(self.index))
        reg[self.free] = (coeffs[:self.n_regular] -
                          self.correction.dot(csing)) * self.scales[self.free]
        sing = SingularCoeffs.from_array(self.directions.dot(csing))
        return Function1D(self.nu, self.grid, reg, sing, self.cutoff)

    def coefficients(self, f):
        "Basis coefficients of a Function1D lying in the span"
        sing = np.linalg.lstsq(self.directions, f.sing.as_array(),
                               rcond=None)[0]
        reg = f.regular[self.free] / self.scales[self.free] + \
            self.correction.dot(sing)
        return np.concatenate([reg, sing])

    def to_map(self):
        return {'regular': 'C1 cubic Hermite', 'n_regular': self.n_regular,
                'n_singular': 2, 'dim': self.dim,
                'directions': self.directions.T.tolist(),
                'cutoff': self.cutoff.to_map(), 'grid': self.grid.to_map()}


@dataclass(frozen=True, eq=False)
class Operator1D(object):
    """Stiffness and mass matrices of A_n on a constrained basis

    ``laplace`` is the part without the degeneracy potential,
    ``potential`` the Gram matrix weighted by ``|x|^(2 gamma)`` and
    ``gradient`` the Gram matrix of the regular-part derivatives.
    """
    n: int
    nu: float
    gamma: float
    stiffness: np.ndarray
    mass: np.ndarray
    basis: ConstrainedBasis
    spec: ExtensionSpec
    laplace: np.ndarray = field(repr=False)
    potential: np.ndarray = field(repr=False)
    gradient: np.ndarray = field(repr=False)
    symmetry_defect: float = 0.0

    @property
    def dim(self):
        return self.basis.dim

    @property
    def frequency(self):
        return self.n * np.pi

    @property
    def basis_meta(self):
        return self.basis.to_map()


def assemble_family(ns, nu, gamma, grid, spec, basis=None):
    """Assemble A_n for several n sharing the n-independent forms

    :param ns: iterable of nonnegative integers
    :param nu: singularity parameter, within the supported range
    :param gamma: degeneracy exponent > 0
    :param grid: Grid1D
    :param spec: ExtensionSpec with the same nu
    :param basis: optional prebuilt ConstrainedBasis
    :return: list of Operator1D
    """
    check_nu(nu, SUPPORTED_NU, closed=True)
    if spec.nu != nu:
        raise ValueError("Extension %s built for nu = %g, not %g" % (
            spec.label, spec.nu, nu))
    if gamma <= 0:
        raise ValueError("gamma must be positive: %g" % gamma)
    if basis is None:
        basis = ConstrainedBasis(grid, spec)
    x, w, cells = grid.quad_nodes, grid.quad_weights, grid.quad_cells
    phi = basis.quad_values
    lap = basis.gram(phi, basis.strong_values(x, cells), w)
    scale = np.abs(lap).max()
    defect = float(np.abs(lap - lap.T).max() / scale)
    if defect > SYMMETRY_TOL:
        raise AssemblyError("Symmetry defect %.3g exceeds %g (nu = %g, "
                            "%d cells)" % (defect, SYMMETRY_TOL, nu,
                                           grid.n_cells))
    lap = 0.5 * (lap + lap.T)
    pot = basis.gram(phi, phi, w * np.abs(x) ** (2.0 * gamma))
    pot = 0.5 * (pot + pot.T)
    dphi = basis.regular_gradient_values(x, cells)
    grad = basis.gram(dphi, dphi, w)
    grad = 0.5 * (grad + grad.T)
    ops = []
    for n in ns:
        if n < 0 or int(n) != n:
            raise ValueError("Mode index must be a nonnegative integer: %r"
                             % (n,))
        freq2 = (n * np.pi) ** 2
        ops.append(Operator1D(int(n), nu, gamma, lap + freq2 * pot,
                              basis.mass, basis, spec, lap, pot, grad,
                              defect))
    logger.debug("assembled %d operators of dimension %d, symmetry defect "
                 "%.3g", len(ops), basis.dim, defect)
    return ops


def assemble(n, nu, gamma, grid, spec):
    """Assemble the Galerkin matrices of A_n

    :return: Operator1D
    """
    return assemble_family([n], nu, gamma, grid, spec)[0]


@dataclass(frozen=True, eq=False)
class EigenSystem(object):
    "Lowest generalized eigenpairs, eigenvectors mass-orthonormal"
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual: float = 0.0
    orthogonality: float = 0.0

    def __len__(self):
        return len(self.eigenvalues)

    def write_csv(self, path):
        "Write columns index, eigenvalue"
        write_csv(path, ['index', 'eigenvalue'],
                  enumerate(self.eigenvalues, start=1))


def eigensolve(op, k=None):
    """Compute the k smallest eigenpairs of (stiffness, mass)

    The pencil is Jacobi-scaled by the mass diagonal before the dense
    solve.  The dense solver is accurate to about eps times the
    largest eigenvalue, far above the bottom of the spectrum on a
    graded grid, so the returned eigenvalues are the Rayleigh
    quotients of the computed vectors on the unreduced pencil.
    Residuals are measured as backward errors, i.e., relative to
    ``(|K| + |lambda| |M|) |v|``.

    :param op: Operator1D
    :param k: number of pairs, all by default
    :return: EigenSystem
    """
    dim = op.dim
    k = dim if k is None else int(k)
    if not 1 <= k <= dim:
        raise ValueError("Cannot compute %d eigenpairs of a %d-dimensional "
                         "operator" % (k, dim))
    d = 1.0 / np.sqrt(np.diag(op.mass))
    kscaled = op.stiffness * d[:, None] * d[None, :]
    mscaled = op.mass * d[:, None] * d[None, :]
    try:
        vals, vecs = linalg.eigh(kscaled, mscaled,
                                 subset_by_index=[0, k - 1])
    except (linalg.LinAlgError, ValueError) as exc:
        raise EigenSolveError("Eigensolve failed for n = %d: %s" % (op.n,
                                                                     exc))
    vecs = vecs * d[:, None]
    kv, mv = op.stiffness.dot(vecs), op.mass.dot(vecs)
    vals = np.einsum('ij,ij->j', vecs, kv) / np.einsum('ij,ij->j', vecs, mv)
    order = np.argsort(vals, kind='stable')
    vals, vecs, kv, mv = vals[order], vecs[:, order], kv[:, order], \
        mv[:, order]
    res = kv - mv * vals
    scale = (np.linalg.norm(op.stiffness, 1) +
             np.abs(vals) * np.linalg.norm(op.mass, 1)) * \
        np.linalg.norm(vecs, axis=0)
    residual = float((np.linalg.norm(res, axis=0) / scale).max())
    ortho = float(np.abs(vecs.T.dot(op.mass).dot(vecs) - np.eye(k)).max())
    if residual > RESIDUAL_TOL:
        raise EigenSolveError("Eigenpair residual %.3g exceeds %g" % (
            residual, RESIDUAL_TOL))
    if ortho > ORTHO_TOL:
        raise EigenSolveError("Mass-orthonormality defect %.3g exceeds %g"
                              % (ortho, ORTHO_TOL))
    logger.debug("n = %d: %d eigenpairs, lambda_1 = %.10g", op.n, k, vals[0])
    return EigenSystem(vals, vecs, residual, ortho)


@dataclass
class CoercivityReport(object):
    "Margins of the coercivity bound over sampled domain elements"
    margins: np.ndarray
    masses: np.ndarray
    m_nu: float
    energies: np.ndarray = None

    @property
    def min_margin(self):
        return float(self.margins.min())

    @property
    def satisfied(self):
        scale = self.masses if self.energies is None else \
            self.masses + np.abs(self.energies)
        return bool(np.all(self.margins >= -1e-8 * scale))

    def to_map(self):
        return {'samples': len(self.margins), 'm_nu': self.m_nu,
                'min_margin': self.min_margin, 'satisfied': self.satisfied}


def coercivity_check(op, samples, seed=0, modes=16, vectors=None):
    """Sample ``<A_n f, f> - m ||f_r'||² - (n pi)² |||x|^gamma f||²``

    Two kinds of random elements are drawn, ``samples`` of each:
    combinations of the lowest eigenvectors and raw Gaussian basis
    coefficient vectors, all normalized in L².  The margins are
    tolerated down to ``-1e-8`` times the mass plus the energy.

    :param op: Operator1D
    :param samples: number of random elements of each kind
    :param seed: random seed
    :param modes: number of eigenvectors combined
    :param vectors: optional extra coefficient vectors to test as given,
        placed after the random ones
    :return: CoercivityReport
    """
    if samples < 1:
        raise ValueError("Number of samples must be positive: %d" % samples)
    rng = np.random.default_rng(seed)
    eig = eigensolve(op, min(modes, op.dim))
    coeffs = rng.standard_normal((len(eig), samples))
    coeffs /= np.linalg.norm(coeffs, axis=0)
    raw = rng.standard_normal((op.dim, samples))
    raw /= np.sqrt(np.einsum('ij,ij->j', raw, op.mass.dot(raw)))
    fs = np.column_stack([eig.eigenvectors.dot(coeffs), raw])
    if vectors is not None:
        fs = np.column_stack([fs] + [np.asarray(v, dtype=float)
                                     for v in vectors])
    m = coercivity_constant(op.nu)
    freq2 = (op.n * np.pi) ** 2

    def quad(mat):
        return np.einsum('ij,ij->j', fs, mat.dot(fs))

    energies = quad(op.stiffness)
    margins = energies - m * quad(op.gradient) - freq2 * quad(op.potential)
    return CoercivityReport(margins, quad(op.mass), m, energies)


def bracket_jump(f, g, eps):
    """Return ``[f, g](eps) - [f, g](-eps)`` for two Function1D

    The bracket is ``f g' - f' g``; on the domain of a self-adjoint
    extension the jump tends to 0 with eps.
    """
    def bracket(x):
        return float(f(x) * g(x, 1) - f(x, 1) * g(x))
    return bracket(eps) - bracket(-eps)


def regular_decay(f, eps):
    "Return ``f_r(±eps) / eps^(3/2)`` for a Function1D, as a pair"
    return tuple(float(f.regular_part(x)) / eps ** 1.5 for x in (-eps, eps))
