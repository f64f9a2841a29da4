# -*- coding: utf-8 -*-
"""
    pygrushin.semigroup
    ~~~~~~~~~~~~~~~~~~~

    This module defines the heat semigroups of the one-dimensional
    operators A_n and the two-dimensional semigroup S(t) acting mode
    by mode on the Fourier expansion in y with the orthonormal basis
    ``sqrt(2) sin(n pi y)``.  Propagation is by eigen-expansion;
    Crank-Nicolson stepping is an independent cross-check.
"""
import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from pygrushin.lib.export import write_csv
from pygrushin.lib.quadrature import gauss_legendre
from pygrushin.operator1d import eigensolve

logger = logging.getLogger(__name__)

TAIL_TOL = 1e-10


class SpectralResolutionError(RuntimeError):
    "The eigenpairs do not resolve the data"


class ModeMismatchError(ValueError):
    "Operators and field modes do not match"


def sine_modes(indices, y):
    """Values of ``sqrt(2) sin(n pi y)``, one row per index"""
    return np.sqrt(2.0) * np.sin(np.pi * np.outer(indices, y))


@dataclass(frozen=True, eq=False)
class Field2D(object):
    """A state on (-1, 1) x (0, 1) as Fourier modes in y

    ``modes[j]`` holds the basis coefficients of the x-profile
    multiplying ``sqrt(2) sin(n pi y)`` with ``n = indices[j]``.  A
    single-mode field with index 0 stands for a one-dimensional state.
    """
    modes: np.ndarray
    basis: object = field(repr=False)
    nu: float = None
    gamma: float = 1.0
    indices: tuple = None

    def __post_init__(self):
        if self.nu is None:
            object.__setattr__(self, 'nu', self.basis.nu)
        modes = np.atleast_2d(np.asarray(self.modes, dtype=float))
        object.__setattr__(self, 'modes', modes)
        if self.indices is None:
            object.__setattr__(self, 'indices',
                               tuple(range(1, modes.shape[0] + 1)))
        if len(self.indices) != modes.shape[0]:
            raise ModeMismatchError("%d mode indices for %d modes" % (
                len(self.indices), modes.shape[0]))
        if modes.shape[1] != self.basis.dim:
            raise ModeMismatchError("Mode length %d differs from basis "
                                    "dimension %d" % (modes.shape[1],
                                                      self.basis.dim))

    @property
    def n_modes(self):
        return self.modes.shape[0]

    @classmethod
    def zeros(cls, basis, n_modes, nu=None, gamma=1.0, indices=None):
        return cls(np.zeros((n_modes, basis.dim)), basis, nu, gamma,
                   indices)

    def like(self, modes):
        "A field with new modes and the same metadata"
        return Field2D(modes, self.basis, self.nu, self.gamma, self.indices)

    def __add__(self, other):
        return self.like(self.modes + other.modes)

    def __sub__(self, other):
        return self.like(self.modes - other.modes)

    def __mul__(self, scalar):
        return self.like(self.modes * scalar)

    __rmul__ = __mul__

    def mode_norms(self, mass=None):
        mass = self.basis.mass if mass is None else mass
        return np.sqrt(np.maximum(np.einsum('ij,jk,ik->i', self.modes, mass,
                                            self.modes), 0.0))

    def inner(self, other):
        "L² inner product by Parseval"
        return float(np.einsum('ij,jk,ik->', self.modes, self.basis.mass,
                               other.modes))

    def norm(self):
        "L² norm by Parseval"
        return float(np.sqrt(np.sum(self.mode_norms() ** 2)))

    def norm_by_quadrature(self, n_y=None):
        "L² norm by tensor quadrature of the evaluated field"
        grid = self.basis.grid
        n_y = n_y or 2 * max(self.indices) + 16
        y, wy = gauss_legendre(0.0, 1.0, n_y)
        prof = self.basis.quad_values.dot(self.modes.T)
        if self.indices == (0,):
            vals = prof
            wy = np.ones(1)
        else:
            vals = prof.dot(sine_modes(self.indices, y))
        return float(np.sqrt(np.einsum('i,j,ij->', grid.quad_weights, wy,
                                       vals * vals)))

    def evaluate(self, x, y):
        """Values on the tensor grid x by y (x nonzero)

        :return: array of shape (len(x), len(y))
        """
        prof = self.basis.evaluate(self.modes.T, np.asarray(x, dtype=float))
        if self.indices == (0,):
            return np.repeat(prof, len(np.atleast_1d(y)), axis=1)
        return prof.dot(sine_modes(self.indices, np.atleast_1d(y)))

    def right_mass(self):
        "L² norm of the restriction to x > 0"
        return float(np.sqrt(np.sum(self.mode_norms(
            self.basis.mass_on(0.0, 1.0)) ** 2)))

    def write_csv(self, path, x, y):
        "Write the columns x, y, value on a tensor grid"
        vals = self.evaluate(x, y)
        write_csv(path, ['x', 'y', 'value'],
                  ((xi, yj, vals[i, j]) for i, xi in enumerate(x)
                   for j, yj in enumerate(y)))


def spectral_tail(op, eig, f0):
    """Fraction of the mass of f0 outside the span of the eigenvectors

    :param op: Operator1D
    :param eig: EigenSystem
    :param f0: coefficient vector
    """
    total = float(f0.dot(op.mass).dot(f0))
    if total == 0.0:
        return 0.0
    proj = eig.eigenvectors.T.dot(op.mass.dot(f0))
    return max(total - float(proj.dot(proj)), 0.0) / total


def evolve1d(op, eig, f0, t):
    """Apply e^{-A_n t} by eigen-expansion

    :param op: Operator1D
    :param eig: EigenSystem of op
    :param f0: coefficient vector
    :param t: time >= 0
    :return: coefficient vector
    """
    if t < 0:
        raise ValueError("Negative time: %g" % t)
    f0 = np.asarray(f0, dtype=float)
    if len(eig) < op.dim:
        tail = spectral_tail(op, eig, f0)
        if tail > TAIL_TOL:
            raise SpectralResolutionError(
                "Spectral tail carries %.3g of the initial mass" % tail)
    if t == 0:
        return f0.copy()
    a = eig.eigenvectors.T.dot(op.mass.dot(f0))
    return eig.eigenvectors.dot(np.exp(-eig.eigenvalues * t) * a)


def crank_nicolson(op, f0, t, dt):
    """Integrate ``M f' = -K f`` by the trapezoidal rule

    :param op: Operator1D
    :param f0: coefficient vector
    :param t: final time
    :param dt: step; the last step is shortened to land on t
    :return: coefficient vector
    """
    if dt <= 0:
        raise ValueError("Time step must be positive: %g" % dt)
    nsteps = int(np.ceil(t / dt - 1e-9))
    f = np.asarray(f0, dtype=float).copy()
    if nsteps == 0 or not np.any(f):
        return f
    factors = {}

    def step(f, h):
        if h not in factors:
            try:
                factors[h] = linalg.cho_factor(op.mass + 0.5 * h *
                                               op.stiffness)
            except linalg.LinAlgError as exc:
                raise RuntimeError("Crank-Nicolson factorization failed: "
                                   "%s" % exc)
        rhs = op.mass.dot(f) - 0.5 * h * op.stiffness.dot(f)
        return linalg.cho_solve(factors[h], rhs)

    for _ in range(nsteps - 1):
        f = step(f, dt)
    return step(f, t - (nsteps - 1) * dt)


def fourier_project(func, basis, n_modes, n_y=None, nu=None, gamma=1.0):
    """Fourier-Galerkin projection of a function of (x, y)

    The y-integrals use Gauss-Legendre with ``n_y`` points; fewer than
    4 points per wavelength of the highest mode trigger an aliasing
    warning.

    :param func: vectorized callable f(x, y)
    :param basis: ConstrainedBasis
    :param n_modes: number of modes
    :param n_y: y quadrature points
    :return: Field2D
    """
    if n_modes < 1:
        raise ValueError("Number of modes must be positive: %d" % n_modes)
    n_y = n_y or max(64, 4 * n_modes)
    if n_y < 2 * n_modes:
        msg = "%d y points under-resolve %d modes" % (n_y, n_modes)
        logger.warning(msg)
        warnings.warn(msg, RuntimeWarning)
    y, wy = gauss_legendre(0.0, 1.0, n_y)
    x = basis.grid.quad_nodes
    vals = func(x[:, None], y[None, :])
    vals = np.broadcast_to(vals, (len(x), len(y)))
    indices = np.arange(1, n_modes + 1)
    prof = (vals * wy).dot(sine_modes(indices, y).T)
    rhs = basis.quad_values.T.dot(basis.grid.quad_weights[:, None] * prof)
    modes = linalg.cho_solve(basis.mass_factor, rhs).T
    return Field2D(modes, basis, nu, gamma)


class SpectralPropagator(object):
    """Eigendecompositions of the operators of all modes of a field

    :param ops: list of Operator1D sharing one basis
    :param eigs: optional matching list of EigenSystem
    :param threads: worker threads for the eigensolves and for
        propagating the modes in :meth:`apply`
    """

    def __init__(self, ops, eigs=None, threads=1):
        if not ops:
            raise ModeMismatchError("No operators given")
        basis = ops[0].basis
        for op in ops:
            if op.basis is not basis or op.gamma != ops[0].gamma:
                raise ModeMismatchError("Operators do not share basis and "
                                        "parameters")
        self.ops = list(ops)
        self.basis = basis
        self.indices = tuple(op.n for op in ops)
        self.threads = threads
        if eigs is None:
            if threads > 1:
                with ThreadPoolExecutor(max_workers=threads) as executor:
                    eigs = list(executor.map(eigensolve, self.ops))
            else:
                eigs = [eigensolve(op) for op in self.ops]
        self.eigs = list(eigs)
        self.eigenvalues = np.array([eig.eigenvalues for eig in self.eigs])
        self.vectors = [eig.eigenvectors for eig in self.eigs]
        logger.debug("propagator for modes %s, smallest eigenvalue %.6g",
                     self.indices, self.eigenvalues.min())

    def check(self, field):
        if field.indices != self.indices or field.basis is not self.basis:
            raise ModeMismatchError("Field modes %s do not match operators "
                                    "%s" % (field.indices, self.indices))

    def to_eigen(self, modes):
        "Eigen-coordinates (n_modes, dim) of physical mode coefficients"
        mass = self.basis.mass
        return np.array([v.T.dot(mass.dot(c))
                         for v, c in zip(self.vectors, modes)])

    def from_eigen(self, coords):
        return np.array([v.dot(a) for v, a in zip(self.vectors, coords)])

    def decay(self, t):
        return np.exp(-self.eigenvalues * t)

    def _propagate_mode(self, j, coeffs, t):
        v = self.vectors[j]
        decay = np.exp(-self.eigenvalues[j] * t)
        return v.dot(decay * v.T.dot(self.basis.mass.dot(coeffs)))

    def apply(self, field, t):
        "S(t) applied to a Field2D"
        self.check(field)
        if t < 0:
            raise ValueError("Negative time: %g" % t)
        jobs = range(len(self.indices))
        if self.threads > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as executor:
                modes = list(executor.map(
                    lambda j: self._propagate_mode(j, field.modes[j], t),
                    jobs))
        else:
            modes = [self._propagate_mode(j, field.modes[j], t)
                     for j in jobs]
        return field.like(np.array(modes))


@dataclass
class EvolutionResult(object):
    "Sampled trajectory of a semigroup or mild solution"
    times: np.ndarray
    states: list
    norms: np.ndarray
    method: str = 'eigen-expansion'

    def contracting(self, rtol=1e-12):
        "True if the norms never increase beyond rounding"
        return bool(np.all(np.diff(self.norms) <= rtol *
                           max(self.norms[0], 1e-300)))

    def write_csv(self, path):
        "Write the columns t, norm"
        write_csv(path, ['t', 'norm'], zip(self.times, self.norms))


def _propagator(ops, threads=1):
    if isinstance(ops, SpectralPropagator):
        return ops
    return SpectralPropagator(ops, threads=threads)


def evolve2d(field0, ops, t, threads=1):
    """Apply S(t) mode by mode

    :param field0: Field2D
    :param ops: list of Operator1D, one per mode, or a SpectralPropagator
    :param t: time >= 0
    :return: Field2D
    """
    prop = _propagator(ops, threads)
    if len(prop.ops) != field0.n_modes:
        raise ModeMismatchError("%d operators for %d modes" % (
            len(prop.ops), field0.n_modes))
    return prop.apply(field0, t)


def trajectory(field0, ops, times):
    """Sample S(t) field0 at the given increasing times

    :return: EvolutionResult
    """
    prop = _propagator(ops)
    prop.check(field0)
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0):
        raise ValueError("Sample times must be increasing")
    coords = prop.to_eigen(field0.modes)
    states = [field0.like(prop.from_eigen(prop.decay(t) * coords))
              for t in times]
    return EvolutionResult(times, states,
                           np.array([s.norm() for s in states]))


def mild_solution(field0, source, T, dt, ops):
    """Duhamel solution ``S(t) f0 + int_0^t S(t - s) v(s) ds``

    The integral is approximated by the midpoint rule on steps of
    length dt: ``f_{k+1} = S(dt) f_k + dt S(dt/2) v_k``, with ``v_k`` the
    source at the midpoint of step k.

    :param field0: Field2D
    :param source: None, a list of Field2D (one per step) or a callable
        returning the Field2D at a given time
    :param T: horizon > 0
    :param dt: step; T must be a multiple of it
    :param ops: list of Operator1D or a SpectralPropagator
    :return: EvolutionResult
    """
    if T <= 0 or dt <= 0:
        raise ValueError("Horizon and step must be positive: %g, %g" % (
            T, dt))
    nsteps = int(round(T / dt))
    if abs(nsteps * dt - T) > 1e-9 * T:
        raise ValueError("Horizon %g is not a multiple of the step %g" % (
            T, dt))
    prop = _propagator(ops)
    prop.check(field0)
    if source is not None and not callable(source) and \
            len(source) != nsteps:
        raise ValueError("Source has %d samples for %d steps" % (
            len(source), nsteps))
    full, half = prop.decay(dt), prop.decay(0.5 * dt)
    coords = prop.to_eigen(field0.modes)
    states = [field0]
    for k in range(nsteps):
        coords = full * coords
        if source is not None:
            vk = source((k + 0.5) * dt) if callable(source) else source[k]
            coords = coords + dt * half * prop.to_eigen(vk.modes)
        states.append(field0.like(prop.from_eigen(coords)))
    return EvolutionResult(dt * np.arange(nsteps + 1), states,
                           np.array([s.norm() for s in states]))


def generator_apply(field, ops):
    """The generator ``(A f)_n = -A_n f_n`` as a Field2D of L² coefficients

    :return: tuple (Field2D, sum of ||A_n f_n||²)
    """
    prop = _propagator(ops)
    prop.check(field)
    basis = field.basis
    out = np.array([-linalg.cho_solve(basis.mass_factor, op.stiffness.dot(c))
                    for op, c in zip(prop.ops, field.modes)])
    result = field.like(out)
    return result, result.norm() ** 2


def strong_continuity(field, ops, times):
    "Return ``||S(t) f - f||`` for each t"
    prop = _propagator(ops)
    return np.array([(prop.apply(field, t) - field).norm() for t in times])
