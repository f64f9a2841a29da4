# -*- coding: utf-8 -*-
"""
    pygrushin.control
    ~~~~~~~~~~~~~~~~~

    This module synthesizes approximate controls from a set of
    rectangles by the penalized duality method: the dual terminal
    state g solves ``(Lambda + beta I) g = fT - S(T) f0`` with the
    Gramian ``Lambda = int_0^T S(T - s) chi S(T - s) ds``, and the
    control is ``chi S(T - s) g``.  All Gramian work happens in the
    eigen-coordinates of the mode operators, where the L² inner
    product is Euclidean.
"""
import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import linalg

from pygrushin.lib.export import write_csv
from pygrushin.operator1d import ConstrainedBasis, assemble_family
from pygrushin.semigroup import Field2D, ModeMismatchError
from pygrushin.semigroup import SpectralPropagator, fourier_project
from pygrushin.semigroup import mild_solution

logger = logging.getLogger(__name__)

UC_POSITIVE = 1e-12
UC_NULL = 1e-14
RIGHT_SUPPORT = 1.0 - 1e-8


@dataclass(frozen=True)
class Rectangle(object):
    "Axis-aligned rectangle (x0, x1) x (y0, y1) inside (-1, 1) x (0, 1)"
    x0: float
    x1: float
    y0: float = 0.0
    y1: float = 1.0

    def __post_init__(self):
        if not -1.0 <= self.x0 < self.x1 <= 1.0:
            raise ValueError("Invalid x-range (%g, %g) for a control "
                             "region" % (self.x0, self.x1))
        if not 0.0 <= self.y0 < self.y1 <= 1.0:
            raise ValueError("Invalid y-range (%g, %g) for a control "
                             "region" % (self.y0, self.y1))

    @property
    def area(self):
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    @property
    def full_y(self):
        return self.y0 <= 0.0 and self.y1 >= 1.0

    def overlaps(self, other):
        return (self.x0 < other.x1 and other.x0 < self.x1 and
                self.y0 < other.y1 and other.y0 < self.y1)

    def to_map(self):
        return {'x': [self.x0, self.x1], 'y': [self.y0, self.y1]}


def bump(x0, y0=None, radius=0.3):
    """Smooth bump ``exp(1 - 1/(1 - r²))`` of the given radius

    :param y0: center in y, or None for a function of x alone
    :return: vectorized callable f(x, y), or f(x) when y0 is None
    """
    def profile(r2):
        r2 = np.asarray(r2, dtype=float)
        inside = r2 < 1.0
        out = np.zeros(np.shape(r2))
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
        return out

    if y0 is None:
        return lambda x: profile(((np.asarray(x) - x0) / radius) ** 2)
    return lambda x, y: profile(((np.asarray(x) - x0) / radius) ** 2 +
                                ((np.asarray(y) - y0) / radius) ** 2)


def _rectangles(omega):
    if isinstance(omega, Rectangle):
        omega = (omega, )
    omega = tuple(omega)
    if not omega:
        raise ValueError("Empty control region")
    for i, rect in enumerate(omega):
        for other in omega[i + 1:]:
            if rect.overlaps(other):
                raise ValueError("Control rectangles %s and %s overlap" % (
                    rect, other))
    return omega


def mode_overlap(indices, y0, y1):
    """Matrix of ``int_y0^y1 2 sin(n pi y) sin(m pi y) dy``

    :param indices: mode indices; (0,) stands for a one-dimensional state
    :return: square array
    """
    if y0 <= 0.0 and y1 >= 1.0:
        return np.eye(len(indices))
    if 0 in indices:
        raise ValueError("A one-dimensional state has no y-range to "
                         "restrict to")
    n = np.asarray(indices, dtype=float)
    diff = n[:, None] - n[None, :]
    tot = n[:, None] + n[None, :]

    def antideriv(y):
        with np.errstate(divide='ignore', invalid='ignore'):
            lower = np.where(diff == 0, y,
                             np.sin(diff * np.pi * y) / (diff * np.pi))
        return lower - np.sin(tot * np.pi * y) / (tot * np.pi)

    return antideriv(y1) - antideriv(y0)


@dataclass(frozen=True, eq=False)
class ControlProblem(object):
    """Data of an approximate-control problem

    ``f0`` and ``fT`` share one basis and one set of modes; the
    extension, grid and parameters are those of the basis.
    """
    omega: tuple
    T: float
    f0: Field2D = field(repr=False)
    fT: Field2D = field(repr=False)
    beta: float
    n_steps: int = 64
    cg_tol: float = 1e-10
    cg_maxiter: int = 2000
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, 'omega', _rectangles(self.omega))
        if self.T <= 0:
            raise ValueError("Horizon must be positive: %g" % self.T)
        if self.beta <= 0:
            raise ValueError("Penalty beta must be positive: %g" %
                             self.beta)
        if self.n_steps < 1:
            raise ValueError("Number of control steps must be positive: %d"
                             % self.n_steps)
        if self.f0.basis is not self.fT.basis or \
                self.f0.indices != self.fT.indices:
            raise ModeMismatchError("Initial and target states do not "
                                    "share basis and modes")

    @property
    def basis(self):
        return self.f0.basis

    @property
    def spec(self):
        return self.basis.spec

    @property
    def nu(self):
        return self.f0.nu

    @property
    def gamma(self):
        return self.f0.gamma

    @property
    def indices(self):
        return self.f0.indices

    @property
    def dt(self):
        return self.T / self.n_steps

    def to_map(self):
        return {'omega': [r.to_map() for r in self.omega], 'T': self.T,
                'beta': self.beta, 'n_steps': self.n_steps,
                'cg_tol': self.cg_tol, 'cg_maxiter': self.cg_maxiter,
                'nu': self.nu, 'gamma': self.gamma,
                'n_modes': len(self.indices), 'spec': self.spec.label,
                'grid_cells': self.basis.grid.n_cells}


def _field(data, basis, n_modes, nu, gamma, indices=None):
    if isinstance(data, Field2D):
        return data
    if data is None:
        return Field2D.zeros(basis, n_modes, nu, gamma, indices)
    if callable(data):
        return fourier_project(data, basis, n_modes, nu=nu, gamma=gamma)
    return Field2D(np.asarray(data, dtype=float), basis, nu, gamma, indices)


def make_problem(nu, gamma, grid, spec, omega, T, f0, fT, beta, n_modes,
                 **kwargs):
    """Build a ControlProblem on a new constrained basis

    :param f0: Field2D, callable f(x, y), coefficient array or None (zero)
    :param fT: as f0
    :param n_modes: number of y-modes
    :return: ControlProblem
    """
    basis = ConstrainedBasis(grid, spec)
    return ControlProblem(omega, T, _field(f0, basis, n_modes, nu, gamma),
                          _field(fT, basis, n_modes, nu, gamma), beta,
                          **kwargs)


def make_problem_1d(nu, gamma, grid, spec, xrange, T, f0, fT, beta, n=0,
                    **kwargs):
    """Build a single-mode ControlProblem

    With ``n = 0`` the states are functions of x alone and the problem
    is the one-dimensional singular heat equation.

    :param xrange: control interval (x0, x1)
    :param f0: callable of x, coefficient vector or None (zero)
    :param fT: as f0
    """
    basis = ConstrainedBasis(grid, spec)
    indices = (int(n), )

    def state(data):
        if data is None:
            return Field2D.zeros(basis, 1, nu, gamma, indices)
        if callable(data):
            data = basis.project(data)
        return Field2D(np.asarray(data, dtype=float)[None, :], basis, nu,
                       gamma, indices)

    return ControlProblem(Rectangle(xrange[0], xrange[1]), T, state(f0),
                          state(fT), beta, **kwargs)


class ControlSystem(object):
    """Operators, eigendecompositions and restriction blocks of a problem

    The system does not depend on beta and can be shared by solves
    with different penalties.

    :param problem: ControlProblem
    :param propagator: optional SpectralPropagator for the problem's modes
    """

    def __init__(self, problem, propagator=None):
        self.problem = problem
        basis = problem.basis
        if propagator is None:
            ops = assemble_family(problem.indices, problem.nu, problem.gamma,
                                  basis.grid, basis.spec, basis=basis)
            propagator = SpectralPropagator(ops, threads=problem.threads)
        if propagator.indices != problem.indices or \
                propagator.basis is not basis:
            raise ModeMismatchError("Propagator modes %s do not match the "
                                    "problem" % (propagator.indices, ))
        self.propagator = propagator
        self.dt = problem.dt
        self.times = self.dt * (np.arange(problem.n_steps) + 0.5)
        lags = problem.T - self.times
        self.vectors = np.array(propagator.vectors)
        self.eigenvalues = propagator.eigenvalues
        self.decays = np.exp(-self.eigenvalues[:, :, None] *
                             lags[None, None, :])
        self.blocks = [(mode_overlap(problem.indices, r.y0, r.y1),
                        basis.mass_on(r.x0, r.x1)) for r in problem.omega]
        logger.debug("control system: %d modes of dimension %d, %d steps, "
                     "%d rectangles", len(problem.indices), basis.dim,
                     problem.n_steps, len(self.blocks))

    def restrict_eigen(self, coords):
        """Restriction to the control region in eigen-coordinates

        :param coords: array (n_modes, dim) or (n_modes, dim, k)
        """
        flat = coords.ndim == 2
        if flat:
            coords = coords[:, :, None]
        phys = np.matmul(self.vectors, coords)
        out = np.zeros_like(phys)
        for overlap, block in self.blocks:
            out += np.einsum('nm,mdk->ndk', overlap, np.matmul(block, phys))
        out = np.matmul(self.vectors.transpose(0, 2, 1), out)
        return out[:, :, 0] if flat else out

    def controls_eigen(self, g):
        "Controls ``chi S(T - s_k) g`` at the step midpoints"
        return self.restrict_eigen(self.decays * g[:, :, None])

    def gramian_apply_eigen(self, g):
        "Gramian by the midpoint rule with the control step"
        return self.dt * np.sum(self.decays * self.controls_eigen(g),
                                axis=2)

    def free_flow_eigen(self, coords):
        return np.exp(-self.eigenvalues * self.problem.T) * coords


def conjugate_gradient(apply, b, tol=1e-10, maxiter=2000):
    """Solve ``apply(x) = b`` for a symmetric positive definite operator

    :param apply: callable on arrays of the shape of b
    :param b: right-hand side
    :param tol: relative residual target
    :param maxiter: iteration limit
    :return: tuple (x, iterations, converged, relative residual)
    """
    x = np.zeros_like(b)
    bnorm = np.sqrt(np.vdot(b, b))
    if bnorm == 0.0:
        return x, 0, True, 0.0
    r = b.copy()
    p = r.copy()
    rr = np.vdot(r, r)
    for it in range(1, maxiter + 1):
        ap = apply(p)
        pap = np.vdot(p, ap)
        if pap <= 0.0:
            logger.warning("conjugate gradient breakdown at iteration %d",
                           it)
            return x, it, False, float(np.sqrt(rr) / bnorm)
        alpha = rr / pap
        x = x + alpha * p
        r = r - alpha * ap
        rr_new = np.vdot(r, r)
        if np.sqrt(rr_new) <= tol * bnorm:
            return x, it, True, float(np.sqrt(rr_new) / bnorm)
        p = r + (rr_new / rr) * p
        rr = rr_new
    return x, maxiter, False, float(np.sqrt(rr) / bnorm)


@dataclass(eq=False)
class ControlResult(object):
    """Outcome of a penalized control solve

    ``controls[k]`` is the control at ``times[k]``, the midpoint of
    step k.
    """
    controls: list = field(repr=False)
    times: np.ndarray = field(repr=False)
    terminal_state: Field2D = field(repr=False)
    gT: Field2D = field(repr=False)
    beta: float
    terminal_error: float
    dual_state_norm: float
    control_norm: float
    cg_iters: int
    converged: bool
    cg_residual: float
    identity_defect: float
    right_mass: float
    spec_label: str = ''
    gramian_min_eig: float = None

    def to_map(self):
        outmap = {'beta': self.beta, 'terminal_error': self.terminal_error,
                  'dual_state_norm': self.dual_state_norm,
                  'control_norm': self.control_norm,
                  'cg_iters': self.cg_iters, 'converged': self.converged,
                  'cg_residual': self.cg_residual,
                  'identity_defect': self.identity_defect,
                  'right_mass': self.right_mass, 'spec': self.spec_label}
        if self.gramian_min_eig is not None:
            outmap['gramian_min_eig'] = self.gramian_min_eig
        return outmap

    def write_csv(self, path, x, y):
        "Write the columns t, x, y, u on a tensor grid"
        def rows():
            for t, u in zip(self.times, self.controls):
                vals = u.evaluate(x, y)
                for i, xi in enumerate(x):
                    for j, yj in enumerate(y):
                        yield (t, xi, yj, vals[i, j])
        write_csv(path, ['t', 'x', 'y', 'u'], rows())


def _system(problem_or_system):
    if isinstance(problem_or_system, ControlSystem):
        return problem_or_system
    return ControlSystem(problem_or_system)


def restrict_omega(field2d, omega):
    """L² projection of ``chi_omega f`` onto the modes of f

    :param field2d: Field2D
    :param omega: Rectangle or sequence of disjoint rectangles
    :return: Field2D
    """
    basis = field2d.basis
    mixed = np.zeros_like(field2d.modes)
    for rect in _rectangles(omega):
        overlap = mode_overlap(field2d.indices, rect.y0, rect.y1)
        mixed += overlap.dot(field2d.modes.dot(basis.mass_on(rect.x0,
                                                             rect.x1)))
    return field2d.like(linalg.cho_solve(basis.mass_factor, mixed.T).T)


def gramian_apply(gT, problem):
    """Apply the control Gramian to a terminal dual state

    :param gT: Field2D
    :param problem: ControlProblem or a prebuilt ControlSystem
    :return: Field2D
    """
    system = _system(problem)
    prop = system.propagator
    prop.check(gT)
    return gT.like(prop.from_eigen(system.gramian_apply_eigen(
        prop.to_eigen(gT.modes))))


def solve_control(problem, system=None):
    """Penalized duality solve for an approximate control

    A stagnating conjugate gradient is logged and its partial result
    returned with ``converged`` false.

    :param problem: ControlProblem
    :param system: optional ControlSystem of the problem
    :return: ControlResult
    """
    system = system or ControlSystem(problem)
    prop = system.propagator
    beta = problem.beta
    f0, fT = problem.f0, problem.fT
    rhs = prop.to_eigen(fT.modes) - system.free_flow_eigen(
        prop.to_eigen(f0.modes))
    g, iters, converged, resid = conjugate_gradient(
        lambda v: system.gramian_apply_eigen(v) + beta * v, rhs,
        problem.cg_tol, problem.cg_maxiter)
    if not converged:
        logger.warning("conjugate gradient stopped after %d iterations at "
                       "relative residual %.3g (beta = %g)", iters, resid,
                       beta)
    ueig = system.controls_eigen(g)
    controls = [f0.like(prop.from_eigen(ueig[:, :, k]))
                for k in range(problem.n_steps)]
    evo = mild_solution(f0, controls, problem.T, system.dt, prop)
    final = evo.states[-1]
    gT = f0.like(prop.from_eigen(g))
    miss = fT - final
    target = fT.norm()
    missnorm = miss.norm()
    terminal_error = missnorm / target if target > 0 else missnorm
    dual = gT.norm()
    defect = (miss - beta * gT).norm() / (beta * dual) if dual > 0 else 0.0
    control_norm = float(np.sqrt(system.dt * np.sum(ueig * ueig)))
    logger.debug("beta = %g: %d iterations, terminal error %.6g, "
                 "identity defect %.3g", beta, iters, terminal_error, defect)
    return ControlResult(controls, system.times.copy(), final, gT, beta,
                         terminal_error, dual, control_norm, iters,
                         converged, resid, defect, final.right_mass(),
                         problem.spec.label)


def beta_sweep(problem, betas, system=None):
    """Solve the problem for several penalties on one ControlSystem

    :return: list of ControlResult in the order of betas
    """
    system = system or ControlSystem(problem)
    return [solve_control(replace(problem, beta=b), system) for b in betas]


def control_1d(problem, system=None):
    """Penalized control of a single-mode problem

    :param problem: ControlProblem with one mode
    :return: ControlResult
    """
    if len(problem.indices) != 1:
        raise ModeMismatchError("One-dimensional control needs a single "
                                "mode, not %d" % len(problem.indices))
    return solve_control(problem, system)


def cross_side_mass(result):
    "Mass of the controlled terminal state in x > 0 against the control"
    ratio = result.right_mass / result.control_norm \
        if result.control_norm > 0 else 0.0
    return {'right_mass': result.right_mass,
            'control_norm': result.control_norm, 'ratio': ratio}


@dataclass
class UCReport(object):
    """Spectrum of the Gramian on a coarse subspace

    ``right_fractions`` holds the x > 0 mass fraction of each subspace
    direction.
    """
    eigenvalues: np.ndarray
    right_fractions: np.ndarray
    spec_label: str
    shape: tuple = ()

    @property
    def min_eigenvalue(self):
        return float(self.eigenvalues[0])

    @property
    def positive(self):
        return self.min_eigenvalue > UC_POSITIVE

    @property
    def null_count(self):
        return int(np.sum(self.eigenvalues <= UC_NULL))

    @property
    def right_supported(self):
        return int(np.sum(self.right_fractions > RIGHT_SUPPORT))

    def to_map(self):
        return {'spec': self.spec_label, 'dim': len(self.eigenvalues),
                'shape': list(self.shape),
                'min_eigenvalue': self.min_eigenvalue,
                'max_eigenvalue': float(self.eigenvalues[-1]),
                'positive': self.positive, 'null_count': self.null_count,
                'right_supported': self.right_supported}


def uc_certificate(problem, coarse_dim=64, y_modes=8, directions=None,
                   system=None):
    """Smallest eigenvalues of the Gramian on a coarse subspace

    By default the subspace holds, for each of the lowest ``y_modes``
    modes, the lowest ``coarse_dim // y_modes`` eigenvectors of the
    mode operator.  Explicit directions (a list of Field2D) replace it.

    :return: UCReport
    """
    system = system or ControlSystem(problem)
    prop = system.propagator
    basis = problem.basis
    right = basis.mass_on(0.0, 1.0)
    if directions is not None:
        coords = [prop.to_eigen(d.modes) for d in directions]
        images = [system.gramian_apply_eigen(c) for c in coords]
        gram = np.array([[np.vdot(a, b) for b in images] for a in coords])
        fracs = np.array([np.einsum('ij,jk,ik->', d.modes, right, d.modes) /
                          max(d.norm() ** 2, 1e-300) for d in directions])
        shape = (len(directions), )
    else:
        n_modes, dim = system.eigenvalues.shape
        y_modes = min(y_modes, n_modes)
        kx = coarse_dim // y_modes
        if coarse_dim > n_modes * dim or not 1 <= kx <= dim:
            raise ValueError("Coarse dimension %d does not fit %d modes of "
                             "dimension %d" % (coarse_dim, n_modes, dim))
        vecs = system.vectors[:y_modes, :, :kx]
        decays = system.decays[:y_modes, :kx, :]
        time = system.dt * np.einsum('nik,mjk->nimj', decays, decays)
        gram = np.zeros_like(time)
        for overlap, block in system.blocks:
            cross = np.einsum('ndi,mdj->nimj', vecs, np.matmul(block, vecs))
            gram += overlap[:y_modes, None, :y_modes, None] * cross
        gram = (gram * time).reshape(y_modes * kx, y_modes * kx)
        fracs = np.einsum('ndi,de,nei->ni', vecs, right, vecs).ravel()
        shape = (y_modes, kx)
    gram = 0.5 * (gram + gram.T)
    eigs = linalg.eigvalsh(gram)
    report = UCReport(eigs, fracs, problem.spec.label, shape)
    logger.debug("coarse Gramian %s: eigenvalues in [%.3g, %.3g]", shape,
                 eigs[0], eigs[-1])
    return report
