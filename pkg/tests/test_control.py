# -*- coding: utf-8 -*-
"""Test the Gramian, the penalized control solves and the certificates"""

from dataclasses import replace
from functools import lru_cache

import numpy as np
import pytest

from pygrushin.control import ControlProblem, ControlSystem, Rectangle
from pygrushin.control import beta_sweep, bump, control_1d, cross_side_mass
from pygrushin.control import conjugate_gradient, gramian_apply
from pygrushin.control import make_problem, make_problem_1d, mode_overlap
from pygrushin.control import restrict_omega, solve_control, uc_certificate
from pygrushin.lib.quadrature import gauss_legendre
from pygrushin.semigroup import Field2D, ModeMismatchError, fourier_project
from pygrushin.testutils import extension, standard_grid

NU = 0.5
CELLS = 32
N_MODES = 4
OMEGA = Rectangle(-0.8, -0.2, 0.2, 0.8)
BETAS = [1e-2, 1e-3, 1e-4]


@lru_cache(maxsize=None)
def control_system(label, T=1.0, n_modes=N_MODES):
    "Problem steering 0 to a bump on the right, and its system"
    problem = make_problem(NU, 1.0, standard_grid(NU, CELLS),
                           extension(NU, label), OMEGA, T, None,
                           bump(0.5, 0.5, 0.3), 1e-2, n_modes, n_steps=32)
    return problem, ControlSystem(problem)


@lru_cache(maxsize=None)
def control_system_1d(label):
    problem = make_problem_1d(NU, 1.0, standard_grid(NU, CELLS),
                              extension(NU, label), (-0.8, -0.2), 1.0, None,
                              bump(0.5, radius=0.3), 1e-2, n_steps=32)
    return problem, ControlSystem(problem)


def random_field(problem, seed):
    rng = np.random.default_rng(seed)
    return problem.f0.like(rng.standard_normal(problem.f0.modes.shape))


def test_rectangle_invalid():
    "Reject rectangles outside the domain or empty"
    with pytest.raises(ValueError):
        Rectangle(-0.2, -0.8)
    with pytest.raises(ValueError):
        Rectangle(-0.5, 0.5, 0.5, 1.5)


def test_rectangle_area():
    "Area and full-height flag of a rectangle"
    assert OMEGA.area == pytest.approx(0.36)
    assert not OMEGA.full_y
    assert Rectangle(-1.0, 1.0).full_y


def test_overlapping_rectangles():
    "Reject a control region made of overlapping rectangles"
    problem, _ = control_system('designed')
    with pytest.raises(ValueError):
        replace(problem, omega=(OMEGA, Rectangle(-0.5, 0.0)))


def test_bump_support():
    "Bump is one at its center and vanishes outside its radius"
    f = bump(0.5, 0.5, 0.3)
    assert f(0.5, 0.5) == 1.0
    assert f(0.0, 0.5) == 0.0
    assert bump(0.5, radius=0.3)(np.array([0.5, 0.9])).tolist() == [1.0, 0.0]


def test_mode_overlap_full():
    "Overlap over the full y-range is the identity"
    assert np.array_equal(mode_overlap((1, 2, 3), 0.0, 1.0), np.eye(3))


def test_mode_overlap_partial():
    "Overlap agrees with quadrature and is symmetric"
    indices = (1, 2, 3, 5)
    y, w = gauss_legendre(0.2, 0.7, 40)
    sines = np.sqrt(2.0) * np.sin(np.pi * np.outer(indices, y))
    expected = (sines * w).dot(sines.T)
    overlap = mode_overlap(indices, 0.2, 0.7)
    assert np.allclose(overlap, expected, rtol=0, atol=1e-13)
    assert np.allclose(overlap, overlap.T, rtol=0, atol=1e-15)


def test_mode_overlap_one_dimensional():
    "A one-dimensional state cannot be restricted in y"
    with pytest.raises(ValueError):
        mode_overlap((0, ), 0.2, 0.8)


def test_problem_validation():
    "Reject a nonpositive penalty or horizon"
    problem, _ = control_system('designed')
    with pytest.raises(ValueError):
        replace(problem, beta=0.0)
    with pytest.raises(ValueError):
        replace(problem, T=-1.0)


def test_problem_basis_mismatch():
    "Initial and target states must share their basis"
    problem, _ = control_system('designed')
    other, _ = control_system('decoupled')
    with pytest.raises(ModeMismatchError):
        replace(problem, fT=other.fT)


def test_restrict_full():
    "Restriction to the whole rectangle is the identity"
    problem, _ = control_system('designed')
    f = problem.fT
    g = restrict_omega(f, Rectangle(-1.0, 1.0))
    assert (g - f).norm() <= 1e-10 * f.norm()


def test_restrict_contracts():
    "Restriction does not increase the norm"
    problem, _ = control_system('designed')
    for seed in range(5):
        f = random_field(problem, seed)
        assert restrict_omega(f, OMEGA).norm() <= f.norm() * (1 + 1e-12)


def test_restrict_other_side():
    "A decoupled state on the right vanishes on a left region"
    problem, _ = control_system('decoupled')
    assert problem.fT.norm() > 0
    assert restrict_omega(problem.fT, OMEGA).norm() <= \
        1e-14 * problem.fT.norm()


def test_gramian_zero():
    "Gramian maps zero to zero"
    problem, system = control_system('designed')
    assert gramian_apply(problem.f0, system).norm() == 0.0


def test_gramian_symmetric():
    "Gramian is symmetric in the L² pairing"
    problem, system = control_system('designed')
    for seed in range(4):
        a = random_field(problem, 2 * seed)
        b = random_field(problem, 2 * seed + 1)
        lhs = gramian_apply(a, system).inner(b)
        rhs = a.inner(gramian_apply(b, system))
        assert abs(lhs - rhs) <= 1e-10 * a.norm() * b.norm()


def test_gramian_nonnegative():
    "Gramian is positive semidefinite"
    problem, system = control_system('designed')
    for seed in range(10):
        g = random_field(problem, seed)
        assert gramian_apply(g, system).inner(g) >= -1e-12 * g.norm() ** 2


def test_gramian_without_system():
    "Gramian of a problem builds its own system"
    problem, system = control_system('designed')
    g = random_field(problem, 0)
    direct = gramian_apply(g, problem)
    assert (direct - gramian_apply(g, system)).norm() <= 1e-12 * direct.norm()


def test_conjugate_gradient():
    "Conjugate gradient solves a small positive definite system"
    rng = np.random.default_rng(0)
    a = rng.standard_normal((6, 6))
    mat = a.dot(a.T) + 6.0 * np.eye(6)
    b = rng.standard_normal(6)
    x, iters, converged, resid = conjugate_gradient(mat.dot, b, 1e-12, 100)
    assert converged
    assert iters <= 12
    assert np.allclose(mat.dot(x), b, rtol=0, atol=1e-10)


def test_conjugate_gradient_zero():
    "Zero right-hand side needs no iteration"
    x, iters, converged, resid = conjugate_gradient(lambda v: v,
                                                    np.zeros(3))
    assert iters == 0 and converged and not np.any(x)


def test_free_trajectory():
    "Reaching the free evolution needs no control"
    problem, system = control_system('designed', T=0.1)
    f0 = fourier_project(bump(-0.5, 0.5, 0.3), problem.basis, N_MODES)
    fT = system.propagator.apply(f0, problem.T)
    problem = replace(problem, f0=f0, fT=fT, beta=0.1)
    result = solve_control(problem, system)
    assert result.converged
    assert result.terminal_error <= 1e-6
    assert result.dual_state_norm <= 1e-6 * f0.norm() / problem.beta


def test_designed_control():
    "Designed extension: the terminal error decreases with beta"
    problem, system = control_system('designed')
    results = beta_sweep(problem, BETAS, system)
    errors = [r.terminal_error for r in results]
    assert all(b < a for a, b in zip(errors, errors[1:]))
    assert errors[-1] < 1.0
    for res in results:
        if res.converged:
            assert res.identity_defect <= 1e-8
    assert cross_side_mass(results[0])['ratio'] > 1e-6
    assert results[0].to_map()['spec'] == 'designed'


def test_decoupled_control():
    "Decoupled extension: no control on the left reaches the right"
    problem, system = control_system('decoupled')
    for res in beta_sweep(problem, BETAS, system):
        assert res.terminal_error >= 0.9
        assert res.right_mass <= 1e-12 * res.control_norm


def test_control_midpoints():
    "Controls are sampled at the step midpoints"
    problem, system = control_system('designed')
    res = solve_control(problem, system)
    assert len(res.controls) == problem.n_steps
    assert np.allclose(res.times, problem.dt * (np.arange(32) + 0.5))


def test_control_csv(tmpdir):
    "Write the control on a tensor grid"
    problem, system = control_system('designed')
    res = solve_control(problem, system)
    path = tmpdir.join('u.csv').strpath
    res.write_csv(path, [-0.5, 0.5], [0.5])
    with open(path) as fd:
        lines = fd.read().splitlines()
    assert lines[0] == 't,x,y,u'
    assert len(lines) == 1 + 2 * problem.n_steps


def test_control_1d():
    "One-dimensional control with the designed extension"
    problem, system = control_system_1d('designed')
    results = [control_1d(replace(problem, beta=b), system) for b in BETAS]
    errors = [r.terminal_error for r in results]
    assert all(b < a for a, b in zip(errors, errors[1:]))


def test_control_1d_decoupled():
    "One-dimensional control with the decoupled extension"
    problem, system = control_system_1d('decoupled')
    assert control_1d(problem, system).terminal_error >= 0.9


def test_control_1d_modes():
    "One-dimensional control needs a single mode"
    problem, system = control_system('designed')
    with pytest.raises(ModeMismatchError):
        control_1d(problem, system)


def test_uc_designed():
    "Coarse Gramian of the designed extension is positive definite"
    problem, system = control_system('designed')
    rep = uc_certificate(problem, coarse_dim=9, y_modes=3, system=system)
    assert rep.shape == (3, 3)
    assert rep.positive
    assert rep.null_count == 0


def test_uc_decoupled():
    "Coarse Gramian of the decoupled extension has null directions"
    problem, system = control_system('decoupled')
    rep = uc_certificate(problem, coarse_dim=16, y_modes=4, system=system)
    assert rep.right_supported >= 1
    assert rep.null_count >= 1
    assert not rep.positive
    assert rep.to_map()['null_count'] == rep.null_count


def test_uc_directions():
    "Certificate on explicit directions"
    problem, system = control_system('designed')
    left = fourier_project(bump(-0.5, 0.5, 0.3), problem.basis, N_MODES)
    rep = uc_certificate(problem, directions=[left], system=system)
    assert rep.min_eigenvalue > 0.0
    assert rep.right_fractions[0] < 0.5


def test_uc_too_large():
    "Reject a coarse dimension beyond the discretization"
    problem, system = control_system('designed')
    with pytest.raises(ValueError):
        uc_certificate(problem, coarse_dim=10 ** 6, system=system)


def test_zero_field_problem():
    "States default to zero fields"
    problem, _ = control_system('designed')
    assert isinstance(problem.f0, Field2D)
    assert problem.f0.norm() == 0.0
    assert problem.to_map()['n_modes'] == N_MODES
    assert isinstance(problem, ControlProblem)


def test_uc_designed_full():
    "Designed extension: the 8 by 8 coarse Gramian is positive definite"
    problem, system = control_system('designed', n_modes=8)
    rep = uc_certificate(problem, coarse_dim=64, y_modes=8, system=system)
    assert rep.shape == (8, 8)
    assert len(rep.eigenvalues) == 64
    assert rep.positive
    assert rep.null_count == 0


def test_designed_control_reference():
    "Reference run at nu = 0.3 on 128 cells and 16 modes"
    grid = standard_grid(0.3, 128)
    problem = make_problem(0.3, 1.0, grid, extension(0.3), OMEGA, 1.0, None,
                           bump(0.5, 0.5, 0.3), 1e-2, 16)
    results = beta_sweep(problem, [1e-2, 1e-3, 1e-4, 1e-6])
    errors = [r.terminal_error for r in results]
    assert all(b < a for a, b in zip(errors, errors[1:]))
    assert 0.5 * 0.5357 <= errors[-1] <= 1.5 * 0.5357
    assert all(r.converged for r in results)
