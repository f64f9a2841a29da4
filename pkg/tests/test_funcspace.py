# -*- coding: utf-8 -*-
"""Test grids, quadrature and the regular-plus-singular functions"""

import numpy as np
import pytest

from pygrushin.funcspace import CUTOFF, Function1D, GridError, SingularCoeffs
from pygrushin.funcspace import UnboundedValueError, build_grid, domain_check
from pygrushin.funcspace import derivative, eval, fit_singular, inner_product
from pygrushin.lib.quadrature import gauss_jacobi_left, graded_left_rule
from pygrushin.operator1d import decoupled_extension, designed_extension
from pygrushin.testutils import standard_grid

CUTOFF_SQUARE = 0.5 + 0.25 * 181.0 / 462.0


def singular_function(nu, coeffs, grid=None):
    grid = grid or standard_grid(nu)
    return Function1D(nu, grid, np.zeros(2 * (grid.n_cells + 1)),
                      SingularCoeffs(*coeffs))


def test_grid_uniform():
    "Build an ungraded grid"
    grid = build_grid(4, 1)
    assert list(grid.nodes) == [-1.0, -0.5, 0.0, 0.5, 1.0]
    assert grid.zero_index == 2


def test_grid_graded():
    "Build a grid graded toward the origin"
    grid = build_grid(8, 2)
    assert grid.nodes[4] == 0.0
    assert grid.nodes[5] == 0.0625
    assert grid.nodes[-1] == 1.0
    assert np.all(np.diff(grid.nodes) > 0)


def test_grid_odd_cells():
    "Reject an odd number of cells"
    with pytest.raises(GridError):
        build_grid(7)


def test_grid_bad_grading():
    "Reject a grading exponent below one"
    with pytest.raises(GridError):
        build_grid(8, 0.5)


def test_locate_node():
    "Points on an interior node belong to the cell on their right"
    grid = build_grid(4, 1)
    assert list(grid.locate([-1.0, -0.5, 0.0, 0.25, 1.0])) == [0, 1, 2, 2, 3]


def test_quadrature_length():
    "Integrate a constant over [-1, 1]"
    grid = build_grid(16, 2)
    assert abs(grid.integrate(np.ones_like(grid.quad_nodes)) - 2.0) < 1e-13


@pytest.mark.parametrize('nu', [0.1, 0.3, 0.5, 0.75, 0.95])
def test_quadrature_jacobi_weight(nu):
    "Integrate x^(1-2nu) over (0, 1) near machine precision"
    grid = build_grid(200, 2, nu=nu)
    x, w, _ = grid.restricted_rule(0.0, 1.0)
    assert abs(np.dot(w, x ** (1.0 - 2.0 * nu)) -
               1.0 / (2.0 - 2.0 * nu)) < 1e-8


def test_gauss_jacobi_left_exact():
    "Gauss-Jacobi rule integrates x^p times a polynomial"
    x, w = gauss_jacobi_left(0.5, -0.5, 6)
    assert abs(np.dot(w, x ** -0.5 * x ** 3) - 0.5 ** 3.5 / 3.5) < 1e-14


def test_graded_rule_singular():
    "Graded rule resolves an integrable singularity without Jacobi nodes"
    x, w = graded_left_rule(1.0, 12, levels=60)
    assert abs(np.dot(w, x ** -0.5) - 2.0) < 1e-8


def test_restricted_rule_empty():
    "Reject a reversed interval"
    with pytest.raises(GridError):
        build_grid(8).restricted_rule(0.5, 0.25)


def test_cutoff_values():
    "Cutoff equals 1 near 0, 0 near the ends, and is even"
    x = np.array([-0.9, -0.4, 0.0, 0.3, 0.5, 0.75, 0.8])
    assert list(CUTOFF(x)) == [0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0]
    assert abs(CUTOFF(0.6) - CUTOFF(-0.6)) == 0.0
    assert abs(CUTOFF(0.6) - 0.68256) < 1e-14


def test_eval_singular():
    "Evaluate a function with a one-sided singular part"
    f = singular_function(0.5, (0, 0, 1, 0))
    assert eval(f, 0.25) == 0.25
    assert eval(f, -0.25) == 0.0
    assert abs(eval(f, 0.6) - 0.6 * 0.68256) < 1e-14
    assert eval(f, 0.0) == 0.0


def test_eval_constant_profile():
    "Evaluate the bounded profile |x|^0 at nu = 1/2"
    f = singular_function(0.5, (0, 1, 0, 1))
    assert eval(f, -0.3) == 1.0
    assert eval(f, 0.3) == 1.0


def test_eval_unbounded():
    "Evaluation at the origin of an unbounded profile fails"
    f = singular_function(0.3, (0, 0, 0, 1))
    with pytest.raises(UnboundedValueError):
        eval(f, 0.0)


def test_eval_outside():
    "Evaluation outside [-1, 1] fails"
    f = singular_function(0.5, (0, 0, 1, 0))
    with pytest.raises(ValueError):
        eval(f, 1.5)


def test_derivative_profile():
    "First derivative of |x|^(nu+1/2) away from the cutoff band"
    nu = 0.3
    f = singular_function(nu, (0, 0, 1, 0))
    assert abs(derivative(f, 0.2) - 0.8 * 0.2 ** -0.2) < 1e-12


def test_derivative_origin():
    "Derivative at the origin of a singular function fails"
    f = singular_function(0.5, (0, 0, 1, 0))
    with pytest.raises(UnboundedValueError):
        derivative(f, 0.0)


def test_inner_product_cutoff():
    "Integrate the square of the cutoff times a constant profile"
    f = singular_function(0.5, (0, 0, 0, 1))
    assert abs(inner_product(f, f, f.grid) - CUTOFF_SQUARE) < 1e-13


def test_inner_product_symmetric():
    "Inner product is symmetric"
    nu = 0.3
    f = singular_function(nu, (1, -2, 0.5, 0.25))
    g = singular_function(nu, (0.5, 1, -1, 3))
    assert inner_product(f, g, f.grid) == inner_product(g, f, f.grid)


def test_inner_product_mismatch():
    "Reject functions with different nu"
    f = singular_function(0.3, (1, 0, 0, 0))
    g = singular_function(0.4, (1, 0, 0, 0), f.grid)
    with pytest.raises(ValueError):
        inner_product(f, g, f.grid)


def test_mirrored():
    "Mirroring swaps the two sides"
    nu = 0.3
    f = singular_function(nu, (1, -2, 0.5, 0.25))
    x = np.array([0.1, 0.45, 0.6, 0.9])
    assert np.allclose(f.mirrored()(-x), f(x), rtol=0, atol=1e-12)


def test_domain_check_violation():
    "A constant profile on the left violates the designed transmission"
    rep = domain_check(singular_function(0.5, (0, 1, 0, 0)),
                       designed_extension(0.5))
    assert rep.residuals['transmission_1'] == 1.0
    assert not rep.member


@pytest.mark.parametrize('nu', [0.25, 0.5, 0.75])
def test_domain_check_member(nu):
    "The profile part of the boundary function u satisfies the conditions"
    k = 1.0 / (2.0 * nu)
    rep = domain_check(singular_function(nu, (k, -k, k, -k)),
                       designed_extension(nu))
    assert rep.member


def test_domain_check_regular():
    "A regular function vanishing near 0 lies in both domains"
    nu = 0.5
    grid = standard_grid(nu)
    reg = np.zeros(2 * (grid.n_cells + 1))
    inner = np.nonzero((grid.nodes > 0.3) & (grid.nodes < 0.7))[0]
    reg[2 * inner] = 1.0
    f = Function1D(nu, grid, reg)
    assert domain_check(f, designed_extension(nu)).member
    assert domain_check(f, decoupled_extension(nu)).member


def test_domain_check_bad_tol():
    "Reject a nonpositive tolerance"
    with pytest.raises(ValueError):
        domain_check(singular_function(0.5, (0, 1, 0, 0)),
                     designed_extension(0.5), 0.0)


def test_fit_singular():
    "Recover the singular coefficients from samples near 0"
    nu = 0.3
    coeffs = (0.5, -1.0, 2.0, 0.75)
    f = singular_function(nu, coeffs)
    x = np.concatenate([-np.geomspace(1e-6, 1e-3, 20),
                        np.geomspace(1e-6, 1e-3, 20)])
    fit = fit_singular(x, f(x), nu, f.grid)
    assert np.allclose(fit.as_array(), coeffs, rtol=0, atol=1e-6)


def test_fit_singular_few_samples():
    "Fitting needs enough samples on each side"
    grid = standard_grid(0.3)
    with pytest.raises(ValueError):
        fit_singular([1e-4, 2e-4], [1.0, 1.0], 0.3, grid)


def test_write_csv(tmpdir):
    "Write samples of a function"
    f = singular_function(0.5, (0, 0, 1, 0))
    path = tmpdir.join('f.csv').strpath
    f.write_csv(path, [-0.5, 0.25])
    with open(path) as fd:
        lines = fd.read().splitlines()
    assert lines[0] == 'x,value,regular_value,singular_value'
    assert lines[2] == '0.25,0.25,0,0.25'
