# -*- coding: utf-8 -*-
"""Test the one- and two-dimensional heat semigroups"""

import os
import tempfile

import numpy as np
import pytest

from pygrushin.control import bump
from pygrushin.operator1d import eigensolve
from pygrushin.semigroup import Field2D, ModeMismatchError
from pygrushin.semigroup import SpectralPropagator, SpectralResolutionError
from pygrushin.semigroup import crank_nicolson, evolve1d, evolve2d
from pygrushin.semigroup import fourier_project, generator_apply
from pygrushin.semigroup import mild_solution, spectral_tail
from pygrushin.semigroup import strong_continuity, trajectory
from pygrushin.testutils import PygrushinTestCase, operator_family

MODES = (1, 2, 3, 4)


def mass_norm(op, coeffs):
    return float(np.sqrt(coeffs.dot(op.mass).dot(coeffs)))


class Evolve1DTestCase(PygrushinTestCase):
    """Test the semigroup of a single mode operator"""

    def initial(self, eig, k=5):
        return eig.eigenvectors[:, :k].dot(0.5 ** np.arange(k))

    def test_identity_at_zero(self):
        "Evolution over zero time is the identity"
        op, eig = self.eigen(1)
        f0 = self.initial(eig)
        assert np.array_equal(evolve1d(op, eig, f0, 0.0), f0)

    def test_eigenvector_decay(self):
        "An eigenvector decays at its eigenvalue"
        op, eig = self.eigen(1)
        v = eig.eigenvectors[:, 0]
        ft = evolve1d(op, eig, v, 0.3)
        assert mass_norm(op, ft - np.exp(-0.3 * eig.eigenvalues[0]) * v) \
            <= 1e-9

    def test_crank_nicolson(self):
        "Crank-Nicolson agrees with the eigen-expansion"
        op, eig = self.eigen(1)
        f0 = self.initial(eig)
        exact = evolve1d(op, eig, f0, 0.1)
        approx = crank_nicolson(op, f0, 0.1, 1e-4)
        assert mass_norm(op, approx - exact) <= 1e-4 * mass_norm(op, exact)

    def test_crank_nicolson_short_step(self):
        "The last Crank-Nicolson step lands on the final time"
        op, eig = self.eigen(1)
        f0 = self.initial(eig, 2)
        exact = evolve1d(op, eig, f0, 0.0105)
        approx = crank_nicolson(op, f0, 0.0105, 1e-3)
        assert mass_norm(op, approx - exact) <= 1e-4 * mass_norm(op, exact)

    def test_negative_time(self):
        "Reject a negative time"
        op, eig = self.eigen(1)
        with pytest.raises(ValueError):
            evolve1d(op, eig, self.initial(eig), -1.0)

    def test_spectral_tail(self):
        "Data outside the computed eigenpairs are rejected"
        op = self.operator(1)
        eig = eigensolve(op, 5)
        f0 = np.random.default_rng(0).standard_normal(op.dim)
        assert spectral_tail(op, eig, f0) > 1e-10
        with pytest.raises(SpectralResolutionError):
            evolve1d(op, eig, f0, 0.1)

    def test_spectral_tail_resolved(self):
        "Combinations of the computed eigenvectors are resolved"
        op = self.operator(1)
        eig = eigensolve(op, 5)
        assert spectral_tail(op, eig, self.initial(eig)) <= 1e-10


class Evolve2DTestCase(PygrushinTestCase):
    """Test the semigroup on the rectangle"""

    def setUp(self):
        super(Evolve2DTestCase, self).setUp()
        self.ops = operator_family(self.nu, self.gamma, self.label, MODES)
        self.basis = self.ops[0].basis
        self.prop = SpectralPropagator(self.ops)
        self.f0 = fourier_project(bump(-0.5, 0.5, 0.3), self.basis,
                                  len(MODES))

    def test_parseval(self):
        "Parseval and tensor quadrature norms agree"
        assert abs(self.f0.norm() - self.f0.norm_by_quadrature()) <= \
            1e-10 * self.f0.norm()

    def test_inner_symmetric(self):
        "The L² pairing of fields is symmetric"
        g = evolve2d(self.f0, self.prop, 0.1)
        assert abs(self.f0.inner(g) - g.inner(self.f0)) <= \
            1e-14 * self.f0.norm() * g.norm()
        assert abs(self.f0.inner(self.f0) - self.f0.norm() ** 2) <= \
            1e-12 * self.f0.norm() ** 2

    def test_aliasing_warning(self):
        "Too few y points trigger a warning"
        with pytest.warns(RuntimeWarning):
            fourier_project(bump(0.0, 0.5), self.basis, 8, n_y=10)

    def test_contraction(self):
        "Norms never increase along the trajectory"
        traj = trajectory(self.f0, self.prop, np.linspace(0.0, 1.0, 50))
        assert traj.contracting()
        assert traj.norms[-1] < traj.norms[0]

    def test_semigroup_property(self):
        "S(0.2) S(0.2) equals S(0.4)"
        twice = evolve2d(evolve2d(self.f0, self.prop, 0.2), self.prop, 0.2)
        once = evolve2d(self.f0, self.prop, 0.4)
        assert (twice - once).norm() <= 1e-8 * once.norm()

    def test_operators_list(self):
        "A list of operators gives the same evolution as a propagator"
        direct = evolve2d(self.f0, list(self.ops), 0.1)
        assert (direct - evolve2d(self.f0, self.prop, 0.1)).norm() <= \
            1e-12 * direct.norm()

    def test_threads(self):
        "Threaded eigensolves give identical propagators"
        threaded = SpectralPropagator(self.ops, threads=2)
        assert np.array_equal(threaded.eigenvalues, self.prop.eigenvalues)

    def test_threaded_apply(self):
        "Threaded mode propagation equals the sequential one"
        threaded = SpectralPropagator(self.ops, self.prop.eigs, threads=3)
        assert np.array_equal(threaded.apply(self.f0, 0.1).modes,
                              self.prop.apply(self.f0, 0.1).modes)

    def test_mild_solution_superposition(self):
        "Mild solutions are additive in the data and the source"
        steps = 10
        u = [self.f0 * 0.5] * steps
        g = fourier_project(bump(0.3, 0.5, 0.3), self.basis, len(MODES))
        w = [g] * steps
        zero = Field2D.zeros(self.basis, len(MODES))
        left = mild_solution(self.f0, u, 0.5, 0.05, self.prop)
        right = mild_solution(zero, w, 0.5, 0.05, self.prop)
        both = mild_solution(self.f0, [a + b for a, b in zip(u, w)], 0.5,
                             0.05, self.prop)
        for k in (1, 5, steps):
            total = left.states[k] + right.states[k]
            assert (total - both.states[k]).norm() <= \
                1e-12 * both.states[k].norm()

    def test_mode_decoupling(self):
        "Dropping modes commutes with the evolution"
        keep = np.array([1.0, 0.0, 1.0, 0.0])[:, None]
        evolved = evolve2d(self.f0, self.prop, 0.2)
        dropped = evolve2d(self.f0.like(keep * self.f0.modes), self.prop, 0.2)
        assert np.array_equal(dropped.modes[1], np.zeros(self.basis.dim))
        assert (dropped - evolved.like(keep * evolved.modes)).norm() <= \
            1e-13 * evolved.norm()

    def test_mode_mismatch(self):
        "Fields with other modes are rejected"
        field = Field2D(self.f0.modes, self.basis, indices=(2, 3, 4, 5))
        with pytest.raises(ModeMismatchError):
            evolve2d(field, self.prop, 0.1)

    def test_mode_count_mismatch(self):
        "Operators must match the number of modes"
        with pytest.raises(ModeMismatchError):
            evolve2d(self.f0, list(self.ops[:2]), 0.1)

    def test_mild_solution_free(self):
        "Without a source the mild solution is the semigroup"
        evo = mild_solution(self.f0, None, 0.5, 0.05, self.prop)
        exact = evolve2d(self.f0, self.prop, 0.5)
        assert len(evo.states) == 11
        assert (evo.states[-1] - exact).norm() <= 1e-12 * exact.norm()

    def test_mild_solution_source(self):
        "A constant eigenmode source integrates to (1 - e^(-lT)) / lambda"
        T, steps = 0.5, 200
        v = Field2D.zeros(self.basis, len(MODES))
        modes = v.modes.copy()
        modes[0] = self.prop.vectors[0][:, 0]
        v = v.like(modes)
        lam = self.prop.eigenvalues[0, 0]
        zero = Field2D.zeros(self.basis, len(MODES))
        evo = mild_solution(zero, [v] * steps, T, T / steps, self.prop)
        expected = v * ((1.0 - np.exp(-lam * T)) / lam)
        assert (evo.states[-1] - expected).norm() <= 1e-3 * expected.norm()

    def test_mild_solution_callable(self):
        "A callable source is sampled at the step midpoints"
        seen = []

        def source(t):
            seen.append(t)
            return self.f0 * 0.0
        mild_solution(self.f0, source, 0.4, 0.1, self.prop)
        assert np.allclose(seen, [0.05, 0.15, 0.25, 0.35])

    def test_mild_solution_step(self):
        "The horizon must be a multiple of the step"
        with pytest.raises(ValueError):
            mild_solution(self.f0, None, 0.5, 0.3, self.prop)

    def test_generator(self):
        "The generator scales eigenmodes by minus their eigenvalues"
        modes = np.array([vec[:, 0] for vec in self.prop.vectors])
        field = self.f0.like(modes)
        out, sq = generator_apply(field, self.prop)
        lam = self.prop.eigenvalues[:, 0]
        expected = field.like(-lam[:, None] * modes)
        assert (out - expected).norm() <= 1e-6 * expected.norm()
        assert abs(sq - np.sum(lam ** 2)) <= 1e-6 * np.sum(lam ** 2)

    def test_strong_continuity(self):
        "S(t) f tends to f as t tends to 0"
        dist = strong_continuity(self.f0, self.prop, [1e-1, 1e-2, 1e-3, 1e-4])
        assert np.all(np.diff(dist) < 0)
        assert dist[-1] < 0.1 * dist[0]

    def test_right_mass(self):
        "Mass on x > 0 is part of the total mass"
        field = fourier_project(bump(0.0, 0.5, 0.4), self.basis, len(MODES))
        assert 0.0 < field.right_mass() < field.norm()

    def test_write_trajectory(self):
        "Write the norms of a trajectory"
        traj = trajectory(self.f0, self.prop, [0.0, 0.1])
        path = os.path.join(tempfile.mkdtemp(), 'evolve2d.csv')
        traj.write_csv(path)
        with open(path) as fd:
            lines = fd.read().splitlines()
        assert lines[0] == 't,norm'
        assert len(lines) == 3
