#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
    pygrushin.runner
    ~~~~~~~~~~~~~~~~

    Scenario runner: reads a run file, executes one scenario and writes
    its CSV tables and a ``summary.json`` into the output directory.
"""

import logging
import os
import sys
import time

import numpy as np
from numpy.polynomial import Polynomial

from pygrushin import __version__
from pygrushin.cmdargs import cmd_parser, parse_args
from pygrushin.config import Config, ConfigError, parse_config
from pygrushin.control import Rectangle, bump, beta_sweep, ControlSystem
from pygrushin.control import cross_side_mass, make_problem, uc_certificate
from pygrushin.funcspace import build_grid
from pygrushin.inequalities import carleman_scan, hardy_check
from pygrushin.inequalities import hardy_derivative_check
from pygrushin.inequalities import hardy_interval_check, random_hardy_family
from pygrushin.inequalities import select_b, singular_balance
from pygrushin.inequalities import standard_family
from pygrushin.lib.export import write_csv, write_json
from pygrushin.operator1d import ExtensionDict, assemble
from pygrushin.operator1d import assemble_family, boundary_functions
from pygrushin.operator1d import coercivity_check, eigensolve
from pygrushin.operator1d import nonsymmetric_transmission_search
from pygrushin.operator1d import profile_bracket, transmission_map
from pygrushin.operator1d import validate_extension
from pygrushin.semigroup import SpectralPropagator, crank_nicolson
from pygrushin.semigroup import evolve1d, fourier_project, strong_continuity
from pygrushin.semigroup import trajectory

logger = logging.getLogger(__name__)

IDENTITY_TOL = 1e-8
EIGEN_FLOOR = -1e-8
CN_TOL = 1e-4


class InvariantViolation(RuntimeError):
    "A property asserted by a scenario does not hold"


def _x_samples(npts):
    "Evaluation abscissas in [-1, 1] avoiding the origin"
    x = np.linspace(-1.0, 1.0, npts)
    return x[x != 0.0]


def _setup(params, cfg):
    nu = params['nu']
    grid = build_grid(params['cells'], params['grading'], nu=nu)
    extensions = ExtensionDict(nu).from_map(cfg.extensions)
    return grid, extensions.get_spec(params['spec'])


def _eigen_mix(eig, k, seed):
    "Seeded random combination of the k lowest eigenvectors"
    rng = np.random.default_rng(seed)
    k = min(k, len(eig))
    return eig.eigenvectors[:, :k].dot(rng.standard_normal(k))


def run_spectrum(params, out_dir, threads, cfg):
    grid, spec = _setup(params, cfg)
    op = assemble(params['n'], params['nu'], params['gamma'], grid, spec)
    eig = eigensolve(op, min(params['k'], op.dim))
    eig.write_csv(os.path.join(out_dir, 'spectrum.csv'))
    spec.write_json(os.path.join(out_dir, 'extension.json'))
    coerc = coercivity_check(op, params['samples'], params['seed'])
    results = {'eigenvalues': eig.eigenvalues, 'residual': eig.residual,
               'orthogonality': eig.orthogonality,
               'symmetry_defect': op.symmetry_defect,
               'coercivity': coerc.to_map(), 'basis': op.basis_meta}
    checks = {'eigenvalues_nonnegative':
              float(eig.eigenvalues[0]) >= EIGEN_FLOOR,
              'coercivity': coerc.satisfied}
    return results, checks


def run_evolve1d(params, out_dir, threads, cfg):
    grid, spec = _setup(params, cfg)
    op = assemble(params['n'], params['nu'], params['gamma'], grid, spec)
    eig = eigensolve(op)
    f0 = _eigen_mix(eig, params['k'], params['seed'])
    times = sorted(params['times'])
    states = [evolve1d(op, eig, f0, t) for t in times]
    mass = op.mass
    norms = [float(np.sqrt(f.dot(mass).dot(f))) for f in states]
    write_csv(os.path.join(out_dir, 'evolve1d.csv'), ['t', 'norm'],
              zip(times, norms))
    op.basis.function(states[-1]).write_csv(
        os.path.join(out_dir, 'profile.csv'), _x_samples(params['x_points']))
    cn = crank_nicolson(op, f0, times[-1], params['dt'])
    diff = cn - states[-1]
    cn_rel = float(np.sqrt(diff.dot(mass).dot(diff)) / max(norms[-1],
                                                            1e-300))
    results = {'times': times, 'norms': norms, 'crank_nicolson': cn_rel,
               'lambda_1': float(eig.eigenvalues[0])}
    checks = {'contraction': bool(np.all(np.diff(norms) <= 1e-12 *
                                         norms[0])),
              'crank_nicolson': cn_rel <= CN_TOL}
    return results, checks


def run_evolve2d(params, out_dir, threads, cfg):
    grid, spec = _setup(params, cfg)
    nmodes = params['n_modes']
    ops = assemble_family(range(1, nmodes + 1), params['nu'],
                          params['gamma'], grid, spec)
    prop = SpectralPropagator(ops, threads=threads)
    f0 = fourier_project(bump(-0.4, 0.5, 0.35), prop.basis, nmodes,
                         gamma=params['gamma'])
    times = sorted(params['times'])
    evo = trajectory(f0, prop, times)
    evo.write_csv(os.path.join(out_dir, 'evolve2d.csv'))
    evo.states[-1].write_csv(os.path.join(out_dir, 'snapshot.csv'),
                             _x_samples(params['x_points']),
                             np.linspace(0.0, 1.0, params['y_points']))
    twice = prop.apply(prop.apply(f0, 0.2), 0.2)
    once = prop.apply(f0, 0.4)
    ident = (twice - once).norm() / max(once.norm(), 1e-300)
    results = {'times': times, 'norms': evo.norms, 'semigroup_identity':
               ident, 'strong_continuity':
               strong_continuity(f0, prop, [1e-4, 1e-3, 1e-2]),
               'right_mass': evo.states[-1].right_mass()}
    checks = {'contraction': evo.contracting(),
              'semigroup_identity': ident <= 1e-8}
    return results, checks


def run_hardy(params, out_dir, threads, cfg):
    family = random_hardy_family(params['samples'], params['seed'],
                                 params['degree'])
    rows, worst = [], {}
    for alpha in params['alpha']:
        ratios = []
        for i, z in enumerate(family):
            rep = hardy_check(z, alpha)
            rows.append((alpha, i, rep.lhs, rep.rhs, rep.ratio))
            ratios.append(rep.ratio)
        worst[alpha] = min(ratios)
    write_csv(os.path.join(out_dir, 'hardy.csv'),
              ['alpha', 'index', 'lhs', 'rhs', 'ratio'], rows)
    deriv = [hardy_derivative_check(z, alpha).satisfied
             for alpha in params['alpha'] if alpha <= -1.0 for z in family]
    interval = [hardy_interval_check(z).satisfied for z in family]
    anchor = hardy_check(Polynomial([0.0, 0.0, 1.0, -1.0]), 0.0)
    anchor_lhs = anchor.lhs / anchor.constant
    results = {'min_ratio': [{'alpha': a, 'ratio': r}
                             for a, r in sorted(worst.items())],
               'anchor': {'lhs': anchor_lhs, 'rhs': anchor.rhs},
               'derivative_checks': len(deriv)}
    checks = {'hardy': all(r >= 1.0 - 1e-10 for r in worst.values()),
              'derivative_step': all(deriv),
              'interval': all(interval),
              'anchor': abs(anchor_lhs - 1.0 / 30.0) <= 1e-10 and
              abs(anchor.rhs - 2.0 / 15.0) <= 1e-10}
    return results, checks


def run_carleman(params, out_dir, threads, cfg):
    nu, T = params['nu'], params['T']
    family = standard_family(T, params['family_size'], params['seed'])
    scan = carleman_scan(family, nu, params['gamma'], params['n'], T,
                         params['R'], threads)
    scan.write_json(os.path.join(out_dir, 'carleman.json'))
    write_csv(os.path.join(out_dir, 'carleman.csv'),
              ['R', 'min_ratio', 'median_ratio'],
              zip(scan.R_grid, scan.min_ratio, scan.median_ratio))
    b = select_b(nu)
    results = scan.to_map()
    results['singular_balance'] = singular_balance(nu, b)
    checks = {'positive_constant': scan.C0 > 0}
    if nu > 0.5:
        checks['singular_balance'] = abs(singular_balance(nu, b)) <= 1e-14
    return results, checks


def _control_problem(params, cfg, threads):
    grid, spec = _setup(params, cfg)
    rects = [Rectangle(*r) for r in params['omega']]
    return make_problem(params['nu'], params['gamma'], grid, spec, rects,
                        params['T'], None, bump(0.5, 0.5, 0.3),
                        params['beta'][0], params['n_modes'],
                        n_steps=params['n_steps'], cg_tol=params['cg_tol'],
                        cg_maxiter=params['cg_maxiter'], threads=threads)


def run_control(params, out_dir, threads, cfg):
    problem = _control_problem(params, cfg, threads)
    betas = sorted(params['beta'], reverse=True)
    sweep = beta_sweep(problem, betas)
    write_csv(os.path.join(out_dir, 'control.csv'),
              ['beta', 'terminal_error', 'dual_state_norm', 'control_norm',
               'cg_iters', 'identity_defect', 'right_mass'],
              ((r.beta, r.terminal_error, r.dual_state_norm, r.control_norm,
                r.cg_iters, r.identity_defect, r.right_mass) for r in sweep))
    sweep[-1].write_csv(os.path.join(out_dir, 'control_u.csv'),
                        _x_samples(params['x_points']),
                        np.linspace(0.0, 1.0, params['y_points']))
    errors = [r.terminal_error for r in sweep]
    results = {'problem': problem.to_map(),
               'solves': [r.to_map() for r in sweep],
               'cross_side': cross_side_mass(sweep[-1])}
    checks = {'identity': all(r.identity_defect <= IDENTITY_TOL
                              for r in sweep if r.converged)}
    if problem.spec.label == 'designed':
        checks['decreasing'] = all(b < a for a, b in zip(errors,
                                                          errors[1:]))
    elif problem.spec.label == 'decoupled':
        checks['no_reach'] = all(e >= 0.9 for e in errors)
        checks['right_mass'] = all(r.right_mass <= 1e-12 * r.control_norm
                                   for r in sweep)
    return results, checks


def run_extension_check(params, out_dir, threads, cfg):
    nu = params['nu']
    extensions = ExtensionDict(nu).from_map(cfg.extensions)
    reports = {}
    for label in sorted(extensions):
        spec = extensions[label]
        rep = validate_extension(spec).to_map()
        try:
            tmap = transmission_map(spec)
        except ValueError as exc:
            rep['transmission'] = str(exc)
        else:
            rep['transmission'] = tmap if isinstance(tmap, str) \
                else tmap.tolist()
            if not isinstance(tmap, str):
                rep['det_transmission'] = float(np.linalg.det(tmap))
        reports[label] = rep
    u, v = boundary_functions(nu)
    brackets = [float(profile_bracket(u, v, nu, np.array([x]))[0])
                for x in (-1.0, -0.5, 0.5, 1.0)]
    cert = nonsymmetric_transmission_search(params['trials'],
                                            params['seed'])
    write_json(os.path.join(out_dir, 'extensions.json'),
               {'extensions': extensions.to_map(), 'reports': reports})
    results = {'reports': reports, 'uv_brackets': brackets,
               'search': cert.to_map()}
    checks = {'designed_valid': reports['designed']['valid'],
              'decoupled_valid': reports['decoupled']['valid'],
              'designed_det': abs(reports['designed'].get(
                  'det_transmission', 0.0) + 1.0) <= 1e-12,
              'uv_bracket': all(abs(br - 1.0) <= 1e-12 for br in brackets),
              'no_one_sided': cert.one_sided == 0}
    return results, checks


def run_uc_certificate(params, out_dir, threads, cfg):
    problem = _control_problem(params, cfg, threads)
    system = ControlSystem(problem)
    report = uc_certificate(problem, params['coarse_dim'],
                            params['y_modes'], system=system)
    write_csv(os.path.join(out_dir, 'uc.csv'), ['index', 'eigenvalue'],
              enumerate(report.eigenvalues, start=1))
    results = report.to_map()
    checks = {}
    if problem.spec.label == 'designed':
        checks['positive'] = report.positive
    elif problem.spec.label == 'decoupled' and report.right_supported:
        checks['null_direction'] = report.null_count > 0
    return results, checks


SCENARIOS = {
    'spectrum': run_spectrum, 'evolve1d': run_evolve1d,
    'evolve2d': run_evolve2d, 'hardy': run_hardy,
    'carleman': run_carleman, 'control': run_control,
    'extension-check': run_extension_check,
    'uc-certificate': run_uc_certificate}


def run(config, out_dir, threads=1, cfg=None):
    """Execute the scenario of a run configuration

    Library errors and failed checks are recorded in the summary.

    :param config: RunConfig
    :param out_dir: output directory, created if needed
    :param threads: worker threads
    :param cfg: layered Config
    :return: exit status, 0 on success
    """
    cfg = Config() if cfg is None else cfg
    os.makedirs(out_dir, exist_ok=True)
    params = config.to_map()
    start = time.perf_counter()
    summary = {'scenario': config.scenario, 'version': __version__,
               'config': params, 'threads': threads}
    try:
        results, checks = SCENARIOS[config.scenario](params, out_dir,
                                                     threads, cfg)
        failed = sorted(name for name, ok in checks.items() if not ok)
        summary['results'] = results
        summary['checks'] = checks
        if failed:
            raise InvariantViolation("failed checks: %s" % ', '.join(failed))
        summary['status'] = 'ok'
    except (ValueError, RuntimeError, KeyError, np.linalg.LinAlgError) \
            as exc:
        logger.error("%s failed: %s", config.scenario, exc)
        summary['status'] = 'failed'
        summary['failure'] = {'type': type(exc).__name__,
                              'message': str(exc)}
    summary['wall_time'] = time.perf_counter() - start
    write_json(os.path.join(out_dir, 'summary.json'), summary)
    return 0 if summary['status'] == 'ok' else 1


def main():
    """Run a scenario from the command line"""
    parser = cmd_parser("Run a numerical experiment on the Grushin operator "
                        "with an inverse-square potential", __version__)
    cfg = parse_args(parser)
    options = cfg['options']
    text = options.config.read() if options.config else ''
    try:
        config = parse_config(text, options.scenario, cfg)
    except ConfigError as exc:
        sys.exit("ERROR: %s" % str(exc))
    if options.seed is not None:
        config['seed'] = options.seed
    sys.exit(run(config, options.out, options.threads, cfg))

if __name__ == '__main__':
    main()
