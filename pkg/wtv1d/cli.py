"""Command-line front end.

Every command reads its inputs, runs one experiment and writes the selected
output formats (``--format csv,json,svg``) into ``--out``. Exit codes:

    0  success
    2  input error (unreadable file, malformed spec, failed precondition)
    3  a solve missed its gap tolerance; outputs are still written
    4  a verification or property check failed

Example:
    wtv1d solve wtv --f f.csv --alpha abs:0.2:0.3 --out run
    wtv1d verify wtv --f f.csv --u run/u.csv --alpha abs:0.2:0.3
    wtv1d sweep --lam 2 --L 1 --mu 0.05 0.5 10 --c 0.05 0.9 10 --jobs 4

The log level is read from the ``WTV1D_LOG`` environment variable.
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass

import numpy as np

import pandas

from joblib import Parallel, delayed

from wtv1d import analysis
from wtv1d import analytic
from wtv1d import core
from wtv1d import json_stat
from wtv1d import plots
from wtv1d import signal_io
from wtv1d import wfid
from wtv1d import wtv


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NOT_CONVERGED = 3
EXIT_FAILED = 4

FORMATS = ('csv', 'json', 'svg')
DEFAULT_LEVELS = (4, 8, 16, 32)
DEFAULT_FLOORS = (1e-1, 1e-2, 1e-3, 1e-4)


@dataclass(frozen=True)
class RunConfig:
    """Settings shared by every command plus the command's own arguments."""

    command: str
    out: str
    formats: frozenset
    grid: core.Grid
    options: wtv.SolverOptions
    jobs: int
    seed: int
    args: argparse.Namespace

    def wants(self, fmt):
        return fmt in self.formats

    def path(self, name):
        return os.path.join(self.out, name)

    def grid_or(self, a, b, n):
        return self.grid if self.grid is not None else core.make_grid(a, b, n)


def _formats(text):
    chosen = frozenset(part.strip() for part in text.split(',') if part.strip())
    unknown = chosen - set(FORMATS)
    if unknown or not chosen:
        raise argparse.ArgumentTypeError(
            'formats must be a comma separated subset of %s' % ','.join(FORMATS))
    return chosen


def _common_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--grid', nargs=3, type=float, metavar=('A', 'B', 'N'),
                        help='domain (A, B) split into N cells')
    common.add_argument('--out', default='.', help='output directory')
    common.add_argument('--format', dest='formats', type=_formats,
                        default=frozenset(FORMATS),
                        help='comma separated subset of csv,json,svg')
    common.add_argument('--tol', type=float,
                        default=wtv.DEFAULT_OPTIONS.gap_tolerance,
                        help='relative duality gap tolerance')
    common.add_argument('--max-iters', type=int,
                        default=wtv.DEFAULT_OPTIONS.max_iterations)
    common.add_argument('--method', choices=wtv.METHODS,
                        default=wtv.DEFAULT_OPTIONS.method)
    common.add_argument('--jobs', type=int, default=1,
                        help='worker processes for sweeps')
    common.add_argument('--seed', type=int, default=0)
    return common


def _add_weight_arguments(parser):
    parser.add_argument('model', choices=analysis.MODES)
    parser.add_argument('--f', required=True, help='signal CSV (path or URL)')
    parser.add_argument('--alpha', help='regularization weight for wtv')
    parser.add_argument('--w', help='fidelity weight for wfid')
    parser.add_argument('--floor-ratio', type=float,
                        default=wfid.DEFAULT_FLOOR_RATIO)


def build_parser():
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog='wtv1d',
        description='Weighted total variation denoising in one dimension.')
    commands = parser.add_subparsers(dest='command', required=True)

    solve = commands.add_parser('solve', parents=[common],
                                help='denoise a signal')
    _add_weight_arguments(solve)

    verify = commands.add_parser('verify', parents=[common],
                                 help='check a candidate against the '
                                      'optimality conditions')
    _add_weight_arguments(verify)
    verify.add_argument('--u', required=True, help='candidate solution CSV')
    verify.add_argument('--v', help='dual node values CSV, optional')

    properties = commands.add_parser('properties', parents=[common],
                                     help='run structural property checks')
    properties.add_argument('--fixtures', choices=('table1',))
    properties.add_argument('--random', type=int, default=0, metavar='K')
    properties.add_argument('--semigroup', action='store_true')
    properties.add_argument('--alpha1', default='abs:0.2:0.3')
    properties.add_argument('--alpha2', type=float, default=0.2)
    properties.add_argument('--vanishing', action='store_true')
    properties.add_argument('--alpha', default='abs:1:0',
                            help='weight for the vanishing floors')
    properties.add_argument('--floor-mode', choices=('add', 'max'),
                            default='add')
    properties.add_argument('--f', help='signal CSV; defaults to 2x')
    properties.add_argument('--n', type=int, default=2048)

    sweep = commands.add_parser('sweep', parents=[common],
                                help='affine/abs parameter sweep')
    sweep.add_argument('--lam', type=float, required=True)
    sweep.add_argument('--L', type=float, default=1.0)
    sweep.add_argument('--mu', nargs=3, required=True,
                       metavar=('START', 'STOP', 'NUM'))
    sweep.add_argument('--c', nargs=3, required=True,
                       metavar=('START', 'STOP', 'NUM'))
    sweep.add_argument('--n', type=int, default=1024)

    recover = commands.add_parser('recover-pc', parents=[common],
                                  help='recover piecewise constant data')
    recover.add_argument('--model', choices=analysis.MODES, default='wtv')
    recover.add_argument('--f0', required=True,
                         help='JSON {"jumps": [...], "values": [...]}')
    recover.add_argument('--eta', required=True, help='noise expression in x')
    recover.add_argument('--margin', type=float, default=1.2)
    recover.add_argument('--skew', type=float)
    recover.add_argument('--levels', type=int, nargs='+',
                         default=list(DEFAULT_LEVELS))
    recover.add_argument('--family', choices=sorted(wfid.FAMILIES),
                         default='concentrating')
    recover.add_argument('--compare-scalar', action='store_true')

    closed = commands.add_parser('analytic', parents=[common],
                                 help='sample a closed-form solution')
    closed.add_argument('kind', choices=('affine-abs', 'step'))
    closed.add_argument('--L', type=float, default=1.0)
    closed.add_argument('--lam', type=float)
    closed.add_argument('--mu', type=float)
    closed.add_argument('--c', type=float)
    closed.add_argument('--s', type=float)
    closed.add_argument('--alpha', type=float)
    closed.add_argument('--n', type=int, default=4096)
    return parser


def config_from_args(args):
    grid = None
    if args.grid is not None:
        a, b, n = args.grid
        if n != int(n):
            core._fail('grid size must be an integer, got %s', n)
        grid = core.make_grid(a, b, int(n))
    if args.jobs == 0:
        core._fail('--jobs must be nonzero')
    options = wtv.SolverOptions(max_iterations=args.max_iters,
                                gap_tolerance=args.tol, method=args.method)
    return RunConfig(args.command, args.out, args.formats, grid, options,
                     args.jobs, args.seed, args)


def _required(value, flag, model):
    if value is None:
        core._fail('%s is required for %s', flag, model)
    return value


def _read_inputs(config):
    args = config.args
    f = signal_io.read_signal(args.f, config.grid)
    if args.model == 'wtv':
        source = _required(args.alpha, '--alpha', 'wtv')
        return f, signal_io.read_weight(source, f.grid)
    source = _required(args.w, '--w', 'wfid')
    return f, signal_io.read_weight(source, f.grid, fidelity=True)


def _strictly_monotone(f):
    d = np.diff(f.values)
    return bool(np.all(d > 0) or np.all(d < 0))


def cmd_solve(config):
    args = config.args
    f, weight = _read_inputs(config)
    grid = f.grid
    if args.model == 'wtv':
        solution = wtv.solve_wtv(f, weight, config.options)
        objective = wtv.objective_wtv(f, weight, solution.u)
        bound = weight.edge_values
    else:
        solution = wfid.solve_wfid(f, weight, config.options, args.floor_ratio)
        objective = wfid.objective_wfid(f, weight, solution.u)
        bound = np.ones(grid.n - 1)

    report = {
        'model': args.model,
        'method': solution.method,
        'grid': {'a': grid.a, 'b': grid.b, 'n': grid.n},
        'converged': solution.converged,
        'gap': solution.gap,
        'relative_gap': solution.relative_gap,
        'iterations': solution.iterations,
        'primal': solution.primal,
        'dual': solution.dual,
        'objective': objective,
        'tv': core.total_variation(solution.u),
        'jumps': len(core.jump_set(solution.u)),
    }
    if args.model == 'wfid':
        report['floor_used'] = solution.floor_used
        if _strictly_monotone(f):
            form = wfid.clamp_form_check(solution.u, f)
            report['clamp_form'] = form._asdict()

    if config.wants('csv'):
        signal_io.write_signal(config.path('u.csv'), solution.u)
        signal_io.write_nodes(config.path('v.csv'), grid, solution.v)
    if config.wants('json'):
        signal_io.write_json(config.path('report.json'), report)
    if config.wants('svg'):
        plots.plot_solution(config.path('plot.svg'), f, solution.u,
                            solution.v, bound, title='%s solve' % args.model)

    print('%s: gap %.3g after %d iterations, TV(u) = %.6g'
          % (args.model, solution.gap, solution.iterations, report['tv']))
    if not solution.converged:
        logger.error('solve missed relative gap %.1e',
                     config.options.gap_tolerance)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def certificate_table(report):
    """One row per optimality condition, ready for printing."""
    residuals = report.to_dict()['residuals']
    locations = {'boundary': -1, 'linkage': report.linkage_location,
                 'box': report.box_location, 'sign': report.sign_location}
    return pandas.DataFrame({
        'condition': list(residuals),
        'residual': list(residuals.values()),
        'tolerance': [getattr(report.tolerances, name) for name in residuals],
        'ok': [report.verdicts[name] for name in residuals],
        'location': [locations[name] for name in residuals],
    })


def cmd_verify(config):
    args = config.args
    f, weight = _read_inputs(config)
    u = signal_io.read_signal(args.u, f.grid)
    v = signal_io.read_nodes(args.v, f.grid) if args.v else None
    report = analysis.verify_kkt(f, u, weight, args.model, v=v,
                                 floor_ratio=args.floor_ratio)
    if config.wants('json'):
        signal_io.write_json(config.path('certificate.json'), report.to_dict())
    print(certificate_table(report).to_string(index=False))
    if report.passed:
        print('certificate: passed')
        return EXIT_OK
    name, ratio = report.worst()
    print('certificate: FAILED, worst condition %s at %.3g x tolerance'
          % (name, ratio))
    return EXIT_FAILED


def _default_signal(config, args):
    grid = config.grid_or(-1.0, 1.0, args.n)
    if args.f:
        return signal_io.read_signal(args.f, config.grid)
    return core.sample(grid, '2*x')


def cmd_properties(config):
    args = config.args
    opts = config.options
    results = {}
    if args.random < 0:
        core._fail('--random must be nonnegative, got %s', args.random)
    selected = args.fixtures or args.random or args.semigroup or args.vanishing
    if args.fixtures or not selected:
        results['fixtures'] = analysis.fixtures_report(args.n, opts)
    if args.random:
        rng = np.random.default_rng(config.seed)
        grid = config.grid_or(-1.0, 1.0, args.n)
        cases = analysis.random_corpus(rng, grid, args.random)
        results['random'] = analysis.run_property_suite(cases, opts)
    if args.semigroup:
        f = _default_signal(config, args)
        alpha1 = signal_io.read_weight(args.alpha1, f.grid)
        results['semigroup'] = analysis.semigroup_report(f, alpha1,
                                                         args.alpha2, opts)
        results['noncommuting'] = analysis.noncommuting_report(opts=opts)
        results['spike_pair'] = analysis.spike_pair_report(opts=opts)
    if args.vanishing:
        f = _default_signal(config, args)
        alpha = signal_io.read_weight(args.alpha, f.grid)
        results['vanishing'] = analysis.vanishing_report(
            f, alpha, DEFAULT_FLOORS, opts, args.floor_mode)

    passed = all(result['passed'] for result in results.values())
    results['passed'] = passed
    if config.wants('json'):
        signal_io.write_json(config.path('properties.json'), results)
    for name, result in results.items():
        if name != 'passed':
            print('%-13s %s' % (name, 'passed' if result['passed'] else 'FAILED'))
    return EXIT_OK if passed else EXIT_FAILED


def _linspace(triple, name):
    try:
        start, stop, num = float(triple[0]), float(triple[1]), int(triple[2])
    except ValueError:
        core._fail('--%s needs START STOP NUM, got %s', name, ' '.join(triple))
    if num < 1:
        core._fail('--%s needs at least one point', name)
    return np.linspace(start, stop, num)


def sweep_point(f, L, lam, mu, c, c0, opts):
    """Closed form against a numerical solve for one (mu, c) pair.

    ``semigroup_distance`` compares the solve at c with the scalar-TV
    shrinkage by c - c0 of the solve at c0 (nan at c0 itself).
    """
    grid = f.grid
    exact, case = analytic.affine_abs_solution(L, lam, mu, c, grid)
    alpha = core.realize_weight(core.AbsValue(mu, c), grid)
    solution = wtv.solve_wtv(f, alpha, opts)
    u = solution.u.values
    center = grid.nearest_edge(0.0)
    semigroup = float('nan')
    if c > c0:
        first = wtv.solve_wtv(f, core.realize_weight(core.AbsValue(mu, c0),
                                                     grid), opts)
        shrunk = wtv.solve_wtv(first.u, core.realize_weight(
            core.Scalar(c - c0), grid), opts)
        semigroup = float(np.abs(shrunk.u.values - u).max())
    return {
        'mu': float(mu),
        'c': float(c),
        'regime': case.regime,
        'jump': case.jump,
        'plateau': case.plateau,
        'contact_end': case.contact_end,
        'jump_numeric': float(u[center + 1] - u[center]),
        'plateau_numeric': float(u[-1]),
        'distance': float(np.abs(u - exact.values).max()),
        'semigroup_distance': semigroup,
        'converged': solution.converged,
    }


def cmd_sweep(config):
    args = config.args
    mu_values = _linspace(args.mu, 'mu')
    c_values = _linspace(args.c, 'c')
    grid = config.grid_or(-args.L, args.L, args.n)
    f = core.sample(grid, lambda x: args.lam * x)
    c0 = float(c_values.min())
    rows = Parallel(n_jobs=config.jobs)(
        delayed(sweep_point)(f, args.L, args.lam, mu, c, c0, config.options)
        for mu in mu_values for c in c_values)
    table = pandas.DataFrame(rows)
    logger.info('sweep of %d points on %d cells', len(table), grid.n)

    if config.wants('csv'):
        signal_io.write_table(config.path('sweep.csv'), table)
    if config.wants('json'):
        json_obj = json_stat.to_json_stat(
            table, ['mu', 'c'],
            ['jump', 'plateau', 'jump_numeric', 'plateau_numeric', 'distance'],
            label='affine/abs sweep, lam=%g, L=%g' % (args.lam, args.L))
        signal_io.write_json(config.path('sweep.json'), json_obj)
    if config.wants('svg'):
        plots.plot_regime_map(config.path('regime_map.svg'), table,
                              args.L, args.lam)

    counts = table['regime'].value_counts()
    for regime in analytic.REGIMES:
        print('%-24s %d' % (regime, counts.get(regime, 0)))
    if not table['converged'].all():
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _piecewise_constant_spec(text):
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as error:
        core._fail('malformed --f0 JSON: %s', error)
    if not isinstance(spec, dict) or 'jumps' not in spec \
            or 'values' not in spec:
        core._fail('--f0 needs {"jumps": [...], "values": [...]}')
    return spec


def cmd_recover_pc(config):
    args = config.args
    f0 = _piecewise_constant_spec(args.f0)
    grid = config.grid_or(-1.0, 1.0, 2048)
    jumps = f0['jumps']
    if args.model == 'wtv':
        result = analysis.pc_exact_recovery(
            f0, args.eta, jumps, grid, args.margin, args.skew, config.options,
            args.compare_scalar)
        u, f, clean = result.u, result.f, result.f0
        converged = result.solution.converged
        report = {
            'model': 'wtv',
            'error': result.error,
            'scale': 1.0 + float(np.abs(f.values).max()),
            'weight': core.weight_spec_to_json(result.spec),
            'converged': converged,
        }
        if args.compare_scalar:
            report['scalar_alpha'] = result.scalar_alpha
            report['contrast_loss'] = result.contrast_loss
        scalar_u, levels, errors = result.scalar_u, None, None
    else:
        steps = wfid.pc_limit_recovery(f0, args.eta, jumps, args.levels, grid,
                                       config.options, args.family)
        clean = core.sample(grid, f0)
        f = clean + core.sample(grid, args.eta)
        u = steps[-1].solution.u
        levels = [step.level for step in steps]
        errors = [step.error for step in steps]
        converged = all(step.solution.converged for step in steps)
        report = {
            'model': 'wfid',
            'family': args.family,
            'levels': levels,
            'errors': errors,
            'tv': [step.tv for step in steps],
            'non_increasing': all(b <= a for a, b in zip(errors, errors[1:])),
            'converged': converged,
        }
        scalar_u = None

    if config.wants('csv'):
        signal_io.write_signal(config.path('u.csv'), u)
    if config.wants('json'):
        signal_io.write_json(config.path('recovery.json'), report)
    if config.wants('svg'):
        plots.plot_recovery(config.path('recovery.svg'), f, clean, u,
                            scalar_u, levels, errors)

    if args.model == 'wtv':
        print('sup error %.3g' % report['error'])
    else:
        for level, error in zip(levels, errors):
            print('level %-4d sup error %.4g' % (level, error))
    return EXIT_OK if converged else EXIT_NOT_CONVERGED


def cmd_analytic(config):
    args = config.args
    grid = config.grid_or(-args.L, args.L, args.n)
    if args.kind == 'affine-abs':
        lam = _required(args.lam, '--lam', args.kind)
        mu = _required(args.mu, '--mu', args.kind)
        c = _required(args.c, '--c', args.kind)
        u, case = analytic.affine_abs_solution(args.L, lam, mu, c, grid)
        report = {'kind': args.kind, 'L': case.L, 'lam': lam, 'mu': mu,
                  'c': c, 'regime': case.regime, 'plateau': case.plateau,
                  'jump': case.jump, 'contact_end': case.contact_end}
        v = analytic.affine_abs_dual(case, grid)
    else:
        s = _required(args.s, '--s', args.kind)
        alpha = _required(args.alpha, '--alpha', args.kind)
        u = analytic.scalar_tv_step_solution(args.L, s, alpha, grid)
        report = {'kind': args.kind, 'L': args.L, 's': s, 'alpha': alpha,
                  'height': float(u.values[-1])}
        v = None

    if config.wants('csv'):
        signal_io.write_signal(config.path('u.csv'), u)
        if v is not None:
            signal_io.write_nodes(config.path('v.csv'), grid, v)
    if config.wants('json'):
        signal_io.write_json(config.path('report.json'), report)
    print(json.dumps(report, sort_keys=True))
    return EXIT_OK


COMMANDS = {
    'solve': cmd_solve,
    'verify': cmd_verify,
    'properties': cmd_properties,
    'sweep': cmd_sweep,
    'recover-pc': cmd_recover_pc,
    'analytic': cmd_analytic,
}


def _configure_logging():
    name = os.environ.get('WTV1D_LOG', 'WARNING').upper()
    level = logging.getLevelName(name)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')


def main(argv=None):
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        return COMMANDS[config.command](config)
    except (ValueError, OSError) as error:
        print('wtv1d: error: %s' % error, file=sys.stderr)
        return EXIT_INPUT
    except wtv.NotConvergedError as error:
        print('wtv1d: %s' % error, file=sys.stderr)
        return EXIT_NOT_CONVERGED


if __name__ == '__main__':
    sys.exit(main())
