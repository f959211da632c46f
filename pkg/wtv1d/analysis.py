"""Analysis module: dual certificates, structural reports and the property suite.

Every check returns data rather than raising: a ``CertificateReport``, a
``core.EdgeReport`` or a ``Check`` tuple, each with a ``holds``/``passed``
verdict. ``run_property_suite`` aggregates them over a corpus of solves into a
JSON-ready dictionary.

Example:
    import numpy as np
    from wtv1d import analysis, core

    grid = core.make_grid(-1, 1, 512)
    cases = analysis.random_corpus(np.random.default_rng(7), grid, 20)
    verdict = analysis.run_property_suite(cases)

"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

import pandas

from wtv1d import analytic
from wtv1d import core
from wtv1d import wfid
from wtv1d import wtv


logger = logging.getLogger(__name__)

MODES = ('wtv', 'wfid')


def _masses_and_bound(f, weight, mode, floor_ratio):
    grid = f.grid
    if mode == 'wtv':
        return np.full(grid.n, grid.h), weight.edges_or_fail()
    if mode == 'wfid':
        mass, _ = wfid.floored_masses(weight, floor_ratio)
        return mass, np.ones(grid.n - 1)
    core._fail('unknown mode %r, expected one of %s', mode, MODES)


def build_certificate(f, u, weight, mode='wtv',
                      floor_ratio=wfid.DEFAULT_FLOOR_RATIO):
    """Integrate the linkage condition from v_0 = 0.

    v_{j+1} = v_j + m_j (f_j - u_j) with m_j = h (wtv) or h w_j (wfid, with
    the solver's floor). At an optimum the last entry vanishes.

    Returns:
        ndarray of n + 1 node values.

    """
    core.check_same_grid(f, u, weight)
    mass, _ = _masses_and_bound(f, weight, mode, floor_ratio)
    return np.concatenate([[0.0], np.cumsum(mass * (f.values - u.values))])


class Tolerances(NamedTuple):
    boundary: float
    linkage: float
    box: float
    sign: float


def default_tolerances(f, weight, mode='wtv',
                       floor_ratio=wfid.DEFAULT_FLOOR_RATIO):
    """Rounding-level tolerances for the linear conditions, 1e-6 (1 + max
    bound) for the box and sign conditions."""
    mass, bound = _masses_and_bound(f, weight, mode, floor_ratio)
    rounding = 1e-9 * (1.0 + float(np.abs(f.values).max())) * float(mass.sum())
    certificate = 1e-6 * (1.0 + float(np.max(bound, initial=0.0)))
    return Tolerances(rounding, rounding, certificate, certificate)


@dataclass(frozen=True)
class CertificateReport:
    """Residuals of the discrete optimality system.

    Locations are a node index for the boundary and box conditions, a cell
    index for the linkage and an edge index for the sign condition; -1 when
    nothing was violated.
    """

    mode: str
    boundary_residual: float
    linkage_residual: float
    box_violation: float
    sign_violation: float
    tolerances: Tolerances
    box_location: int = -1
    linkage_location: int = -1
    sign_location: int = -1
    jump_edges: int = 0

    @property
    def verdicts(self):
        return {
            'boundary': self.boundary_residual <= self.tolerances.boundary,
            'linkage': self.linkage_residual <= self.tolerances.linkage,
            'box': self.box_violation <= self.tolerances.box,
            'sign': self.sign_violation <= self.tolerances.sign,
        }

    @property
    def passed(self):
        return all(self.verdicts.values())

    def worst(self):
        """(condition, residual / tolerance) of the relatively worst condition."""
        ratios = {
            'boundary': self.boundary_residual / self.tolerances.boundary,
            'linkage': self.linkage_residual / self.tolerances.linkage,
            'box': self.box_violation / self.tolerances.box,
            'sign': self.sign_violation / self.tolerances.sign,
        }
        name = max(ratios, key=ratios.get)
        return name, ratios[name]

    def to_dict(self):
        return {
            'mode': self.mode,
            'passed': self.passed,
            'verdicts': self.verdicts,
            'residuals': {
                'boundary': self.boundary_residual,
                'linkage': self.linkage_residual,
                'box': self.box_violation,
                'sign': self.sign_violation,
            },
            'tolerances': self.tolerances._asdict(),
            'locations': {
                'box_node': self.box_location,
                'linkage_cell': self.linkage_location,
                'sign_edge': self.sign_location,
            },
            'jump_edges': self.jump_edges,
        }


def verify_kkt(f, u, weight, mode='wtv', tolerances=None, v=None,
               threshold=None, floor_ratio=wfid.DEFAULT_FLOOR_RATIO):
    """Check u against the discrete optimality conditions.

    Without ``v`` the certificate is rebuilt from u, so the linkage holds by
    construction and the boundary residual |v_n| carries the information.
    With a supplied ``v`` (a solver's dual) both end values and the linkage
    are checked.

    Args:
        f (Signal): data.
        u (Signal): candidate solution.
        weight (WeightField): alpha (wtv) or w (wfid).
        mode (str): 'wtv' or 'wfid'.
        tolerances (Tolerances): defaults to default_tolerances.
        v (array): optional node values.
        threshold (float): jump threshold for the sign condition.
        floor_ratio (float): fidelity floor, as in the solver.

    Returns:
        CertificateReport

    """
    core.check_same_grid(f, u, weight)
    grid = f.grid
    mass, bound = _masses_and_bound(f, weight, mode, floor_ratio)
    tolerances = tolerances or default_tolerances(f, weight, mode, floor_ratio)
    residual = mass * (f.values - u.values)
    linkage, linkage_at = 0.0, -1
    if v is None:
        v = np.concatenate([[0.0], np.cumsum(residual)])
        boundary = abs(float(v[-1]))
    else:
        v = np.asarray(v, dtype=float)
        if v.shape != (grid.n + 1,):
            core._fail('dual needs %d node values, got %d', grid.n + 1, v.size)
        boundary = max(abs(float(v[0])), abs(float(v[-1])))
        mismatch = np.abs(np.diff(v) - residual)
        linkage_at = int(np.argmax(mismatch))
        linkage = float(mismatch[linkage_at])
        if linkage <= tolerances.linkage:
            linkage_at = -1

    box, box_at = 0.0, -1
    excess = np.abs(v[1:-1]) - bound
    if excess.size and excess.max() > 0:
        box_at = int(np.argmax(excess)) + 1
        box = float(excess.max())

    sign, sign_at = 0.0, -1
    jumps = core.jump_set(u, threshold).indices
    if jumps:
        index = np.asarray(jumps)
        d = np.diff(u.values)[index]
        mismatch = np.abs(v[index + 1] + bound[index] * np.sign(d))
        worst = int(np.argmax(mismatch))
        sign = float(mismatch[worst])
        if sign > 0:
            sign_at = int(index[worst])

    report = CertificateReport(mode, boundary, linkage, box, sign, tolerances,
                               box_at, linkage_at, sign_at, len(jumps))
    if report.passed:
        logger.debug('certificate passed for %s (%d jump edges)',
                     mode, len(jumps))
    else:
        logger.info('certificate failed for %s: %s', mode, report.worst())
    return report


class Check(NamedTuple):
    holds: bool
    margin: float


def tv_bound_check(f, u, slack=None):
    """TV(u) <= TV(f) up to slack; margin = TV(f) - TV(u)."""
    core.check_same_grid(f, u)
    tv_f = core.total_variation(f)
    if slack is None:
        slack = 1e-8 * (1.0 + tv_f)
    margin = tv_f - core.total_variation(u)
    return Check(margin >= -slack, margin)


def maximum_principle_check(f, u, tol=None):
    """min f <= u <= max f up to tol; margin is the smaller distance."""
    core.check_same_grid(f, u)
    if tol is None:
        tol = 1e-8 * (1.0 + float(np.abs(f.values).max()))
    margin = min(float(u.values.min() - f.values.min()),
                 float(f.values.max() - u.values.max()))
    return Check(margin >= -tol, margin)


def _data_tol(f):
    return 1e-8 * (1.0 + float(np.abs(f.values).max()))


def _curvature(alpha):
    """Second difference of the edge weights over h, zero outside."""
    values = alpha.edges_or_fail()
    padded = np.concatenate([[0.0], values, [0.0]])
    return (padded[:-2] + padded[2:] - 2.0 * values) / alpha.grid.h


def jump_estimates_report(f, u, alpha, tol=None):
    """Per-edge jump estimates.

    ``allowance`` is the positive part of the derivative jump of alpha; for
    weights without symbolic derivative data the discrete curvature of the
    edge samples is used instead. The direction of u must follow f wherever
    the derivative jump vanishes.

    Args:
        f (Signal)
        u (Signal)
        alpha (WeightField)
        tol (float): defaults to 1e-8 (1 + max|f|).

    Returns:
        pandas.DataFrame with one row per interior edge.

    """
    core.check_same_grid(f, u, alpha)
    if tol is None:
        tol = _data_tol(f)
    du = core.edge_differences(u)
    df = core.edge_differences(f)
    if alpha.symbolic:
        dprime = alpha.dprime()
        allowance = np.maximum(dprime, 0.0)
        smooth = dprime == 0
    else:
        curvature = _curvature(alpha)
        dprime = np.full(du.size, math.nan)
        allowance = np.maximum(curvature, 0.0)
        smooth = curvature <= 0
    f_jumps = np.abs(df) > core.default_jump_threshold(f)
    direction_checked = smooth & f_jumps & (np.abs(du) > tol)
    table = pandas.DataFrame({
        'edge': np.arange(du.size),
        'x': f.grid.edges,
        'du': du,
        'df': df,
        'dprime': dprime,
        'allowance': allowance,
    })
    table['bound_ok'] = np.abs(du) <= np.abs(df) + allowance + tol
    table['direction_checked'] = direction_checked
    table['direction_ok'] = ~direction_checked | (du * df > 0)
    return table


def jump_estimates_hold(table):
    return bool(table['bound_ok'].all() and table['direction_ok'].all())


class Run(NamedTuple):
    side: str
    start: int
    stop: int
    changes: int
    ok: bool


@dataclass(frozen=True)
class RunProfile:
    runs: tuple
    band: float

    @property
    def holds(self):
        return all(run.ok for run in self.runs)


def _runs(mask):
    edges = np.diff(np.concatenate([[0], mask.astype(int), [0]]))
    return zip(np.flatnonzero(edges == 1), np.flatnonzero(edges == -1))


def monotone_run_profile(f, u, tol=None):
    """Direction changes of u on the maximal runs where u > f or u < f.

    On a run above f, u first decreases then increases; below f the other
    way round. Differences below the jump threshold count as flat.

    Args:
        f (Signal)
        u (Signal)
        tol (float): dead band around u = f, defaults to ten times the jump
                     threshold of u.

    Returns:
        RunProfile

    """
    core.check_same_grid(f, u)
    threshold = core.default_jump_threshold(u)
    band = 10.0 * threshold if tol is None else tol
    residual = u.values - f.values
    runs = []
    for side, mask, expected in (('above', residual > band, (-1, 1)),
                                 ('below', residual < -band, (1, -1))):
        for start, stop in _runs(mask):
            d = np.diff(u.values[start:stop])
            signs = np.sign(d[np.abs(d) > threshold]).astype(int)
            changes = int(np.count_nonzero(np.diff(signs)))
            ok = changes == 0 or \
                (changes == 1 and (signs[0], signs[-1]) == expected)
            runs.append(Run(side, int(start), int(stop), changes, ok))
    runs.sort(key=lambda run: run.start)
    return RunProfile(tuple(runs), band)


def _plateau_drop(f, alpha):
    """Drop of alpha to its lower neighbour and the plateau threshold."""
    values = alpha.edges_or_fail()
    padded = np.concatenate([[0.0], values, [0.0]])
    drop = values - np.minimum(padded[:-2], padded[2:])
    span = float(f.values.max() - f.values.min())
    return drop, f.grid.h * span


def large_gradient_plateau_check(f, u, alpha, tol=None):
    """Edges where alpha exceeds a neighbour by more than h (max f - min f).

    There the solution cannot jump; the two outermost edges compare against
    the zero end values of the dual.

    Returns:
        core.EdgeReport: excess is |d_i(u)|.

    """
    core.check_same_grid(f, u, alpha)
    if tol is None:
        tol = _data_tol(f)
    drop, limit = _plateau_drop(f, alpha)
    checked = drop > limit
    du = np.abs(core.edge_differences(u))
    return core.edge_report(u.grid, checked, checked & (du > tol), du)


def boundary_plateau_check(f, u, alpha, tol=None):
    """u_0 = u_1 and u_{n-2} = u_{n-1} wherever alpha is large at the ends."""
    core.check_same_grid(f, u, alpha)
    if tol is None:
        tol = _data_tol(f)
    values = alpha.edges_or_fail()
    _, limit = _plateau_drop(f, alpha)
    checked = np.zeros(values.size, dtype=bool)
    checked[[0, -1]] = values[[0, -1]] > limit
    du = np.abs(core.edge_differences(u))
    return core.edge_report(u.grid, checked, checked & (du > tol), du)


def negative_kink_plateau_check(f, u, alpha, tol=None):
    """No jump at edges where alpha' drops by more than the jump of f."""
    core.check_same_grid(f, u, alpha)
    if tol is None:
        tol = _data_tol(f)
    du = np.abs(core.edge_differences(u))
    if not alpha.symbolic:
        return core.EdgeReport(0)
    dprime = alpha.dprime()
    df = np.abs(core.edge_differences(f))
    checked = (dprime < 0) & (df + tol < -dprime)
    return core.edge_report(u.grid, checked, checked & (du > tol), du)


# fixtures

@dataclass(frozen=True, eq=False)
class Fixture:
    """A solved configuration with a machine-checkable expectation.

    ``predicate(fixture, u, tol)`` returns True when the solution u shows
    the expected behaviour at ``edge``.
    """

    name: str
    description: str
    f: core.Signal
    alpha: core.WeightField
    edge: int
    predicate: Callable
    width: float = 0.0


class FixtureResult(NamedTuple):
    name: str
    holds: bool
    du: float
    df: float
    solution: wtv.Solution


def _continuous_at_kink(fixture, u, tol):
    du = core.edge_differences(u)
    return abs(du[fixture.edge]) <= tol and core.total_variation(u) > tol


def _strict_new_jump(fixture, u, tol):
    du = abs(core.edge_differences(u)[fixture.edge])
    df = abs(core.edge_differences(fixture.f)[fixture.edge])
    dprime = fixture.alpha.dprime_jumps.get(fixture.edge, 0.0)
    return du > 10.0 * df and du < dprime - tol


def _jump_equals_bound(fixture, u, tol):
    du = abs(core.edge_differences(u)[fixture.edge])
    df = abs(core.edge_differences(fixture.f)[fixture.edge])
    dprime = fixture.alpha.dprime_jumps.get(fixture.edge, 0.0)
    return du > tol and abs(du - df - dprime) <= tol


def _jump_above_data(fixture, u, tol):
    fl, fr = fixture.f.left_right(fixture.edge)
    ul, ur = u.left_right(fixture.edge)
    return fl + tol < fr and fr + tol < ul and ul + tol < ur


def _jump_enlarged(fixture, u, tol):
    fl, fr = fixture.f.left_right(fixture.edge)
    ul, ur = u.left_right(fixture.edge)
    return ul + tol < fl and fl + tol < fr and fr + tol < ur


def _jump_reversed(fixture, u, tol):
    du = core.edge_differences(u)[fixture.edge]
    df = core.edge_differences(fixture.f)[fixture.edge]
    return abs(du) > tol and abs(df) > tol and du * df < 0


def _flat_near(fixture, u, tol, skip_center=False):
    grid = u.grid
    x = grid.edges
    center = grid.edges[fixture.edge]
    near = np.abs(x - center) < fixture.width - 0.5 * grid.h
    if skip_center:
        near[fixture.edge] = False
    return bool(np.all(np.abs(core.edge_differences(u))[near] <= tol))


def _spike_up_plateau(fixture, u, tol):
    return _flat_near(fixture, u, tol)


def _spike_down_jump(fixture, u, tol):
    jump = core.edge_differences(u)[fixture.edge]
    return _flat_near(fixture, u, tol, skip_center=True) and jump > tol


def _fixture(name, description, f, spec, edge_at, predicate, width=0.0):
    grid = f.grid
    alpha = core.realize_weight(spec, grid)
    return Fixture(name, description, f, alpha, grid.nearest_edge(edge_at),
                   predicate, width)


def _grid_for_fixtures(n):
    if n % 8:
        core._fail('fixture grids need n divisible by 8, got %d', n)
    return core.make_grid(-1.0, 1.0, n)


def table1_fixtures(n=2048):
    """The six jump configurations, all with breakpoints on grid edges.

    Args:
        n (int): cells on (-1, 1); a multiple of 8.

    Returns:
        list of Fixture

    """
    grid = _grid_for_fixtures(n)
    ramp = core.sample(grid, '2*x')
    return [
        _fixture('continuity',
                 'alpha kinks upward inside a plateau: u stays continuous',
                 ramp,
                 core.PiecewiseAffine((-1.0, 0.75, 1.0), (0.18, 0.18, 0.43)),
                 0.75, _continuous_at_kink),
        _fixture('strict',
                 'steep abs weight: new jump strictly below the kink of alpha',
                 ramp, core.AbsValue(1.0, 0.5), 0.0, _strict_new_jump),
        _fixture('equality',
                 'mild abs weight: new jump equal to the kink of alpha',
                 ramp, core.AbsValue(0.2, 0.3), 0.0, _jump_equals_bound),
        _fixture('above',
                 'smooth alpha: the whole jump of u lies above that of f',
                 core.sample(grid, {'jumps': [0.0, 0.5],
                                    'values': [-0.6, -0.2, 1.6]}),
                 core.PiecewiseAffine((-1.0, 1.0), (0.1, 1.1)),
                 0.0, _jump_above_data),
        _fixture('enlarged',
                 'abs weight: jump of u contains and exceeds the jump of f',
                 core.sample(grid, {'jumps': [-0.5, 0.0, 0.5],
                                    'values': [-1.2, -0.2, 0.2, 1.2]}),
                 core.AbsValue(0.3, 0.2), 0.0, _jump_enlarged),
        _fixture('opposite',
                 'abs weight: u jumps against the direction of f',
                 core.sample(grid, {'jumps': [-0.5, 0.0, 0.5],
                                    'values': [-1.7, 0.3, -0.3, 1.7]}),
                 core.AbsValue(0.8, 0.2), 0.0, _jump_reversed),
    ]


SPIKE_KINDS = ('up', 'down')


def spike_fixture(kind, n=2048, width=0.125, base=0.05, factor=10.0):
    """Steep piecewise-affine stand-in for a square-root spike at 0.

    The flanks rise with slope factor * 2 max|f| for f = 2x. An upward spike
    flattens u around 0; a downward one keeps u flat on both sides and lets
    it jump up at 0.

    Args:
        kind (str): 'up' or 'down'.
        n (int): cells on (-1, 1); a multiple of 8.
        width (float): half-width of the spike, on a grid edge.
        base (float): weight away from (up) or at (down) the spike.
        factor (float): slope over the critical 2 max|f|.

    Returns:
        Fixture

    """
    if kind not in SPIKE_KINDS:
        core._fail('unknown spike kind %r, expected one of %s',
                   kind, SPIKE_KINDS)
    grid = _grid_for_fixtures(n)
    if not grid.is_edge(width):
        core._fail('spike width %s is not on a grid edge', width)
    ramp = core.sample(grid, '2*x')
    slope = factor * 2.0 * float(np.abs(ramp.values).max())
    top = base + slope * width
    points = (-1.0, -width, 0.0, width, 1.0)
    if kind == 'up':
        spec = core.PiecewiseAffine(points, (base, base, top, base, base))
        return _fixture('spike-up', 'upward spike: u is constant around it',
                        ramp, spec, 0.0, _spike_up_plateau, width)
    spec = core.PiecewiseAffine(points, (top, top, base, top, top))
    return _fixture('spike-down',
                    'downward spike: u is flat on both sides and jumps up',
                    ramp, spec, 0.0, _spike_down_jump, width)


def spike_semigroup_pair(n=2048, margin=0.05):
    """Downward spike alpha1 and upward spike alpha2 = total - alpha1.

    One solve with the constant sum flattens f = 2x completely; solving with
    alpha1 first leaves a jump at 0 that alpha2 turns into a plateau.

    Returns:
        (Signal, WeightField, WeightField)

    """
    fixture = spike_fixture('down', n)
    alpha1 = fixture.alpha
    total = float(alpha1.edge_values.max()) + margin
    alpha2 = core.WeightField(
        alpha1.grid, edge_values=total - alpha1.edge_values,
        dprime_jumps={index: -value
                      for index, value in alpha1.dprime_jumps.items()},
        symbolic=alpha1.symbolic)
    return fixture.f, alpha1, alpha2


def run_fixture(fixture, opts=None, tol=None):
    """Solve a fixture and evaluate its predicate."""
    solution = wtv.solve_wtv(fixture.f, fixture.alpha, opts)
    if tol is None:
        tol = 1e-6 * (1.0 + float(np.abs(fixture.f.values).max()))
    holds = bool(solution.converged
                 and fixture.predicate(fixture, solution.u, tol))
    du = float(core.edge_differences(solution.u)[fixture.edge])
    df = float(core.edge_differences(fixture.f)[fixture.edge])
    if not holds:
        logger.warning('fixture %s failed: du=%.6g df=%.6g',
                       fixture.name, du, df)
    return FixtureResult(fixture.name, holds, du, df, solution)


# randomized corpus

class CorpusCase(NamedTuple):
    f: core.Signal
    spec: object
    alpha: core.WeightField


def _edge_points(rng, grid, count):
    picks = rng.choice(grid.n - 1, size=count, replace=False)
    return np.sort(grid.edges[picks])


def random_signal(rng, grid, max_pieces=8):
    """Piecewise constant or piecewise affine data with up to max_pieces."""
    pieces = int(rng.integers(1, max_pieces + 1))
    cuts = _edge_points(rng, grid, pieces - 1)
    starts = np.concatenate([[grid.a], cuts])
    levels = rng.uniform(-1.0, 1.0, pieces)
    if rng.random() < 0.5:
        slopes = np.zeros(pieces)
    else:
        slopes = rng.uniform(-2.0, 2.0, pieces)
    x = grid.centers
    piece = np.searchsorted(cuts, x, side='right')
    return core.signal_from_values(
        grid, levels[piece] + slopes[piece] * (x - starts[piece]))


WEIGHT_FAMILIES = ('scalar', 'abs', 'pwa', 'vanishing')


def random_weight_spec(rng, grid, top, family=None):
    """A weight spec with values in [0, top] and breakpoints on edges."""
    family = family or WEIGHT_FAMILIES[int(rng.integers(len(WEIGHT_FAMILIES)))]
    if family == 'scalar':
        return core.Scalar(float(rng.uniform(0.0, top)))
    if family == 'abs':
        x0 = float(_edge_points(rng, grid, 1)[0])
        c = float(rng.uniform(0.0, top / 2.0))
        reach = max(x0 - grid.a, grid.b - x0)
        return core.AbsValue(float(rng.uniform(0.0, (top - c) / reach)), c, x0)
    count = int(rng.integers(1, 6))
    points = (grid.a, *_edge_points(rng, grid, count).tolist(), grid.b)
    values = rng.uniform(0.0, top, len(points))
    if family == 'vanishing':
        values[rng.random(len(points)) < 0.5] = 0.0
    return core.PiecewiseAffine(points, tuple(values.tolist()))


def random_corpus(rng, grid, size, max_pieces=8):
    """Random (f, alpha) pairs with alpha in [0, 2 range(f)].

    Args:
        rng (numpy.random.Generator)
        grid (Grid)
        size (int): number of cases.
        max_pieces (int): most pieces of f.

    Returns:
        list of CorpusCase

    """
    cases = []
    for _ in range(size):
        f = random_signal(rng, grid, max_pieces)
        top = 2.0 * float(f.values.max() - f.values.min())
        spec = random_weight_spec(rng, grid, top)
        cases.append(CorpusCase(f, spec, core.realize_weight(spec, grid)))
    return cases


# scalar baseline and exact recovery

def count_pieces(u):
    return len(core.jump_set(u)) + 1


def smallest_flattening_scalar(f, pieces, opts=None, iterations=50):
    """Smallest scalar alpha whose solution has at most ``pieces`` pieces.

    Bisection between 0 and (b - a) max|f - mean f|, which flattens any data.
    """
    if pieces < 1:
        core._fail('pieces must be at least 1, got %s', pieces)
    grid = f.grid
    high = (grid.b - grid.a) * float(np.abs(f.values - f.values.mean()).max())
    low = 0.0
    if high == 0 or count_pieces(f) <= pieces:
        return low
    for _ in range(iterations):
        middle = 0.5 * (low + high)
        alpha = core.realize_weight(core.Scalar(middle), grid)
        if count_pieces(wtv.solve_wtv(f, alpha, opts).u) <= pieces:
            high = middle
        else:
            low = middle
    logger.info('smallest scalar with at most %d pieces: %.6g', pieces, high)
    return high


def intervals_from_jumps(grid, jumps):
    points = [grid.a, *sorted(float(x) for x in jumps), grid.b]
    return list(zip(points, points[1:]))


def monotone_recovery_weight(intervals, f_bound, slope_margin=1.2, skew=0.35):
    """Asymmetric tents: peak at l + skew (r - l) in each interval."""
    if not 0 < skew < 1:
        core._fail('skew must lie in (0, 1), got %s', skew)
    centers = [l + skew * (r - l) for l, r in intervals]
    return analytic.pc_exact_weight(intervals, f_bound, slope_margin, centers)


class ExactRecovery(NamedTuple):
    u: core.Signal
    f: core.Signal
    f0: core.Signal
    error: float
    spec: object
    solution: wtv.Solution
    scalar_alpha: float = math.nan
    scalar_u: core.Signal = None
    contrast_loss: float = math.nan


def _contrast(signal):
    return float(signal.values.max() - signal.values.min())


def pc_exact_recovery(f0, eta, jumps, grid=None, slope_margin=1.2, skew=None,
                      opts=None, compare_scalar=False):
    """Recover a piecewise constant f0 from f0 + eta with a vanishing weight.

    Args:
        f0: piecewise constant spec accepted by core.sample.
        eta: noise spec with zero mean on every interval between jumps.
        jumps (list): jump locations of f0, on grid edges.
        grid (Grid): defaults to 2048 cells on (-1, 1).
        slope_margin (float): tent slope over 2 max|f|.
        skew (float): peak position for asymmetric tents; None for centered.
        opts (SolverOptions)
        compare_scalar (bool): also solve with the smallest scalar weight that
                               leaves as many pieces as f0 and report the
                               lost contrast.

    Returns:
        ExactRecovery

    Raises:
        ValueError: if a jump is off the grid edges or eta has nonzero mean
                    on some interval.

    """
    grid = grid or core.make_grid(-1.0, 1.0, 2048)
    jumps = sorted(float(x) for x in jumps)
    for x in jumps:
        if not grid.is_edge(x):
            core._fail('jump %s is not on a grid edge', x)
    clean = core.sample(grid, f0)
    noise = core.sample(grid, eta)
    f = clean + noise
    scale = 1.0 + float(np.abs(f.values).max())
    intervals = intervals_from_jumps(grid, jumps)
    pieces = np.searchsorted(np.asarray(jumps), grid.centers, side='right')
    for index, (l, r) in enumerate(intervals):
        mean = float(noise.values[pieces == index].mean())
        if abs(mean) > 1e-9 * scale:
            core._fail('noise has mean %.3g on (%s, %s)', mean, l, r)
    f_bound = float(np.abs(f.values).max())
    if skew is None:
        spec = analytic.pc_exact_weight(intervals, f_bound, slope_margin)
    else:
        spec = monotone_recovery_weight(intervals, f_bound, slope_margin, skew)
    solution = wtv.solve_wtv(f, core.realize_weight(spec, grid), opts)
    error = float(np.abs(solution.u.values - clean.values).max())
    logger.info('exact recovery error %.3g over %d intervals',
                error, len(intervals))
    result = ExactRecovery(solution.u, f, clean, error, spec, solution)
    if not compare_scalar:
        return result
    scalar = smallest_flattening_scalar(f, len(intervals), opts)
    scalar_u = wtv.solve_wtv(
        f, core.realize_weight(core.Scalar(scalar), grid), opts).u
    return result._replace(scalar_alpha=scalar, scalar_u=scalar_u,
                           contrast_loss=_contrast(clean) - _contrast(scalar_u))


# suite

SUITE_CHECKS = ('converged', 'certificate', 'tv_bound', 'maximum_principle',
                'jump_estimates', 'monotone_runs', 'large_gradient_plateau',
                'boundary_plateau', 'negative_kink_plateau')


def check_solution(f, alpha, solution):
    """Run every structural check on one weighted-TV solve."""
    u = solution.u
    return {
        'converged': solution.converged,
        'certificate': verify_kkt(f, u, alpha).passed,
        'tv_bound': tv_bound_check(f, u).holds,
        'maximum_principle': maximum_principle_check(f, u).holds,
        'jump_estimates': jump_estimates_hold(jump_estimates_report(f, u, alpha)),
        'monotone_runs': monotone_run_profile(f, u).holds,
        'large_gradient_plateau': large_gradient_plateau_check(f, u, alpha).holds,
        'boundary_plateau': boundary_plateau_check(f, u, alpha).holds,
        'negative_kink_plateau': negative_kink_plateau_check(f, u, alpha).holds,
    }


def run_property_suite(cases, opts=None):
    """Solve each case and tally the structural checks.

    Args:
        cases (iterable): CorpusCase items (anything with ``f`` and ``alpha``).
        opts (SolverOptions)

    Returns:
        dict: ``cases``, per-check ``checked``/``failures``/``first_failure``
              and an overall ``passed`` flag.

    """
    tally = {name: {'checked': 0, 'failures': 0, 'first_failure': None}
             for name in SUITE_CHECKS}
    count = 0
    for index, case in enumerate(cases):
        solution = wtv.solve_wtv(case.f, case.alpha, opts)
        for name, holds in check_solution(case.f, case.alpha, solution).items():
            entry = tally[name]
            entry['checked'] += 1
            if not holds:
                entry['failures'] += 1
                if entry['first_failure'] is None:
                    entry['first_failure'] = index
        count += 1
    passed = all(entry['failures'] == 0 for entry in tally.values())
    logger.info('property suite over %d cases: %s', count,
                'passed' if passed else 'FAILED')
    return {'cases': count, 'properties': tally, 'passed': passed}


def fixtures_report(n=2048, opts=None):
    """Run the six jump fixtures and both spikes."""
    fixtures = table1_fixtures(n) + [spike_fixture(kind, n)
                                     for kind in SPIKE_KINDS]
    results = [run_fixture(fixture, opts) for fixture in fixtures]
    return {
        'fixtures': [{'name': r.name, 'holds': r.holds, 'du': r.du, 'df': r.df}
                     for r in results],
        'passed': all(r.holds for r in results),
    }


def semigroup_report(f, alpha1, alpha2, opts=None, order='weighted-first'):
    result = wtv.semigroup_compose(f, alpha1, alpha2, opts, order)
    return {
        'order': order,
        'distance': result.distance,
        'tolerance': result.tolerance,
        'passed': result.distance <= 10.0 * result.tolerance,
    }


def semigroup_campaign(rng, grid, size, opts=None):
    """One-shot against weighted-then-scalar solves on random cases."""
    worst = 0.0
    failures = 0
    for case in random_corpus(rng, grid, size):
        alpha2 = float(rng.uniform(0.0, _contrast(case.f) + 1e-3))
        result = wtv.semigroup_compose(case.f, case.alpha, alpha2, opts)
        ratio = result.distance / result.tolerance
        worst = max(worst, ratio)
        failures += ratio > 10.0
    spikes = spike_pair_report(opts=opts)
    return {'cases': size, 'worst_ratio': worst, 'failures': failures,
            'spike_pair': spikes,
            'passed': failures == 0 and spikes['passed']}


def noncommuting_report(n=1000, opts=None):
    """Scalar-first composition on the counterexample: must stay apart."""
    f, alpha1, alpha2 = wtv.noncommuting_configuration(n)
    result = wtv.semigroup_compose(f, alpha1, alpha2, opts, 'scalar-first')
    return {
        'order': 'scalar-first',
        'distance': result.distance,
        'tolerance': result.tolerance,
        'passed': result.distance >= 100.0 * result.tolerance,
    }


def spike_pair_report(n=2048, opts=None):
    """Two non-constant weights with a constant sum: the answers must differ."""
    f, alpha1, alpha2 = spike_semigroup_pair(n)
    result = wtv.semigroup_compose(f, alpha1, alpha2, opts)
    return {
        'order': 'weighted-first',
        'distance': result.distance,
        'tolerance': result.tolerance,
        'passed': result.distance >= 100.0 * result.tolerance,
    }


def vanishing_report(f, alpha, floors, opts=None, mode='add'):
    steps = wtv.vanishing_weight_limit(f, alpha, floors, opts, mode)
    successive = [step.successive for step in steps[1:]]
    decreasing = all(b <= a for a, b in zip(successive, successive[1:]))
    monotone = wtv.objectives_monotone(steps)
    return {
        'floors': [step.floor for step in steps],
        'distance_to_last': [step.distance for step in steps],
        'successive': successive,
        'objectives': [step.objective for step in steps],
        'successive_decreasing': decreasing,
        'objectives_monotone': monotone,
        'passed': decreasing and monotone,
    }
