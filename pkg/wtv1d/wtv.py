"""Weighted-TV denoising module.

Solves the discrete weighted-TV problem

    min_u  (h/2) sum_j (f_j - u_j)^2 + sum_i alpha_i |u_{i+1} - u_i|

through its box-constrained dual over node values v (v_0 = v_n = 0,
|v_i| <= alpha_i) linked to the primal by v_{j+1} - v_j = h (f_j - u_j).

Two dual methods share one post-condition (relative duality gap below the
tolerance):

    'taut-string'  exact O(n) method: U = F - v is the shortest path through
                   the tube F +/- alpha around the running integral F of f.
    'fista'        accelerated projected gradient with step h/4 and a
                   gradient-mapping restart of the momentum.

Example:
    from wtv1d import core, wtv

    grid = core.make_grid(-1, 1, 4096)
    f = core.sample(grid, '2*x')
    alpha = core.realize_weight(core.AbsValue(0.2, 0.3), grid)
    solution = wtv.solve_wtv(f, alpha)

"""

import logging
import math
from collections import deque
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from wtv1d import core


logger = logging.getLogger(__name__)

METHODS = ('taut-string', 'fista')


class NotConvergedError(RuntimeError):
    """A solve inside a composite experiment missed its gap tolerance."""


@dataclass(frozen=True)
class SolverOptions:
    max_iterations: int = 200000
    gap_tolerance: float = 1e-10
    method: str = 'taut-string'
    restart: bool = True

    def __post_init__(self):
        if not self.gap_tolerance > 0:
            core._fail('gap_tolerance must be positive, got %s',
                       self.gap_tolerance)
        if int(self.max_iterations) != self.max_iterations \
                or self.max_iterations < 1:
            core._fail('max_iterations must be a positive integer, got %s',
                       self.max_iterations)
        if self.method not in METHODS:
            core._fail('unknown method %r, expected one of %s',
                       self.method, METHODS)


DEFAULT_OPTIONS = SolverOptions()


@dataclass(frozen=True, eq=False)
class Solution:
    """Primal signal, dual node values and convergence diagnostics.

    ``modulus`` is the smallest cell mass (h, or h w_j for weighted
    fidelity); the primal is strongly convex with that modulus.
    """

    u: core.Signal
    v: np.ndarray
    gap: float
    iterations: int
    converged: bool
    primal: float = math.nan
    dual: float = math.nan
    method: str = 'taut-string'
    modulus: float = math.nan

    @property
    def relative_gap(self):
        return self.gap / (1.0 + abs(self.primal))


class _DualResult(NamedTuple):
    u: np.ndarray
    v: np.ndarray
    gap: float
    primal: float
    dual: float
    iterations: int
    converged: bool


def _taut_string(x, lower, upper):
    """Slopes of the shortest path through a tube, pinned at both ends.

    Args:
        x (ndarray): increasing node abscissae.
        lower (ndarray): lower tube boundary at the nodes.
        upper (ndarray): upper tube boundary; equals lower at both ends.

    Returns:
        ndarray: one slope per cell.

    """
    x = x.tolist()
    lower = lower.tolist()
    upper = upper.tolist()
    last = len(x) - 1

    def slope(p, q):
        return (q[1] - p[1]) / (x[q[0]] - x[p[0]])

    apex = (0, lower[0])
    path = [apex]
    # invariant: ceiling[0] == floor[0] == path[-1]
    ceiling = deque([apex])
    floor = deque([apex])
    for i in range(1, last + 1):
        top = (i, upper[i])
        bottom = (i, lower[i])

        if len(floor) > 1 and slope(floor[0], top) <= slope(floor[0], floor[1]):
            while len(floor) > 1 and \
                    slope(floor[0], top) <= slope(floor[0], floor[1]):
                floor.popleft()
                path.append(floor[0])
            ceiling = deque([floor[0], top])
        else:
            while len(ceiling) > 1 and \
                    slope(ceiling[-2], top) <= slope(ceiling[-2], ceiling[-1]):
                ceiling.pop()
            ceiling.append(top)

        if slope(ceiling[0], bottom) >= slope(ceiling[0], ceiling[1]):
            while len(ceiling) > 1 and \
                    slope(ceiling[0], bottom) >= slope(ceiling[0], ceiling[1]):
                ceiling.popleft()
                path.append(ceiling[0])
            if ceiling[0][0] < i:
                floor = deque([ceiling[0], bottom])
            else:
                floor = deque([ceiling[0]])
        else:
            while len(floor) > 1 and \
                    slope(floor[-2], bottom) >= slope(floor[-2], floor[-1]):
                floor.pop()
            floor.append(bottom)

    if path[-1][0] != last:
        path.extend(list(ceiling)[1:])

    slopes = np.empty(last)
    for (i0, y0), (i1, y1) in zip(path, path[1:]):
        slopes[i0:i1] = (y1 - y0) / (x[i1] - x[i0])
    return slopes


def _objectives(f, u, v, mass, bound):
    """Primal value, dual value and duality gap of a linked pair."""
    d = np.diff(u)
    primal = 0.5 * np.dot(mass, (f - u) ** 2) + np.dot(bound, np.abs(d))
    bv = np.diff(v)
    dual = np.dot(bv, f) - 0.5 * np.dot(bv, bv / mass)
    gap = max(float(np.dot(bound, np.abs(d)) + np.dot(v[1:-1], d)), 0.0)
    return float(primal), float(dual), gap


def _linked_dual(f, u, mass, bound):
    """Integrate v_{j+1} - v_j = mass_j (f_j - u_j) and project on the box."""
    v = np.concatenate([[0.0], np.cumsum(mass * (f - u))])
    v[-1] = 0.0
    v[1:-1] = np.clip(v[1:-1], -bound, bound)
    return v


def _solve_taut_string(f, mass, bound, opts):
    x = np.concatenate([[0.0], np.cumsum(mass)])
    running = np.concatenate([[0.0], np.cumsum(mass * f)])
    width = np.concatenate([[0.0], bound, [0.0]])
    u = _taut_string(x, running - width, running + width)
    v = _linked_dual(f, u, mass, bound)
    primal, dual, gap = _objectives(f, u, v, mass, bound)
    converged = gap / (1.0 + abs(primal)) <= opts.gap_tolerance
    return _DualResult(u, v, gap, primal, dual, 1, converged)


def _solve_fista(f, mass, bound, opts):
    inverse = 1.0 / mass
    lipschitz = float(np.max(2.0 * (inverse[:-1] + inverse[1:])))
    step = 1.0 / lipschitz

    v = np.zeros(f.size + 1)
    y = v.copy()
    t = 1.0
    best = None
    for iteration in range(1, opts.max_iterations + 1):
        u_y = f - np.diff(y) * inverse
        v_new = np.zeros_like(v)
        v_new[1:-1] = np.clip(y[1:-1] - step * np.diff(u_y), -bound, bound)
        # gradient-mapping restart: the step is always taken, momentum reset
        if opts.restart and np.dot(y - v_new, v_new - v) > 0:
            t = 1.0
            y = v_new.copy()
        else:
            t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
            y = v_new + ((t - 1.0) / t_new) * (v_new - v)
            t = t_new
        v = v_new

        u = f - np.diff(v) * inverse
        primal, dual, gap = _objectives(f, u, v, mass, bound)
        relative = gap / (1.0 + abs(primal))
        if best is None or relative < best[0]:
            best = (relative, _DualResult(u, v.copy(), gap, primal, dual,
                                          iteration, False))
        if relative <= opts.gap_tolerance:
            return best[1]._replace(converged=True)

    if best is None:
        u = f - np.diff(v) * inverse
        primal, dual, gap = _objectives(f, u, v, mass, bound)
        return _DualResult(u, v, gap, primal, dual, opts.max_iterations, False)
    return best[1]._replace(iterations=opts.max_iterations)


def solve_box_dual(f, mass, bound, opts):
    """Solve min over |v_i| <= bound_i of sum (Bv)_j^2 / (2 mass_j) - <Bv, f>.

    Shared by the weighted-TV and weighted-fidelity models.

    Args:
        f (ndarray): cell data.
        mass (ndarray): positive cell masses.
        bound (ndarray): nonnegative box half-widths at interior nodes.
        opts (SolverOptions)

    Returns:
        _DualResult

    """
    if opts.method == 'fista':
        return _solve_fista(f, mass, bound, opts)
    return _solve_taut_string(f, mass, bound, opts)


def _report(kind, grid, result, opts):
    if result.converged:
        logger.info('%s solve n=%d method=%s gap=%.3g iterations=%d',
                    kind, grid.n, opts.method, result.gap, result.iterations)
    else:
        logger.warning('%s solve n=%d method=%s did not reach relative gap '
                       '%.1e (gap=%.3g after %d iterations)', kind, grid.n,
                       opts.method, opts.gap_tolerance, result.gap,
                       result.iterations)


def solve_wtv(f, alpha, opts=None):
    """Solve the weighted-TV problem.

    Args:
        f (Signal): data.
        alpha (WeightField): edge weights, zero allowed.
        opts (SolverOptions): defaults to DEFAULT_OPTIONS.

    Returns:
        Solution: best iterate, flagged converged=False when the gap
                  tolerance was not reached.

    """
    opts = opts or DEFAULT_OPTIONS
    core.check_same_grid(f, alpha)
    bound = alpha.edges_or_fail()
    grid = f.grid
    mass = np.full(grid.n, grid.h)
    result = solve_box_dual(f.values, mass, bound, opts)
    _report('wtv', grid, result, opts)
    return Solution(core.Signal(grid, result.u), result.v, result.gap,
                    result.iterations, result.converged, result.primal,
                    result.dual, opts.method, grid.h)


def objective_wtv(f, alpha, u):
    """(h/2) sum (f - u)^2 + sum alpha_i |d_i|."""
    core.check_same_grid(f, alpha, u)
    residual = f.values - u.values
    return float(0.5 * f.grid.h * np.dot(residual, residual)
                 + core.weighted_tv(u, alpha))


def _check_dual_point(v, grid, bound, name):
    v = np.asarray(v, dtype=float)
    if v.shape != (grid.n + 1,):
        core._fail('%s needs %d node values, got %d', name, grid.n + 1, v.size)
    if v[0] != 0 or v[-1] != 0:
        core._fail('%s must vanish at both end nodes', name)
    slack = 64 * core.EPS * (1.0 + float(np.max(bound, initial=0.0)))
    excess = np.abs(v[1:-1]) - bound
    if excess.size and excess.max() > slack:
        core._fail('%s violates the box at node %d by %.3g', name,
                   int(np.argmax(excess)) + 1, float(excess.max()))
    return v


def dual_objective(f, alpha, v):
    """<Bv, f> - ||Bv||^2 / (2h): a lower bound on the primal optimum.

    Args:
        f (Signal)
        alpha (WeightField)
        v (array): node values with v_0 = v_n = 0 and |v_i| <= alpha_i.

    Returns:
        float

    """
    core.check_same_grid(f, alpha)
    v = _check_dual_point(v, f.grid, alpha.edges_or_fail(), 'dual point')
    bv = np.diff(v)
    return float(np.dot(bv, f.values) - np.dot(bv, bv) / (2.0 * f.grid.h))


def gap_implied_tolerance(solution):
    """Max-norm bound on the distance between a solution and the minimizer.

    Strong convexity gives (m/2) ||u - u*||^2 <= gap with m the smallest cell
    mass; the gap is floored at rounding level.
    """
    floor = 16 * core.EPS * (1.0 + abs(solution.primal))
    return math.sqrt(2.0 * max(solution.gap, floor) / solution.modulus)


def _require(*solutions):
    for solution in solutions:
        if not solution.converged:
            message = 'solve did not converge (gap %.3g)' % solution.gap
            logger.error(message)
            raise NotConvergedError(message)


class SemigroupResult(NamedTuple):
    one_shot: Solution
    two_step: Solution
    distance: float
    tolerance: float
    intermediate: Solution


def semigroup_compose(f, alpha1, alpha2, opts=None, order='weighted-first'):
    """Compare one solve with alpha1 + alpha2 against two successive solves.

    The two answers agree when alpha2 is a scalar applied second. A
    spatially varying alpha2, or the scalar applied first, may separate them.

    Args:
        f (Signal)
        alpha1 (WeightField): spatially varying weight.
        alpha2 (float or WeightField): scalar weight >= 0, or a weight field
            on the grid of f.
        opts (SolverOptions)
        order (str): 'weighted-first' solves with alpha1 then alpha2;
                     'scalar-first' reverses the order.

    Returns:
        SemigroupResult: distance is the max-norm gap between the two
                         answers, tolerance the summed gap-implied tolerances.

    Raises:
        NotConvergedError: if any of the three solves misses the tolerance.

    """
    if order not in ('weighted-first', 'scalar-first'):
        core._fail('unknown order %r', order)
    if isinstance(alpha2, core.WeightField):
        second_weight = alpha2
        combined = core.add_weights(alpha1, alpha2)
    else:
        if alpha2 < 0:
            core._fail('alpha2 must be a nonnegative scalar, got %s', alpha2)
        second_weight = core.realize_weight(core.Scalar(alpha2), f.grid)
        combined = core.add_scalar(alpha1, alpha2)
    one_shot = solve_wtv(f, combined, opts)
    if order == 'weighted-first':
        first = solve_wtv(f, alpha1, opts)
        second = solve_wtv(first.u, second_weight, opts)
    else:
        first = solve_wtv(f, second_weight, opts)
        second = solve_wtv(first.u, alpha1, opts)
    _require(one_shot, first, second)
    distance = float(np.max(np.abs(one_shot.u.values - second.u.values)))
    tolerance = sum(gap_implied_tolerance(s) for s in (one_shot, first, second))
    logger.info('semigroup %s: distance %.3g, tolerance %.3g',
                order, distance, tolerance)
    return SemigroupResult(one_shot, second, distance, tolerance, first)


def noncommuting_configuration(n=1000):
    """Data and weights whose scalar-first composition differs from one solve.

    f = 2x on (-1, 1), alpha1 = 5 |x - 0.8|, alpha2 = 0.2. The scalar step
    flattens f near 0.8 below the data; the weighted step then splits there.

    Returns:
        (Signal, WeightField, float)

    """
    grid = core.make_grid(-1.0, 1.0, n)
    f = core.sample(grid, '2*x')
    alpha1 = core.realize_weight(core.AbsValue(5.0, 0.0, 0.8), grid)
    return f, alpha1, 0.2


class VanishingStep(NamedTuple):
    floor: float
    solution: Solution
    distance: float
    successive: float
    objective: float


def vanishing_weight_limit(f, alpha, floors, opts=None, mode='add'):
    """Solve along a decreasing sequence of weight floors.

    Args:
        f (Signal)
        alpha (WeightField): possibly vanishing weight.
        floors (sequence): strictly decreasing positive floors.
        opts (SolverOptions)
        mode (str): 'add' uses alpha + floor, 'max' uses max(alpha, floor).

    Returns:
        list of VanishingStep: distance to the last solution, distance to the
        previous one (nan for the first) and the minimal objective value.

    """
    floors = [float(floor) for floor in floors]
    if not floors or min(floors) <= 0:
        core._fail('floors must be positive')
    if any(f2 >= f1 for f1, f2 in zip(floors, floors[1:])):
        core._fail('floors must be strictly decreasing: %s', floors)
    solutions = []
    objectives = []
    for floor in floors:
        lifted = core.with_floor(alpha, floor, mode)
        solution = solve_wtv(f, lifted, opts)
        _require(solution)
        solutions.append(solution)
        objectives.append(objective_wtv(f, lifted, solution.u))
    final = solutions[-1].u.values
    steps = []
    previous = None
    for floor, solution, objective in zip(floors, solutions, objectives):
        values = solution.u.values
        successive = math.nan if previous is None \
            else float(np.max(np.abs(values - previous)))
        steps.append(VanishingStep(floor, solution,
                                   float(np.max(np.abs(values - final))),
                                   successive, objective))
        previous = values
    return steps


def objectives_monotone(steps, slack=1e-12):
    """Whether the minimal objective decreases along the floors."""
    values = [step.objective for step in steps]
    scale = 1.0 + max(abs(value) for value in values)
    return all(b <= a + slack * scale for a, b in zip(values, values[1:]))
