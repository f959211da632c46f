"""Weighted-fidelity TV module.

Solves

    min_u  (h/2) sum_j w_j (f_j - u_j)^2 + sum_i |u_{i+1} - u_i|

with the dual box |v_i| <= 1 and the linkage v_{j+1} - v_j = h w_j (f_j - u_j).
Cells where w vanishes are lifted to a small floor so the problem keeps a
unique solution; the floor is reported on the solution.

Example:
    from wtv1d import core, wfid

    grid = core.make_grid(-1, 1, 2048)
    f = core.sample(grid, '2*x')
    w = core.realize_fidelity_weight(core.Scalar(1.0), grid)
    solution = wfid.solve_wfid(f, w)
    form = wfid.clamp_form_check(solution.u, f)

"""

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from wtv1d import core
from wtv1d import wtv


logger = logging.getLogger(__name__)

DEFAULT_FLOOR_RATIO = 1e-8


@dataclass(frozen=True, eq=False)
class FidSolution(wtv.Solution):
    floor_used: float = 0.0


def floored_masses(w, floor_ratio=DEFAULT_FLOOR_RATIO):
    """Cell masses h * max(w_j, floor) and the floor applied.

    Args:
        w (WeightField): fidelity weight with cell values.
        floor_ratio (float): floor relative to max w.

    Returns:
        (ndarray, float)

    """
    values = w.cells_or_fail()
    top = float(values.max())
    if top <= 0:
        core._fail('fidelity weight vanishes everywhere')
    if not 0 < floor_ratio < 1:
        core._fail('floor_ratio must lie in (0, 1), got %s', floor_ratio)
    floor = floor_ratio * top
    return w.grid.h * np.maximum(values, floor), floor


def solve_wfid(f, w, opts=None, floor_ratio=DEFAULT_FLOOR_RATIO):
    """Solve the weighted-fidelity TV problem.

    Args:
        f (Signal): data.
        w (WeightField): fidelity weight, cell values >= 0.
        opts (SolverOptions): defaults to wtv.DEFAULT_OPTIONS.
        floor_ratio (float): cells below floor_ratio * max(w) are raised.

    Returns:
        FidSolution

    """
    opts = opts or wtv.DEFAULT_OPTIONS
    core.check_same_grid(f, w)
    grid = f.grid
    mass, floor = floored_masses(w, floor_ratio)
    lifted = int(np.count_nonzero(w.cell_values < floor))
    if lifted:
        logger.debug('raised %d cells to the fidelity floor %.3g', lifted, floor)
    result = wtv.solve_box_dual(f.values, mass, np.ones(grid.n - 1), opts)
    wtv._report('wfid', grid, result, opts)
    return FidSolution(core.Signal(grid, result.u), result.v, result.gap,
                       result.iterations, result.converged, result.primal,
                       result.dual, opts.method, float(mass.min()), floor)


def objective_wfid(f, w, u):
    """(h/2) sum w_j (f_j - u_j)^2 + TV(u), with the raw (unfloored) w."""
    core.check_same_grid(f, w, u)
    residual = f.values - u.values
    return float(0.5 * f.grid.h * np.dot(w.cells_or_fail(), residual ** 2)
                 + core.total_variation(u))


def dual_objective_wfid(f, w, v, floor_ratio=DEFAULT_FLOOR_RATIO):
    """sum_j (Bv)_j f_j - (Bv)_j^2 / (2 h w_j) over the floored weight."""
    core.check_same_grid(f, w)
    grid = f.grid
    v = wtv._check_dual_point(v, grid, np.ones(grid.n - 1), 'dual point')
    mass, _ = floored_masses(w, floor_ratio)
    bv = np.diff(v)
    return float(np.dot(bv, f.values) - 0.5 * np.dot(bv, bv / mass))


class ClampForm(NamedTuple):
    is_clamp: bool
    x1: float
    x2: float


def clamp_form_check(u, f, tol=None):
    """Test whether u = clamp(f, u_first, u_last) for strictly monotone f.

    x1 and x2 are coordinates, not cell indices: the ends of the contact set
    {u = f}, i.e. the domain end when contact starts at the first (or ends at
    the last) cell, otherwise the point where f crosses the plateau value.
    Without contact both equal the crossing of the constant value.

    Args:
        u (Signal)
        f (Signal): strictly monotone samples.
        tol (float): defaults to 1e-6 (1 + max|f|).

    Returns:
        ClampForm

    """
    core.check_same_grid(u, f)
    grid = f.grid
    fv = f.values
    uv = u.values
    d = np.diff(fv)
    if not (np.all(d > 0) or np.all(d < 0)):
        core._fail('clamp form needs strictly monotone data')
    if tol is None:
        tol = 1e-6 * (1.0 + float(np.abs(fv).max()))
    lo, hi = sorted((uv[0], uv[-1]))
    is_clamp = bool(np.max(np.abs(uv - np.clip(fv, lo, hi))) <= tol)

    centers = grid.centers
    if d[0] < 0:
        centers, fv_sorted = centers[::-1], fv[::-1]
    else:
        fv_sorted = fv

    def crossing(value):
        return float(np.interp(value, fv_sorted, centers))

    contact = np.flatnonzero(np.abs(uv - fv) <= tol)
    if contact.size == 0:
        x1 = x2 = crossing(0.5 * (uv[0] + uv[-1]))
    else:
        x1 = grid.a if contact[0] == 0 else crossing(uv[0])
        x2 = grid.b if contact[-1] == grid.n - 1 else crossing(uv[-1])
    return ClampForm(is_clamp, x1, x2)


class ConstantCondition(NamedTuple):
    phi1_b: float
    phi2_a: float
    k: float
    sufficient: bool
    predicts_constant: bool


def constant_solution_condition(w, lam):
    """Decide whether the solution for f = lam * x is constant.

    With cell masses m_j = h w_j and phi1(x) = lam sum_{x_j < x} m_j (x_j - x),
    phi2(x) = -lam sum_{x_j > x} m_j (x_j - x), the constant candidate is the
    weighted mean lam * xi and its dual peaks at k = phi1(xi). The solution is
    constant iff |k| <= 1; |phi1(b)| <= 1 or |phi2(a)| <= 1 is sufficient.

    Args:
        w (WeightField): fidelity weight with cell values, not all zero.
        lam (float): slope of the data.

    Returns:
        ConstantCondition

    """
    grid = w.grid
    mass = grid.h * w.cells_or_fail()
    total = float(mass.sum())
    if total <= 0:
        core._fail('fidelity weight vanishes everywhere')
    x = grid.centers
    xi = float(np.dot(mass, x)) / total
    phi1_b = lam * float(np.dot(mass, x - grid.b))
    phi2_a = -lam * float(np.dot(mass, x - grid.a))
    left = x < xi
    k = lam * float(np.dot(mass[left], x[left] - xi))
    sufficient = abs(phi1_b) <= 1 or abs(phi2_a) <= 1
    return ConstantCondition(phi1_b, phi2_a, k, sufficient, abs(k) <= 1)


def _balls(grid, centers, level, height):
    x = grid.centers
    values = np.zeros(grid.n)
    for center in centers:
        values[np.abs(x - center) < 1.0 / level] += height
    return core.WeightField(grid, cell_values=values, symbolic=False)


def concentrating_family(grid, centers, level):
    """w_n = n^2 on the balls B(x_i, 1/n): mass concentrates at the jumps."""
    return _balls(grid, centers, level, float(level) ** 2)


def vanishing_mass_family(grid, centers, level):
    """w_n = n^-2 on the balls B(x_i, 1/n): total mass tends to zero."""
    return _balls(grid, centers, level, float(level) ** -2)


FAMILIES = {'concentrating': concentrating_family,
            'vanishing-mass': vanishing_mass_family}


class RecoveryLevel(NamedTuple):
    level: int
    error: float
    tv: float
    solution: FidSolution


def pc_limit_recovery(f0, eta, jumps, levels, grid=None, opts=None,
                      family='concentrating'):
    """Recover a piecewise constant f0 from f0 + eta with fidelity weights
    concentrating at its jumps.

    Args:
        f0: piecewise constant spec accepted by core.sample.
        eta: continuous noise spec vanishing at every jump.
        jumps (list): jump locations of f0.
        levels (list): strictly increasing positive levels n.
        grid (Grid): defaults to 2048 cells on (-1, 1).
        opts (SolverOptions)
        family (str): 'concentrating' or 'vanishing-mass'.

    Returns:
        list of RecoveryLevel with the sup-error ||f0 - u_n|| per level.

    Raises:
        ValueError: if eta does not vanish at the jumps or a level is too
                    fine for the grid.

    """
    grid = grid or core.make_grid(-1.0, 1.0, 2048)
    if family not in FAMILIES:
        core._fail('unknown weight family %r, expected one of %s',
                   family, sorted(FAMILIES))
    levels = [int(level) for level in levels]
    if not levels or min(levels) < 1:
        core._fail('levels must be positive integers')
    if any(l2 <= l1 for l1, l2 in zip(levels, levels[1:])):
        core._fail('levels must be strictly increasing: %s', levels)
    if 1.0 / levels[-1] < 3 * grid.h:
        core._fail('level %d is too fine for a grid with h = %.3g',
                   levels[-1], grid.h)
    jumps = [float(x) for x in jumps]
    if not jumps:
        core._fail('at least one jump location is required')
    clean = core.sample(grid, f0)
    noise = core.sample(grid, eta)
    scale = 1.0 + float(np.abs(clean.values).max())
    at_jumps = core.evaluate(eta, np.asarray(jumps))
    if np.abs(at_jumps).max() > 1e-9 * scale:
        core._fail('noise must vanish at the jumps, got %s', at_jumps.tolist())

    f = clean + noise
    make_weight = FAMILIES[family]
    results = []
    for level in levels:
        solution = solve_wfid(f, make_weight(grid, jumps, level), opts)
        error = float(np.abs(clean.values - solution.u.values).max())
        logger.info('%s level %d: sup error %.4g', family, level, error)
        results.append(RecoveryLevel(level, error,
                                     core.total_variation(solution.u),
                                     solution))
    return results


def fid_jump_containment(u, f, w, tol=None):
    """Edges where u jumps, w > 0 on both sides and f does not jump.

    Args:
        u (Signal)
        f (Signal)
        w (WeightField): cell values; edges touching w = 0 are exempt.
        tol (float): jump threshold, defaults to core.default_jump_threshold(u).

    Returns:
        core.EdgeReport: excess is |d_i(u)|.

    """
    core.check_same_grid(u, f, w)
    if tol is None:
        tol = core.default_jump_threshold(u)
    cells = w.cells_or_fail()
    support = (cells[:-1] > 0) & (cells[1:] > 0)
    du = np.abs(core.edge_differences(u))
    df = np.abs(core.edge_differences(f))
    offending = support & (du > tol) & (df <= tol)
    return core.edge_report(u.grid, support, offending, du)


def fid_jump_clamp_report(u, f, w=None, tol=None):
    """At edges where both f and u jump, u^l and u^r stay between f^l and f^r.

    Args:
        u (Signal)
        f (Signal)
        w (WeightField): optional; edges touching w = 0 are skipped.
        tol (float): defaults to 1e-6 (1 + max|f|).

    Returns:
        core.EdgeReport: excess is the distance outside [min f, max f].

    """
    core.check_same_grid(u, f)
    if tol is None:
        tol = 1e-6 * (1.0 + float(np.abs(f.values).max()))
    fv, uv = f.values, u.values
    du = np.abs(np.diff(uv))
    df = np.abs(np.diff(fv))
    checked = (df > core.default_jump_threshold(f)) \
        & (du > core.default_jump_threshold(u))
    if w is not None:
        core.check_same_grid(u, w)
        cells = w.cells_or_fail()
        checked &= (cells[:-1] > 0) & (cells[1:] > 0)
    low = np.minimum(fv[:-1], fv[1:])
    high = np.maximum(fv[:-1], fv[1:])
    excess = np.zeros_like(low)
    for side in (uv[:-1], uv[1:]):
        excess = np.maximum(excess, np.maximum(low - side, side - high))
    return core.edge_report(u.grid, checked, checked & (excess > tol), excess)


def locally_constant_report(u, f, w, tol=None, floor=0.0):
    """Du vanishes between neighbouring cells where u - f keeps a strict sign.

    An edge is checked when both adjacent cells have |f - u| > tol with the
    same sign and w above the floor.

    Returns:
        core.EdgeReport: excess is |d_i(u)|.

    """
    core.check_same_grid(u, f, w)
    if tol is None:
        tol = 1e-6 * (1.0 + float(np.abs(f.values).max()))
    residual = u.values - f.values
    side = np.where(residual > tol, 1, np.where(residual < -tol, -1, 0))
    cells = w.cells_or_fail()
    checked = (side[:-1] != 0) & (side[:-1] == side[1:]) \
        & (cells[:-1] > floor) & (cells[1:] > floor)
    du = np.abs(core.edge_differences(u))
    return core.edge_report(u.grid, checked, checked & (du > tol), du)
