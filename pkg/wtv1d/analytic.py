"""Closed-form solutions used as ground truth for the solvers.

Affine data f = lam * x on (-L, L) with the weight alpha = mu |x| + c falls in
one of three regimes:

    two-plateaus-with-jump   mu L + c < lam L^2 / 2
    pure-step                mu L + c >= lam L^2 / 2 > c
    zero                     c >= lam L^2 / 2

Example:
    from wtv1d import analytic, core

    grid = core.make_grid(-1, 1, 4096)
    u, case = analytic.affine_abs_solution(1, 2, 0.2, 0.3, grid)

"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from wtv1d import core


logger = logging.getLogger(__name__)

TWO_PLATEAUS = 'two-plateaus-with-jump'
PURE_STEP = 'pure-step'
ZERO = 'zero'
REGIMES = (TWO_PLATEAUS, PURE_STEP, ZERO)


def _positive(**params):
    for name, value in params.items():
        if not (math.isfinite(value) and value > 0):
            core._fail('%s must be positive, got %s', name, value)


def _check_symmetric(grid, L):
    if not (math.isclose(grid.a, -L) and math.isclose(grid.b, L)):
        core._fail('grid (%s, %s) does not span (-%s, %s)',
                   grid.a, grid.b, L, L)


def regime_of(L, lam, mu, c):
    """Regime of the affine/absolute-value family."""
    _positive(L=L, lam=lam, mu=mu, c=c)
    half = lam * L * L / 2.0
    if mu * L + c < half:
        return TWO_PLATEAUS
    if c < half:
        return PURE_STEP
    return ZERO


@dataclass(frozen=True)
class AffineAbsCase:
    L: float
    lam: float
    mu: float
    c: float
    regime: str

    @property
    def contact_end(self):
        """x_{mu,c}: end of the region where u follows f; 0 outside regime one."""
        if self.regime != TWO_PLATEAUS:
            return 0.0
        return self.L - math.sqrt(2 * self.lam * self.mu * self.L
                                  + 2 * self.lam * self.c) / self.lam

    @property
    def plateau(self):
        """Value of u on the right plateau."""
        if self.regime == TWO_PLATEAUS:
            return self.lam * self.contact_end + self.mu
        if self.regime == PURE_STEP:
            return self.lam * self.L / 2.0 - self.c / self.L
        return 0.0

    @property
    def jump(self):
        """Jump of u at the origin."""
        if self.regime == TWO_PLATEAUS:
            return 2.0 * self.mu
        return 2.0 * self.plateau

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.regime == TWO_PLATEAUS:
            inner = np.minimum(self.lam * np.abs(x) + self.mu, self.plateau)
            return np.sign(x) * inner
        return np.sign(x) * self.plateau

    def dual(self, x):
        """The certificate v(x) on [-L, L]; v = -alpha on the contact set."""
        x = np.asarray(x, dtype=float)
        t = np.abs(x)
        lam, L = self.lam, self.L
        plateau = self.plateau
        outer = lam * (t * t - L * L) / 2.0 - plateau * (t - L)
        if self.regime == TWO_PLATEAUS:
            contact = -(self.mu * t + self.c)
            return np.where(t < self.contact_end, contact, outer)
        return outer


def affine_abs_case(L, lam, mu, c):
    return AffineAbsCase(float(L), float(lam), float(mu), float(c),
                         regime_of(L, lam, mu, c))


def affine_abs_solution(L, lam, mu, c, grid):
    """Sample the closed-form solution for f = lam x, alpha = mu |x| + c.

    Args:
        L (float): half-width of the domain.
        lam (float): slope of the data.
        mu (float): slope of the weight.
        c (float): weight at the origin.
        grid (Grid): must span (-L, L).

    Returns:
        (Signal, AffineAbsCase)

    """
    case = affine_abs_case(L, lam, mu, c)
    _check_symmetric(grid, case.L)
    logger.debug('affine/abs case %s: plateau %.6g jump %.6g',
                 case.regime, case.plateau, case.jump)
    return core.signal_from_values(grid, case(grid.centers)), case


def affine_abs_dual(case, grid):
    """Certificate of an affine/abs case at the grid nodes."""
    _check_symmetric(grid, case.L)
    v = case.dual(grid.nodes)
    v[0] = v[-1] = 0.0
    return v


def scalar_tv_step_solution(L, s, alpha, grid):
    """Scalar-TV solution for f = s sign(x): sign(x) max(s - alpha / L, 0)."""
    _positive(L=L, s=s, alpha=alpha)
    _check_symmetric(grid, L)
    height = max(s - alpha / L, 0.0)
    return core.signal_from_values(grid, np.sign(grid.centers) * height)


def pc_exact_weight(intervals, f_bound, slope_margin=1.2, centers=None):
    """Tent weight vanishing at the interval ends with slopes above 2 f_bound.

    With ``centers`` off the midpoints the tents are asymmetric; the rising
    slope is chosen so that both flanks stay steeper than 2 f_bound times the
    margin.

    Args:
        intervals (list): contiguous (l, r) pairs partitioning the domain.
        f_bound (float): bound on |f|.
        slope_margin (float): factor > 1 above the critical slope.
        centers (list): optional tent peaks, one per interval.

    Returns:
        core.TentPerInterval

    """
    _positive(f_bound=f_bound)
    if not slope_margin > 1:
        core._fail('slope margin must exceed 1, got %s', slope_margin)
    intervals = [(float(l), float(r)) for l, r in intervals]
    if any(r <= l for l, r in intervals):
        core._fail('degenerate interval in %s', intervals)
    critical = slope_margin * 2.0 * f_bound
    if centers is None:
        return core.TentPerInterval(tuple(intervals),
                                    (critical,) * len(intervals))
    centers = [float(c) for c in centers]
    if len(centers) != len(intervals) or \
            any(not l < c < r for (l, r), c in zip(intervals, centers)):
        core._fail('need one tent peak inside each interval, got %s', centers)
    slopes = tuple(critical * max(1.0, (r - c) / (c - l))
                   for (l, r), c in zip(intervals, centers))
    return core.TentPerInterval(tuple(intervals), slopes, tuple(centers))
