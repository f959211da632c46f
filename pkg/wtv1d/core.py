"""Core module: grids, signals, weights and discrete BV calculus.

Signals are cell-wise constant on a uniform grid of ``n`` cells. The discrete
derivative ``Du`` lives on the ``n - 1`` interior edges, weights for the
regularizer are sampled at those edges and weights for the fidelity term at
the cell centers. All arrays are 0-based:

    cells   j = 0 .. n-1   centers a + (j + 1/2) h
    edges   i = 0 .. n-2   coordinate a + (i + 1) h, d_i = u_{i+1} - u_i
    nodes   k = 0 .. n     coordinate a + k h (edge i is node i + 1)

Example:
    from wtv1d import core

    grid = core.make_grid(-1, 1, 4096)
    f = core.sample(grid, '2*x')
    alpha = core.realize_weight(core.AbsValue(mu=0.2, c=0.3), grid)

"""

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

import pandas


logger = logging.getLogger(__name__)

EPS = np.finfo(float).eps


def _fail(message, *args):
    """Log and raise a ValueError with the formatted message."""
    text = message % args if args else message
    logger.error(text)
    raise ValueError(text)


@dataclass(frozen=True)
class Grid:
    """Uniform partition of (a, b) into n cells."""

    a: float
    b: float
    n: int

    @property
    def h(self):
        return (self.b - self.a) / self.n

    @property
    def centers(self):
        return self.a + (np.arange(self.n) + 0.5) * self.h

    @property
    def edges(self):
        return self.a + np.arange(1, self.n) * self.h

    @property
    def nodes(self):
        return self.a + np.arange(self.n + 1) * self.h

    def nearest_edge(self, x):
        """Index of the interior edge closest to x (clamped to the range)."""
        index = int(round((x - self.a) / self.h)) - 1
        return min(max(index, 0), self.n - 2)

    def is_edge(self, x, rtol=1e-9):
        """Whether x coincides with an interior edge."""
        k = (x - self.a) / self.h
        return 1 <= round(k) <= self.n - 1 and abs(k - round(k)) <= rtol * self.n


def make_grid(a, b, n):
    """Build a Grid after checking a < b and n >= 2.

    Args:
        a (float): left endpoint.
        b (float): right endpoint.
        n (int): number of cells.

    Returns:
        Grid

    """
    if not (math.isfinite(a) and math.isfinite(b)) or a >= b:
        _fail('invalid interval (%s, %s)', a, b)
    if int(n) != n or n < 2:
        _fail('grid needs at least two cells, got %s', n)
    return Grid(float(a), float(b), int(n))


@dataclass(frozen=True, eq=False)
class Signal:
    """Cell values of a piecewise constant function on a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.n,):
            _fail('signal has %d values, grid has %d cells',
                  values.size, self.grid.n)
        if not np.all(np.isfinite(values)):
            _fail('signal contains non-finite values')
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    def __len__(self):
        return self.grid.n

    def __mul__(self, scale):
        return Signal(self.grid, self.values * scale)

    __rmul__ = __mul__

    def __add__(self, other):
        if isinstance(other, Signal):
            check_same_grid(self, other)
            return Signal(self.grid, self.values + other.values)
        return Signal(self.grid, self.values + other)

    def left_right(self, i):
        """One-sided limits (u^l, u^r) at interior edge i."""
        return self.values[i], self.values[i + 1]


def signal_from_values(grid, values):
    """Wrap cell values on a grid; the values are copied and validated."""
    return Signal(grid, values)


def check_same_grid(*items):
    """Raise ValueError unless every item lives on the same grid."""
    grids = {item.grid for item in items}
    if len(grids) > 1:
        _fail('grid mismatch: %s', sorted(grids, key=repr))


def _piecewise_constant(x, jumps, values):
    jumps = list(jumps)
    values = list(values)
    if len(values) != len(jumps) + 1:
        _fail('piecewise constant spec needs len(values) == len(jumps) + 1')
    if any(j2 <= j1 for j1, j2 in zip(jumps, jumps[1:])):
        _fail('jump locations must be strictly increasing')
    pieces = np.searchsorted(np.asarray(jumps, dtype=float), x,
                             side='right')
    return np.asarray(values, dtype=float)[pieces]


def evaluate(spec, x):
    """Evaluate a function description at arbitrary points.

    Args:
        spec: a callable of a numpy array, an arithmetic expression in ``x``
              (``pi`` and the numpy math functions known to pandas.eval are
              available), a number, or a mapping ``{"jumps": [...],
              "values": [...]}`` describing a piecewise constant function.
        x (array): evaluation points.

    Returns:
        ndarray of floats, same shape as x.

    """
    x = np.asarray(x, dtype=float)
    if callable(spec):
        values = spec(x)
    elif isinstance(spec, dict):
        try:
            values = _piecewise_constant(x, spec['jumps'], spec['values'])
        except KeyError as error:
            _fail('piecewise constant spec is missing %s', error)
    elif isinstance(spec, str):
        try:
            values = pandas.eval(spec, engine='python',
                                 local_dict={'x': x, 'pi': np.pi})
        except Exception as error:
            _fail('cannot evaluate %r: %s', spec, error)
    else:
        values = spec
    values = np.broadcast_to(np.asarray(values, dtype=float), x.shape).copy()
    if not np.all(np.isfinite(values)):
        _fail('non-finite evaluation of %r', spec)
    return values


def sample(grid, spec):
    """Evaluate a function description at the cell centers.

    Args:
        grid (Grid): target grid.
        spec: anything ``evaluate`` accepts.

    Returns:
        Signal

    """
    return Signal(grid, evaluate(spec, grid.centers))


def edge_differences(u):
    """Discrete measure Du: d_i = u_{i+1} - u_i on the interior edges."""
    return np.diff(u.values)


def total_variation(u):
    return float(np.abs(np.diff(u.values)).sum())


def weighted_tv(u, alpha):
    """Sum of alpha_i |d_i| over the interior edges.

    Args:
        u (Signal)
        alpha (WeightField): must carry edge values.

    Returns:
        float

    """
    check_same_grid(u, alpha)
    return float(np.dot(alpha.edges_or_fail(), np.abs(np.diff(u.values))))


@dataclass(frozen=True)
class Jump:
    index: int
    location: float
    jump: float
    magnitude: float


@dataclass(frozen=True)
class JumpReport:
    """Edges where |d_i| exceeds the threshold, sorted by location."""

    jumps: tuple
    threshold: float

    def __len__(self):
        return len(self.jumps)

    def __iter__(self):
        return iter(self.jumps)

    @property
    def indices(self):
        return [jump.index for jump in self.jumps]


def default_jump_threshold(u):
    """10 sqrt(eps) times the range of the signal, at least 10 sqrt(eps)(1 + max|u|)."""
    values = u.values
    spread = float(values.max() - values.min())
    scale = 1.0 + float(np.abs(values).max())
    return 10.0 * math.sqrt(EPS) * max(spread, scale)


def jump_set(u, threshold=None):
    """Collect the edges where u jumps by more than the threshold.

    Args:
        u (Signal)
        threshold (float): defaults to default_jump_threshold(u).

    Returns:
        JumpReport

    """
    if threshold is None:
        threshold = default_jump_threshold(u)
    if threshold < 0:
        _fail('jump threshold must be nonnegative, got %s', threshold)
    d = np.diff(u.values)
    edges = u.grid.edges
    jumps = tuple(Jump(int(i), float(edges[i]), float(d[i]), float(abs(d[i])))
                  for i in np.flatnonzero(np.abs(d) > threshold))
    return JumpReport(jumps, float(threshold))


# weight specifications

@dataclass(frozen=True)
class Scalar:
    value: float

    kind = 'scalar'

    def __post_init__(self):
        if not self.value >= 0:
            _fail('scalar weight must be nonnegative, got %s', self.value)

    def __call__(self, x):
        return np.full(np.shape(x), float(self.value))

    def kinks(self, grid):
        return []


@dataclass(frozen=True)
class AbsValue:
    """alpha(x) = mu |x - x0| + c."""

    mu: float
    c: float
    x0: float = 0.0

    kind = 'abs'

    def __post_init__(self):
        if not (self.mu >= 0 and self.c >= 0):
            _fail('abs weight needs mu >= 0 and c >= 0, got mu=%s c=%s',
                  self.mu, self.c)

    def __call__(self, x):
        return self.mu * np.abs(np.asarray(x, dtype=float) - self.x0) + self.c

    def kinks(self, grid):
        if self.mu == 0 or not grid.a < self.x0 < grid.b:
            return []
        return [(self.x0, 2.0 * self.mu)]


@dataclass(frozen=True)
class PiecewiseAffine:
    """Continuous interpolation of values at breakpoints, constant outside."""

    breakpoints: tuple
    values: tuple

    kind = 'pwa'

    def __post_init__(self):
        breakpoints = tuple(float(p) for p in self.breakpoints)
        values = tuple(float(v) for v in self.values)
        if len(breakpoints) != len(values) or not breakpoints:
            _fail('pwa weight needs as many values as breakpoints')
        if any(p2 <= p1 for p1, p2 in zip(breakpoints, breakpoints[1:])):
            _fail('pwa breakpoints must be strictly increasing')
        if min(values) < 0:
            _fail('pwa weight values must be nonnegative')
        object.__setattr__(self, 'breakpoints', breakpoints)
        object.__setattr__(self, 'values', values)

    def __call__(self, x):
        return np.interp(x, self.breakpoints, self.values)

    @property
    def slopes(self):
        p = np.asarray(self.breakpoints)
        return np.diff(self.values) / np.diff(p)

    def kinks(self, grid):
        outer = np.concatenate([[0.0], self.slopes, [0.0]])
        changes = np.diff(outer)
        return [(p, float(s)) for p, s in zip(self.breakpoints, changes)
                if grid.a < p < grid.b and s != 0]


@dataclass(frozen=True)
class TentPerInterval:
    """One tent per interval, zero at both interval ends.

    On (l, r) with peak at c the weight rises with ``slope`` from l and falls
    linearly back to zero at r. ``centers`` defaults to the midpoints.
    """

    intervals: tuple
    slopes: tuple
    centers: tuple = None

    kind = 'tent'

    def __post_init__(self):
        intervals = tuple((float(l), float(r)) for l, r in self.intervals)
        slopes = tuple(float(s) for s in self.slopes)
        if len(slopes) != len(intervals) or not intervals:
            _fail('tent weight needs one slope per interval')
        if any(r <= l for l, r in intervals):
            _fail('degenerate tent interval in %s', intervals)
        if any(l2 != r1 for (_, r1), (l2, _) in zip(intervals, intervals[1:])):
            _fail('tent intervals must be contiguous')
        if min(slopes) <= 0:
            _fail('tent slopes must be positive')
        if self.centers is None:
            centers = tuple(0.5 * (l + r) for l, r in intervals)
        else:
            centers = tuple(float(c) for c in self.centers)
        if any(not l < c < r for (l, r), c in zip(intervals, centers)):
            _fail('tent peaks must lie inside their intervals')
        object.__setattr__(self, 'intervals', intervals)
        object.__setattr__(self, 'slopes', slopes)
        object.__setattr__(self, 'centers', centers)

    def _as_pwa(self):
        points = [self.intervals[0][0]]
        values = [0.0]
        for (l, r), c, s in zip(self.intervals, self.centers, self.slopes):
            points.extend([c, r])
            values.extend([s * (c - l), 0.0])
        return PiecewiseAffine(tuple(points), tuple(values))

    @property
    def peaks(self):
        return tuple(s * (c - l) for (l, _), c, s
                     in zip(self.intervals, self.centers, self.slopes))

    def __call__(self, x):
        return self._as_pwa()(x)

    def kinks(self, grid):
        return self._as_pwa().kinks(grid)


@dataclass(frozen=True)
class Sampled:
    """Explicit samples: edge values for alpha, cell values for w."""

    values: tuple

    kind = 'sampled'

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if not all(math.isfinite(v) and v >= 0 for v in values):
            _fail('sampled weights must be finite and nonnegative')
        object.__setattr__(self, 'values', values)

    def kinks(self, grid):
        return []


WEIGHT_KINDS = {cls.kind: cls for cls in
                (Scalar, AbsValue, PiecewiseAffine, TentPerInterval, Sampled)}


def weight_spec_from_json(obj):
    """Build a weight spec from its JSON description.

    Accepted forms::

        {"kind": "scalar", "value": 0.5}
        {"kind": "abs", "mu": 0.2, "c": 0.3, "x0": 0}
        {"kind": "pwa", "breakpoints": [-1, 0, 1], "values": [1, 0, 1]}
        {"kind": "tent", "intervals": [[-1, 0], [0, 1]], "slopes": [3, 3]}
        {"kind": "sampled", "values": [...]}

    Args:
        obj (dict or str): parsed JSON or a JSON string.

    Returns:
        weight spec

    """
    if isinstance(obj, str):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as error:
            _fail('malformed weight JSON: %s', error)
    if not isinstance(obj, dict) or obj.get('kind') not in WEIGHT_KINDS:
        _fail('weight JSON needs a kind among %s', sorted(WEIGHT_KINDS))
    params = {key: value for key, value in obj.items() if key != 'kind'}
    kind = obj['kind']
    try:
        if kind == 'scalar':
            return Scalar(float(params['value']))
        if kind == 'abs':
            return AbsValue(float(params['mu']), float(params['c']),
                            float(params.get('x0', 0.0)))
        if kind == 'pwa':
            return PiecewiseAffine(tuple(params['breakpoints']),
                                   tuple(params['values']))
        if kind == 'tent':
            centers = params.get('centers')
            return TentPerInterval(
                tuple(tuple(pair) for pair in params['intervals']),
                tuple(params['slopes']),
                tuple(centers) if centers is not None else None)
        return Sampled(tuple(params['values']))
    except (KeyError, TypeError) as error:
        _fail('weight JSON of kind %s is missing %s', kind, error)


def weight_spec_to_json(spec):
    if isinstance(spec, Scalar):
        return {'kind': 'scalar', 'value': spec.value}
    if isinstance(spec, AbsValue):
        return {'kind': 'abs', 'mu': spec.mu, 'c': spec.c, 'x0': spec.x0}
    if isinstance(spec, PiecewiseAffine):
        return {'kind': 'pwa', 'breakpoints': list(spec.breakpoints),
                'values': list(spec.values)}
    if isinstance(spec, TentPerInterval):
        return {'kind': 'tent', 'intervals': [list(i) for i in spec.intervals],
                'slopes': list(spec.slopes), 'centers': list(spec.centers)}
    return {'kind': 'sampled', 'values': list(spec.values)}


def parse_weight_shorthand(text):
    """Parse ``scalar:A`` or ``abs:MU:C[:X0]``; anything else is JSON."""
    text = text.strip()
    if text.startswith('{'):
        return weight_spec_from_json(text)
    parts = text.split(':')
    try:
        if parts[0] == 'scalar' and len(parts) == 2:
            return Scalar(float(parts[1]))
        if parts[0] == 'abs' and len(parts) in (3, 4):
            return AbsValue(*(float(p) for p in parts[1:]))
        if len(parts) == 1:
            return Scalar(float(text))
    except ValueError:
        pass
    _fail('malformed weight shorthand %r', text)


@dataclass(frozen=True, eq=False)
class WeightField:
    """A weight spec realized on a grid.

    ``dprime_jumps`` maps an edge index to the jump of the derivative of the
    weight there; ``symbolic`` is False when that map is unknown (sampled
    weights) rather than empty.
    """

    grid: Grid
    edge_values: np.ndarray = None
    cell_values: np.ndarray = None
    dprime_jumps: dict = field(default_factory=dict)
    symbolic: bool = True

    def __post_init__(self):
        for name, size in (('edge_values', self.grid.n - 1),
                           ('cell_values', self.grid.n)):
            values = getattr(self, name)
            if values is None:
                continue
            values = np.array(values, dtype=float)
            if values.shape != (size,):
                _fail('%s needs %d entries, got %d', name, size, values.size)
            if not np.all(np.isfinite(values)) or values.min() < 0:
                _fail('%s must be finite and nonnegative', name)
            values.setflags(write=False)
            object.__setattr__(self, name, values)
        object.__setattr__(self, 'dprime_jumps', dict(self.dprime_jumps))

    def edges_or_fail(self):
        if self.edge_values is None:
            _fail('weight has no edge values')
        return self.edge_values

    def cells_or_fail(self):
        if self.cell_values is None:
            _fail('weight has no cell values')
        return self.cell_values

    def dprime(self):
        """Dense array of derivative jumps, zero away from the kinks."""
        dense = np.zeros(self.grid.n - 1)
        for index, value in self.dprime_jumps.items():
            dense[index] += value
        return dense


def _dprime_map(spec, grid):
    jumps = {}
    for location, value in spec.kinks(grid):
        index = grid.nearest_edge(location)
        jumps[index] = jumps.get(index, 0.0) + value
    return jumps


def _check_inside(spec, grid):
    points = ()
    if isinstance(spec, PiecewiseAffine):
        points = spec.breakpoints
    elif isinstance(spec, TentPerInterval):
        points = [p for pair in spec.intervals for p in pair]
    slack = 1e-12 * (grid.b - grid.a)
    if any(p < grid.a - slack or p > grid.b + slack for p in points):
        _fail('weight breakpoints %s fall outside [%s, %s]',
              list(points), grid.a, grid.b)


def realize_weight(spec, grid):
    """Sample a weight spec at the interior edges (and cell centers).

    Args:
        spec: weight specification.
        grid (Grid)

    Returns:
        WeightField with edge values; cell values too unless sampled.

    """
    _check_inside(spec, grid)
    if isinstance(spec, Sampled):
        return WeightField(grid, edge_values=spec.values, symbolic=False)
    return WeightField(grid, edge_values=spec(grid.edges),
                       cell_values=spec(grid.centers),
                       dprime_jumps=_dprime_map(spec, grid))


def realize_fidelity_weight(spec, grid):
    """Sample a fidelity weight spec at the cell centers."""
    _check_inside(spec, grid)
    if isinstance(spec, Sampled):
        return WeightField(grid, cell_values=spec.values, symbolic=False)
    return WeightField(grid, edge_values=spec(grid.edges),
                       cell_values=spec(grid.centers),
                       dprime_jumps=_dprime_map(spec, grid))


def add_scalar(weight, s):
    """alpha + s; derivative jumps are unchanged."""
    if s < 0:
        _fail('only nonnegative shifts keep weights valid, got %s', s)
    return WeightField(
        weight.grid,
        edge_values=None if weight.edge_values is None else weight.edge_values + s,
        cell_values=None if weight.cell_values is None else weight.cell_values + s,
        dprime_jumps=weight.dprime_jumps, symbolic=weight.symbolic)


def add_weights(first, second):
    """alpha1 + alpha2 on a common grid; derivative jumps add up."""
    check_same_grid(first, second)

    def total(a, b):
        return None if a is None or b is None else a + b

    jumps = dict(first.dprime_jumps)
    for index, value in second.dprime_jumps.items():
        jumps[index] = jumps.get(index, 0.0) + value
    return WeightField(first.grid,
                       edge_values=total(first.edge_values, second.edge_values),
                       cell_values=total(first.cell_values, second.cell_values),
                       dprime_jumps=jumps,
                       symbolic=first.symbolic and second.symbolic)


def with_floor(weight, floor, mode='add'):
    """Lift a weight by a floor: ``add`` gives alpha + floor, ``max`` max(alpha, floor)."""
    if mode == 'add':
        return add_scalar(weight, floor)
    if mode != 'max':
        _fail('unknown floor mode %r', mode)

    def lift(values):
        return None if values is None else np.maximum(values, floor)

    edges = weight.edge_values
    unchanged = edges is not None and edges.min() >= floor
    return WeightField(weight.grid, edge_values=lift(weight.edge_values),
                       cell_values=lift(weight.cell_values),
                       dprime_jumps=weight.dprime_jumps if unchanged else {},
                       symbolic=weight.symbolic and unchanged)


@dataclass(frozen=True)
class EdgeReport:
    """Outcome of a per-edge check: edges examined and the offending ones.

    ``violations`` holds ``(edge index, location, excess)`` triples.
    """

    checked: int
    violations: tuple = ()

    @property
    def holds(self):
        return not self.violations

    def worst(self):
        if not self.violations:
            return None
        return max(self.violations, key=lambda item: item[2])


def edge_report(grid, checked, offending, excess):
    """Build an EdgeReport from a boolean mask of offending edges."""
    edges = grid.edges
    violations = tuple((int(i), float(edges[i]), float(excess[i]))
                       for i in np.flatnonzero(offending))
    return EdgeReport(int(np.count_nonzero(checked)), violations)
