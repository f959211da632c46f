"""SVG figures for solver output, regime maps and recovery curves.

All figures are 800x500 self-contained SVG written by matplotlib's Agg
canvas with the date stamp removed and a fixed hash salt, so identical input
gives identical files.
"""

import logging
import os

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402

import numpy as np  # noqa: E402

from wtv1d import analytic  # noqa: E402


logger = logging.getLogger(__name__)

FIGSIZE = (800 / 72, 500 / 72)
REGIME_COLORS = {analytic.TWO_PLATEAUS: 'tab:blue',
                 analytic.PURE_STEP: 'tab:orange',
                 analytic.ZERO: 'tab:gray'}


def _figure(rows=1, sharex=True):
    matplotlib.rcParams['svg.hashsalt'] = 'wtv1d'
    matplotlib.rcParams['svg.fonttype'] = 'path'
    return plt.subplots(rows, 1, figsize=FIGSIZE, dpi=72, sharex=sharex,
                        squeeze=False)


def _save(fig, path):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    fig.savefig(path, format='svg', metadata={'Date': None})
    plt.close(fig)
    logger.info('wrote %s', path)


def plot_solution(path, f, u, v=None, bound=None, title=None):
    """f (thin), u (thick) and, below, the dual v inside its dashed box.

    Args:
        path (str): output SVG.
        f (Signal)
        u (Signal)
        v (array): node values, optional.
        bound (array): edge values of the box (alpha, or ones), optional.
        title (str)

    """
    fig, axes = _figure(2 if v is not None else 1)
    top = axes[0][0]
    grid = f.grid
    top.step(grid.centers, f.values, where='mid', linewidth=0.8,
             color='tab:gray', label='f')
    top.step(grid.centers, u.values, where='mid', linewidth=2.0,
             color='tab:blue', label='u')
    top.legend(loc='best')
    if title:
        top.set_title(title)
    if v is not None:
        bottom = axes[1][0]
        bottom.plot(grid.nodes, v, linewidth=1.2, color='tab:green', label='v')
        if bound is not None:
            edges = np.concatenate([[grid.a], grid.edges, [grid.b]])
            envelope = np.concatenate([[0.0], bound, [0.0]])
            bottom.plot(edges, envelope, linestyle='--', linewidth=0.8,
                        color='tab:red', label='box')
            bottom.plot(edges, -envelope, linestyle='--', linewidth=0.8,
                        color='tab:red')
        bottom.legend(loc='best')
        bottom.set_xlabel('x')
    else:
        top.set_xlabel('x')
    _save(fig, path)


def plot_regime_map(path, table, L, lam):
    """Sweep points coloured by regime with the two regime boundaries."""
    fig, axes = _figure()
    ax = axes[0][0]
    for regime, color in REGIME_COLORS.items():
        rows = table[table['regime'] == regime]
        if len(rows):
            ax.scatter(rows['mu'], rows['c'], s=12, color=color, label=regime)
    half = lam * L * L / 2.0
    mu = np.linspace(0.0, float(table['mu'].max()), 200)
    ax.plot(mu, half - mu * L, linestyle='--', color='black', linewidth=0.8)
    ax.axhline(half, linestyle=':', color='black', linewidth=0.8)
    ax.set_xlabel('mu')
    ax.set_ylabel('c')
    ax.set_ylim(bottom=0.0)
    ax.legend(loc='best')
    _save(fig, path)


def plot_recovery(path, f, f0, u, scalar_u=None, levels=None, errors=None):
    """Recovered signal against data and truth; error curve when given."""
    fig, axes = _figure(2 if levels is not None else 1, sharex=False)
    top = axes[0][0]
    grid = f.grid
    top.step(grid.centers, f.values, where='mid', linewidth=0.6,
             color='tab:gray', label='f')
    top.step(grid.centers, f0.values, where='mid', linewidth=0.8,
             linestyle='--', color='black', label='f0')
    top.step(grid.centers, u.values, where='mid', linewidth=2.0,
             color='tab:blue', label='u')
    if scalar_u is not None:
        top.step(grid.centers, scalar_u.values, where='mid', linewidth=1.2,
                 color='tab:orange', label='scalar')
    top.legend(loc='best')
    if levels is not None:
        bottom = axes[1][0]
        bottom.loglog(levels, errors, marker='o', color='tab:blue')
        bottom.set_xlabel('level')
        bottom.set_ylabel('sup error')
    _save(fig, path)
