"""Unit tests for plots module."""

import numpy as np

import pandas

from wtv1d import analytic, core, plots, wtv

import pytest


def solved(n=64):
    f = core.sample(core.make_grid(-1, 1, n), '2*x')
    alpha = core.realize_weight(core.AbsValue(0.2, 0.3), f.grid)
    return f, alpha, wtv.solve_wtv(f, alpha)


def read_text(path):
    with open(path, encoding='utf-8') as file_object:
        return file_object.read()


def test_plot_solution(tmp_path):
    """Should write an 800x500 SVG."""
    f, alpha, solution = solved()
    path = str(tmp_path / 'plot.svg')
    plots.plot_solution(path, f, solution.u, solution.v, alpha.edge_values,
                        title='f = 2x')
    text = read_text(path)
    assert text.lstrip().startswith('<?xml')
    assert 'viewBox="0 0 800 500"' in text
    assert '</svg>' in text


def test_plot_solution_deterministic(tmp_path):
    """The same input should give the same bytes."""
    f, _, solution = solved()
    first = str(tmp_path / 'a.svg')
    second = str(tmp_path / 'b.svg')
    plots.plot_solution(first, f, solution.u)
    plots.plot_solution(second, f, solution.u)
    assert read_text(first) == read_text(second)


def test_plot_regime_map(tmp_path):
    """Should draw one point per sweep row."""
    rows = [{'mu': mu, 'c': c, 'regime': analytic.regime_of(1, 2, mu, c)}
            for mu in (0.1, 0.5, 0.9) for c in (0.2, 0.6, 1.2)]
    path = str(tmp_path / 'maps' / 'regime_map.svg')
    plots.plot_regime_map(path, pandas.DataFrame(rows), 1, 2)
    assert 'viewBox="0 0 800 500"' in read_text(path)


def test_plot_recovery(tmp_path):
    """Should accept an error curve below the signals."""
    f, _, solution = solved()
    f0 = core.sample(f.grid, {'jumps': [0.0], 'values': [-1, 1]})
    path = str(tmp_path / 'recovery.svg')
    plots.plot_recovery(path, f, f0, solution.u, scalar_u=f0,
                        levels=[4, 8, 16], errors=np.array([0.2, 0.1, 0.05]))
    assert 'viewBox="0 0 800 500"' in read_text(path)


if __name__ == '__main__':
    pytest.main()
