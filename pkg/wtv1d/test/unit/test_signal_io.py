"""Unit tests for signal_io module."""

import json
import os

import numpy as np

import requests

from wtv1d import core, signal_io

import pytest


data_path = os.path.join(os.path.dirname(os.path.dirname(__file__)), 'data', '')


def test_uri_type():
    """uri_type() should be capable of discriminating files and URLs."""
    assert signal_io.uri_type('ramp8.csv') == 'FILE'
    assert signal_io.uri_type(data_path + 'ramp8.csv') == 'FILE'
    assert signal_io.uri_type('https://example.org/f.csv') == 'URL'
    assert signal_io.uri_type('http://localhost:8000/f.csv') == 'URL'
    assert signal_io.uri_type('FTP://192.168.0.1/f.csv') == 'URL'
    assert signal_io.uri_type('file:///tmp/f.csv') == 'FILE'
    assert signal_io.uri_type('http:/f.csv') == 'FILE'
    assert signal_io.uri_type('C:\\data\\f.csv') == 'FILE'


def test_read_signal():
    """Should read a signal and infer its grid from the centers."""
    f = signal_io.read_signal(data_path + 'ramp8.csv')
    assert f.grid == core.make_grid(-1, 1, 8)
    assert f.values.tolist() == [-1.75, -1.25, -0.75, -0.25,
                                 0.25, 0.75, 1.25, 1.75]


def test_read_signal_without_header():
    """The header line should be optional."""
    with_header = signal_io.read_signal(data_path + 'ramp8.csv')
    without = signal_io.read_signal(data_path + 'ramp8_noheader.csv')
    assert np.array_equal(with_header.values, without.values)
    assert with_header.grid == without.grid


def test_read_signal_grid_mismatch():
    """Should reject abscissae that are not the centers of the given grid."""
    with pytest.raises(ValueError):
        signal_io.read_signal(data_path + 'ramp8.csv',
                              core.make_grid(-1, 1, 16))
    with pytest.raises(ValueError):
        signal_io.read_signal(data_path + 'ramp8.csv',
                              core.make_grid(0, 2, 8))


def test_read_signal_three_columns():
    """Should reject files with more than two columns."""
    with pytest.raises(ValueError):
        signal_io.read_signal(data_path + 'three_columns.csv')


def test_signal_round_trip(tmp_path):
    """Written values should read back bit for bit."""
    grid = core.make_grid(-1, 1, 64)
    f = core.sample(grid, 'sin(3*pi*x) / 7')
    path = str(tmp_path / 'out' / 'f.csv')
    signal_io.write_signal(path, f)
    again = signal_io.read_signal(path, grid)
    assert np.array_equal(again.values, f.values)
    assert signal_io.read_signal(path).grid == grid


def test_read_weight_forms():
    """CSV edges, JSON file and shorthand should give the same alpha."""
    grid = core.make_grid(-1, 1, 8)
    from_csv = signal_io.read_weight(data_path + 'alpha8_edges.csv', grid)
    from_json = signal_io.read_weight(data_path + 'weight_abs.json', grid)
    from_text = signal_io.read_weight('abs:0.2:0.3', grid)
    assert not from_csv.symbolic
    assert from_json.symbolic
    assert np.allclose(from_csv.edge_values, from_json.edge_values,
                       rtol=0, atol=1e-15)
    assert np.array_equal(from_json.edge_values, from_text.edge_values)
    assert from_json.dprime_jumps == {3: pytest.approx(0.4)}


def test_read_fidelity_weight():
    """A fidelity CSV should hold cell values."""
    grid = core.make_grid(-1, 1, 8)
    w = signal_io.read_weight(data_path + 'w8_cells.csv', grid, fidelity=True)
    assert w.cell_values.tolist() == [0, 0, 4, 4, 4, 4, 0, 0]
    with pytest.raises(ValueError):
        signal_io.read_weight(data_path + 'w8_cells.csv', grid)


def test_read_weight_invalid():
    """Should reject malformed shorthands."""
    grid = core.make_grid(-1, 1, 8)
    with pytest.raises(ValueError):
        signal_io.read_weight('abs:0.2', grid)
    with pytest.raises(ValueError):
        signal_io.read_weight('{"kind": "abs"}', grid)


def test_nodes_round_trip(tmp_path):
    """Node values should read back against the grid nodes."""
    grid = core.make_grid(-1, 1, 8)
    v = np.linspace(0, 1, 9) ** 2
    path = str(tmp_path / 'v.csv')
    signal_io.write_nodes(path, grid, v)
    assert np.array_equal(signal_io.read_nodes(path, grid), v)
    with pytest.raises(ValueError):
        signal_io.read_nodes(path, core.make_grid(-1, 1, 16))
    with pytest.raises(ValueError):
        signal_io.write_nodes(path, grid, v[:-1])


def test_write_json(tmp_path):
    """numpy scalars and arrays should be written as plain JSON."""
    path = str(tmp_path / 'report.json')
    signal_io.write_json(path, {'a': np.float64(1.5), 'b': np.arange(3),
                                'c': np.bool_(True), 'd': np.int64(4)})
    with open(path, encoding='utf-8') as file_object:
        text = file_object.read()
    assert text.endswith('}\n')
    assert json.loads(text) == {'a': 1.5, 'b': [0, 1, 2], 'c': True, 'd': 4}
    with pytest.raises(TypeError):
        signal_io.write_json(str(tmp_path / 'bad.json'), {'a': object()})


def test_connection_error(monkeypatch):
    """Connection failures should propagate as requests errors."""
    def refuse(url, timeout):
        raise requests.exceptions.ConnectionError('refused')

    monkeypatch.setattr(requests, 'get', refuse)
    with pytest.raises(requests.exceptions.ConnectionError):
        signal_io.read_signal('http://example.org/f.csv')


def test_http_error(monkeypatch):
    """A 404 should raise HTTPError."""
    class Missing:
        status_code = 404
        reason = 'Not Found'

        def raise_for_status(self):
            raise requests.exceptions.HTTPError('404', response=self)

    monkeypatch.setattr(requests, 'get', lambda url, timeout: Missing())
    with pytest.raises(requests.exceptions.HTTPError):
        signal_io.read('https://example.org/missing.csv')


if __name__ == '__main__':
    pytest.main()
