"""Signal input/output module.

Reads signals and weights from local files or URLs and writes solver output
as CSV. A signal CSV holds one row ``x,value`` per cell center; the header
line is optional. Values are written with the shortest decimal that reads
back to the same double and read with pandas' round-trip float parser.

Example:
    from wtv1d import core, signal_io

    f = signal_io.read_signal('f.csv')
    alpha = signal_io.read_weight('abs:0.2:0.3', f.grid)
    signal_io.write_signal('copy.csv', f)

"""

import io
import json
import logging
import os
from urllib.parse import urlparse

import numpy as np

import pandas

import requests

from wtv1d import core


logger = logging.getLogger(__name__)

GRID_RTOL = 1e-9

URL_SCHEMES = ('http', 'https', 'ftp', 'ftps')


def uri_type(uri):
    """'URL' for http(s)/ftp(s) addresses with a host, 'FILE' otherwise."""
    parsed = urlparse(uri)
    if parsed.scheme.lower() in URL_SCHEMES and parsed.netloc:
        return 'URL'
    return 'FILE'


def read(uri, encoding='utf-8', timeout=10):
    """Read a text file from file system or URL.

    Args:
        uri (str): file name or URL
        encoding (str): charset encoding
        timeout (int): request timeout; optional

    Returns:
        text (str): file contents.

    """
    if uri_type(uri) != 'URL':
        with open(uri, encoding=encoding) as file_object:
            return file_object.read()

    try:
        response = requests.get(uri, timeout=timeout)
        response.raise_for_status()
        response.encoding = encoding
        return response.text
    except requests.exceptions.ConnectTimeout as connect_timeout:
        logger.error('ConnectionTimeout = %s', str(connect_timeout))
        raise
    except requests.exceptions.ConnectionError as connection_error:
        logger.error('ConnectionError = %s', str(connection_error))
        raise
    except requests.exceptions.HTTPError as http_error:
        logger.error('HTTPError = %s %s', http_error.response.status_code,
                     http_error.response.reason)
        raise


def _two_columns(text, source):
    """Parse ``x,value`` rows, skipping a non-numeric header line."""
    try:
        frame = pandas.read_csv(io.StringIO(text), header=None, dtype=str,
                                comment='#', skip_blank_lines=True)
    except (pandas.errors.EmptyDataError, pandas.errors.ParserError) as error:
        core._fail('cannot parse %s: %s', source, error)
    if frame.shape[1] != 2:
        core._fail('%s needs two columns x,value, found %d',
                   source, frame.shape[1])
    first = pandas.to_numeric(frame.iloc[0], errors='coerce')
    header = 0 if first.isna().any() else None
    frame = pandas.read_csv(io.StringIO(text), header=header, comment='#',
                            names=['x', 'value'], float_precision='round_trip',
                            skip_blank_lines=True)
    try:
        x = frame['x'].to_numpy(dtype=float)
        values = frame['value'].to_numpy(dtype=float)
    except ValueError as error:
        core._fail('non-numeric entry in %s: %s', source, error)
    if x.size < 2:
        core._fail('%s holds fewer than two rows', source)
    return x, values


def _snap(value):
    return float('%.12g' % value)


def infer_grid(x):
    """Grid whose cell centers are the given abscissae."""
    x = np.asarray(x, dtype=float)
    h = (x[-1] - x[0]) / (x.size - 1)
    grid = core.make_grid(_snap(x[0] - h / 2), _snap(x[-1] + h / 2), x.size)
    _check_abscissae(x, grid.centers, 'cell centers')
    return grid


def _check_abscissae(x, expected, what):
    if x.shape != expected.shape:
        core._fail('expected %d rows at the %s, found %d',
                   expected.size, what, x.size)
    span = expected[-1] - expected[0] if expected.size > 1 else 1.0
    mismatch = float(np.abs(x - expected).max())
    if mismatch > GRID_RTOL * span + 1e-12:
        core._fail('abscissae are not the %s of the grid (off by %.3g)',
                   what, mismatch)


def read_signal(uri, grid=None, encoding='utf-8'):
    """Read a signal CSV.

    Args:
        uri (str): file name or URL.
        grid (Grid): expected grid; inferred from the abscissae if omitted.
        encoding (str)

    Returns:
        Signal

    """
    x, values = _two_columns(read(uri, encoding), uri)
    if grid is None:
        grid = infer_grid(x)
    else:
        _check_abscissae(x, grid.centers, 'cell centers')
    logger.info('read %d cells from %s', grid.n, uri)
    return core.signal_from_values(grid, values)


def read_weight(source, grid, fidelity=False, encoding='utf-8'):
    """Read a weight from a CSV, a JSON file, inline JSON or a shorthand.

    CSV rows hold edge values of alpha, or cell values of w when
    ``fidelity`` is set.

    Returns:
        WeightField

    """
    realize = core.realize_fidelity_weight if fidelity else core.realize_weight
    if source.lower().endswith('.csv'):
        x, values = _two_columns(read(source, encoding), source)
        expected = grid.centers if fidelity else grid.edges
        _check_abscissae(x, expected, 'cell centers' if fidelity else 'edges')
        return realize(core.Sampled(tuple(values.tolist())), grid)
    if source.lower().endswith('.json'):
        try:
            spec = core.weight_spec_from_json(json.loads(read(source, encoding)))
        except json.JSONDecodeError as error:
            core._fail('malformed weight JSON in %s: %s', source, error)
        return realize(spec, grid)
    return realize(core.parse_weight_shorthand(source), grid)


def read_nodes(uri, grid, encoding='utf-8'):
    """Read node values (a dual variable) written by write_nodes."""
    x, values = _two_columns(read(uri, encoding), uri)
    _check_abscissae(x, grid.nodes, 'nodes')
    return values


def _write_columns(path, x, values, header=True):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    frame = pandas.DataFrame({'x': x, 'value': values})
    frame.to_csv(path, index=False, header=header)


def write_signal(path, signal, header=True):
    """Write cell centers and values; floats keep their shortest repr."""
    _write_columns(path, signal.grid.centers, signal.values, header)


def write_nodes(path, grid, v, header=True):
    """Write node values (the dual variable) against the node coordinates."""
    v = np.asarray(v, dtype=float)
    if v.shape != (grid.n + 1,):
        core._fail('node array needs %d values, got %d', grid.n + 1, v.size)
    _write_columns(path, grid.nodes, v, header)


def write_table(path, table):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    table.to_csv(path, index=False)


def _plain(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError('cannot serialize %r' % type(value))


def write_json(path, obj):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as file_object:
        json.dump(obj, file_object, indent=2, sort_keys=True, default=_plain)
        file_object.write('\n')
