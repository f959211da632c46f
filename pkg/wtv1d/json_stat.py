"""json_stat module converts result tables to JSON-Stat format.

Long tables of sweep or jump results become JSON-Stat datasets
(https://json-stat.org/) with the parameter columns as dimensions and the
measured columns under a ``Variables`` metric dimension.

Example:
    import json
    from wtv1d import json_stat

    json_obj = json_stat.to_json_stat(table, ['mu', 'c'], ['jump', 'plateau'],
                                      label='affine/abs sweep')
    with open('sweep.json', 'w') as file:
        file.write(json.dumps(json_obj))
"""

import json

from pyjstat import pyjstat

from wtv1d import core


def to_json_stat(table, id_vars, value_vars, label=None, source=None,
                 units=None):
    """Converts a result table to JSON-Stat format.

    Args:
        table (pandas.DataFrame): one row per parameter combination.
        id_vars (list): dimension columns.
        value_vars (list): measured columns.
        label (str): optional dataset label.
        source (str): optional dataset source.
        units (dict): optional unit label per measured column.

    Returns:
        json_obj (dict): JSON-Stat dataset.

    """
    missing = [name for name in list(id_vars) + list(value_vars)
               if name not in table.columns]
    if missing:
        core._fail('table has no column(s) %s', missing)
    id_vars = list(id_vars)
    df = table.melt(
        id_vars=id_vars,
        value_vars=list(value_vars),
        var_name='Variables')
    id_vars.append('Variables')
    df = df.sort_values(by=id_vars)
    df[id_vars] = df[id_vars].astype(str)
    dataset = pyjstat.Dataset.read(df)
    metric = {'metric': ['Variables']}
    dataset.setdefault('role', metric)
    json_str = dataset.write(output='jsonstat')
    json_obj = json.loads(json_str)

    for key, value in (('label', label), ('source', source)):
        if value is not None:
            json_obj[key] = value
    if units:
        json_obj['dimension']['Variables']['category']['unit'] = {
            name: {'label': unit} for name, unit in units.items()}
    return json_obj
