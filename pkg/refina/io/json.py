"""Import and export of .json files (configurations and metric reports).

"""

import json
from collections import OrderedDict

import numpy as np
from pandas import DataFrame, Series, isna

from ..utils import atomic_write


def load(fname):
    with open(fname, encoding="utf-8") as f:
        return json.load(f, object_pairs_hook=OrderedDict)


def dump(fname, data, indent=4):
    def write(f):
        json.dump(data, f, indent=indent, cls=RefinaEncoder)
        f.write("\n")

    return atomic_write(fname, write)


class RefinaEncoder(json.JSONEncoder):
    """Enhanced encoder to deal with the numpy and pandas formats used
    throughout refina.

    Notes
    -----
    Currently supported formats are: numpy scalars and arrays, Series and
    DataFrame.

    see: https://docs.python.org/3/library/json.html

    """

    def default(self, o):
        if isinstance(o, np.integer):
            return int(o)
        elif isinstance(o, np.floating):
            return float(o)
        elif isinstance(o, np.bool_):
            return bool(o)
        elif isinstance(o, np.ndarray):
            return o.tolist()
        elif isinstance(o, Series):
            return o.to_dict()
        elif isinstance(o, DataFrame):
            return o.to_dict(orient="records")
        elif isna(o):
            return None
        else:
            return super(RefinaEncoder, self).default(o)
