"""Delimited result tables and the run metadata file.

Tables are comma-separated with a single header line naming each column
and its unit, e.g. ``z [m],T [K],...``.  Values are written with %.17g so
identical runs produce byte-identical files.
"""

from __future__ import annotations

import json
import os

import numpy as np


def write_table(path, columns):
    """``columns``: list of ("name [unit]", 1-D array) in output order."""
    names = [name for name, _ in columns]
    arrays = [np.asarray(a) for _, a in columns]
    n = arrays[0].size
    for name, a in zip(names, arrays):
        if a.size != n:
            raise ValueError(f"column {name!r} length {a.size} != {n}")
    with open(path, "w") as fh:
        fh.write(",".join(names) + "\n")
        for i in range(n):
            fh.write(",".join(_fmt(a[i]) for a in arrays) + "\n")


def _fmt(v):
    if isinstance(v, (np.bool_, bool)):
        return "1" if v else "0"
    if isinstance(v, (np.integer, int)):
        return str(int(v))
    return format(float(v), ".17g")


def read_table(path):
    """Returns (header names, dict name -> float array)."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = [[] for _ in header]
        for line in fh:
            if not line.strip():
                continue
            for cell, col in zip(line.strip().split(","), data):
                col.append(float(cell))
    return header, {name: np.array(col) for name, col in zip(header, data)}


def column(header, data, name):
    """Column by bare name, ignoring the unit suffix."""
    for h in header:
        if h == name or h.split(" [")[0] == name:
            return data[h]
    raise KeyError(f"no column {name!r} in {header}")


def write_metadata(outdir, payload):
    with open(os.path.join(outdir, "metadata.json"), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def read_metadata(outdir):
    with open(os.path.join(outdir, "metadata.json")) as fh:
        return json.load(fh)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o)}")
