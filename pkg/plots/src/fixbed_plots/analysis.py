"""Reading fixbed result tables and locating branch features."""

from __future__ import annotations

import hashlib
import json
import os

import numpy as np


def read_table(path):
    """Comma-separated table with one 'name [unit]' header line."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    data = {name: np.array([float(r[i]) for r in rows])
            for i, name in enumerate(header)}
    return header, data


def column(data, name):
    """Column by bare name (unit suffix ignored)."""
    for key, values in data.items():
        if key == name or key.split(" [")[0] == name:
            return values
    raise KeyError(f"no column {name!r}")


def metadata_hash(run_dir):
    """Short content hash of the run's metadata file ('' if absent)."""
    path = os.path.join(run_dir, "metadata.json")
    if not os.path.exists(path):
        return ""
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()[:12]


def load_metadata(run_dir):
    path = os.path.join(run_dir, "metadata.json")
    if not os.path.exists(path):
        return {}
    with open(path) as fh:
        return json.load(fh)


def sign_change_points(p, segment=None):
    """Parameter values where dp/ds changes sign along the traced branch.

    Matches the branch data exactly: the returned values are branch points,
    not interpolants.  Segment boundaries are not sign changes.
    """
    p = np.asarray(p, dtype=float)
    if segment is None:
        segment = np.zeros(p.size, dtype=int)
    segment = np.asarray(segment)
    out = []
    dp = np.diff(p)
    for i in range(1, dp.size):
        same_seg = segment[i - 1] == segment[i] == segment[i + 1]
        if same_seg and dp[i] * dp[i - 1] < 0:
            out.append(float(p[i]))
    return out


def optimum_point(p, X, p_range=None):
    """Branch point with the highest conversion (restricted to p_range)."""
    p = np.asarray(p, dtype=float)
    X = np.asarray(X, dtype=float)
    mask = np.ones(p.size, dtype=bool)
    if p_range is not None:
        mask = (p >= p_range[0]) & (p <= p_range[1])
    if not mask.any():
        mask = np.ones(p.size, dtype=bool)
    idx = np.flatnonzero(mask)[np.argmax(X[mask])]
    return float(p[idx]), float(X[idx])
