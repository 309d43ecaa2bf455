"""Figure rendering from fixbed result tables.

Figures are regenerated from the delimited data files only; nothing is
recomputed, so the simulation engine remains the single source of numbers.
Styling convention throughout: real-fluid inputs solid, ideal-fluid inputs
dashed.  Each figure embeds the source runs' metadata hashes in a caption
line.
"""

from __future__ import annotations

import glob
import json
import os
from dataclasses import dataclass, field

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .analysis import (
    column,
    load_metadata,
    metadata_hash,
    optimum_point,
    read_table,
    sign_change_points,
)

KINDS = ("curve", "profiles", "surface", "timeseries")


class FigureInputError(ValueError):
    pass


@dataclass
class FigureSpec:
    """What to draw and from where.

    ``inputs`` maps a role name to a run directory; the roles "real" and
    "ideal" get the solid/dashed styling convention, other roles cycle.
    """

    kind: str
    inputs: dict
    annotations: tuple = ("turning", "optimum")
    title: str = ""
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise FigureInputError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise FigureInputError("figure needs at least one input run")
        for role, path in self.inputs.items():
            if not os.path.isdir(path):
                raise FigureInputError(f"input {role!r}: no such run directory {path}")

    @classmethod
    def from_file(cls, path):
        with open(path) as fh:
            raw = json.load(fh)
        return cls(kind=raw["kind"], inputs=dict(raw["inputs"]),
                   annotations=tuple(raw.get("annotations", ("turning", "optimum"))),
                   title=raw.get("title", ""), options=dict(raw.get("options", {})))


def _style(role, index):
    if role == "ideal":
        return {"linestyle": "--"}
    if role == "real":
        return {"linestyle": "-"}
    return {"linestyle": ["-", "--", "-.", ":"][index % 4]}


def _caption(fig, spec):
    hashes = ", ".join(f"{role}:{metadata_hash(path) or 'n/a'}"
                       for role, path in sorted(spec.inputs.items()))
    fig.text(0.01, 0.01, f"source runs [{hashes}]", fontsize=6, color="0.4")


def render(spec: FigureSpec, out_path) -> dict:
    """Render the figure to ``out_path``; returns annotation info
    (marker parameter values per role, optimum points)."""
    if spec.kind == "curve":
        fig, info = _render_curve(spec)
    elif spec.kind == "profiles":
        fig, info = _render_profiles(spec)
    elif spec.kind == "surface":
        fig, info = _render_surface(spec)
    else:
        fig, info = _render_timeseries(spec)
    _caption(fig, spec)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    info["path"] = str(out_path)
    return info


def _branch_path(run_dir):
    path = os.path.join(run_dir, "branch.csv")
    if not os.path.exists(path):
        raise FigureInputError(f"{run_dir}: no branch.csv (not a sweep run?)")
    return path


def _render_curve(spec):
    """Steady-state curves over the swept parameter with fold markers."""
    fig, (ax_x, ax_t) = plt.subplots(2, 1, figsize=(5.2, 6.0), sharex=True)
    info = {"turning": {}, "optimum": {}}
    param_label = None
    for i, (role, run) in enumerate(sorted(spec.inputs.items())):
        header, data = read_table(_branch_path(run))
        param_label = header[1]
        p = data[header[1]]
        X = column(data, "X_out")
        T = column(data, "T_report")
        seg = column(data, "segment") if any(h.startswith("segment") for h in header) else None
        style = _style(role, i)
        if seg is not None:
            for s in np.unique(seg):
                m = seg == s
                ax_x.plot(p[m], 100 * X[m], color="C1", label=role if s == 0 else None, **style)
                ax_t.plot(p[m], T[m], color="C0", **style)
        else:
            ax_x.plot(p, 100 * X, color="C1", label=role, **style)
            ax_t.plot(p, T, color="C0", **style)
        if "turning" in spec.annotations:
            marks = sign_change_points(p, seg)
            info["turning"][role] = marks
            for pm in marks:
                j = int(np.argmin(np.abs(p - pm)))
                ax_x.plot(pm, 100 * X[j], "kv", ms=6, mfc="none")
                ax_t.plot(pm, T[j], "kv", ms=6, mfc="none")
        if "optimum" in spec.annotations:
            ps, xs = optimum_point(p, X)
            info["optimum"][role] = (ps, xs)
            ax_x.plot(ps, 100 * xs, "k*", ms=9, mfc="none")
    ax_x.set_ylabel("outlet H2 conversion [%]")
    ax_t.set_ylabel("report temperature [K]")
    ax_t.set_xlabel(param_label or "parameter")
    ax_x.legend(loc="best", fontsize=8)
    if spec.title:
        ax_x.set_title(spec.title)
    fig.tight_layout(rect=(0, 0.03, 1, 1))
    return fig, info


def _render_profiles(spec):
    """Axial temperature and conversion-proxy profiles per run."""
    fig, (ax_x, ax_t) = plt.subplots(2, 1, figsize=(5.2, 6.0), sharex=True)
    info = {"volumes": {}}
    for i, (role, run) in enumerate(sorted(spec.inputs.items())):
        style = _style(role, i)
        paths = sorted(glob.glob(os.path.join(run, "profiles_*.csv")))
        if not paths:
            raise FigureInputError(f"{run}: no profiles_*.csv tables")
        info["volumes"][role] = [os.path.basename(p) for p in paths]
        for path in paths:
            name = os.path.basename(path)[len("profiles_"):-len(".csv")]
            header, data = read_table(path)
            z = column(data, "z")
            T = column(data, "T")
            v = column(data, "v")
            cH2 = column(data, "c_H2")
            flux = v * cH2
            conv = 1.0 - flux / flux[0]
            ax_t.plot(z, T, label=f"{role}/{name}", **style)
            ax_x.plot(z, 100 * conv, **style)
    ax_x.set_ylabel("H2 conversion along bed [%]")
    ax_t.set_ylabel("temperature [K]")
    ax_t.set_xlabel("z [m]")
    ax_t.legend(loc="best", fontsize=7)
    if spec.title:
        ax_x.set_title(spec.title)
    fig.tight_layout(rect=(0, 0.03, 1, 1))
    return fig, info


def _render_surface(spec):
    """Heat-of-reaction map over (T, P); two inputs render their ratio."""
    runs = sorted(spec.inputs.items())
    maps = []
    for role, run in runs:
        path = os.path.join(run, "dh_map.csv")
        if not os.path.exists(path):
            raise FigureInputError(f"{run}: no dh_map.csv")
        header, data = read_table(path)
        T = column(data, "T")
        P = column(data, "P")
        dH = column(data, "dH")
        Tu, Pu = np.unique(T), np.unique(P)
        maps.append((role, Tu, Pu, dH.reshape(Tu.size, Pu.size)))
    fig, ax = plt.subplots(figsize=(5.4, 4.2))
    info = {}
    if len(maps) == 2:
        (ra, Ta, Pa, A), (rb, Tb, Pb, B) = maps
        if Ta.shape != Tb.shape or not np.allclose(Ta, Tb) or not np.allclose(Pa, Pb):
            raise FigureInputError("surface inputs have mismatched (T, P) grids")
        Z = A / B
        label = f"dH ratio {ra}/{rb} [-]"
        info["kind"] = "ratio"
    else:
        _, Ta, Pa, Z = maps[0]
        label = "dH [J/mol]"
        info["kind"] = "value"
    pc = ax.pcolormesh(Ta, Pa / 1e5, Z.T, shading="nearest")
    fig.colorbar(pc, ax=ax, label=label)
    ax.set_xlabel("T [K]")
    ax.set_ylabel("P [bar]")
    if spec.title:
        ax.set_title(spec.title)
    fig.tight_layout(rect=(0, 0.03, 1, 1))
    return fig, info


def _render_timeseries(spec):
    """Step responses: conversion and report temperature vs time."""
    fig, (ax_x, ax_t) = plt.subplots(2, 1, figsize=(5.2, 6.0), sharex=True)
    info = {"series": {}}
    for i, (role, run) in enumerate(sorted(spec.inputs.items())):
        style = _style(role, i)
        paths = sorted(glob.glob(os.path.join(run, "timeseries_*.csv")))
        if not paths:
            raise FigureInputError(f"{run}: no timeseries_*.csv tables")
        info["series"][role] = [os.path.basename(p) for p in paths]
        for path in paths:
            tag = os.path.basename(path)[len("timeseries_"):-len(".csv")]
            header, data = read_table(path)
            t = column(data, "t")
            X = column(data, "X_out")
            T = column(data, "T_top") if any(h.startswith("T_top") for h in header) \
                else column(data, "T_out")
            ax_x.plot(t / 60.0, 100 * X, label=f"{role}/{tag}", **style)
            ax_t.plot(t / 60.0, T, **style)
    ax_x.set_ylabel("outlet H2 conversion [%]")
    ax_t.set_ylabel("report temperature [K]")
    ax_t.set_xlabel("t [min]")
    ax_x.legend(loc="best", fontsize=7)
    if spec.title:
        ax_x.set_title(spec.title)
    fig.tight_layout(rect=(0, 0.03, 1, 1))
    return fig, info
