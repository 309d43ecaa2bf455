"""Tests for the figure renderer.

Real run directories are produced through the simulation engine's public
CLI (the only interface this package consumes); the circle-branch test
writes a synthetic branch table from the analytic oracle.
"""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from fixbed_plots.analysis import column, read_table, sign_change_points
from fixbed_plots.figures import FigureInputError, FigureSpec, render
from fixbed_plots.cli import main as plot_main


def simulate(config_text, outdir, *extra):
    cfg = outdir.parent / (outdir.name + ".ini")
    cfg.write_text(config_text)
    cmd = [sys.executable, "-m", "fixbed.cli", "simulate", "--config", str(cfg),
           "--out", str(outdir), *extra]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return outdir


SWEEP_INI = """
[run]
unit = AFBR
eos = {eos}
n_cells = 12
experiment = sweep

[sweep]
p_min = 680
p_max = 740
ds0 = 0.1
n_grid = 13
"""

STEP_INI = """
[run]
unit = AFBR
eos = srk
n_cells = 10
experiment = step

[conditions]
T_in = 700

[step]
magnitudes = 5, -5
horizon = 300
"""

DH_INI = """
[run]
unit = AFBR
eos = {eos}
experiment = dh-map

[dh_map]
T_min = 700
T_max = 760
n_T = 4
P_min = 150e5
P_max = 250e5
n_P = 3
"""


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    base = tmp_path_factory.mktemp("runs")
    out = {}
    out["sweep_real"] = simulate(SWEEP_INI.format(eos="srk"), base / "sweep_real")
    out["sweep_ideal"] = simulate(SWEEP_INI.format(eos="ideal"), base / "sweep_ideal")
    out["step"] = simulate(STEP_INI, base / "step")
    out["dh_real"] = simulate(DH_INI.format(eos="srk"), base / "dh_real")
    out["dh_ideal"] = simulate(DH_INI.format(eos="ideal"), base / "dh_ideal")
    return out


def spec_file(tmp_path, payload, name="spec.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return path


def test_sign_change_points_matches_branch_turning_column(runs):
    header, data = read_table(os.path.join(runs["sweep_real"], "branch.csv"))
    p = data[header[1]]
    seg = column(data, "segment")
    turning_col = column(data, "turning")
    marks = sign_change_points(p, seg)
    np.testing.assert_allclose(np.sort(marks), np.sort(p[turning_col == 1.0]))


def test_curve_markers_equal_branch_sign_changes(runs, tmp_path):
    spec = FigureSpec(kind="curve", inputs={"real": str(runs["sweep_real"]),
                                            "ideal": str(runs["sweep_ideal"])})
    info = render(spec, tmp_path / "curve.png")
    assert (tmp_path / "curve.png").stat().st_size > 0
    for role, run in (("real", runs["sweep_real"]), ("ideal", runs["sweep_ideal"])):
        header, data = read_table(os.path.join(run, "branch.csv"))
        expected = sign_change_points(data[header[1]], column(data, "segment"))
        assert info["turning"][role] == expected  # exactly the branch points


def test_curve_renders_real_only_without_ideal(runs, tmp_path):
    spec = FigureSpec(kind="curve", inputs={"real": str(runs["sweep_real"])})
    info = render(spec, tmp_path / "real_only.png")
    assert (tmp_path / "real_only.png").stat().st_size > 0
    assert "ideal" not in info["turning"]


def test_circle_oracle_branch_markers(tmp_path):
    # synthetic branch table from the analytic circle traced by arclength
    run = tmp_path / "circle"
    run.mkdir()
    # around the full circle and beyond, so both folds are interior points
    s = np.linspace(0.0, 2.5 * np.pi, 451)
    p = np.cos(s)
    w = np.sin(s)
    turning = np.zeros(p.size)
    dp = np.diff(p)
    for i in range(1, dp.size):
        turning[i] = 1.0 if dp[i] * dp[i - 1] < 0 else 0.0
    lines = ["index [-],T_in [K],X_out [-],T_report [K],T_out [K],turning [0/1],segment [-]"]
    fmt = lambda v: format(float(v), ".17g")
    for i in range(p.size):
        lines.append(f"{i},{fmt(p[i])},{fmt(abs(w[i]))},{fmt(w[i])},{fmt(w[i])},{int(turning[i])},0")
    (run / "branch.csv").write_text("\n".join(lines) + "\n")
    spec = FigureSpec(kind="curve", inputs={"real": str(run)})
    info = render(spec, tmp_path / "circle.png")
    marks = info["turning"]["real"]
    assert len(marks) == 2
    np.testing.assert_allclose(sorted(np.abs(marks)), [1.0, 1.0], atol=2e-4)


def test_profiles_and_timeseries_figures(runs, tmp_path):
    # a steady run for profiles
    steady = simulate("""
[run]
unit = AFBR
eos = srk
n_cells = 10
experiment = steady

[conditions]
T_in = 700
""", tmp_path / "steady")
    info = render(FigureSpec(kind="profiles", inputs={"real": str(steady)}),
                  tmp_path / "profiles.png")
    assert info["volumes"]["real"] == ["profiles_bed.csv"]
    info2 = render(FigureSpec(kind="timeseries", inputs={"real": str(runs["step"])}),
                   tmp_path / "steps.png")
    assert len(info2["series"]["real"]) == 2
    assert (tmp_path / "steps.png").stat().st_size > 0


def test_surface_ratio_figure(runs, tmp_path):
    info = render(FigureSpec(kind="surface", inputs={"real": str(runs["dh_real"]),
                                                     "ideal": str(runs["dh_ideal"])}),
                  tmp_path / "dh.png")
    assert info["kind"] == "ratio"
    assert (tmp_path / "dh.png").stat().st_size > 0


def test_render_is_idempotent(runs, tmp_path):
    spec = FigureSpec(kind="curve", inputs={"real": str(runs["sweep_real"])})
    render(spec, tmp_path / "a.png")
    render(spec, tmp_path / "b.png")
    assert (tmp_path / "a.png").read_bytes() == (tmp_path / "b.png").read_bytes()


def test_missing_input_errors(tmp_path):
    with pytest.raises(FigureInputError):
        FigureSpec(kind="curve", inputs={"real": str(tmp_path / "nope")})
    empty = tmp_path / "empty"
    empty.mkdir()
    with pytest.raises(FigureInputError):
        render(FigureSpec(kind="curve", inputs={"real": str(empty)}), tmp_path / "x.png")


def test_cli_end_to_end(runs, tmp_path, capsys):
    payload = {"kind": "curve", "inputs": {"real": str(runs["sweep_real"])},
               "title": "steady-state curve"}
    spath = spec_file(tmp_path, payload)
    out = tmp_path / "cli.png"
    assert plot_main(["--spec", str(spath), "--out", str(out)]) == 0
    assert out.stat().st_size > 0
    bad = spec_file(tmp_path, {"kind": "nope", "inputs": {}}, name="bad.json")
    assert plot_main(["--spec", str(bad), "--out", str(tmp_path / "y.png")]) == 2
