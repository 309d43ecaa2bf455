import numpy as np

from fixbed.cli import compare_runs, main, run
from fixbed.config import RunConfig
from fixbed.tables import column, read_metadata, read_table


def write(path, text):
    with open(path, "w") as fh:
        fh.write(text)


STEADY_INI = """
[run]
unit = AFBR
eos = srk
n_cells = {n}
experiment = steady

[conditions]
T_in = 700
"""


def test_steady_run_writes_profiles_and_metadata(tmp_path):
    cfg = tmp_path / "run.ini"
    write(cfg, STEADY_INI.format(n=20))
    out = tmp_path / "out"
    assert run(str(cfg), str(out)) == 0
    header, data = read_table(out / "profiles_bed.csv")
    assert len(data[header[0]]) == 20
    assert header[0].startswith("z")
    meta = read_metadata(out)
    assert meta["status"] == "ok"
    assert 0.05 < meta["steady"]["X_out"] < 0.15


def test_config_echo_round_trip(tmp_path):
    cfg = tmp_path / "run.ini"
    write(cfg, STEADY_INI.format(n=12))
    out = tmp_path / "out"
    assert run(str(cfg), str(out)) == 0
    echo = read_metadata(out)["config"]
    rc = RunConfig.from_dict(echo)
    assert rc.to_dict() == echo


def test_malformed_config_exit_2(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    write(cfg, "[run]\nunit = NOPE\n")
    assert run(str(cfg), str(tmp_path / "o")) == 2
    assert "run.unit" in capsys.readouterr().err


def test_invalid_value_names_key(tmp_path, capsys):
    cfg = tmp_path / "bad2.ini"
    write(cfg, "[run]\nunit = AFBR\n\n[sweep]\np_min = 900\np_max = 700\n")
    assert run(str(cfg), str(tmp_path / "o")) == 2
    assert "sweep.p_min" in capsys.readouterr().err


def test_cli_overrides(tmp_path):
    cfg = tmp_path / "run.ini"
    write(cfg, STEADY_INI.format(n=10))
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(cfg), "--out", str(out),
                 "--eos", "ideal", "--cells", "8"]) == 0
    meta = read_metadata(out)
    assert meta["config"]["run"]["eos"] == "ideal"
    assert meta["config"]["run"]["n_cells"] == 8
    header, data = read_table(out / "profiles_bed.csv")
    assert len(data[header[0]]) == 8


def test_determinism_byte_identical_tables(tmp_path):
    cfg = tmp_path / "run.ini"
    write(cfg, STEADY_INI.format(n=15))
    for d in ("a", "b"):
        assert run(str(cfg), str(tmp_path / d)) == 0
    ta = (tmp_path / "a" / "profiles_bed.csv").read_bytes()
    tb = (tmp_path / "b" / "profiles_bed.csv").read_bytes()
    assert ta == tb


def test_solver_failure_exit_3_with_metadata(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    write(cfg, """
[run]
unit = AFBR
n_cells = 10
experiment = step

[step]
base = extinction
magnitudes = 5
horizon = 10

[sweep]
p_min = 700
p_max = 710
""")
    out = tmp_path / "out"
    assert run(str(cfg), str(out)) == 3
    meta = read_metadata(out)
    assert meta["status"] == "failed"
    assert "error" in meta


def test_sweep_and_compare(tmp_path):
    cfg = tmp_path / "sweep.ini"
    write(cfg, """
[run]
unit = AFBR
eos = srk
n_cells = 12
experiment = sweep

[sweep]
p_min = 680
p_max = 720
ds0 = 0.1
n_grid = 9
""")
    assert run(str(cfg), str(tmp_path / "A")) == 0
    assert run(str(cfg), str(tmp_path / "B"), eos="ideal") == 0
    header, data = read_table(tmp_path / "A" / "branch.csv")
    assert "turning [0/1]" in header
    # identical runs -> zero differences
    assert run(str(cfg), str(tmp_path / "A2")) == 0
    outcsv = tmp_path / "diff.csv"
    assert compare_runs(str(tmp_path / "A"), str(tmp_path / "A2"), "T_out",
                        str(outcsv)) == 0
    h2, d2 = read_table(outcsv)
    np.testing.assert_array_equal(column(h2, d2, "T_out_diff"), 0.0)
    # real vs ideal differences are small but nonzero
    outcsv2 = tmp_path / "diff2.csv"
    assert compare_runs(str(tmp_path / "A"), str(tmp_path / "B"), "T_out",
                        str(outcsv2)) == 0
    h3, d3 = read_table(outcsv2)
    dT = column(h3, d3, "T_out_diff")
    assert 0 < np.max(np.abs(dT)) < 10.0


def test_compare_mismatched_grids(tmp_path, capsys):
    for name, pmax in (("A", 720), ("B", 721)):
        cfg = tmp_path / f"{name}.ini"
        write(cfg, f"""
[run]
unit = AFBR
n_cells = 8
experiment = sweep

[sweep]
p_min = 700
p_max = {pmax}
ds0 = 0.2
n_grid = 5
""")
        assert run(str(cfg), str(tmp_path / name)) == 0
    assert compare_runs(str(tmp_path / "A"), str(tmp_path / "B"), "T_out") == 2
    assert "mismatched" in capsys.readouterr().err


def test_heat_of_reaction_mode(tmp_path):
    cfg = tmp_path / "dh.ini"
    write(cfg, """
[run]
unit = AFBR
eos = srk

[dh_map]
T_min = 700
T_max = 780
n_T = 3
P_min = 150e5
P_max = 250e5
n_P = 3
""")
    out = tmp_path / "dh"
    assert main(["simulate", "--config", str(cfg), "--out", str(out),
                 "--heat-of-reaction"]) == 0
    header, data = read_table(out / "dh_map.csv")
    assert len(data[header[0]]) == 9
    assert np.all(column(header, data, "dH") < -9e4)
