"""Command-line entry points: ``fixbed simulate`` and ``fixbed compare``."""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .experiments import (
    SteadyStateError,
    heat_of_reaction_map,
    make_system,
    solve_steady,
    step_response,
    settling_time,
    response_time,
    sweep,
)
from .newton import NewtonError
from .reactor import NU_AMMONIA
from .tables import column, read_table, write_metadata, write_table

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3

COMPARE_TABLES = {
    "X_out": ("curve.csv", "X_out"),
    "T_out": ("curve.csv", "T_out"),
    "T_report": ("curve.csv", "T_report"),
    "dH": ("dh_map.csv", "dH"),
}


def main(argv=None):
    parser = argparse.ArgumentParser(prog="fixbed",
                                     description="Fixed-bed reactor simulation engine")
    sub = parser.add_subparsers(dest="command", required=True)
    sim = sub.add_parser("simulate", help="run an experiment from a config file")
    sim.add_argument("--config", required=True, help="INI configuration file")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--eos", choices=["ideal", "srk", "pr"], help="override run.eos")
    sim.add_argument("--cells", type=int, help="override run.n_cells")
    sim.add_argument("--tol", type=float, help="override solver.tol_steady")
    sim.add_argument("--heat-of-reaction", action="store_true",
                     help="run the dH = nu.Hbar diagnostic map instead of the "
                          "configured experiment")
    cmp_ = sub.add_parser("compare", help="difference table between two result dirs")
    cmp_.add_argument("--a", required=True)
    cmp_.add_argument("--b", required=True)
    cmp_.add_argument("--quantity", required=True, choices=sorted(COMPARE_TABLES))
    cmp_.add_argument("--out", help="optional output CSV path (default: stdout)")
    args = parser.parse_args(argv)
    if args.command == "simulate":
        return run(args.config, args.out, eos=args.eos, cells=args.cells, tol=args.tol,
                   heat_of_reaction=args.heat_of_reaction)
    return compare_runs(args.a, args.b, args.quantity, args.out)


def run(config_path, outdir, eos=None, cells=None, tol=None, heat_of_reaction=False):
    """Execute one experiment; returns the process exit code."""
    t_start = time.time()
    try:
        cfg = load_config(config_path)
        if eos is not None:
            cfg.eos = eos
        if cells is not None:
            cfg.n_cells = cells
        if tol is not None:
            cfg.tol_steady = tol
        if heat_of_reaction:
            cfg.experiment = "dh-map"
        cfg.validate()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    os.makedirs(outdir, exist_ok=True)
    meta = {
        "config": cfg.to_dict(),
        "versions": {"fixbed": __version__, "numpy": np.__version__},
        "status": "ok",
    }
    try:
        results = _dispatch(cfg, outdir)
        meta.update(results)
    except (SteadyStateError, NewtonError, Exception) as exc:  # noqa: BLE001
        if isinstance(exc, (KeyboardInterrupt, SystemExit)):
            raise
        meta["status"] = "failed"
        meta["error"] = f"{type(exc).__name__}: {exc}"
        if isinstance(exc, NewtonError) and exc.result is not None:
            meta["iteration_log"] = exc.result.log
        meta["wall_time_s"] = time.time() - t_start
        write_metadata(outdir, meta)
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    meta["wall_time_s"] = time.time() - t_start
    write_metadata(outdir, meta)
    return EXIT_OK


def _dispatch(cfg: RunConfig, outdir):
    if cfg.experiment == "dh-map":
        return _run_dh_map(cfg, outdir)
    system = make_system(cfg.unit, cfg.eos_kind, cfg.n_cells, cfg.conditions,
                         dispersion=cfg.dispersion)
    if cfg.experiment == "steady":
        return _run_steady(cfg, system, outdir)
    if cfg.experiment == "sweep":
        return _run_sweep(cfg, system, outdir)
    return _run_step(cfg, system, outdir)


def _write_profiles(system, w, cond, outdir):
    out = system.outputs(w, cond)
    comp_names = [c.name for c in system.unit.components]
    for prof in out["profiles"]:
        cols = [("z [m]", prof["z"])]
        cols += [(f"c_{nm} [mol/m3]", prof["c"][:, i]) for i, nm in enumerate(comp_names)]
        cols += [("u [J/m3]", prof["u"]), ("T [K]", prof["T"]),
                 ("P [Pa]", prof["P"]), ("v [m/s]", prof["v"])]
        write_table(os.path.join(outdir, f"profiles_{prof['name']}.csv"), cols)
    summary = {"X_out": out["X_out"], "T_out": out["T_out"]}
    if "T_top" in out:
        summary["T_top"] = out["T_top"]
    return summary


def _run_steady(cfg, system, outdir):
    sol = solve_steady(system, cfg.conditions, tol=cfg.tol_steady)
    summary = _write_profiles(system, sol.w, cfg.conditions, outdir)
    return {"steady": summary,
            "solver": {"method": sol.method, "newton_iterations": sol.newton_iterations,
                       "residual_norm": sol.residual_norm}}


def _run_sweep(cfg, system, outdir):
    sw = sweep(system, cfg.conditions, (cfg.sweep_min, cfg.sweep_max),
               param=cfg.sweep_parameter, tol=cfg.tol_steady,
               ds0=cfg.sweep_ds0, ds_max=cfg.sweep_ds_max)
    write_table(os.path.join(outdir, "branch.csv"), [
        ("index [-]", np.arange(sw.p.size)),
        (f"{sw.param} [K]" if "T" in sw.param else f"{sw.param} [Pa]", sw.p),
        ("X_out [-]", sw.X_out),
        ("T_report [K]", sw.T_report),
        ("T_out [K]", sw.T_out),
        ("turning [0/1]", sw.turning.astype(int)),
        ("segment [-]", sw.segment.astype(int)),
    ])
    # uniform-grid resample for comparisons, only when single-valued in p
    if sw.p.size > 1 and (np.all(np.diff(sw.p) > 0) or np.all(np.diff(sw.p) < 0)):
        grid = np.linspace(cfg.sweep_min, cfg.sweep_max, cfg.sweep_grid)
        order = np.argsort(sw.p)
        write_table(os.path.join(outdir, "curve.csv"), [
            (f"{sw.param} [K]" if "T" in sw.param else f"{sw.param} [Pa]", grid),
            ("X_out [-]", np.interp(grid, sw.p[order], sw.X_out[order])),
            ("T_report [K]", np.interp(grid, sw.p[order], sw.T_report[order])),
            ("T_out [K]", np.interp(grid, sw.p[order], sw.T_out[order])),
        ])
    return {"sweep": dict(sw.analysis, n_points=int(sw.p.size))}


def _resolve_step_base(cfg, system):
    """Base steady state for step experiments."""
    cond = cfg.conditions
    if cfg.step_base == "conditions":
        sol = solve_steady(system, cond, tol=cfg.tol_steady)
        return cond, sol.w, {"base": "conditions", "T_in": cond.T_in}
    sw = sweep(system, cond, (cfg.sweep_min, cfg.sweep_max),
               param="T_in", tol=cfg.tol_steady, ds0=cfg.sweep_ds0,
               ds_max=cfg.sweep_ds_max)
    if cfg.step_base == "optimum":
        p_star = sw.analysis["optimum_p"]
    else:
        if "extinction_p" not in sw.analysis:
            raise SteadyStateError("branch has no extinction point to base the step on")
        p_star = sw.analysis["extinction_p"]
    # nearest point on the upper (ignited) part, re-converged at exactly p_star
    if sw.segment is not None and sw.segment.max() > 0:
        mask = sw.segment == sw.segment.max()
    elif sw.turning.any():
        mask = np.arange(sw.p.size) >= np.where(sw.turning)[0].max()
    else:
        mask = np.ones(sw.p.size, dtype=bool)
    candidates = np.where(mask)[0]
    i_near = candidates[np.argmin(np.abs(sw.p[candidates] - p_star))]
    cond_star = cond.replace(T_in=float(p_star))
    sol = solve_steady(system, cond_star, w0=sw.W[i_near], tol=cfg.tol_steady)
    return cond_star, sol.w, {"base": cfg.step_base, "T_in": float(p_star)}


def _run_step(cfg, system, outdir):
    cond, w_base, base_info = _resolve_step_base(cfg, system)
    metrics = {}
    for mag in cfg.step_magnitudes:
        resp = step_response(system, cond, w_base, mag, cfg.step_horizon,
                             mass_mode=cfg.mass_mode, rtol=cfg.rtol_dynamic,
                             atol=cfg.atol_dynamic)
        cols = [("t [s]", resp.t), ("X_out [-]", resp.X_out), ("T_out [K]", resp.T_out)]
        if resp.T_top is not None:
            cols.append(("T_top [K]", resp.T_top))
        tag = format(mag, "+g").replace("+", "p").replace("-", "m").replace(".", "_")
        write_table(os.path.join(outdir, f"timeseries_{tag}.csv"), cols)
        T_resp = resp.T_top if resp.T_top is not None else resp.T_out
        metrics[format(mag, "+g")] = {
            "t50_X": response_time(resp.t, resp.X_out),
            "t50_T": response_time(resp.t, T_resp),
            "settling_X": settling_time(resp.t, resp.X_out),
            "steps": resp.stats["steps"],
        }
    return {"step": {"base": base_info, "magnitudes": list(cfg.step_magnitudes),
                     "metrics": metrics}}


def _run_dh_map(cfg, outdir):
    Tv = np.linspace(cfg.dh_T[0], cfg.dh_T[1], int(cfg.dh_T[2]))
    Pv = np.linspace(cfg.dh_P[0], cfg.dh_P[1], int(cfg.dh_P[2]))
    x = np.array(cfg.conditions.x_in)
    dH = heat_of_reaction_map(cfg.eos_kind, Tv, Pv, x, NU_AMMONIA)
    TT, PP = np.meshgrid(Tv, Pv, indexing="ij")
    write_table(os.path.join(outdir, "dh_map.csv"), [
        ("T [K]", TT.ravel()), ("P [Pa]", PP.ravel()), ("dH [J/mol]", dH.ravel()),
    ])
    return {"dh_map": {"T_grid": [float(Tv[0]), float(Tv[-1]), int(Tv.size)],
                       "P_grid": [float(Pv[0]), float(Pv[-1]), int(Pv.size)]}}


def compare_runs(dir_a, dir_b, quantity, out_path=None):
    """Aligned (p, A, B, A-B) table for a shared-grid quantity."""
    table, col = COMPARE_TABLES[quantity]
    try:
        header_a, data_a = read_table(os.path.join(dir_a, table))
        header_b, data_b = read_table(os.path.join(dir_b, table))
    except OSError as exc:
        print(f"compare error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    key_cols = [h for h in header_a if h.split(" [")[0] in ("T_in", "P_in", "P_out", "T", "P")]
    if not key_cols or header_a != header_b:
        print("compare error: mismatched tables", file=sys.stderr)
        return EXIT_CONFIG
    for k in key_cols:
        if data_a[k].size != data_b[k].size or np.max(np.abs(data_a[k] - data_b[k])) > 1e-9 * max(1.0, np.max(np.abs(data_a[k]))):
            print("compare error: mismatched grids", file=sys.stderr)
            return EXIT_CONFIG
    va = column(header_a, data_a, col)
    vb = column(header_b, data_b, col)
    cols = [(k, data_a[k]) for k in key_cols]
    cols += [(f"{col}_a", va), (f"{col}_b", vb), (f"{col}_diff", va - vb)]
    if out_path:
        write_table(out_path, cols)
    else:
        names = [n for n, _ in cols]
        sys.stdout.write(",".join(names) + "\n")
        for i in range(va.size):
            sys.stdout.write(",".join(format(float(a[i]), ".17g") for _, a in cols) + "\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
