"""Run configuration: INI parsing, validation, and round-trippable echo."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

from .fvm import MassMatrixMode
from .reactor import NOMINAL_CONDITIONS, OperatingConditions
from .thermo import EosKind

EOS_NAMES = {"ideal": EosKind.IDEAL_GAS, "srk": EosKind.SRK, "pr": EosKind.PENG_ROBINSON}
MASS_NAMES = {"full": MassMatrixMode.FULL_DYNAMIC,
              "pseudo-steady": MassMatrixMode.PSEUDO_STEADY_MASS}
EXPERIMENTS = ("steady", "sweep", "step", "dh-map")
SWEEP_PARAMETERS = ("T_in", "P_in", "P_out")
STEP_BASES = ("conditions", "optimum", "extinction")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


@dataclass
class RunConfig:
    unit: str = "AFBR"
    eos: str = "srk"
    n_cells: int = 100
    experiment: str = "steady"
    mass_matrix: str = "full"
    dispersion: bool = True
    conditions: OperatingConditions = field(default_factory=lambda: NOMINAL_CONDITIONS)
    tol_steady: float = 1e-4
    rtol_dynamic: float = 1e-5
    atol_dynamic: float = 1e-5
    sweep_parameter: str = "T_in"
    sweep_min: float = 650.0
    sweep_max: float = 850.0
    sweep_ds0: float = 0.05
    sweep_ds_max: float = 0.4
    sweep_grid: int = 201
    step_magnitudes: tuple = (5.0,)
    step_horizon: float = 1200.0
    step_base: str = "conditions"
    dh_T: tuple = (600.0, 800.0, 21)
    dh_P: tuple = (150e5, 300e5, 16)

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.unit.upper() not in ("AFBR", "IDCR"):
            raise ConfigError(f"run.unit: unknown unit {self.unit!r}")
        if self.eos not in EOS_NAMES:
            raise ConfigError(f"run.eos: unknown EOS {self.eos!r}")
        if self.n_cells < 2:
            raise ConfigError("run.n_cells: need at least 2 cells")
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"run.experiment: unknown experiment {self.experiment!r}")
        if self.mass_matrix not in MASS_NAMES:
            raise ConfigError(f"run.mass_matrix: unknown mode {self.mass_matrix!r}")
        if self.sweep_parameter not in SWEEP_PARAMETERS:
            raise ConfigError(f"sweep.parameter: unknown parameter {self.sweep_parameter!r}")
        if not self.sweep_min < self.sweep_max:
            raise ConfigError("sweep.p_min: empty sweep range")
        if self.sweep_grid < 2:
            raise ConfigError("sweep.n_grid: need at least 2 grid points")
        if self.step_base not in STEP_BASES:
            raise ConfigError(f"step.base: unknown base {self.step_base!r}")
        if self.step_horizon <= 0:
            raise ConfigError("step.horizon: must be positive")
        if not self.step_magnitudes:
            raise ConfigError("step.magnitudes: need at least one step")
        for name in ("tol_steady", "rtol_dynamic", "atol_dynamic"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"solver.{name}: must be positive")
        for nm, tpl in (("dh_map.T", self.dh_T), ("dh_map.P", self.dh_P)):
            if tpl[1] <= tpl[0] or int(tpl[2]) < 2:
                raise ConfigError(f"{nm}: invalid grid")
        return self

    @property
    def eos_kind(self):
        return EOS_NAMES[self.eos]

    @property
    def mass_mode(self):
        return MASS_NAMES[self.mass_matrix]

    def to_dict(self):
        return {
            "run": {
                "unit": self.unit, "eos": self.eos, "n_cells": self.n_cells,
                "experiment": self.experiment, "mass_matrix": self.mass_matrix,
                "dispersion": self.dispersion,
            },
            "conditions": {
                "x_in": list(self.conditions.x_in),
                "T_in": self.conditions.T_in,
                "P_in": self.conditions.P_in,
                "P_out": self.conditions.P_out,
            },
            "solver": {
                "tol_steady": self.tol_steady,
                "rtol_dynamic": self.rtol_dynamic,
                "atol_dynamic": self.atol_dynamic,
            },
            "sweep": {
                "parameter": self.sweep_parameter, "p_min": self.sweep_min,
                "p_max": self.sweep_max, "ds0": self.sweep_ds0,
                "ds_max": self.sweep_ds_max, "n_grid": self.sweep_grid,
            },
            "step": {
                "magnitudes": list(self.step_magnitudes),
                "horizon": self.step_horizon, "base": self.step_base,
            },
            "dh_map": {
                "T_min": self.dh_T[0], "T_max": self.dh_T[1], "n_T": int(self.dh_T[2]),
                "P_min": self.dh_P[0], "P_max": self.dh_P[1], "n_P": int(self.dh_P[2]),
            },
        }

    @classmethod
    def from_dict(cls, data):
        def need(section, key, conv=float):
            try:
                return conv(data[section][key])
            except KeyError as exc:
                raise ConfigError(f"{section}.{key}: missing key") from exc
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{section}.{key}: {exc}") from exc

        cond_raw = data.get("conditions", {})
        try:
            conditions = OperatingConditions(
                x_in=tuple(float(v) for v in cond_raw.get("x_in", NOMINAL_CONDITIONS.x_in)),
                T_in=float(cond_raw.get("T_in", NOMINAL_CONDITIONS.T_in)),
                P_in=float(cond_raw.get("P_in", NOMINAL_CONDITIONS.P_in)),
                P_out=float(cond_raw.get("P_out", NOMINAL_CONDITIONS.P_out)),
            )
        except ValueError as exc:
            raise ConfigError(f"conditions: {exc}") from exc
        run = data.get("run", {})
        solver = data.get("solver", {})
        sweep_ = data.get("sweep", {})
        step = data.get("step", {})
        dh = data.get("dh_map", {})
        return cls(
            unit=str(run.get("unit", "AFBR")),
            eos=str(run.get("eos", "srk")),
            n_cells=int(run.get("n_cells", 100)),
            experiment=str(run.get("experiment", "steady")),
            mass_matrix=str(run.get("mass_matrix", "full")),
            dispersion=_parse_bool(run.get("dispersion", True), "run.dispersion"),
            conditions=conditions,
            tol_steady=float(solver.get("tol_steady", 1e-4)),
            rtol_dynamic=float(solver.get("rtol_dynamic", 1e-5)),
            atol_dynamic=float(solver.get("atol_dynamic", 1e-5)),
            sweep_parameter=str(sweep_.get("parameter", "T_in")),
            sweep_min=float(sweep_.get("p_min", 650.0)),
            sweep_max=float(sweep_.get("p_max", 850.0)),
            sweep_ds0=float(sweep_.get("ds0", 0.05)),
            sweep_ds_max=float(sweep_.get("ds_max", 0.4)),
            sweep_grid=int(sweep_.get("n_grid", 201)),
            step_magnitudes=tuple(float(v) for v in _as_list(step.get("magnitudes", [5.0]))),
            step_horizon=float(step.get("horizon", 1200.0)),
            step_base=str(step.get("base", "conditions")),
            dh_T=(float(dh.get("T_min", 600.0)), float(dh.get("T_max", 800.0)),
                  int(dh.get("n_T", 21))),
            dh_P=(float(dh.get("P_min", 150e5)), float(dh.get("P_max", 300e5)),
                  int(dh.get("n_P", 16))),
        )


def _as_list(v):
    if isinstance(v, (list, tuple)):
        return v
    return [s for s in str(v).split(",") if s.strip()]


def _parse_bool(v, key):
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("on", "true", "1", "yes"):
        return True
    if s in ("off", "false", "0", "no"):
        return False
    raise ConfigError(f"{key}: expected on/off, got {v!r}")


def load_config(path) -> RunConfig:
    """Parse the INI run configuration (see docs/example config)."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str  # keys are case-sensitive (T_in vs t_in)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"config file: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    data = {}
    for section in parser.sections():
        data[section] = dict(parser[section])
    # lists arrive as comma-separated strings
    if "conditions" in data and "x_in" in data["conditions"]:
        data["conditions"]["x_in"] = [s for s in data["conditions"]["x_in"].split(",")]
    if "step" in data and "magnitudes" in data["step"]:
        data["step"]["magnitudes"] = [s for s in data["step"]["magnitudes"].split(",")]
    return RunConfig.from_dict(data)
