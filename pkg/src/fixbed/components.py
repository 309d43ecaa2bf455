"""Species constants and the plain-text component database."""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from importlib import resources

import numpy as np

R_GAS = 8.314  # J/(mol K)
T_REF = 298.15  # K, enthalpy reference temperature

AMMONIA_SPECIES = ("N2", "H2", "NH3", "Ar")


@dataclass(frozen=True)
class ComponentData:
    """Constants for one species.

    cp_poly holds heat-capacity polynomial coefficients on a J/(mol K)
    basis: cp(T) = sum_k cp_poly[k] * T**k.
    """

    name: str
    M: float          # molecular weight [kg/mol]
    Tc: float         # critical temperature [K]
    Pc: float         # critical pressure [Pa]
    omega: float      # acentric factor [-]
    cp_poly: tuple[float, ...]
    dHf298: float     # formation enthalpy at 298.15 K [J/mol]

    def __post_init__(self):
        if not (self.M > 0 and self.Tc > 0 and self.Pc > 0):
            raise ValueError(f"{self.name}: M, Tc, Pc must be positive")
        T = np.linspace(200.0, 1200.0, 401)
        if np.any(self.cp(T) <= 0):
            raise ValueError(f"{self.name}: cp not positive over [200, 1200] K")

    def cp(self, T):
        """Ideal-gas heat capacity [J/(mol K)]."""
        out = 0.0
        for k, a in enumerate(self.cp_poly):
            out = out + a * np.asarray(T, dtype=float) ** k
        return out


def load_components(path=None):
    """Read the component database (one section per species).

    Returns a dict name -> ComponentData.  ``path`` defaults to the
    database shipped with the package.
    """
    parser = configparser.ConfigParser()
    if path is None:
        text = resources.files("fixbed").joinpath("data/components.ini").read_text()
        parser.read_string(text)
    else:
        with open(path) as fh:
            parser.read_file(fh)
    out = {}
    for name in parser.sections():
        sec = parser[name]
        out[name] = ComponentData(
            name=name,
            M=float(sec["M"]),
            Tc=float(sec["Tc"]),
            Pc=float(sec["Pc"]),
            omega=float(sec["omega"]),
            cp_poly=tuple(float(v) for v in sec["cp"].split(",")),
            dHf298=float(sec["dHf298"]),
        )
    return out


def ammonia_components(path=None):
    """The (N2, H2, NH3, Ar) tuple in canonical order."""
    db = load_components(path)
    return tuple(db[name] for name in AMMONIA_SPECIES)
