"""Constitutive closures: kinetics, advection velocity, dispersion, heat transfer.

Every function is pure, vectorized over leading cell axes, and accepts
either plain arrays or dual arrays.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import duals as d
from .components import R_GAS

PA_PER_BAR = 1e5
PRESSURE_FLOOR_BAR = 1e-10  # partial pressures floored before fractional powers


@dataclass(frozen=True)
class KineticParams:
    """Reversible Temkin-Pyzhev kinetics with pseudo-homogeneous scaling.

    Arrhenius prefactors are per unit solid volume; rates are returned per
    unit fluid volume via the (1-eps)/eps ratio.  ``eta`` is a fitted
    activity factor.
    """

    nu: np.ndarray          # stoichiometric matrix, reactions x components
    A_fwd: float            # [mol/(s m3-solid)]
    A_bwd: float            # [mol/(s m3-solid)]
    E_fwd: float            # [J/mol]
    E_bwd: float            # [J/mol]
    beta: float
    eta: float
    epsilon: float          # bed porosity of the owning volume

    def __post_init__(self):
        object.__setattr__(self, "nu", np.atleast_2d(np.asarray(self.nu, dtype=float)))
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        if self.eta <= 0.0:
            raise ValueError("eta must be positive")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("porosity must lie in (0, 1)")


class AdvectionLaw(enum.Enum):
    ERGUN = "ergun"
    DARCY_WEISBACH = "darcy-weisbach"


@dataclass(frozen=True)
class AdvectionParams:
    law: AdvectionLaw
    mu: float                  # dynamic viscosity [Pa s]
    d_p: float = 0.0           # particle diameter [m], Ergun
    epsilon: float = 1.0       # porosity, Ergun
    d_t: float = 0.0           # tube diameter [m], Darcy-Weisbach
    f_dw: float = 0.0          # friction factor [-], Darcy-Weisbach

    def __post_init__(self):
        if self.law is AdvectionLaw.ERGUN:
            if self.d_p <= 0 or not 0.0 < self.epsilon < 1.0:
                raise ValueError("Ergun law needs d_p > 0 and porosity in (0, 1)")
        else:
            if self.d_t <= 0 or self.f_dw <= 0:
                raise ValueError("Darcy-Weisbach law needs d_t > 0 and f_dw > 0")


@dataclass(frozen=True)
class TransportParams:
    D: float       # effective diffusivity [m2/s]; 0 disables dispersion
    kappa: float   # effective axial conductivity [W/(m K)]; 0 disables conduction

    def __post_init__(self):
        if self.D < 0 or self.kappa < 0:
            raise ValueError("transport coefficients must be nonnegative")


@dataclass(frozen=True)
class HeatTransferParams:
    U_overall: float    # [W/(m2 K)]
    A_interface: float  # [m2]
    a_self: float       # A/V of the owning volume [1/m]
    a_other: float      # A/V' of the neighbor [1/m]

    def __post_init__(self):
        for name in ("U_overall", "A_interface", "a_self", "a_other"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @classmethod
    def from_geometry(cls, U_overall, A_interface, V_self, V_other):
        return cls(U_overall, A_interface, A_interface / V_self, A_interface / V_other)


# -- kinetics -------------------------------------------------------------------


def temkin_rate(params: KineticParams, T, P, c):
    """Pseudo-homogeneous ammonia synthesis rate [mol/(s m3-fluid)].

    Partial pressures enter in bar (the Arrhenius factors are fitted on
    that basis); all other pressures in this package are Pa.
    """
    ctot = d.sum_last(c)
    x = c / _col(ctot)
    P_bar = _col(P) * x / PA_PER_BAR
    pN2 = d.maximum_floor(P_bar[..., 0], PRESSURE_FLOOR_BAR)
    pH2 = d.maximum_floor(P_bar[..., 1], PRESSURE_FLOOR_BAR)
    pNH3 = d.maximum_floor(P_bar[..., 2], PRESSURE_FLOOR_BAR)
    k_fwd = params.A_fwd * d.exp(-params.E_fwd / (R_GAS * T))
    k_bwd = params.A_bwd * d.exp(-params.E_bwd / (R_GAS * T))
    ratio = pH2**3 / pNH3**2
    r = k_fwd * pN2 * ratio**params.beta - k_bwd * ratio ** (-params.beta)
    scale = (1.0 - params.epsilon) / params.epsilon * params.eta
    r = scale * r
    if not np.all(np.isfinite(d.value(r))):
        raise FloatingPointError("kinetic rate is not finite; state outside validity")
    return r


def production_rates(params: KineticParams, T, P, c):
    """Componentwise production R = nu^T r [mol/(s m3-fluid)]."""
    r = temkin_rate(params, T, P, c)
    return _col(r) * params.nu[0]


# -- mass transport ---------------------------------------------------------------


def fluid_density(c, M):
    """rho = sum_a M_a c_a [kg/m3-fluid]."""
    return d.sum_last(c * M)


def velocity_from_pressure_gradient(params: AdvectionParams, dPdz, rho):
    """Explicit velocity from the pressure-drop law; sign follows -dPdz.

    Ergun (interstitial velocity v): a v + b v|v| = -dPdz with
      a = 150 mu (1-eps)^2 / (d_p^2 eps^2),  b = 1.75 rho (1-eps) / (d_p eps),
    solved by the positive quadratic root written in a cancellation-free
    form that stays differentiable through dPdz = 0.

    Darcy-Weisbach: v = sign(-dPdz) sqrt(2 d_t |dPdz| / (f rho)).
    """
    g = -dPdz
    if params.law is AdvectionLaw.ERGUN:
        eps = params.epsilon
        a = 150.0 * params.mu * (1.0 - eps) ** 2 / (params.d_p**2 * eps**2)
        b = 1.75 * rho * (1.0 - eps) / (params.d_p * eps)
        return 2.0 * g / (a + d.sqrt(a * a + 4.0 * b * d.absolute(g)))
    speed = d.sqrt(2.0 * params.d_t * d.absolute(g) / (params.f_dw * rho))
    return d.where(d.value(g) >= 0.0, speed, -speed)


def diffusive_flux(D, dc_dz):
    """Fick flux N_diff = -D dc/dz (elementwise)."""
    return -(D * dc_dz)


# -- energy transport ---------------------------------------------------------------


def energy_flux_parts(model, T, P, c, N_adv, N_diff, dT_dz, kappa, epsilon=1.0):
    """Total energy flux [W/m2 of reactor cross-section].

    Convective enthalpy flow and the diffusion-thermo term are fluid-phase
    quantities and carry the fluid fraction; the conductivity is already an
    effective whole-volume value.
    """
    conv = model.enthalpy(T, P, N_adv)
    dth = d.sum_last(model.partial_molar_enthalpy(T, P, c) * N_diff)
    return epsilon * (conv - dth) - kappa * dT_dz


# -- heat transfer -------------------------------------------------------------------


def interfacial_heat(params: HeatTransferParams, T_other, T_self):
    """Newton cooling Q = a U (T' - T) [W/m3 of the owning volume]."""
    return params.a_self * params.U_overall * (T_other - T_self)


def _col(x):
    """Append a component axis for broadcasting scalars/cell vectors."""
    if isinstance(x, d.Dual):
        return d.Dual(x.val[..., None], x.der[..., None])
    return np.asarray(x, dtype=float)[..., None]
