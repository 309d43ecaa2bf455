"""Fluid and solid thermodynamic property functions.

Volume V(T, P, n) and enthalpy H(T, P, n) for an ideal gas or a cubic
equation of state (Soave-Redlich-Kwong or Peng-Robinson, van der Waals
one-fluid mixing with all binary interaction parameters zero).  Both are
degree-one homogeneous in the mole vector, so evaluating them on molar
concentrations yields per-unit-fluid-volume densities, and evaluating the
enthalpy on a molar flux vector yields an energy flux.

All kernels are vectorized over leading axes (components on the trailing
axis) and accept either plain arrays or :class:`fixbed.duals.Dual` inputs,
which is how the semi-discrete Jacobian is assembled.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import duals as d
from .components import R_GAS, T_REF

SQRT2 = np.sqrt(2.0)


class ThermoError(ValueError):
    """Unphysical thermodynamic state (bad T/P or no valid cubic root)."""


class EosKind(enum.Enum):
    IDEAL_GAS = "ideal"
    SRK = "srk"
    PENG_ROBINSON = "pr"


@dataclass
class ThermoState:
    """Algebraic-variable triple at a point or per cell.

    T [K] and P [Pa] may be scalars or arrays; c [mol/m3-fluid] carries the
    component axis last.  Solver iterates may transiently violate c >= 0,
    so validation is explicit rather than automatic.
    """

    T: object
    P: object
    c: object

    def validate(self):
        if np.any(np.asarray(self.T) <= 0) or np.any(np.asarray(self.P) <= 0):
            raise ThermoError("temperature and pressure must be positive")
        if np.any(np.asarray(self.c) < 0):
            raise ThermoError("concentrations must be nonnegative")
        return self


@dataclass(frozen=True)
class SolidProperties:
    rho_solid: float   # [kg/m3]
    cp_solid: float    # [J/(kg K)]

    def __post_init__(self):
        if self.rho_solid <= 0 or self.cp_solid <= 0:
            raise ValueError("solid density and heat capacity must be positive")


# EOS-family constants: (omega_a, omega_b, m(omega) coefficients)
_EOS_CONST = {
    EosKind.SRK: (0.42748, 0.08664, (0.480, 1.574, -0.176)),
    EosKind.PENG_ROBINSON: (0.45724, 0.07780, (0.37464, 1.54226, -0.26992)),
}


class FluidModel:
    """Property functions for one fluid mixture under one EOS."""

    def __init__(self, eos: EosKind, components):
        self.eos = eos
        self.components = tuple(components)
        self.n_comp = len(self.components)
        self.M = np.array([cd.M for cd in self.components])
        self.Tc = np.array([cd.Tc for cd in self.components])
        self.Pc = np.array([cd.Pc for cd in self.components])
        self.omega = np.array([cd.omega for cd in self.components])
        self.dHf = np.array([cd.dHf298 for cd in self.components])
        ncp = max(len(cd.cp_poly) for cd in self.components)
        self.cp_coef = np.zeros((self.n_comp, ncp))
        for i, cd in enumerate(self.components):
            self.cp_coef[i, : len(cd.cp_poly)] = cd.cp_poly
        if eos is EosKind.IDEAL_GAS:
            self.b_i = np.zeros(self.n_comp)
            self.sqrt_ac = np.zeros(self.n_comp)
            self.m_i = np.zeros(self.n_comp)
        else:
            om_a, om_b, mc = _EOS_CONST[eos]
            self.b_i = om_b * R_GAS * self.Tc / self.Pc
            self.sqrt_ac = np.sqrt(om_a) * R_GAS * self.Tc / np.sqrt(self.Pc)
            self.m_i = mc[0] + mc[1] * self.omega + mc[2] * self.omega**2

    # -- attraction parameter ------------------------------------------------
    # With k_ij = 0 the mixture parameter is a perfect square:
    #   a_mix(T, n) = (sum_i n_i s_i(T))^2,  s_i = sqrt(a_c,i) (1 + m_i (1 - sqrt(T/Tc_i)))

    def _s(self, T):
        sqrtTr = d.sqrt(_expand(T) / self.Tc)
        return (1.0 + self.m_i * (1.0 - sqrtTr)) * self.sqrt_ac

    def _ds_dT(self, T):
        # d s_i / dT = -sqrt(a_c,i) m_i / (2 sqrt(T Tc_i))
        return -self.sqrt_ac * self.m_i / (2.0 * d.sqrt(_expand(T) * self.Tc))

    # -- cubic root ------------------------------------------------------------

    def _cubic_coeffs(self, A, B):
        if self.eos is EosKind.SRK:
            return -1.0 + 0.0 * B, A - B - B * B, -(A * B)
        # Peng-Robinson
        return -(1.0 - B), A - 3.0 * B * B - 2.0 * B, -(A * B - B * B - B * B * B)

    def compressibility(self, T, P, n):
        """Largest-root compressibility factor Z(T, P, n) (gas branch)."""
        _check_tp(T, P)
        ntot = d.sum_last(n)
        mask = d.value(ntot) == 0.0
        ntot_s = d.where(mask, 1.0, ntot)
        if self.eos is EosKind.IDEAL_GAS:
            one = d.value(ntot) * 0.0 + 1.0
            return one if not isinstance(ntot, d.Dual) else d.Dual(one, ntot.der * 0.0)
        S = d.sum_last(n * self._s(T))
        btot = d.sum_last(n * self.b_i)
        a_m = (S / ntot_s) ** 2
        b_m = btot / ntot_s
        RT = R_GAS * T
        A = a_m * P / (RT * RT)
        B = b_m * P / RT
        p2, p1, p0 = self._cubic_coeffs(A, B)
        Z = _largest_cubic_root(p2, p1, p0)
        bad = ~np.isfinite(d.value(Z)) | (d.value(Z) <= d.value(B))
        if np.any(bad & ~mask):
            raise ThermoError("no real compressibility root above the reduced co-volume")
        return Z

    def volume(self, T, P, n):
        """Fluid volume V(T, P, n) [m3 per mole-vector basis]."""
        _check_tp(T, P)
        ntot = d.sum_last(n)
        if self.eos is EosKind.IDEAL_GAS:
            return ntot * R_GAS * T / P
        Z = self.compressibility(T, P, n)
        return ntot * Z * R_GAS * T / P

    def ideal_molar_enthalpy(self, T):
        """Pure-component ideal-gas enthalpies h_i(T) [J/mol], shape (..., nc)."""
        Te = _expand(T)
        h = self.dHf + 0.0 * Te
        for k in range(self.cp_coef.shape[1]):
            h = h + self.cp_coef[:, k] * (Te ** (k + 1) - T_REF ** (k + 1)) / (k + 1.0)
        return h

    def enthalpy(self, T, P, n):
        """Enthalpy H(T, P, n) [J]: ideal part plus EOS residual."""
        _check_tp(T, P)
        H_ideal = d.sum_last(n * self.ideal_molar_enthalpy(T))
        if self.eos is EosKind.IDEAL_GAS:
            return H_ideal
        return H_ideal + self._residual_enthalpy(T, P, n)

    def _mixture_parts(self, T, n):
        S = d.sum_last(n * self._s(T))
        Sp = d.sum_last(n * self._ds_dT(T))
        btot = d.sum_last(n * self.b_i)
        return S, Sp, btot

    def _residual_enthalpy(self, T, P, n):
        ntot = d.sum_last(n)
        mask = d.value(ntot) == 0.0
        ntot_s = d.where(mask, 1.0, ntot)
        n_s = d.where(mask[..., None], _unit_comp(self.n_comp), n)
        S, Sp, btot = self._mixture_parts(T, n_s)
        V = self.volume(T, P, n_s)
        # D = a_mix - T da_mix/dT, extensive form
        D = S * S - 2.0 * T * S * Sp
        if self.eos is EosKind.SRK:
            core = (D / btot) * d.log(V / (V + btot))
        else:
            G = (V + (1.0 + SQRT2) * btot) / (V + (1.0 - SQRT2) * btot)
            core = -(D / (2.0 * SQRT2 * btot)) * d.log(G)
        H_res = core + P * V - ntot_s * R_GAS * T
        return d.where(mask, 0.0, H_res)

    def partial_molar_enthalpy(self, T, P, c):
        """H_bar = dH/dc at fixed (T, P) [J/mol], shape (..., nc)."""
        _check_tp(T, P)
        h_ig = self.ideal_molar_enthalpy(T)
        if self.eos is EosKind.IDEAL_GAS:
            return h_ig + 0.0 * _expand(d.sum_last(c))
        S, Sp, btot = self._mixture_parts(T, c)
        ntot = d.sum_last(c)
        V = self.volume(T, P, c)
        s_i = self._s(T)
        sp_i = self._ds_dT(T)
        D = S * S - 2.0 * T * S * Sp
        # dD/dc_i and partial molar volume from implicit differentiation of the EOS
        D_i = 2.0 * _expand(S) * s_i - 2.0 * _expand(T) * (_expand(S) * sp_i + _expand(Sp) * s_i)
        Vbar = self._partial_molar_volume(T, P, c, S, btot, V, s_i)
        RT = R_GAS * T
        if self.eos is EosKind.SRK:
            L = d.log(V / (V + btot))
            term = (
                D_i / _expand(btot) * _expand(L)
                - _expand(D * L / (btot * btot)) * self.b_i
                + _expand(D / btot) * (Vbar / _expand(V) - (Vbar + self.b_i) / _expand(V + btot))
            )
        else:
            dp, dm = 1.0 + SQRT2, 1.0 - SQRT2
            G = (V + dp * btot) / (V + dm * btot)
            L = d.log(G)
            pref = -1.0 / (2.0 * SQRT2)
            term = pref * (
                D_i / _expand(btot) * _expand(L)
                - _expand(D * L / (btot * btot)) * self.b_i
                + _expand(D / btot)
                * ((Vbar + dp * self.b_i) / _expand(V + dp * btot) - (Vbar + dm * self.b_i) / _expand(V + dm * btot))
            )
        return h_ig + term + _expand(P) * Vbar - _expand(RT)

    def _partial_molar_volume(self, T, P, c, S, btot, V, s_i):
        """dV/dc_i at fixed (T, P) via the pressure-explicit EOS."""
        ntot = d.sum_last(c)
        RT = R_GAS * T
        atot = S * S
        if self.eos is EosKind.SRK:
            dP_dV = -ntot * RT / (V - btot) ** 2 + atot * (2.0 * V + btot) / (V * (V + btot)) ** 2
            dP_dci = (
                _expand(RT / (V - btot))
                + _expand(ntot * RT / (V - btot) ** 2) * self.b_i
                - (2.0 * _expand(S) * s_i) / _expand(V * (V + btot))
                + _expand(atot / (V * (V + btot)) ** 2 * V) * self.b_i
            )
        else:
            den = V * V + 2.0 * btot * V - btot * btot
            dP_dV = -ntot * RT / (V - btot) ** 2 + atot * (2.0 * V + 2.0 * btot) / (den * den)
            dP_dci = (
                _expand(RT / (V - btot))
                + _expand(ntot * RT / (V - btot) ** 2) * self.b_i
                - (2.0 * _expand(S) * s_i) / _expand(den)
                + _expand(atot / (den * den) * 2.0 * (V - btot)) * self.b_i
            )
        return -dP_dci / _expand(dP_dV)

    def fluid_energy_density(self, T, P, c):
        """u_fluid = H(T,P,c) - P V(T,P,c), per unit fluid volume [J/m3]."""
        return self.enthalpy(T, P, c) - P * self.volume(T, P, c)

    def volume_energy_density(self, T, P, c, epsilon=1.0, solid: SolidProperties | None = None):
        """u = eps u_fluid + (1-eps) rho_s cp_s T, per unit reactor volume."""
        u = self.fluid_energy_density(T, P, c)
        if epsilon != 1.0:
            if solid is None:
                raise ValueError("heterogeneous volume requires solid properties")
            u = epsilon * u + (1.0 - epsilon) * solid.rho_solid * solid.cp_solid * T
        return u


# -- module-level operation surface -------------------------------------------


def molar_volume(model: FluidModel, T, P, n):
    """Gas-phase volume; largest real compressibility root for cubic EOS."""
    if np.any(np.asarray(d.value(d.sum_last(n))) < 0):
        raise ThermoError("mole vector must have nonnegative total")
    return model.volume(T, P, n)


def enthalpy(model: FluidModel, T, P, n):
    return model.enthalpy(T, P, n)


def fluid_internal_energy_density(model: FluidModel, state: ThermoState):
    return model.fluid_energy_density(state.T, state.P, state.c)


def volume_internal_energy_density(model: FluidModel, state: ThermoState, epsilon,
                                   solid: SolidProperties | None = None):
    if not 0.0 < epsilon <= 1.0:
        raise ValueError("porosity must lie in (0, 1]")
    return model.volume_energy_density(state.T, state.P, state.c, epsilon, solid)


def partial_molar_enthalpy(model: FluidModel, state: ThermoState):
    return model.partial_molar_enthalpy(state.T, state.P, state.c)


@dataclass
class ThermoDerivatives:
    dV_dT: object
    dV_dP: object
    dV_dc: object
    du_dT: object
    du_dP: object
    du_dc: object
    block_det: object  # det [[dV/dT, dV/dP], [du/dT, du/dP]]


def thermo_derivatives(model: FluidModel, state: ThermoState, epsilon=1.0,
                       solid: SolidProperties | None = None) -> ThermoDerivatives:
    """First derivatives of {V, u} in (T, P, c), via dual-number evaluation.

    The 2x2 (T, P) block determinant is the index-1 diagnostic for the
    pointwise constraint pair; a singular block means the algebraic
    variables cannot be resolved from the differential ones.
    """
    T0 = float(d.value(state.T))
    P0 = float(d.value(state.P))
    c0 = np.asarray(d.value(state.c), dtype=float)
    nc = c0.shape[-1]
    ndir = 2 + nc
    eye = np.eye(ndir)
    Td = d.Dual(T0, eye[:, 0])
    Pd = d.Dual(P0, eye[:, 1])
    cd = d.Dual(c0, eye[:, 2:])
    V = model.volume(Td, Pd, cd)
    u = model.volume_energy_density(Td, Pd, cd, epsilon, solid)
    det = V.der[0] * u.der[1] - V.der[1] * u.der[0]
    if det == 0.0:
        raise ThermoError("singular (T, P) constraint block")
    return ThermoDerivatives(
        dV_dT=V.der[0], dV_dP=V.der[1], dV_dc=V.der[2:].copy(),
        du_dT=u.der[0], du_dP=u.der[1], du_dc=u.der[2:].copy(),
        block_det=det,
    )


# -- helpers -------------------------------------------------------------------


def _check_tp(T, P):
    if np.any(np.asarray(d.value(T)) <= 0.0) or np.any(np.asarray(d.value(P)) <= 0.0):
        raise ThermoError("temperature and pressure must be positive")


def _expand(x):
    """Append a length-1 component axis so (...,) broadcasts against (..., nc)."""
    if isinstance(x, d.Dual):
        return d.Dual(x.val[..., None], x.der[..., None])
    return np.asarray(x)[..., None]


def _unit_comp(nc):
    e = np.zeros(nc)
    e[0] = 1.0
    return e


def _largest_cubic_root(p2, p1, p0, polish_iters=3):
    """Largest real root of z^3 + p2 z^2 + p1 z + p0, dual-aware.

    The root location is computed in plain floating point (Cardano /
    trigonometric form), tightened by Newton steps, and a final Newton step
    in the operand arithmetic transports derivatives through the implicit
    function when the coefficients are duals.
    """
    v2, v1, v0 = (np.asarray(d.value(x), dtype=float) for x in (p2, p1, p0))
    v2, v1, v0 = np.broadcast_arrays(v2, v1, v0)
    # depressed cubic t^3 + a t + b, z = t - p2/3
    a = v1 - v2 * v2 / 3.0
    b = 2.0 * v2**3 / 27.0 - v2 * v1 / 3.0 + v0
    disc = (b / 2.0) ** 2 + (a / 3.0) ** 3
    with np.errstate(invalid="ignore", divide="ignore"):
        # one real root (disc > 0)
        sq = np.sqrt(np.maximum(disc, 0.0))
        t_single = np.cbrt(-b / 2.0 + sq) + np.cbrt(-b / 2.0 - sq)
        # three real roots (disc <= 0): k = 0 branch is the largest
        m = np.sqrt(np.maximum(-a / 3.0, 0.0))
        cos_arg = np.clip(np.where(m > 0.0, 3.0 * b / (2.0 * a) / np.where(m > 0.0, m, 1.0), 0.0), -1.0, 1.0)
        t_triple = 2.0 * m * np.cos(np.arccos(cos_arg) / 3.0)
    t = np.where(disc > 0.0, t_single, t_triple)
    z = t - v2 / 3.0
    for _ in range(polish_iters):
        f = ((z + v2) * z + v1) * z + v0
        df = (3.0 * z + 2.0 * v2) * z + v1
        step = f / np.where(df != 0.0, df, 1.0)
        z = z - np.clip(step, -0.5, 0.5)
    if isinstance(p2, d.Dual) or isinstance(p1, d.Dual) or isinstance(p0, d.Dual):
        f = ((z + p2) * z + p1) * z + p0
        df = (3.0 * z + 2.0 * p2) * z + p1
        return z - f / df
    return z
