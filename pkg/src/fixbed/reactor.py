"""Reactor units: geometry, boundary conditions, and the two case-study builds.

A unit is an ordered list of volumes.  Each volume owns its geometry,
constitutive parameter bundles, and a boundary spec; a unit may add one
interfacial heat-transfer pairing between two volumes (counter-current by
default).  The adiabatic fixed-bed reactor (AFBR) is a single
heterogeneous volume; the direct-cooled reactor (IDCR) chains a
homogeneous cooling-tube volume into a heterogeneous bed with
counter-current heat exchange.
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass

import numpy as np

from . import duals as d
from .components import ammonia_components
from .submodels import (
    AdvectionLaw,
    AdvectionParams,
    HeatTransferParams,
    KineticParams,
    TransportParams,
    fluid_density,
    velocity_from_pressure_gradient,
)
from .thermo import EosKind, FluidModel, SolidProperties

GEOM_RTOL = 1e-12


@dataclass(frozen=True)
class VolumeGeometry:
    """Cylindrical volume with derived cross-section factors.

    epsilon = 1 marks a homogeneous fluid volume.  ``a`` is the interfacial
    area-to-volume ratio (0 if the volume is not heat-coupled).
    """

    L: float
    V: float
    epsilon: float = 1.0
    A_interface: float = 0.0
    S: float = dataclasses.field(init=False)
    S_fluid: float = dataclasses.field(init=False)
    phi: float = dataclasses.field(init=False)
    a: float = dataclasses.field(init=False)

    def __post_init__(self):
        if self.L <= 0 or self.V <= 0 or not 0.0 < self.epsilon <= 1.0:
            raise ValueError("need L > 0, V > 0, porosity in (0, 1]")
        S = self.V / self.L
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "S_fluid", self.epsilon * S)
        object.__setattr__(self, "phi", (1.0 - self.epsilon) / self.epsilon)
        object.__setattr__(self, "a", self.A_interface / self.V if self.A_interface else 0.0)
        assert abs(self.S - self.V / self.L) <= GEOM_RTOL * self.S
        assert abs(self.S_fluid - self.epsilon * self.S) <= GEOM_RTOL * self.S_fluid


class BoundaryKind(enum.Enum):
    FLOW_DRIVEN = "flow-driven"
    PRESSURE_DRIVEN = "pressure-driven"
    COUPLED = "coupled"


@dataclass(frozen=True)
class FlowDrivenBC:
    """Upstream-specified molar and enthalpy flows plus downstream pressure.

    f_in(t) -> mole flow vector [mol/s]; h_in(t) -> enthalpy flow [W].
    """

    f_in: object
    h_in: object
    kind: BoundaryKind = BoundaryKind.FLOW_DRIVEN


@dataclass(frozen=True)
class PressureDrivenBC:
    """Feed defined by conditions (x_in, T_in, P_in); values come from the
    operating-condition parameter vector at evaluation time.  has_outlet
    marks whether the unit outlet pressure applies to this volume."""

    has_outlet: bool = True
    kind: BoundaryKind = BoundaryKind.PRESSURE_DRIVEN


@dataclass(frozen=True)
class CoupledBC:
    """Inlet fed by the upstream volume's outlet, scaled by the fluid-to-
    fluid area ratio psi = S'_fluid / S_fluid."""

    upstream: int
    psi: float
    has_outlet: bool = True
    kind: BoundaryKind = BoundaryKind.COUPLED


@dataclass(frozen=True)
class OperatingConditions:
    """Nominal feed and pressure boundary values (pressure-driven units)."""

    x_in: tuple
    T_in: float    # [K]
    P_in: float    # [Pa]
    P_out: float   # [Pa]

    def __post_init__(self):
        x = np.asarray(self.x_in, dtype=float)
        if np.any(x < 0) or abs(x.sum() - 1.0) > 1e-12:
            raise ValueError("feed mole fractions must be nonnegative and sum to 1")
        object.__setattr__(self, "x_in", tuple(float(v) for v in x))
        if self.T_in <= 0 or self.P_in <= 0 or self.P_out <= 0:
            raise ValueError("T_in, P_in, P_out must be positive")

    def replace(self, **kw):
        return dataclasses.replace(self, **kw)

    @property
    def x(self):
        return np.array(self.x_in)


@dataclass(frozen=True)
class VolumeSpec:
    name: str
    geometry: VolumeGeometry
    advection: AdvectionParams
    transport: TransportParams
    boundary: object
    kinetics: KineticParams | None = None
    solid: SolidProperties | None = None

    def __post_init__(self):
        if self.geometry.epsilon < 1.0 and self.solid is None:
            raise ValueError(f"{self.name}: heterogeneous volume needs solid properties")


@dataclass(frozen=True)
class HeatCoupling:
    pair: tuple        # (volume index, volume index)
    U_overall: float   # [W/(m2 K)]
    A_interface: float
    counter_current: bool = True

    def transfer_params(self, unit, vol_index):
        i, j = self.pair
        other = j if vol_index == i else i
        return HeatTransferParams.from_geometry(
            self.U_overall, self.A_interface,
            unit.volumes[vol_index].geometry.V, unit.volumes[other].geometry.V,
        )


@dataclass(frozen=True)
class UnitSpec:
    name: str
    volumes: tuple
    eos: EosKind
    components: tuple
    coupling: HeatCoupling | None = None

    def __post_init__(self):
        object.__setattr__(self, "volumes", tuple(self.volumes))
        object.__setattr__(self, "components", tuple(self.components))
        if self.coupling is not None:
            i, j = self.coupling.pair
            Li, Lj = self.volumes[i].geometry.L, self.volumes[j].geometry.L
            if abs(Li - Lj) > GEOM_RTOL * Li:
                raise ValueError("heat-coupled volumes must share the same length")
        for v in self.volumes:
            if v.boundary.kind is BoundaryKind.COUPLED:
                up = self.volumes[v.boundary.upstream]
                psi = up.geometry.S_fluid / v.geometry.S_fluid
                if abs(psi - v.boundary.psi) > 1e-9 * psi:
                    raise ValueError(f"{v.name}: psi does not match geometry ({psi})")

    def fluid_model(self):
        return FluidModel(self.eos, self.components)

    def feed_volume(self):
        """Index of the volume receiving the unit's fresh feed."""
        for i, v in enumerate(self.volumes):
            if v.boundary.kind is not BoundaryKind.COUPLED:
                return i
        raise ValueError("unit has no feed volume")


# -- case-study tables ----------------------------------------------------------


@dataclass(frozen=True)
class BedParams:
    """Constitutive parameters shared by the two case-study units."""

    rho_solid: float = 3284.0      # [kg/m3]
    cp_solid: float = 1100.0       # [J/(kg K)]
    eta: float = 4.75
    beta: float = 0.5
    A_fwd: float = 4972.0          # [mol/(s m3-solid)]
    A_bwd: float = 7.14e15         # [mol/(s m3-solid)]
    E_fwd: float = 87090.0         # [J/mol]
    E_bwd: float = 198464.0        # [J/mol]
    mu: float = 3.08e-5            # [Pa s]
    d_p: float = 8e-3              # [m]
    d_t: float = 13.3e-3           # [m]
    f_dw: float = 2e-2
    D: float = 1e-5                # [m2/s]
    kappa_solid: float = 50.0      # [W/(m K)]
    U_overall: float = 300.0       # [W/(m2 K)]
    A_interface: float = 150.0     # [m2]


@dataclass(frozen=True)
class AfbrDimensions:
    L: float = 2.0
    V: float = 2.0
    epsilon: float = 0.33


@dataclass(frozen=True)
class IdcrDimensions:
    L: float = 6.0
    V_fbr: float = 3.0
    epsilon_fbr: float = 0.18
    V_lct: float = 0.5


NU_AMMONIA = np.array([[-1.0, -3.0, 2.0, 0.0]])  # over (N2, H2, NH3, Ar)

NOMINAL_CONDITIONS = OperatingConditions(
    x_in=(0.215, 0.645, 0.10, 0.04), T_in=650.0, P_in=200e5, P_out=199e5,
)


def _bed_volume(name, geometry, params: BedParams, boundary, kappa=None):
    eps = geometry.epsilon
    return VolumeSpec(
        name=name,
        geometry=geometry,
        advection=AdvectionParams(AdvectionLaw.ERGUN, mu=params.mu, d_p=params.d_p, epsilon=eps),
        transport=TransportParams(D=params.D, kappa=(1.0 - eps) * params.kappa_solid if kappa is None else kappa),
        boundary=boundary,
        kinetics=KineticParams(NU_AMMONIA, params.A_fwd, params.A_bwd, params.E_fwd,
                               params.E_bwd, params.beta, params.eta, eps),
        solid=SolidProperties(params.rho_solid, params.cp_solid),
    )


def build_afbr(dims: AfbrDimensions = AfbrDimensions(), params: BedParams = BedParams(),
               cond: OperatingConditions = NOMINAL_CONDITIONS, eos: EosKind = EosKind.SRK,
               components=None) -> UnitSpec:
    """Adiabatic fixed-bed reactor: one heterogeneous volume, Q = 0."""
    del cond  # conditions are supplied at evaluation time
    comps = ammonia_components() if components is None else components
    geo = VolumeGeometry(dims.L, dims.V, dims.epsilon)
    bed = _bed_volume("bed", geo, params, PressureDrivenBC())
    return UnitSpec("AFBR", (bed,), eos, comps)


def build_idcr(dims: IdcrDimensions = IdcrDimensions(), params: BedParams = BedParams(),
               cond: OperatingConditions = NOMINAL_CONDITIONS, eos: EosKind = EosKind.SRK,
               components=None) -> UnitSpec:
    """Direct-cooled reactor: cooling tubes feeding a counter-current bed.

    The fresh feed enters the homogeneous lumped-cooling-tube (LCT) volume;
    its outlet couples into the bed inlet with the fluid-area ratio psi.
    Both volumes are solved in local coordinates with positive flow, so the
    LCT local axis runs opposite the bed's physical axis and heat exchange
    pairs LCT cell k with bed cell n+1-k.
    """
    comps = ammonia_components() if components is None else components
    geo_lct = VolumeGeometry(dims.L, dims.V_lct, 1.0, A_interface=params.A_interface)
    geo_fbr = VolumeGeometry(dims.L, dims.V_fbr, dims.epsilon_fbr, A_interface=params.A_interface)
    lct = VolumeSpec(
        name="lct",
        geometry=geo_lct,
        advection=AdvectionParams(AdvectionLaw.DARCY_WEISBACH, mu=params.mu,
                                  d_t=params.d_t, f_dw=params.f_dw),
        transport=TransportParams(D=params.D, kappa=0.0),
        boundary=PressureDrivenBC(has_outlet=False),
    )
    psi = geo_lct.S_fluid / geo_fbr.S_fluid
    fbr = _bed_volume("bed", geo_fbr, params, CoupledBC(upstream=0, psi=psi))
    coupling = HeatCoupling(pair=(0, 1), U_overall=params.U_overall,
                            A_interface=params.A_interface, counter_current=True)
    return UnitSpec("IDCR", (lct, fbr), eos, comps, coupling=coupling)


# -- boundary fluxes -------------------------------------------------------------


def feed_concentration(model: FluidModel, x, T_in, P_in):
    """Inlet concentrations c_in = x / V(T_in, P_in, x) [mol/m3-fluid]."""
    return x / _col(model.volume(T_in, P_in, x))


def inlet_fluxes(volume: VolumeSpec, model: FluidModel, cond, P_first, h, t=0.0):
    """(N_in [mol/(s m2-fluid)], E_in [W/m2]) at the volume inlet.

    Pressure-driven inlets reconstruct the velocity from the half-cell
    gradient (P_1 - P_in)/(h/2); flow-driven inlets divide prescribed
    flows by the flow areas.
    """
    bc = volume.boundary
    geo = volume.geometry
    if bc.kind is BoundaryKind.FLOW_DRIVEN:
        f_in = np.asarray(bc.f_in(t) if callable(bc.f_in) else bc.f_in, dtype=float)
        h_in = bc.h_in(t) if callable(bc.h_in) else bc.h_in
        return f_in / geo.S_fluid, h_in / geo.S
    if bc.kind is BoundaryKind.PRESSURE_DRIVEN:
        x = np.array(cond.x_in) if not hasattr(cond, "x") else cond.x
        c_in = feed_concentration(model, x, cond.T_in, cond.P_in)
        dPdz = (P_first - cond.P_in) / (h / 2.0)
        v_in = velocity_from_pressure_gradient(volume.advection, dPdz, fluid_density(c_in, model.M))
        N_in = _col(v_in) * c_in
        E_in = geo.epsilon * model.enthalpy(cond.T_in, cond.P_in, N_in)
        return N_in, E_in
    raise ValueError("coupled inlets are resolved from the upstream outlet")


def coupled_inlet_fluxes(volume: VolumeSpec, upstream: VolumeSpec, N_up_out, E_up_out):
    """Continuity across a shared interface, scaled by the area ratio psi.

    Molar flux continuity: S'_fluid N'_out = S_fluid N_in.  The energy flux
    is a per-total-area quantity on each side, so the fluid fractions of
    both volumes enter.
    """
    psi = volume.boundary.psi
    N_in = psi * N_up_out
    E_in = (volume.geometry.epsilon * psi / upstream.geometry.epsilon) * E_up_out
    return N_in, E_in


def outlet_fluxes(volume: VolumeSpec, model: FluidModel, T_last, P_last, c_last, P_out, h):
    """Free outflow: advective/convective fluxes from the half-cell gradient
    (P_out - P_n)/(h/2); diffusive and conductive parts are zero."""
    dPdz = (P_out - P_last) / (h / 2.0)
    v_out = velocity_from_pressure_gradient(volume.advection, dPdz,
                                            fluid_density(c_last, model.M))
    N_out = _col(v_out) * c_last
    E_out = volume.geometry.epsilon * model.enthalpy(T_last, P_last, N_out)
    return N_out, E_out


def junction_outlet_fluxes(upstream: VolumeSpec, downstream: VolumeSpec,
                           model: FluidModel, T_last, P_last, c_last,
                           P_down_first, h_down):
    """Outlet fluxes of a volume feeding an internal junction.

    The half-cell pressure gradient between the junction and the first
    downstream cell drives the junction velocity, evaluated with the
    downstream volume's own pressure-drop law (the gas is entering that
    volume; the upstream law applied to the tiny junction jump makes the
    velocity a square root of a near-zero pressure difference, which has
    no usable Newton linearization).  Molar and energy flow continuity
    across the interface then fixes the upstream outlet fluxes.
    """
    dPdz = (P_down_first - P_last) / (h_down / 2.0)
    v_junction = velocity_from_pressure_gradient(downstream.advection, dPdz,
                                                 fluid_density(c_last, model.M))
    psi = downstream.geometry.S_fluid / upstream.geometry.S_fluid
    N_out = _col(v_junction) * c_last * psi
    E_out = upstream.geometry.epsilon * model.enthalpy(T_last, P_last, N_out)
    return N_out, E_out


def h2_conversion(f_h2_in, f_h2_out):
    """Outlet H2 conversion from inlet/outlet molar flows [mol/s]."""
    if d.value(f_h2_in) <= 0.0:
        raise ValueError("inlet H2 flow must be positive")
    return 1.0 - f_h2_out / f_h2_in


def _col(x):
    if isinstance(x, d.Dual):
        return d.Dual(x.val[..., None], x.der[..., None])
    return np.asarray(x, dtype=float)[..., None]
