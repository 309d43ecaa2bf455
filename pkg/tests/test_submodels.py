import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import fixbed.duals as d
from fixbed.components import ammonia_components
from fixbed.reactor import NU_AMMONIA
from fixbed.submodels import (
    AdvectionLaw,
    AdvectionParams,
    HeatTransferParams,
    KineticParams,
    TransportParams,
    diffusive_flux,
    energy_flux_parts,
    fluid_density,
    interfacial_heat,
    production_rates,
    temkin_rate,
    velocity_from_pressure_gradient,
)
from fixbed.thermo import EosKind, FluidModel

COMPS = ammonia_components()
SRK = FluidModel(EosKind.SRK, COMPS)
KIN = KineticParams(NU_AMMONIA, 4972.0, 7.14e15, 87090.0, 198464.0, 0.5, 4.75, 0.33)
X_NOMINAL = np.array([0.215, 0.645, 0.10, 0.04])
ERGUN = AdvectionParams(AdvectionLaw.ERGUN, mu=3.08e-5, d_p=8e-3, epsilon=0.33)
DW = AdvectionParams(AdvectionLaw.DARCY_WEISBACH, mu=3.08e-5, d_t=13.3e-3, f_dw=2e-2)


def conc(x, T, P):
    return np.asarray(x) / d.value(SRK.volume(T, P, np.asarray(x)))


def hand_temkin(T, P_pa, x):
    """Independent scalar evaluation of the rate formula."""
    R = 8.314
    p = P_pa / 1e5 * np.asarray(x)  # bar
    k_fwd = 4972.0 * np.exp(-87090.0 / (R * T))
    k_bwd = 7.14e15 * np.exp(-198464.0 / (R * T))
    beta = 0.5
    r = k_fwd * p[0] * (p[1] ** 3 / p[2] ** 2) ** beta \
        - k_bwd * (p[2] ** 2 / p[1] ** 3) ** beta
    return (1 - 0.33) / 0.33 * 4.75 * r


def test_rate_forward_dominates_at_ammonia_floor():
    x = np.array([0.25, 0.7499999999, 1e-10, 0.05])
    c = conc(x / x.sum(), 700.0, 200e5)
    assert temkin_rate(KIN, 700.0, 200e5, c) > 0


def test_rate_matches_hand_oracle():
    T, P = 700.0, 200e5
    c = conc(X_NOMINAL, T, P)
    r = float(d.value(temkin_rate(KIN, T, P, c)))
    assert r == pytest.approx(hand_temkin(T, P, X_NOMINAL), rel=1e-12)


def test_rate_linear_in_activity_factor():
    import dataclasses
    T, P = 700.0, 200e5
    c = conc(X_NOMINAL, T, P)
    k2 = dataclasses.replace(KIN, eta=2 * KIN.eta)
    assert float(temkin_rate(k2, T, P, c)) == pytest.approx(
        2.0 * float(temkin_rate(KIN, T, P, c)), rel=1e-14)


def test_production_rates_stoichiometry():
    T, P = 700.0, 200e5
    c = conc(X_NOMINAL, T, P)
    R = np.asarray(production_rates(KIN, T, P, c))
    r = float(temkin_rate(KIN, T, P, c))
    np.testing.assert_allclose(R, [-r, -3 * r, 2 * r, 0.0], rtol=1e-14)
    assert R[3] == 0.0
    assert R[1] / R[0] == pytest.approx(3.0, rel=1e-14)


def test_production_zero_rate():
    kin0 = KineticParams(NU_AMMONIA, 0.0, 0.0, 87090.0, 198464.0, 0.5, 4.75, 0.33)
    R = np.asarray(production_rates(kin0, 700.0, 200e5, conc(X_NOMINAL, 700.0, 200e5)))
    assert np.all(R == 0.0)


def test_mass_conservation_of_reaction():
    T, P = 720.0, 180e5
    c = conc(X_NOMINAL, T, P)
    R = np.asarray(production_rates(KIN, T, P, c))
    assert abs(SRK.M @ R) <= 1e-12 * abs(R[0]) * SRK.M[0]


def test_equilibrium_crossing_and_monotonicity():
    # at fixed T, P there is an NH3 fraction where the rate crosses zero,
    # and the rate decreases monotonically in P_NH3 near that crossing
    T, P = 700.0, 200e5
    ys = np.linspace(0.01, 0.5, 400)
    rates = []
    for y in ys:
        rest = 1.0 - y
        x = np.array([0.25 * rest, 0.75 * rest, y, 0.0])
        rates.append(float(temkin_rate(KIN, T, P, conc(x, T, P))))
    rates = np.array(rates)
    assert rates[0] > 0 > rates[-1]
    i = np.where(np.diff(np.sign(rates)) != 0)[0][0]
    window = rates[max(0, i - 10):i + 10]
    assert np.all(np.diff(window) < 0)


def test_fluid_density_cases():
    assert fluid_density(np.zeros(4), SRK.M) == 0.0
    assert fluid_density(np.array([1000.0]), np.array([0.028])) == pytest.approx(28.0)
    c = conc(X_NOMINAL, 650.0, 200e5)
    assert fluid_density(c, SRK.M) == pytest.approx(float(np.dot(c, SRK.M)), rel=1e-14)


def test_velocity_zero_gradient():
    assert velocity_from_pressure_gradient(ERGUN, 0.0, 60.0) == 0.0
    assert velocity_from_pressure_gradient(DW, 0.0, 60.0) == 0.0


def ergun_bisection(params, g, rho):
    eps = params.epsilon
    a = 150 * params.mu * (1 - eps) ** 2 / (params.d_p**2 * eps**2)
    b = 1.75 * rho * (1 - eps) / (params.d_p * eps)

    def f(v):
        return a * v + b * v * v - g

    lo, hi = 0.0, 100.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(lo) * f(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def test_ergun_root_matches_bisection_oracle():
    v = velocity_from_pressure_gradient(ERGUN, -5e4, 60.0)
    assert abs(v - ergun_bisection(ERGUN, 5e4, 60.0)) < 1e-10


def test_velocity_odd_symmetry():
    for law in (ERGUN, DW):
        vp = velocity_from_pressure_gradient(law, -3e4, 45.0)
        vm = velocity_from_pressure_gradient(law, 3e4, 45.0)
        assert vp == -vm
        assert vp > 0


@settings(max_examples=80, deadline=None)
@given(g=st.floats(1e1, 1e6), rho=st.floats(1.0, 200.0),
       eps=st.floats(0.15, 0.6), dp=st.floats(1e-3, 2e-2))
def test_ergun_root_reproduces_gradient(g, rho, eps, dp):
    params = AdvectionParams(AdvectionLaw.ERGUN, mu=3.08e-5, d_p=dp, epsilon=eps)
    v = velocity_from_pressure_gradient(params, -g, rho)
    a = 150 * params.mu * (1 - eps) ** 2 / (dp**2 * eps**2)
    b = 1.75 * rho * (1 - eps) / (dp * eps)
    assert a * v + b * v * abs(v) == pytest.approx(g, rel=1e-10)


def test_diffusive_flux():
    assert np.all(diffusive_flux(1e-5, np.zeros(4)) == 0.0)
    assert np.all(diffusive_flux(0.0, np.array([100.0, -200.0, 0.0, 50.0])) == 0.0)
    np.testing.assert_allclose(
        diffusive_flux(1e-5, np.array([100.0, -200.0, 0.0, 50.0])),
        [-1e-3, 2e-3, 0.0, -5e-4], rtol=1e-14)


def test_energy_flux_zero_inputs():
    c = conc(X_NOMINAL, 650.0, 200e5)
    E = energy_flux_parts(SRK, 650.0, 200e5, c, np.zeros(4), np.zeros(4), 0.0, 33.5, 0.33)
    assert E == 0.0


def test_energy_flux_pure_convection():
    c = conc(X_NOMINAL, 650.0, 200e5)
    N_adv = 1.7 * c
    E = energy_flux_parts(SRK, 650.0, 200e5, c, N_adv, np.zeros(4), 0.5, 0.0, 0.33)
    assert E == pytest.approx(0.33 * d.value(SRK.enthalpy(650.0, 200e5, N_adv)), rel=1e-14)


def test_energy_flux_recomposition():
    T, P = 650.0, 200e5
    c = conc(X_NOMINAL, T, P)
    v = velocity_from_pressure_gradient(ERGUN, -5e4, float(fluid_density(c, SRK.M)))
    N_adv = v * c
    dcdz = np.array([5.0, -10.0, 3.0, 0.5])
    N_diff = diffusive_flux(1e-5, dcdz)
    dTdz, kappa, eps = 12.0, 33.5, 0.33
    E = energy_flux_parts(SRK, T, P, c, N_adv, N_diff, dTdz, kappa, eps)
    expected = eps * (d.value(SRK.enthalpy(T, P, N_adv))
                      - float(np.asarray(SRK.partial_molar_enthalpy(T, P, c)) @ N_diff)) \
        - kappa * dTdz
    assert E == pytest.approx(expected, rel=1e-10)


def test_dispersion_off_reduces_to_advection_exactly():
    T, P = 650.0, 200e5
    c = conc(X_NOMINAL, T, P)
    N_adv = 1.2 * c
    dcdz = np.array([5.0, -10.0, 3.0, 0.5])
    N_diff0 = diffusive_flux(0.0, dcdz)
    assert np.all(N_adv + N_diff0 == N_adv)
    E = energy_flux_parts(SRK, T, P, c, N_adv, N_diff0, 7.0, 0.0, 0.33)
    assert E == 0.33 * d.value(SRK.enthalpy(T, P, N_adv))


def test_interfacial_heat_idcr_values():
    fbr = HeatTransferParams.from_geometry(300.0, 150.0, 3.0, 0.5)
    lct = HeatTransferParams.from_geometry(300.0, 150.0, 0.5, 3.0)
    assert fbr.a_self == pytest.approx(50.0)
    assert lct.a_self == pytest.approx(300.0)
    Q_fbr = interfacial_heat(fbr, 610.0, 600.0)
    Q_lct = interfacial_heat(lct, 600.0, 610.0)
    assert Q_fbr == pytest.approx(1.5e5)
    assert Q_lct == pytest.approx(-9e5)
    assert 3.0 * Q_fbr + 0.5 * Q_lct == pytest.approx(0.0, abs=1e-9)


def test_interfacial_heat_trivial_and_linear():
    p = HeatTransferParams.from_geometry(300.0, 150.0, 3.0, 0.5)
    assert interfacial_heat(p, 600.0, 600.0) == 0.0
    p2 = HeatTransferParams.from_geometry(600.0, 150.0, 3.0, 0.5)
    assert interfacial_heat(p2, 610.0, 600.0) == 2 * interfacial_heat(p, 610.0, 600.0)


@settings(max_examples=40, deadline=None)
@given(T1=st.floats(300.0, 900.0), T2=st.floats(300.0, 900.0))
def test_interfacial_heat_antisymmetry_property(T1, T2):
    V, Vp = 3.0, 0.5
    a = HeatTransferParams.from_geometry(300.0, 150.0, V, Vp)
    b = HeatTransferParams.from_geometry(300.0, 150.0, Vp, V)
    assert V * interfacial_heat(a, T2, T1) + Vp * interfacial_heat(b, T1, T2) == pytest.approx(0.0, abs=1e-6)


def test_param_validation():
    with pytest.raises(ValueError):
        KineticParams(NU_AMMONIA, 1.0, 1.0, 1.0, 1.0, beta=1.5, eta=1.0, epsilon=0.33)
    with pytest.raises(ValueError):
        AdvectionParams(AdvectionLaw.ERGUN, mu=1e-5, d_p=0.0, epsilon=0.33)
    with pytest.raises(ValueError):
        TransportParams(D=-1.0, kappa=0.0)
