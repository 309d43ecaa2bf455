"""Steady-state, continuation-sweep, and step-response drivers.

These compose the discretized unit with the solvers and reduce raw states
to the reported quantities (conversion, outlet/top temperature, turning
points, response metrics).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import duals as d
from .components import ammonia_components
from .continuation import ContinuationOptions, plac_trace
from .esdirk import EsdirkOptions, IntegrationError, esdirk_integrate
from .fvm import DiscretizedUnit, MassMatrixMode
from .newton import NewtonError, NewtonOptions, newton_solve
from .reactor import BedParams, NOMINAL_CONDITIONS, build_afbr, build_idcr
from .thermo import EosKind, FluidModel


class SteadyStateError(RuntimeError):
    pass


def build_unit(name, eos, dispersion=True, params: BedParams | None = None):
    """Case-study unit by name; dispersion=False zeroes D and kappa."""
    if params is None:
        params = BedParams()
    if not dispersion:
        import dataclasses
        params = dataclasses.replace(params, D=0.0, kappa_solid=0.0)
    name = name.upper()
    if name == "AFBR":
        return build_afbr(params=params, eos=eos)
    if name == "IDCR":
        return build_idcr(params=params, eos=eos)
    raise ValueError(f"unknown unit {name!r}")


def make_system(name, eos, n_cells=100, cond=NOMINAL_CONDITIONS, dispersion=True,
                params=None) -> DiscretizedUnit:
    return DiscretizedUnit(build_unit(name, eos, dispersion, params), n_cells, cond)


def _steady_callbacks(system, cond):
    """Residual/Jacobian closures with per-iteration frozen upwind pattern."""
    frozen = {"sel": None}

    def F(w):
        return system.residual(w, cond, frozen_upwind=frozen["sel"])

    def J(w):
        frozen["sel"] = system.upwind_pattern(w, cond)
        return system.jacobian(w, cond, frozen_upwind=frozen["sel"])

    return F, J


def natural_residual_norm(system, w, cond):
    return float(np.max(np.abs(system.residual(w, cond) / system.f_scale)))


@dataclass
class SteadySolution:
    w: np.ndarray
    residual_norm: float
    method: str
    newton_iterations: int = 0
    transient_time: float = 0.0


def solve_steady(system: DiscretizedUnit, cond, w0=None, tol=1e-4,
                 hot_start=None, allow_transient=True) -> SteadySolution:
    """Newton with line search; pseudo-transient fallback.

    The fallback integrates the full-dynamic DAE over growing horizons
    (which regularizes the exchanger's weakly determined temperature-level
    mode) and polishes with Newton after each stage.  ``hot_start`` gives
    per-volume constant temperatures for the initial guess, used to aim at
    ignited branches.
    """
    if w0 is None:
        w0 = system.initial_guess(cond, dp_fractions=system.balanced_dp_fractions(cond),
                                  T_profile=hot_start)
    w0 = np.asarray(w0, dtype=float)
    opts = NewtonOptions(tol=tol, max_iter=40)
    w, iters = w0, 0
    for _ in range(3):
        F, J = _steady_callbacks(system, cond)
        try:
            res = newton_solve(F, J, w, opts, system.f_scale)
            w, iters = res.w, iters + res.iterations
        except NewtonError as exc:
            if exc.result is not None and np.all(np.isfinite(exc.result.w)):
                w = exc.result.w
            break
        norm = natural_residual_norm(system, w, cond)
        if norm <= tol:
            return SteadySolution(w, norm, "newton", iters)
    if not allow_transient:
        raise SteadyStateError("Newton did not converge and the pseudo-transient "
                               "fallback is disabled")

    # restore constraint consistency before integrating (Newton iterates
    # generally violate the algebraic rows)
    try:
        w = system.project_constraints(w)
    except Exception:
        w = w0  # the structured guess is consistent by construction
    t_total = 0.0
    for horizon in (2e3, 2e4, 2e5, 2e6):
        try:
            ts = esdirk_integrate(system.residual, system.jacobian,
                                  system.mass_diagonal(MassMatrixMode.FULL_DYNAMIC),
                                  w, lambda t: cond, (0.0, horizon),
                                  EsdirkOptions(rtol=1e-5, atol=1e-5),
                                  w_scale=system.w_scale, f_scale=system.f_scale)
        except IntegrationError as exc:
            raise SteadyStateError(f"pseudo-transient stage failed: {exc}") from exc
        w = ts.W[-1]
        t_total += horizon
        norm = natural_residual_norm(system, w, cond)
        if norm <= tol:
            return SteadySolution(w, norm, "pseudo-transient", iters, t_total)
        F, J = _steady_callbacks(system, cond)
        try:
            res = newton_solve(F, J, w, opts, system.f_scale)
            norm = natural_residual_norm(system, res.w, cond)
            if norm <= tol:
                return SteadySolution(res.w, norm, "transient+newton",
                                      iters + res.iterations, t_total)
        except NewtonError:
            pass
    raise SteadyStateError(f"no steady state found (last residual {norm:.3e})")


# -- parameter sweeps -------------------------------------------------------------


@dataclass
class SweepResult:
    param: str
    p: np.ndarray
    X_out: np.ndarray
    T_report: np.ndarray       # outlet T for single-volume units, top T otherwise
    T_out: np.ndarray
    turning: np.ndarray        # bool mask on points
    W: np.ndarray
    segment: np.ndarray = None  # continuation-segment id per point
    analysis: dict = field(default_factory=dict)
    stats: list = field(default_factory=list)

    @property
    def turning_p(self):
        return self.p[self.turning]


def sweep(system: DiscretizedUnit, cond, p_range, param="T_in", tol=1e-4,
          ds0=0.05, ds_max=0.4, max_points=3000, p_margin_frac=0.3) -> SweepResult:
    """Trace the steady-state curve over ``p_range`` with PLAC.

    The seed is the steady state at p_range[0] (cold/extinguished branch
    for the case-study units); the trace may undershoot the lower bound by
    a margin so S-curve middle branches can fold back.  If the trace never
    reaches the upper bound (a middle branch that exits below the range
    before folding), a second trace runs from the hot end downward so the
    ignited branch is covered; segments are recorded per point.
    """
    p0, p1 = float(p_range[0]), float(p_range[1])
    span = p1 - p0
    copts = ContinuationOptions(ds0=ds0, ds_min=1e-6, ds_max=ds_max,
                                p_range=(p0 - p_margin_frac * span, p1),
                                max_points=max_points)

    def residual(w, p):
        return system.residual(w, cond.replace(**{param: p}))

    def jac(w, p):
        return system.jacobian(w, cond.replace(**{param: p}))

    def dfdp(w, p):
        return system.dresidual_dparam(w, cond.replace(**{param: p}), param)

    def trace_from(p_seed, hot_start=None):
        seed = solve_steady(system, cond.replace(**{param: p_seed}), tol=tol,
                            hot_start=hot_start)
        return plac_trace(residual, jac, dfdp, seed.w, p_seed, copts,
                          NewtonOptions(tol=tol, max_iter=14),
                          w_scale=system.w_scale, p_scale=100.0,
                          f_scale=system.f_scale)

    br = trace_from(p0)
    branches = [br]
    if br.p.max() < p1 - 1e-9 * span:
        # the first trace left through the bottom margin; pick up the upper
        # (ignited) branch from the hot end, where the steady state is unique
        hot = [p1 + 120.0] * len(system.unit.volumes) if param == "T_in" else None
        branches.append(trace_from(p1, hot_start=hot))

    ps, Xs, Treps, Touts, Ws, turnings, segs, stats = [], [], [], [], [], [], [], []
    for si, b in enumerate(branches):
        order = np.arange(b.p.size) if si == 0 else np.arange(b.p.size)[::-1]
        for i in order:
            out = system.outputs(b.W[i], cond.replace(**{param: b.p[i]}))
            ps.append(b.p[i])
            Xs.append(out["X_out"])
            Treps.append(out.get("T_top", out["T_out"]))
            Touts.append(out["T_out"])
            Ws.append(b.W[i])
            segs.append(si)
        turn = b.turning if si == 0 else b.turning[::-1]
        turnings.extend(turn.tolist())
        stats.extend(b.stats)
    res = SweepResult(param, np.array(ps), np.array(Xs), np.array(Treps),
                      np.array(Touts), np.array(turnings, dtype=bool), np.array(Ws),
                      segment=np.array(segs), stats=stats)
    res.analysis = analyze_branch(res.p, res.X_out, res.turning, res.segment,
                                  p_range=(p0, p1))
    return res


def _quad_refine(p, y, i):
    """Vertex of the parabola through points i-1, i, i+1 (clamped to data)."""
    if i == 0 or i == p.size - 1:
        return float(p[i]), float(y[i])
    coef = np.polyfit(p[i - 1:i + 2], y[i - 1:i + 2], 2)
    if coef[0] == 0.0:
        return float(p[i]), float(y[i])
    ps = -coef[1] / (2.0 * coef[0])
    lo, hi = min(p[i - 1], p[i + 1]), max(p[i - 1], p[i + 1])
    ps = min(max(ps, lo), hi)
    return float(ps), float(np.polyval(coef, ps))


def analyze_branch(p, X, turning, segment=None, p_range=None):
    """Turning points, multiplicity window, and the conversion optimum.

    All quadratic refinements stay within one continuation segment; the
    optimum is restricted to the requested parameter range when given.
    """
    info = {}
    if segment is None:
        segment = np.zeros(p.size, dtype=int)
    s = np.arange(p.size, dtype=float)
    refined = []
    for i in np.where(turning)[0]:
        if 0 < i < p.size - 1 and segment[i - 1] == segment[i] == segment[i + 1]:
            _, p_fold = _quad_refine(s, p, i)
        else:
            p_fold = p[i]
        refined.append(float(p_fold))
    info["turning_p"] = refined
    if len(refined) >= 2:
        info["ignition_p"] = max(refined)
        info["extinction_p"] = min(refined)
        info["window"] = info["ignition_p"] - info["extinction_p"]
    X_opt = X if p_range is None else np.where((p >= p_range[0]) & (p <= p_range[1]),
                                               X, -np.inf)
    imax = int(np.argmax(X_opt))
    if 0 < imax < p.size - 1 and segment[imax - 1] == segment[imax] == segment[imax + 1]:
        p_star, x_star = _quad_refine(p, X, imax)
    else:
        p_star, x_star = float(p[imax]), float(X[imax])
    if p_range is not None and not p_range[0] <= p_star <= p_range[1]:
        p_star, x_star = float(p[imax]), float(X[imax])
    info["optimum_p"] = p_star
    info["optimum_X"] = x_star
    return info


# -- dynamics ----------------------------------------------------------------------


@dataclass
class StepResponse:
    t: np.ndarray
    X_out: np.ndarray
    T_out: np.ndarray
    T_top: np.ndarray | None
    dT_in: float
    stats: dict


def consistent_initialization(system, w, cond, mass_diag, threshold, max_iter=20):
    """Solve the algebraic rows for the algebraic unknowns at fixed
    differential state (index-1 consistent initialization after an input
    jump).  For the full-dynamic mass matrix this touches only (T, P); for
    pseudo-steady mass balances it re-equilibrates the concentration field
    against the new boundary fluxes while u stays put.  No-op when the
    state is already consistent, because off-constraint projections trade
    balance-row accuracy for constraint-row accuracy."""
    import scipy.sparse.linalg as spla

    w = np.asarray(w, dtype=float).copy()
    alg = np.asarray(mass_diag) == 0.0

    def alg_norm(wv):
        F = system.residual(wv, cond) / system.f_scale
        return float(np.max(np.abs(F[alg])))

    norm = alg_norm(w)
    for _ in range(max_iter):
        if norm <= threshold:
            return w
        F = system.residual(w, cond)
        J = system.jacobian(w, cond).tocsc()
        J_sub = J[alg][:, alg]
        dw = -spla.splu(J_sub.tocsc()).solve(np.asarray(F)[alg])
        alpha = 1.0
        while alpha >= 1.0 / 256.0:
            w_try = w.copy()
            w_try[alg] += alpha * dw
            try:
                n_try = alg_norm(w_try)
            except Exception:
                n_try = np.inf
            if n_try < norm:
                w, norm = w_try, n_try
                break
            alpha *= 0.5
        else:
            break
    if norm > threshold:
        raise SteadyStateError(f"consistent initialization failed (residual {norm:.2e})")
    return w


def step_response(system: DiscretizedUnit, cond, w_base, dT_in, horizon,
                  mass_mode=MassMatrixMode.FULL_DYNAMIC, rtol=1e-5, atol=1e-5) -> StepResponse:
    """Integrate the response to an inlet-temperature step at t = 0.

    The base state must satisfy the algebraic constraints; stepping T_in
    only changes boundary fluxes, so consistency is preserved.
    """
    cond_step = cond.replace(T_in=cond.T_in + dT_in)
    mdiag = system.mass_diagonal(mass_mode)
    w_base = consistent_initialization(system, w_base, cond_step, mdiag,
                                       0.5 * max(rtol, atol))
    ts = esdirk_integrate(system.residual, system.jacobian, mdiag, w_base,
                          lambda t: cond_step, (0.0, horizon),
                          EsdirkOptions(rtol=rtol, atol=atol),
                          w_scale=system.w_scale, f_scale=system.f_scale)
    X = np.empty(ts.t.size)
    T_out = np.empty(ts.t.size)
    T_top = np.empty(ts.t.size) if len(system.unit.volumes) > 1 else None
    for i in range(ts.t.size):
        out = system.outputs(ts.W[i], cond_step)
        X[i] = out["X_out"]
        T_out[i] = out["T_out"]
        if T_top is not None:
            T_top[i] = out["T_top"]
    return StepResponse(ts.t, X, T_out, T_top, dT_in, ts.stats)


def response_time(t, y, fraction=0.5):
    """First time |y - y(0)| crosses ``fraction`` of the net change."""
    y0, y_end = y[0], y[-1]
    if y_end == y0:
        return 0.0
    target = fraction * abs(y_end - y0)
    dev = np.abs(y - y0)
    idx = np.where(dev >= target)[0]
    if idx.size == 0:
        return float(t[-1])
    i = idx[0]
    if i == 0:
        return float(t[0])
    # linear interpolation of the crossing
    f = (target - dev[i - 1]) / (dev[i] - dev[i - 1])
    return float(t[i - 1] + f * (t[i] - t[i - 1]))


def settling_time(t, y, band=0.02):
    """Last exit time from the +-band (relative to net change) around y(end)."""
    y_end = y[-1]
    span = max(abs(y_end - y[0]), 1e-300)
    outside = np.abs(y - y_end) > band * span
    idx = np.where(outside)[0]
    if idx.size == 0:
        return 0.0
    return float(t[min(idx[-1] + 1, t.size - 1)])


def steady_vs_dynamic_check(system: DiscretizedUnit, w_star, cond, horizon,
                            mass_mode=MassMatrixMode.FULL_DYNAMIC,
                            rtol=1e-5, atol=1e-5):
    """Max weighted drift of the dynamic solution started at a steady state."""
    mdiag = system.mass_diagonal(mass_mode)
    w_star = consistent_initialization(system, np.asarray(w_star, float), cond, mdiag,
                                       0.5 * max(rtol, atol))
    ts = esdirk_integrate(system.residual, system.jacobian, mdiag, w_star,
                          lambda t: cond, (0.0, horizon),
                          EsdirkOptions(rtol=rtol, atol=atol),
                          w_scale=system.w_scale, f_scale=system.f_scale)
    drift = np.abs(ts.W - np.asarray(w_star)[None, :]) / system.w_scale[None, :]
    return float(drift.max())


# -- heat-of-reaction diagnostic -----------------------------------------------------


def heat_of_reaction(model: FluidModel, nu, T, P, x):
    """dH = nu . Hbar at feed composition scaled onto the volume constraint."""
    x = np.asarray(x, dtype=float)
    c = x / float(d.value(model.volume(T, P, x)))
    return float(np.asarray(nu, float)[0] @ np.asarray(model.partial_molar_enthalpy(T, P, c)))


def heat_of_reaction_map(eos: EosKind, T_values, P_values, x, nu, components=None):
    """dH over a (T, P) grid; rows follow T_values, columns P_values."""
    comps = ammonia_components() if components is None else components
    model = FluidModel(eos, comps)
    out = np.empty((len(T_values), len(P_values)))
    for i, T in enumerate(T_values):
        for j, P in enumerate(P_values):
            out[i, j] = heat_of_reaction(model, nu, float(T), float(P), x)
    return out
