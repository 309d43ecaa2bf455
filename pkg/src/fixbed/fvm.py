"""First-order upwind finite-volume semi-discretization.

Each volume is discretized into ``n_cells`` uniform cells holding the
differential block x = [c; u] and algebraic block y = [T; P] per cell.
The global state vector is w = [x of all volumes; y of all volumes].
Residual rows follow the same ordering: cell mass/energy balances on the
x rows, the pointwise volume and internal-energy constraints on the y
rows, giving a semi-explicit index-1 DAE in mass-matrix form.

The Jacobian is assembled by evaluating the residual once with dual
numbers seeded by a stencil coloring (cells three apart in the same
volume cannot touch the same residual row, and the counter-current pairing
maps each cell to exactly one partner cell in the other volume).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import duals as d
from .reactor import (
    BoundaryKind,
    UnitSpec,
    coupled_inlet_fluxes,
    feed_concentration,
    inlet_fluxes,
    junction_outlet_fluxes,
    outlet_fluxes,
)
from .submodels import energy_flux_parts, fluid_density, production_rates, velocity_from_pressure_gradient
from .thermo import ThermoError

N_VAR_PER_CELL = 7  # c (4) + u + T + P


class ResidualEvalError(RuntimeError):
    """Residual evaluation failed; message carries volume/cell/equation context."""


class MassMatrixMode(enum.Enum):
    FULL_DYNAMIC = "full"
    PSEUDO_STEADY_MASS = "pseudo-steady"


@dataclass(frozen=True)
class Grid:
    """Uniform axial grid of one volume."""

    n_cells: int
    L: float

    def __post_init__(self):
        if self.n_cells < 2:
            raise ValueError("need at least two cells")

    @property
    def h(self):
        return self.L / self.n_cells

    @property
    def midpoints(self):
        return (np.arange(self.n_cells) + 0.5) * self.h


def upwind_select(w_left, w_right, P_left, P_right):
    """Interface state by the local pressure difference; ties go upstream-left."""
    sel = P_right <= P_left
    return d.where(sel, w_left, w_right), sel


def interface_gradient(w_left, w_right, h):
    """Directly resolved interface gradient (w_right - w_left)/h."""
    return (w_right - w_left) / h


class StateLayout:
    """Index map between the packed vector w = [x; y] and per-volume fields."""

    def __init__(self, n_volumes, n_cells, n_comp):
        self.n_volumes = n_volumes
        self.n_cells = n_cells
        self.n_comp = n_comp
        self.nx_vol = n_cells * (n_comp + 1)
        self.ny_vol = n_cells * 2
        self.n_x = n_volumes * self.nx_vol
        self.n_y = n_volumes * self.ny_vol
        self.n_w = self.n_x + self.n_y

    def x_offset(self, v):
        return v * self.nx_vol

    def y_offset(self, v):
        return self.n_x + v * self.ny_vol

    def unpack(self, w):
        """Per-volume views (c, u, T, P) with cells on axis 0."""
        nc = self.n_comp
        out = []
        for v in range(self.n_volumes):
            ox, oy = self.x_offset(v), self.y_offset(v)
            xs = w[ox:ox + self.nx_vol].reshape(self.n_cells, nc + 1)
            ys = w[oy:oy + self.ny_vol].reshape(self.n_cells, 2)
            out.append((xs[:, :nc], xs[:, nc], ys[:, 0], ys[:, 1]))
        return out

    def pack(self, fields):
        """Inverse of unpack for plain float fields."""
        w = np.empty(self.n_w)
        for v, (c, u, T, P) in enumerate(fields):
            ox, oy = self.x_offset(v), self.y_offset(v)
            w[ox:ox + self.nx_vol] = np.concatenate([c, u[:, None]], axis=1).reshape(-1)
            w[oy:oy + self.ny_vol] = np.stack([T, P], axis=1).reshape(-1)
        return w

    def var_index(self, v, cell, slot):
        """Global index of variable slot in {0..nc-1: c, nc: u, nc+1: T, nc+2: P}."""
        nc = self.n_comp
        if slot <= nc:
            return self.x_offset(v) + cell * (nc + 1) + slot
        return self.y_offset(v) + cell * 2 + (slot - nc - 1)

    def mass_diagonal(self, mode: MassMatrixMode):
        diag = np.zeros(self.n_w)
        nc = self.n_comp
        for v in range(self.n_volumes):
            ox = self.x_offset(v)
            blk = diag[ox:ox + self.nx_vol].reshape(self.n_cells, nc + 1)
            if mode is MassMatrixMode.FULL_DYNAMIC:
                blk[:, :] = 1.0
            else:
                blk[:, nc] = 1.0
        return diag


def mass_matrix(layout: StateLayout, mode: MassMatrixMode):
    """Diagonal 0/1 selector matrix for the DAE mass-matrix form."""
    return sp.diags(layout.mass_diagonal(mode))


class DiscretizedUnit:
    """Semi-discrete system F(w, cond, t) for one reactor unit.

    Holds residual/Jacobian assembly, the 0/1 mass matrix diagonals,
    variable and residual scales (fixed at construction from reference
    conditions), and the thermodynamically consistent initial guess.
    """

    def __init__(self, unit: UnitSpec, n_cells: int, cond_ref):
        self.unit = unit
        self.model = unit.fluid_model()
        self.n_comp = self.model.n_comp
        self.grids = [Grid(n_cells, v.geometry.L) for v in unit.volumes]
        self.layout = StateLayout(len(unit.volumes), n_cells, self.n_comp)
        self.n_w = self.layout.n_w
        self._downstream = {}
        for vi, vol in enumerate(unit.volumes):
            if vol.boundary.kind is BoundaryKind.COUPLED:
                up = vol.boundary.upstream
                if up >= vi:
                    raise ValueError("volumes must be listed in flow order")
                self._downstream[up] = vi
        self._outlet_volume = self._find_outlet_volume()
        self._build_sparsity()
        self.cond_ref = cond_ref
        self.w_scale, self.f_scale = self._build_scales(cond_ref)

    # -- structure ---------------------------------------------------------

    def _find_outlet_volume(self):
        outs = [i for i, v in enumerate(self.unit.volumes)
                if getattr(v.boundary, "has_outlet", True) and i not in self._downstream]
        if len(outs) != 1:
            raise ValueError("unit must have exactly one outlet volume")
        return outs[0]

    def _coupled_other(self, vi):
        cpl = self.unit.coupling
        if cpl is None or vi not in cpl.pair:
            return None
        i, j = cpl.pair
        return j if vi == i else i

    def _build_sparsity(self):
        n, nc = self.layout.n_cells, self.n_comp
        nv = self.layout.n_volumes
        slots = range(N_VAR_PER_CELL)
        self._dir_of_col = np.empty(self.n_w, dtype=np.int64)
        for v in range(nv):
            for k in range(n):
                base = v * 21 + (k % 3) * 7
                for s in slots:
                    self._dir_of_col[self.layout.var_index(v, k, s)] = base + s
        self.n_dirs = nv * 21
        rows, cols = [], []
        cell_ids = np.empty((nv, n, N_VAR_PER_CELL), dtype=np.int64)
        for v in range(nv):
            for k in range(n):
                cell_ids[v, k] = [self.layout.var_index(v, k, s) for s in slots]
        for v in range(nv):
            other = self._coupled_other(v)
            for k in range(n):
                nbrs = [(v, k)]
                if k > 0:
                    nbrs.append((v, k - 1))
                if k < n - 1:
                    nbrs.append((v, k + 1))
                if other is not None:
                    nbrs.append((other, n - 1 - k))
                r = cell_ids[v, k]
                for (vv, kk) in nbrs:
                    c = cell_ids[vv, kk]
                    rr, cc = np.meshgrid(r, c, indexing="ij")
                    rows.append(rr.ravel())
                    cols.append(cc.ravel())
        self._pat_rows = np.concatenate(rows)
        self._pat_cols = np.concatenate(cols)
        self._pat_dirs = self._dir_of_col[self._pat_cols]
        self._seed = np.zeros((self.n_dirs, self.n_w))
        self._seed[self._dir_of_col, np.arange(self.n_w)] = 1.0

    # -- evaluation ---------------------------------------------------------

    def residual(self, w, cond, t=0.0, frozen_upwind=None):
        """Semi-discrete residual F(w, cond); rows ordered like w.

        ``frozen_upwind`` optionally pins the per-volume upwind selector
        masks (as returned by :meth:`upwind_pattern`); Newton drivers use
        this within one iteration so the line search works on a locally
        smooth residual even when adjacent cell pressures nearly tie.
        """
        with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
            return self._residual(w, cond, t, frozen_upwind)

    def upwind_pattern(self, w, cond, t=0.0):
        """Per-volume interface selector masks at the current state."""
        parts = self.layout.unpack(np.asarray(d.value(w), dtype=float))
        pattern = []
        for vi in range(len(self.unit.volumes)):
            P = parts[vi][3]
            pattern.append(P[1:] <= P[:-1])
        return pattern

    def _residual(self, w, cond, t, frozen_upwind=None):
        parts = self.layout.unpack(w)
        unit, model = self.unit, self.model
        outlet_cache = {}
        Fx, Fy = [], []
        for vi, vol in enumerate(unit.volumes):
            c, u, T, P = parts[vi]
            grid = self.grids[vi]
            h = grid.h
            eps = vol.geometry.epsilon
            try:
                if vi in self._downstream:
                    dj = self._downstream[vi]
                    N_out, E_out = junction_outlet_fluxes(
                        vol, unit.volumes[dj], model, T[-1], P[-1], c[-1],
                        parts[dj][3][0], self.grids[dj].h)
                else:
                    N_out, E_out = outlet_fluxes(vol, model, T[-1], P[-1], c[-1],
                                                 cond.P_out, h)
                outlet_cache[vi] = (N_out, E_out)
                bc = vol.boundary
                if bc.kind is BoundaryKind.COUPLED:
                    up = bc.upstream
                    N_in, E_in = coupled_inlet_fluxes(vol, unit.volumes[up], *outlet_cache[up])
                else:
                    N_in, E_in = inlet_fluxes(vol, model, cond, P[0], h, t)

                # interior interfaces: upwind state, directly resolved gradients
                sel = (P[1:] <= P[:-1]) if frozen_upwind is None else frozen_upwind[vi]
                T_up = d.where(sel, T[:-1], T[1:])
                P_up = d.where(sel, P[:-1], P[1:])
                c_up = d.where(sel[:, None], c[:-1], c[1:])
                dPdz = interface_gradient(P[:-1], P[1:], h)
                dcdz = interface_gradient(c[:-1], c[1:], h)
                dTdz = interface_gradient(T[:-1], T[1:], h)
                v_face = velocity_from_pressure_gradient(vol.advection, dPdz,
                                                         fluid_density(c_up, model.M))
                N_adv = _col(v_face) * c_up
                N_diff = -vol.transport.D * dcdz
                N_face = N_adv + N_diff
                E_face = energy_flux_parts(model, T_up, P_up, c_up, N_adv, N_diff,
                                           dTdz, vol.transport.kappa, eps)

                N_all = d.concatenate([_row(N_in, self.n_comp), N_face,
                                       _row(N_out, self.n_comp)], axis=0)
                E_all = d.concatenate([_one(E_in), E_face, _one(E_out)], axis=0)

                R = production_rates(vol.kinetics, T, P, c) if vol.kinetics else 0.0
                other = self._coupled_other(vi)
                if other is not None:
                    T_oth = parts[other][2]
                    if unit.coupling.counter_current:
                        T_oth = T_oth[::-1]
                    Q = vol.geometry.a * unit.coupling.U_overall * (T_oth - T)
                else:
                    Q = 0.0

                Fc = -(N_all[1:] - N_all[:-1]) / h + R
                Fu = -(E_all[1:] - E_all[:-1]) / h + Q
                g1 = model.volume(T, P, c) - 1.0
                g2 = model.volume_energy_density(T, P, c, eps, vol.solid) - u
            except (ThermoError, FloatingPointError) as exc:
                raise ResidualEvalError(f"{unit.name}/{vol.name}: {exc}") from exc
            Fx.append(d.concatenate([Fc, _as_col(Fu)], axis=1).reshape(-1))
            Fy.append(d.concatenate([_as_col(g1), _as_col(g2)], axis=1).reshape(-1))
        F = d.concatenate(Fx + Fy, axis=0)
        bad = ~np.isfinite(d.value(F))
        if np.any(bad):
            raise ResidualEvalError(self._describe_rows(np.where(bad)[0][:4]))
        return F

    def _describe_rows(self, rows):
        nc = self.layout.n_comp
        names = [f"c[{i}]" for i in range(nc)] + ["u", "V-constraint", "U-constraint"]
        msgs = []
        for r in rows:
            if r < self.layout.n_x:
                v, rem = divmod(r, self.layout.nx_vol)
                cell, slot = divmod(rem, nc + 1)
            else:
                v, rem = divmod(r - self.layout.n_x, self.layout.ny_vol)
                cell, s2 = divmod(rem, 2)
                slot = nc + 1 + s2
            msgs.append(f"{self.unit.volumes[v].name} cell {cell} {names[slot]}")
        return "non-finite residual at: " + "; ".join(msgs)

    def jacobian(self, w, cond, t=0.0, frozen_upwind=None):
        """Sparse dF/dw via one dual-number residual evaluation."""
        wd = d.Dual(np.asarray(w, dtype=float), self._seed)
        F = self.residual(wd, cond, t, frozen_upwind)
        vals = F.der[self._pat_dirs, self._pat_rows]
        J = sp.coo_matrix((vals, (self._pat_rows, self._pat_cols)),
                          shape=(self.n_w, self.n_w))
        return J.tocsr()

    def dresidual_dparam(self, w, cond, name, frozen_upwind=None):
        """dF/dp for a scalar operating-condition field (dual seeded)."""
        cd = _CondView(cond, name)
        F = self.residual(np.asarray(w, dtype=float), cd, 0.0, frozen_upwind)
        return F.der[0]

    def mass_diagonal(self, mode=MassMatrixMode.FULL_DYNAMIC):
        return self.layout.mass_diagonal(mode)

    def project_constraints(self, w, cond=None, tol=1e-10, max_iter=20):
        """Solve the algebraic rows for (T, P) at fixed (c, u) per cell.

        Newton on the pointwise 2x2 systems (V(T,P,c) - 1, U(T,P,c) - u);
        used to restore consistency before dynamic integration when the
        starting state comes from a partially converged iterate.
        """
        del cond  # constraints do not involve the operating conditions
        w = np.asarray(w, dtype=float).copy()
        model = self.model
        for vi, vol in enumerate(self.unit.volumes):
            c, u, T, P = (np.array(a) for a in self.layout.unpack(w)[vi])
            n = T.size
            seeds = np.zeros((2, n, 2))
            seeds[0, :, 0] = 1.0
            seeds[1, :, 1] = 1.0
            ok = False
            for _ in range(max_iter):
                Td = d.Dual(T, seeds[:, :, 0])
                Pd = d.Dual(P, seeds[:, :, 1])
                g1 = model.volume(Td, Pd, c) - 1.0
                g2 = model.volume_energy_density(Td, Pd, c, vol.geometry.epsilon,
                                                 vol.solid) - u
                r = np.stack([g1.val, g2.val], axis=1)
                if np.max(np.abs(r[:, 0])) < tol and np.max(np.abs(r[:, 1])) < tol * np.maximum(np.abs(u), 1.0).max():
                    ok = True
                    break
                Jcell = np.empty((n, 2, 2))
                Jcell[:, 0, 0] = g1.der[0]
                Jcell[:, 0, 1] = g1.der[1]
                Jcell[:, 1, 0] = g2.der[0]
                Jcell[:, 1, 1] = g2.der[1]
                step = np.linalg.solve(Jcell, r[:, :, None])[:, :, 0]
                T = np.maximum(T - np.clip(step[:, 0], -100.0, 100.0), 150.0)
                P = np.maximum(P - np.clip(step[:, 1], -2e6, 2e6), 1e3)
            if not ok:
                raise ResidualEvalError(
                    f"{self.unit.volumes[vi].name}: constraint projection failed")
            fields = [list(f) for f in self.layout.unpack(w)]
            fields[vi] = (c, u, T, P)
            w = self.layout.pack([tuple(f) for f in fields])
        return w

    # -- initial guess and scales -------------------------------------------

    def initial_guess(self, cond, dp_fractions=None, T_profile=None):
        """Constant-temperature, linear-pressure, constraint-consistent start.

        By default the overall pressure drop is distributed over the flow
        path in proportion to volume lengths (``dp_fractions`` overrides
        the per-volume shares); concentrations scale the feed mole
        fractions onto the volume constraint, and u is evaluated from the
        energy constraint, so g(x0, y0) = 0 holds by construction.
        ``T_profile`` optionally replaces the constant feed temperature
        per volume (used to aim for ignited branches).
        """
        unit, model = self.unit, self.model
        x = cond.x
        L_tot = sum(v.geometry.L for v in unit.volumes)
        if dp_fractions is None:
            dp_fractions = [v.geometry.L / L_tot for v in unit.volumes]
        dP = cond.P_in - cond.P_out
        fields = []
        P_start = cond.P_in
        for vi, vol in enumerate(unit.volumes):
            grid = self.grids[vi]
            h, L = grid.h, vol.geometry.L
            P_end = P_start - dP * dp_fractions[vi]
            P = P_start + (P_end - P_start) * grid.midpoints / L
            T = np.full(grid.n_cells, float(cond.T_in if T_profile is None else T_profile[vi]))
            c = np.asarray(x)[None, :] / d.value(
                model.volume(T, P, np.broadcast_to(x, (grid.n_cells, len(x)))))[:, None]
            u = d.value(model.volume_energy_density(T, P, c, vol.geometry.epsilon, vol.solid))
            fields.append((c, u, T, P))
            P_start = P_end
        return self.layout.pack(fields)

    def balanced_dp_fractions(self, cond, n_grid=400):
        """Pressure-drop shares that equalize feed-state molar flow across
        the flow path (a much better multi-volume starting point than the
        proportional split when flow resistances differ strongly)."""
        if len(self.unit.volumes) == 1:
            return [1.0]
        model = self.model
        c_in = d.value(feed_concentration(model, cond.x, cond.T_in, cond.P_in))
        rho = float(fluid_density(c_in, model.M))
        ctot = float(np.sum(c_in))
        dP = cond.P_in - cond.P_out

        def flow(vol, share):
            g = max(share, 1e-12) * dP / vol.geometry.L
            v = float(d.value(velocity_from_pressure_gradient(vol.advection, -g, rho)))
            return v * ctot * vol.geometry.S_fluid

        # pick the common flow so the shares sum to 1 (monotone, bisection)
        lo, hi = 0.0, min(flow(v, 1.0) for v in self.unit.volumes)
        for _ in range(80):
            q = 0.5 * (lo + hi)
            total = 0.0
            for vol in self.unit.volumes:
                s_lo, s_hi = 0.0, 1.0
                for _ in range(60):
                    s = 0.5 * (s_lo + s_hi)
                    if flow(vol, s) < q:
                        s_lo = s
                    else:
                        s_hi = s
                total += 0.5 * (s_lo + s_hi)
            if total > 1.0:
                hi = q
            else:
                lo = q
        q = 0.5 * (lo + hi)
        shares = []
        for vol in self.unit.volumes:
            s_lo, s_hi = 0.0, 1.0
            for _ in range(60):
                s = 0.5 * (s_lo + s_hi)
                if flow(vol, s) < q:
                    s_lo = s
                else:
                    s_hi = s
            shares.append(0.5 * (s_lo + s_hi))
        total = sum(shares)
        return [s / total for s in shares]

    def _build_scales(self, cond):
        model = self.model
        x = cond.x
        c_in = d.value(feed_concentration(model, x, cond.T_in, cond.P_in))
        c_ref = float(np.sum(c_in))
        h_char = abs(float(d.value(model.enthalpy(cond.T_in, cond.P_in, c_in)))) + cond.P_in
        g_char = max((cond.P_in - cond.P_out) / sum(v.geometry.L for v in self.unit.volumes), 1e3)
        w0 = self.initial_guess(cond)
        parts = self.layout.unpack(w0)
        w_scale = np.empty(self.n_w)
        f_scale = np.empty(self.n_w)
        nc = self.n_comp
        for vi, vol in enumerate(self.unit.volumes):
            rho_in = float(fluid_density(c_in, model.M))
            v_char = abs(float(d.value(velocity_from_pressure_gradient(
                vol.advection, -g_char, rho_in))))
            v_char = max(v_char, 1e-4)
            u_char = max(float(np.max(np.abs(parts[vi][1]))), cond.P_in)
            h = self.grids[vi].h
            ox, oy = self.layout.x_offset(vi), self.layout.y_offset(vi)
            wx = w_scale[ox:ox + self.layout.nx_vol].reshape(-1, nc + 1)
            wx[:, :nc] = c_ref
            wx[:, nc] = u_char
            wy = w_scale[oy:oy + self.layout.ny_vol].reshape(-1, 2)
            wy[:, 0] = 100.0   # temperature scale [K]
            wy[:, 1] = 1e5     # pressure scale [Pa]
            fx = f_scale[ox:ox + self.layout.nx_vol].reshape(-1, nc + 1)
            fx[:, :nc] = c_ref * v_char / h
            fx[:, nc] = h_char * v_char / h
            fy = f_scale[oy:oy + self.layout.ny_vol].reshape(-1, 2)
            fy[:, 0] = 1.0       # V(T,P,c) - 1 is already dimensionless
            fy[:, 1] = u_char
        return w_scale, f_scale

    # -- derived outputs ------------------------------------------------------

    def outputs(self, w, cond):
        """Profiles and unit-level quantities (conversion, report temperatures)."""
        parts = self.layout.unpack(np.asarray(w, dtype=float))
        unit, model = self.unit, self.model
        feed_vi = unit.feed_volume()
        out_vi = self._outlet_volume
        profiles = []
        for vi, vol in enumerate(unit.volumes):
            c, u, T, P = parts[vi]
            grid = self.grids[vi]
            if vi in self._downstream:
                dj = self._downstream[vi]
                N_out, _ = junction_outlet_fluxes(vol, unit.volumes[dj], model,
                                                  T[-1], P[-1], c[-1],
                                                  parts[dj][3][0], self.grids[dj].h)
            else:
                N_out, _ = outlet_fluxes(vol, model, T[-1], P[-1], c[-1],
                                         cond.P_out, grid.h)
            dPdz = (P[1:] - P[:-1]) / grid.h
            sel = (P[1:] <= P[:-1])
            c_up = np.where(sel[:, None], c[:-1], c[1:])
            v_int = velocity_from_pressure_gradient(vol.advection, dPdz,
                                                    fluid_density(c_up, model.M))
            ctot_last = float(np.sum(c[-1]))
            v_out = float(np.sum(np.asarray(N_out))) / ctot_last
            profiles.append({
                "name": vol.name, "z": grid.midpoints, "c": c, "u": u, "T": T, "P": P,
                "v": np.concatenate([v_int, [v_out]]),
                "N_out": np.asarray(N_out), "S_fluid": vol.geometry.S_fluid,
            })
        feed_vol = unit.volumes[feed_vi]
        N_in, _ = inlet_fluxes(feed_vol, model, cond, parts[feed_vi][3][0],
                               self.grids[feed_vi].h)
        f_in = np.asarray(N_in) * feed_vol.geometry.S_fluid
        f_out = profiles[out_vi]["N_out"] * profiles[out_vi]["S_fluid"]
        X_out = 1.0 - f_out[1] / f_in[1]
        res = {
            "X_out": float(X_out),
            "T_out": float(parts[out_vi][2][-1]),
            "feed_flow": f_in,
            "outlet_flow": f_out,
            "profiles": profiles,
        }
        if len(unit.volumes) > 1:
            res["T_top"] = float(parts[feed_vi][2][-1])
        return res


class _CondView:
    """Conditions proxy with one scalar field replaced by a seeded dual."""

    def __init__(self, cond, name):
        self._cond = cond
        self._name = name
        if name == "x_in" or not hasattr(cond, name):
            raise KeyError(f"unknown continuation parameter {name!r}")
        self._dual = d.Dual(float(getattr(cond, name)), np.ones(1))

    def __getattr__(self, item):
        if item == self._name:
            return self._dual
        return getattr(self._cond, item)


def _col(v):
    if isinstance(v, d.Dual):
        return d.Dual(v.val[..., None], v.der[..., None])
    return np.asarray(v, dtype=float)[..., None]


def _as_col(v):
    if isinstance(v, d.Dual):
        return v.reshape(v.shape[0], 1)
    return np.asarray(v, dtype=float).reshape(-1, 1)


def _row(v, nc):
    if isinstance(v, d.Dual):
        return v.reshape(1, nc)
    return np.asarray(v, dtype=float).reshape(1, nc)


def _one(v):
    if isinstance(v, d.Dual):
        return v.reshape(1)
    return np.atleast_1d(np.asarray(v, dtype=float))
