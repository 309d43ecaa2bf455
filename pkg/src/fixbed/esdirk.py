"""Adaptive stiffly accurate ESDIRK integration of the mass-matrix DAE.

    M dw/dt = F(w, p(t)),   M = diag(0/1)

Four stages, explicit first stage, constant diagonal gamma, third order
with an embedded second-order error estimator whose stiff limit vanishes.
The last stage equals the step solution (stiffly accurate), which is what
makes the index-1 algebraic rows exact at every accepted step.  Stages are
solved by modified Newton; the Jacobian is reused across stages and steps
and only refreshed on poor convergence, while M - h*gamma*J is
refactorized whenever the step size changes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

GAMMA = 0.43586652150845895


@dataclass(frozen=True)
class TableauSpec:
    """Butcher tableau; stiffly accurate (b equals the last row of a)."""

    a: np.ndarray
    b: np.ndarray
    b_hat: np.ndarray
    c: np.ndarray
    order: int
    embedded_order: int

    def __post_init__(self):
        a, b = np.asarray(self.a), np.asarray(self.b)
        s = a.shape[0]
        if a[0, 0] != 0.0:
            raise ValueError("first stage must be explicit")
        if np.any(np.triu(a, 1) != 0.0):
            raise ValueError("tableau must be lower triangular")
        if not np.allclose(np.diag(a)[1:], a[1, 1]):
            raise ValueError("diagonal must be constant from stage 2")
        if not np.allclose(b, a[s - 1]):
            raise ValueError("tableau must be stiffly accurate (b = last row)")

    @property
    def n_stages(self):
        return self.a.shape[0]

    @property
    def gamma(self):
        return float(self.a[1, 1])


def esdirk32() -> TableauSpec:
    """4-stage, order 3(2), L-stable, stiffly accurate, gamma ~ 0.4359."""
    g = GAMMA
    a = np.array([
        [0.0, 0.0, 0.0, 0.0],
        [g, g, 0.0, 0.0],
        [0.2576482460664272, -0.09351476757488618, g, 0.0],
        [0.1876410243467237, -0.5952974735769552, 0.9717899277217725, g],
    ])
    b_hat = np.array([0.07855335342446884, -1.0386451029890553,
                      1.386676233303293, 0.5734155162612935])
    c = np.array([0.0, 2.0 * g, 0.6, 1.0])
    return TableauSpec(a=a, b=a[-1].copy(), b_hat=b_hat, c=c, order=3, embedded_order=2)


class IntegrationError(RuntimeError):
    pass


@dataclass
class TimeSeries:
    t: np.ndarray        # accepted step times
    W: np.ndarray        # states at accepted steps, (len(t), n)
    stats: dict = field(default_factory=dict)

    def sample(self, t_query):
        """Linear interpolation onto query times (within the computed span)."""
        t_query = np.asarray(t_query, dtype=float)
        out = np.empty((t_query.size, self.W.shape[1]))
        for j in range(self.W.shape[1]):
            out[:, j] = np.interp(t_query, self.t, self.W[:, j])
        return out


@dataclass(frozen=True)
class EsdirkOptions:
    rtol: float = 1e-5
    atol: float = 1e-5           # applied per variable relative to w_scale
    h0: float | None = None
    h_min: float = 1e-10
    h_max: float = np.inf
    max_steps: int = 200_000
    newton_tol: float = 0.03     # on the scaled stage increment
    newton_max_iter: int = 8
    safety: float = 0.9
    jac_stale_steps: int = 50    # refresh the Jacobian at least this often


def esdirk_integrate(residual, jacobian, mass_diag, w0, p_of_t, t_span,
                     opts: EsdirkOptions = EsdirkOptions(), w_scale=None,
                     f_scale=None, tableau: TableauSpec | None = None) -> TimeSeries:
    """Integrate M dw/dt = F(w, p(t)) from a consistent initial state.

    residual(w, p) and jacobian(w, p) evaluate the semi-discrete system at
    the parameter object returned by ``p_of_t``.  Consistency of w0 on the
    algebraic rows is verified up front.  The embedded error is measured on
    the differential (M-selected) rows only, under mixed absolute/relative
    weights, with PI step-size control.
    """
    tab = esdirk32() if tableau is None else tableau
    t0, t_end = float(t_span[0]), float(t_span[1])
    w = np.asarray(w0, dtype=float).copy()
    n = w.size
    mdiag = np.asarray(mass_diag, dtype=float)
    diff_rows = mdiag != 0.0
    ws = np.ones(n) if w_scale is None else np.asarray(w_scale, dtype=float)
    fs = np.ones(n) if f_scale is None else np.asarray(f_scale, dtype=float)
    M = sp.diags(mdiag).tocsr()
    g = tab.gamma

    F0 = np.asarray(residual(w, p_of_t(t0)), dtype=float)
    if np.any(~diff_rows):
        alg_res = np.max(np.abs(F0[~diff_rows] / fs[~diff_rows]))
        if alg_res > max(opts.atol, opts.rtol):
            raise IntegrationError(
                f"initial state violates the algebraic constraints (residual {alg_res:.2e})")

    def weights(wref):
        return opts.atol * ws + opts.rtol * np.abs(wref)

    def norm_diff(v, wref):
        if not np.any(diff_rows):
            return 0.0
        return float(np.sqrt(np.mean((v[diff_rows] / weights(wref)[diff_rows]) ** 2)))

    def norm_all(v, wref):
        return float(np.sqrt(np.mean((v / weights(wref)) ** 2)))

    stats = {"steps": 0, "rejected": 0, "jac_evals": 0, "lu_factorizations": 0,
             "newton_iters": 0, "residual_evals": 1}

    state = {"J": None, "lu": None, "lu_h": None, "age": 0}

    def ensure_factorization(h, want_fresh_jac, wref, pref):
        if want_fresh_jac or state["J"] is None or state["age"] >= opts.jac_stale_steps:
            state["J"] = sp.csr_matrix(jacobian(wref, pref))
            stats["jac_evals"] += 1
            state["age"] = 0
            state["lu"] = None
        if state["lu"] is None or state["lu_h"] != h:
            state["lu"] = spla.splu((M - h * g * state["J"]).tocsc())
            state["lu_h"] = h
            stats["lu_factorizations"] += 1

    span = t_end - t0
    h_min = max(opts.h_min, 1e-14 * span)
    h = opts.h0
    if h is None:
        wdot = np.where(diff_rows, F0, 0.0)
        h = min(0.01 / max(norm_diff(wdot, w), 1e-12), span / 10.0)
        # strongly stiff starts can make the heuristic absurdly small; the
        # controller will shrink the step again if it is actually needed
        h = max(h, 1e-8 * span, 2.0 * h_min)
    h = float(min(h, opts.h_max, span))

    t = t0
    ts, Ws = [t0], [w.copy()]
    err_prev = 1.0
    want_fresh_jac = False

    while t < t_end - 1e-12 * max(1.0, abs(t_end)):
        if stats["steps"] + stats["rejected"] > opts.max_steps:
            raise IntegrationError(f"step budget exhausted at t = {t:.6g}")
        h = min(h, t_end - t)
        if h < h_min:
            raise IntegrationError(f"step size underflow at t = {t:.6g}")
        ensure_factorization(h, want_fresh_jac, w, p_of_t(t))
        want_fresh_jac = False

        Fs = np.empty((tab.n_stages, n))
        Fs[0] = residual(w, p_of_t(t))
        stats["residual_evals"] += 1
        Mw = mdiag * w
        failed = False
        W_stage = w
        slow = 0
        for i in range(1, tab.n_stages):
            rhs_known = Mw + h * (tab.a[i, :i] @ Fs[:i])
            p_i = p_of_t(t + tab.c[i] * h)
            W_stage, iters, ok = _solve_stage(residual, state["lu"], mdiag, rhs_known,
                                              h * g, W_stage, p_i, w, opts, norm_all, stats)
            if not ok and state["age"] > 0:
                ensure_factorization(h, True, w, p_of_t(t))
                W_stage, iters, ok = _solve_stage(residual, state["lu"], mdiag, rhs_known,
                                                  h * g, w, p_i, w, opts, norm_all, stats)
            if not ok:
                failed = True
                break
            slow = max(slow, iters)
            Fs[i] = residual(W_stage, p_i)
            stats["residual_evals"] += 1
        if failed:
            stats["rejected"] += 1
            want_fresh_jac = True
            h *= 0.25
            continue

        w_new = W_stage  # stiffly accurate: last stage is the step solution
        err_vec = h * ((tab.b - tab.b_hat) @ Fs)
        err_vec[~diff_rows] = 0.0
        err = norm_diff(err_vec, np.maximum(np.abs(w), np.abs(w_new)))
        if not np.isfinite(err):
            stats["rejected"] += 1
            want_fresh_jac = True
            h *= 0.25
            continue
        if err <= 1.0:
            t += h
            w = w_new
            ts.append(t)
            Ws.append(w.copy())
            stats["steps"] += 1
            state["age"] += 1
            if slow >= opts.newton_max_iter - 2:
                want_fresh_jac = True
            err = max(err, 1e-10)
            fac = opts.safety * err ** (-0.7 / 3.0) * err_prev ** (0.4 / 3.0)
            err_prev = err
            h = float(min(h * min(max(fac, 0.2), 4.0), opts.h_max))
        else:
            stats["rejected"] += 1
            fac = opts.safety * err ** (-1.0 / 3.0)
            h *= min(max(fac, 0.1), 0.9)
    return TimeSeries(np.array(ts), np.array(Ws), stats)


def _solve_stage(residual, lu, mdiag, rhs_known, hg, W_guess, p_i, wref, opts,
                 norm_all, stats):
    """Modified Newton on M W - rhs_known - h g F(W) = 0."""
    W = np.asarray(W_guess, dtype=float).copy()
    rate, dn_prev = None, None
    for it in range(opts.newton_max_iter):
        try:
            Fw = np.asarray(residual(W, p_i), dtype=float)
        except Exception:
            return W, it + 1, False
        stats["residual_evals"] += 1
        G = mdiag * W - rhs_known - hg * Fw
        if not np.all(np.isfinite(G)):
            return W, it + 1, False
        dW = -lu.solve(G)
        if not np.all(np.isfinite(dW)):
            return W, it + 1, False
        W = W + dW
        stats["newton_iters"] += 1
        dn = norm_all(dW, wref)
        if dn_prev is not None:
            rate = dn / max(dn_prev, 1e-300)
            if rate > 2.0:
                return W, it + 1, False
        dn_prev = dn
        bound = dn * (rate / (1.0 - rate)) if (rate is not None and rate < 1.0) else dn
        if bound < opts.newton_tol:
            return W, it + 1, True
    return W, opts.newton_max_iter, False
