"""Pseudo-arclength continuation with secant tangents.

Traces the solution curve (w(s), p(s)) of F(w, p) = 0 through turning
points by augmenting the system with a scaled arclength condition

    (w - w_m)^T xi_w + (p - p_m) xi_p = ds,

where the tangent xi is the normalized secant between the two previous
points, measured in the scaled (w/w_scale, p/p_scale) metric.  The first
two points come from natural continuation; if that fails (e.g. seeding at
a fold), a null-space tangent of the augmented Jacobian bootstraps the
trace instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .newton import NewtonError, NewtonOptions, newton_solve


class ContinuationError(RuntimeError):
    pass


@dataclass(frozen=True)
class ContinuationOptions:
    ds0: float = 0.1
    ds_min: float = 1e-4
    ds_max: float = 1.0
    p_range: tuple = (0.0, 1.0)
    max_points: int = 2000
    grow: float = 1.3          # step growth after fast convergence
    grow_iters: int = 5        # "fast" means at most this many Newton iterations

    def __post_init__(self):
        if not 0 < self.ds_min <= self.ds0 <= self.ds_max:
            raise ValueError("need 0 < ds_min <= ds0 <= ds_max")
        if self.p_range[1] <= self.p_range[0]:
            raise ValueError("empty parameter range")


@dataclass
class Branch:
    """Traced branch: one row per accepted point."""

    W: np.ndarray                 # (m, n) states
    p: np.ndarray                 # (m,) parameter values
    turning: np.ndarray           # (m,) bool, sign change of dp/ds at this point
    stats: list = field(default_factory=list)

    @property
    def turning_indices(self):
        return np.where(self.turning)[0]


def plac_trace(residual, jacobian, dres_dp, w0, p0,
               opts: ContinuationOptions, newton_opts: NewtonOptions = NewtonOptions(),
               w_scale=None, p_scale=1.0, f_scale=None, callback=None) -> Branch:
    """Trace F(w, p) = 0 from a converged seed across opts.p_range.

    residual(w, p), jacobian(w, p) -> sparse, dres_dp(w, p) -> vector.
    The trace stops when p exits p_range or max_points is reached; the
    arclength step halves on Newton failure and grows by ``opts.grow``
    after fast convergence.
    """
    w0 = np.atleast_1d(np.asarray(w0, dtype=float))
    n = w0.size
    ws = np.ones(n) if w_scale is None else np.asarray(w_scale, dtype=float)
    fs = np.ones(n) if f_scale is None else np.asarray(f_scale, dtype=float)

    seed = newton_solve(lambda w: residual(w, p0), lambda w: jacobian(w, p0),
                        w0, newton_opts, fs)
    if not seed.converged:
        raise ContinuationError("seed did not converge")
    points = [(seed.w, float(p0))]
    stats = [{"newton_iters": seed.iterations}]

    tangent = _bootstrap_tangent(residual, jacobian, dres_dp, seed.w, p0,
                                 opts, newton_opts, ws, p_scale, fs, points, stats)

    ds = opts.ds0
    while len(points) < opts.max_points:
        w_m, p_m = points[-1]
        if not (opts.p_range[0] <= p_m <= opts.p_range[1]):
            break
        sol = None
        while True:
            try:
                sol = _corrector(residual, jacobian, dres_dp, w_m, p_m, tangent, ds,
                                 newton_opts, ws, p_scale, fs)
                break
            except NewtonError:
                ds *= 0.5
                if ds < opts.ds_min:
                    raise ContinuationError(
                        f"step size underflow at p = {p_m:.6g} after {len(points)} points")
        w_new, p_new, iters = sol
        points.append((w_new, p_new))
        stats.append({"newton_iters": iters, "ds": ds})
        if callback is not None:
            callback(w_new, p_new)
        secant = np.concatenate([(w_new - w_m) / ws, [(p_new - p_m) / p_scale]])
        tangent = secant / np.linalg.norm(secant)
        if iters <= opts.grow_iters:
            ds = min(ds * opts.grow, opts.ds_max)

    W = np.array([w for w, _ in points])
    p = np.array([pp for _, pp in points])
    turning = np.zeros(p.size, dtype=bool)
    dp = np.diff(p)
    for i in range(1, dp.size):
        if dp[i] * dp[i - 1] < 0:
            turning[i] = True
    return Branch(W, p, turning, stats)


def _corrector(residual, jacobian, dres_dp, w_m, p_m, tangent, ds,
               newton_opts, ws, p_scale, fs):
    """Newton on the augmented system from the predictor point."""
    n = w_m.size
    xi_w, xi_p = tangent[:n], tangent[n]

    def res_aug(q):
        w, p = q[:n], q[n]
        arc = (w - w_m) / ws @ xi_w + (p - p_m) / p_scale * xi_p - ds
        return np.concatenate([residual(w, p), [arc]])

    def jac_aug(q):
        w, p = q[:n], q[n]
        J = sp.csr_matrix(jacobian(w, p))
        col = np.asarray(dres_dp(w, p), dtype=float).reshape(n, 1)
        border = np.concatenate([xi_w / ws, [xi_p / p_scale]])
        top = sp.hstack([J, sp.csr_matrix(col)])
        return sp.vstack([top, sp.csr_matrix(border)]).tocsc()

    q0 = np.concatenate([w_m + ds * ws * xi_w, [p_m + ds * p_scale * xi_p]])
    res = newton_solve(res_aug, jac_aug, q0, newton_opts, np.concatenate([fs, [1.0]]))
    return res.w[:n], float(res.w[n]), res.iterations


def _bootstrap_tangent(residual, jacobian, dres_dp, w0, p0, opts, newton_opts,
                       ws, p_scale, fs, points, stats):
    """Second point by natural continuation; null-space fallback at folds."""
    n = w0.size
    interior = 0.5 * (opts.p_range[0] + opts.p_range[1])
    inward = 1.0 if p0 <= interior else -1.0
    trials = [(inward, f) for f in (1.0, 0.25, 1.0 / 16.0)]
    trials += [(-inward, f) for f in (1.0, 0.25)]
    for sign, frac in trials:
        dp = sign * frac * opts.ds0 * p_scale
        p1 = p0 + dp
        try:
            res = newton_solve(lambda w: residual(w, p1), lambda w: jacobian(w, p1),
                               w0, newton_opts, fs)
        except NewtonError:
            continue
        points.append((res.w, float(p1)))
        stats.append({"newton_iters": res.iterations, "ds": abs(dp) / p_scale})
        secant = np.concatenate([(res.w - w0) / ws, [(p1 - p0) / p_scale]])
        return secant / np.linalg.norm(secant)
    # natural continuation failed in both directions: the seed sits at (or
    # near) a fold, so take the tangent from the augmented Jacobian null space
    J = sp.csr_matrix(jacobian(w0, p0))
    col = np.asarray(dres_dp(w0, p0), dtype=float).reshape(n, 1)
    top = sp.hstack([J, sp.csr_matrix(col)])
    borders = [np.concatenate([np.zeros(n), [1.0]])]
    borders += [np.eye(n + 1)[i] for i in range(min(n, 8))]
    for border in borders:
        Msys = sp.vstack([top, sp.csr_matrix(border)]).tocsc()
        try:
            lu = sp.linalg.splu(Msys)
            xi = lu.solve(np.concatenate([np.zeros(n), [1.0]]))
        except Exception:
            continue
        if not np.all(np.isfinite(xi)) or np.linalg.norm(xi) > 1e12:
            continue
        # xi is an unscaled direction; the arc condition lives in scaled coords
        xi_scaled = np.concatenate([xi[:n] / ws, [xi[n] / p_scale]])
        nt = np.linalg.norm(xi_scaled)
        if nt == 0:
            continue
        return xi_scaled / nt
    raise ContinuationError("could not bootstrap a continuation tangent")
