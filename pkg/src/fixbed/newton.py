"""Globalized Newton for sparse nonlinear systems."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class NewtonError(RuntimeError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class NewtonOptions:
    tol: float = 1e-4          # scaled residual infinity-norm
    max_iter: int = 40
    armijo: float = 1e-4       # sufficient-decrease constant on ||F||^2
    step_min: float = 1.0 / 1024.0

    def __post_init__(self):
        if self.tol <= 0 or not 0 < self.armijo < 0.5 or not 0 < self.step_min < 1:
            raise ValueError("invalid Newton options")


@dataclass
class NewtonResult:
    w: np.ndarray
    converged: bool
    iterations: int
    residual_norm: float
    log: list = field(default_factory=list)


def _factorize(J):
    if not sp.issparse(J):
        J = sp.csc_matrix(np.atleast_2d(J))
    return spla.splu(J.tocsc())


def newton_solve(residual, jacobian, w0, opts: NewtonOptions = NewtonOptions(),
                 f_scale=None) -> NewtonResult:
    """Solve F(w) = 0 by damped Newton with a backtracking Armijo line search.

    Each iteration solves the sparse linear system by direct LU
    factorization and halves the step until ||F||^2 decreases sufficiently
    or the step fraction hits step_min.  ``f_scale`` nondimensionalizes the
    residual for the convergence norm.
    """
    w = np.atleast_1d(np.asarray(w0, dtype=float)).copy()
    scale = np.ones_like(w) if f_scale is None else np.asarray(f_scale, dtype=float)

    def scaled(F):
        return np.asarray(F, dtype=float) / scale

    def try_residual(wt):
        try:
            r = scaled(residual(wt))
        except Exception:
            return None
        if not np.all(np.isfinite(r)):
            return None
        return r

    F = try_residual(w)
    if F is None:
        raise NewtonError("residual not evaluable at the initial guess")
    log = []
    for it in range(opts.max_iter):
        norm = float(np.max(np.abs(F)))
        log.append({"iter": it, "norm": norm, "alpha": None})
        if norm <= opts.tol:
            return NewtonResult(w, True, it, norm, log)
        try:
            lu = _factorize(jacobian(w))
            dw = -lu.solve(F * scale)
        except Exception as exc:
            raise NewtonError(f"factorization failed at iteration {it}: {exc}",
                              NewtonResult(w, False, it, norm, log)) from exc
        if not np.all(np.isfinite(dw)):
            raise NewtonError(f"singular factorization at iteration {it}",
                              NewtonResult(w, False, it, norm, log))
        phi0 = float(F @ F)
        alpha = 1.0
        while True:
            Ft = try_residual(w + alpha * dw)
            if Ft is not None and float(Ft @ Ft) <= (1.0 - 2.0 * opts.armijo * alpha) * phi0:
                break
            alpha *= 0.5
            if alpha < opts.step_min:
                raise NewtonError(
                    f"line search stalled at iteration {it}, residual {norm:.3e}",
                    NewtonResult(w, False, it, norm, log))
        w = w + alpha * dw
        F = Ft
        log[-1]["alpha"] = alpha
    norm = float(np.max(np.abs(F)))
    if norm <= opts.tol:
        return NewtonResult(w, True, opts.max_iter, norm, log)
    raise NewtonError(f"no convergence in {opts.max_iter} iterations, residual {norm:.3e}",
                      NewtonResult(w, False, opts.max_iter, norm, log))
